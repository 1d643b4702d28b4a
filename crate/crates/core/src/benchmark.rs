//! State-preparation benchmarking with reviving target states.
//!
//! A prepared state is modeled as the ideal reviving state with a random
//! reservoir admixture of strength `lambda`:
//! `|+S> (x) (|Psi_d> + lambda / sqrt(g^(L-1)) sum_n c_n |b_n>)`, with `c_n`
//! uniform on the unit circle and `|b_n>` running over the reservoir basis.
//! The preparation error is the overlap magnitude with the ideal state and
//! the revival discrepancy is `delta = 1 - <S^z(t*)>/S`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{overlap, EigenSystem, QuantumState, SpinProbe};
use crate::revival::RevivalConstruction;
use crate::rng;
use crate::stats::{self, LinearFit};

/// Ideal state plus a random unit-modulus admixture on the revival site's top block.
pub fn perturb_target<R: Rng + ?Sized>(
    construction: &RevivalConstruction,
    lambda: f64,
    rng: &mut R,
) -> Result<QuantumState> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("perturbation must be >= 0, got {lambda}")));
    }
    let spec = &construction.spec;
    let basis = spec.basis()?;
    let site = spec.revival_site();
    let top = basis.local_dim() - 1;
    let block = basis.stride(1) as f64;
    let amp = lambda / block.sqrt();

    let mut out = construction.state.clone();
    if lambda == 0.0 {
        return Ok(out);
    }
    for (p, z) in out.amplitudes_mut().iter_mut().enumerate() {
        if basis.level(p, site) == top {
            *z += rng::unit_phase(rng) * amp;
        }
    }
    out.normalized()
}

/// `|<ideal|experimental>|`.
pub fn preparation_error(ideal: &QuantumState, experimental: &QuantumState) -> Result<f64> {
    Ok(overlap(ideal, experimental)?.norm().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub mean_revival: f64,
    pub stderr_revival: f64,
    pub mean_preparation_error: f64,
    pub stderr_preparation_error: f64,
    pub n_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub seed: u64,
    pub t_star: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn mean_revivals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_revival).collect()
    }

    /// `delta = 1 - mean revival` per grid point.
    pub fn discrepancies(&self) -> Vec<f64> {
        self.points.iter().map(|p| 1.0 - p.mean_revival).collect()
    }

    pub fn preparation_errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_preparation_error).collect()
    }
}

/// For each `lambda` and realization: perturb, evolve to `t*`, record the
/// revival value and the preparation error. Realization `i` of grid point
/// `j` draws from `substream(base_seed, j, i)`, so the result does not depend
/// on how rayon schedules the tasks.
pub fn lambda_sweep(
    eig: &EigenSystem,
    construction: &RevivalConstruction,
    lambda_grid: &[f64],
    n_realizations: usize,
    base_seed: u64,
) -> Result<SweepResult> {
    if n_realizations == 0 {
        return Err(Error::invalid("need at least one realization"));
    }
    if lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("lambda grid must be strictly ascending"));
    }
    let probe = SpinProbe::new(&construction.spec)?;
    let site = construction.spec.revival_site();
    let t_star = construction.t_star;

    let tasks: Vec<(usize, usize)> = (0..lambda_grid.len())
        .flat_map(|j| (0..n_realizations).map(move |i| (j, i)))
        .collect();
    let samples: Vec<(f64, f64)> = tasks
        .par_iter()
        .map(|&(j, i)| {
            let mut r = rng::substream(base_seed, j as u64, i as u64);
            let prepared = perturb_target(construction, lambda_grid[j], &mut r)?;
            let e = preparation_error(&construction.state, &prepared)?;
            let value = probe.sz(&eig.evolve(&prepared, t_star)?, site)?;
            Ok((value, e))
        })
        .collect::<Result<_>>()?;

    let points = lambda_grid
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let chunk = &samples[j * n_realizations..(j + 1) * n_realizations];
            let values: Vec<f64> = chunk.iter().map(|s| s.0).collect();
            let errors: Vec<f64> = chunk.iter().map(|s| s.1).collect();
            let (mean_revival, stderr_revival) = stats::mean_stderr(&values);
            let (mean_preparation_error, stderr_preparation_error) = stats::mean_stderr(&errors);
            SweepPoint {
                lambda,
                mean_revival,
                stderr_revival,
                mean_preparation_error,
                stderr_preparation_error,
                n_realizations,
            }
        })
        .collect();
    Ok(SweepResult {
        seed: base_seed,
        t_star,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRelation {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Half-open range `[start, end)` of grid indices used by the fit.
    pub region: (usize, usize),
}

const MIN_WINDOW: usize = 4;

/// Linear fit of the preparation error against `delta` on the contiguous
/// window (at least four points) with the best `r^2`.
pub fn fit_error_relation(sweep: &SweepResult) -> Result<ErrorRelation> {
    let (start, end, fit) = stats::best_linear_window(&sweep.discrepancies(), &sweep.preparation_errors(), MIN_WINDOW)?;
    Ok(ErrorRelation {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        region: (start, end),
    })
}

/// Fit of the preparation error against `delta` over a given window.
pub fn fit_error_relation_on(sweep: &SweepResult, region: (usize, usize)) -> Result<ErrorRelation> {
    let (start, end) = region;
    if end > sweep.points.len() || end < start + 2 {
        return Err(Error::Fit(format!("invalid region {start}..{end}")));
    }
    let LinearFit {
        slope,
        intercept,
        r_squared,
    } = stats::linear_fit(
        &sweep.discrepancies()[start..end],
        &sweep.preparation_errors()[start..end],
    )?;
    Ok(ErrorRelation {
        slope,
        intercept,
        r_squared,
        region,
    })
}

/// Window of at least four grid points where the mean revival is most linear in `lambda`.
pub fn linear_revival_region(sweep: &SweepResult) -> Result<(usize, usize, LinearFit)> {
    stats::best_linear_window(&sweep.lambdas(), &sweep.mean_revivals(), MIN_WINDOW)
}

/// Overlap magnitude is blind to global phases.
pub fn phase_invariant(ideal: &QuantumState, other: &QuantumState, phase: f64) -> Result<bool> {
    let rotated = other.scaled(Complex64::from_polar(1.0, phase));
    Ok((preparation_error(ideal, other)? - preparation_error(ideal, &rotated)?).abs() < 1e-12)
}
