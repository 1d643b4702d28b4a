//! Engineered revivals of the site-1 magnetization.
//!
//! The initial state is supported on the "top block" (site 1 at level `g-1`,
//! i.e. `S^z_1 = +S`), so `<S^z_1(0)>/S = 1`. Its reservoir amplitudes `A`
//! are chosen so that at `t*` every amplitude of `U(t*) A` on the "down
//! block" (site 1 at level 0) vanishes except one designated entry, which is
//! fixed to the drive value `d`. That is a square linear system
//! `M A = d e_row`, with `M` the down-rows / top-columns block of `U(t*)`.
//!
//! For spin 1/2 the evolved weight splits into the top block, `xi`, and the
//! single designated amplitude, so the revival is `(xi - 1)/(xi + 1)`. For
//! higher spins the intermediate blocks are left unconstrained and the
//! revival tends to `1/(2S)`.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{linear_combination, overlap, EigenSystem, QuantumState, SpinProbe};
use crate::linalg::{self, CMat};
use crate::model::{BasisIndex, ChainSpec};

/// Solves with a larger condition estimate are rejected as degenerate.
pub const MAX_CONDITION: f64 = 1e12;

/// Above this dephasing overlap `t*` is considered too short.
pub const SHORT_TIME_OVERLAP: f64 = 0.1;

/// The block of `U(t*)` constraining the reservoir amplitudes.
#[derive(Debug, Clone)]
pub struct RevivalSystem {
    /// Rows: down-block positions; columns: top-block positions.
    pub matrix: CMat,
    /// Row of the designated index inside the down block (0-based).
    pub rhs_row: usize,
    /// Global position of the designated index.
    pub designated_position: usize,
    /// Global positions of the top block (columns of `matrix`).
    pub top_positions: Vec<usize>,
    /// Global positions of the down block (rows of `matrix`).
    pub down_positions: Vec<usize>,
}

/// Assembles the site-1 revival system at `t_star`, designating the given row
/// of the down block (row 0 is the state with every other site at level `g-1`).
pub fn revival_system(
    eig: &EigenSystem,
    t_star: f64,
    spec: &ChainSpec,
    designated_row: usize,
) -> Result<RevivalSystem> {
    let basis = spec.basis()?;
    if eig.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: eig.dim(),
        });
    }
    let g = basis.local_dim();
    let block = basis.stride(1);
    if designated_row >= block {
        return Err(Error::OutOfRange {
            what: "designated row",
            value: designated_row as i64,
            min: 0,
            max: block as i64 - 1,
        });
    }
    let top_positions: Vec<usize> = (0..block).collect();
    let down_positions: Vec<usize> = ((g - 1) * block..g * block).collect();
    let matrix = eig.propagator_block(t_star, &down_positions, &top_positions);
    Ok(RevivalSystem {
        matrix,
        rhs_row: designated_row,
        designated_position: down_positions[designated_row],
        top_positions,
        down_positions,
    })
}

#[derive(Debug, Clone)]
pub struct ReservoirSolution {
    pub amplitudes: Vec<Complex64>,
    /// `||M A - d e|| / ||d e||`.
    pub residual: f64,
    /// `max(sigma_max, 1) / sigma_min` of `M`.
    pub condition_estimate: f64,
}

/// Solves `M A = d e_rhs_row` by LU with partial pivoting plus one step of
/// iterative refinement.
pub fn solve_reservoir(matrix: &CMat, rhs_row: usize, d: Complex64) -> Result<ReservoirSolution> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: matrix.ncols(),
        });
    }
    if rhs_row >= n {
        return Err(Error::OutOfRange {
            what: "rhs row",
            value: rhs_row as i64,
            min: 0,
            max: n as i64 - 1,
        });
    }
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroDrive);
    }
    if !d.re.is_finite() || !d.im.is_finite() {
        return Err(Error::invalid("drive amplitude must be finite"));
    }

    let sigma = matrix.singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    // blocks of a unitary have norm <= 1, so a numerically zero block must
    // not pass as well conditioned
    let (smax, smin) = (sigma[0].max(1.0), sigma[n - 1]);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Degenerate { condition });
    }

    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs[rhs_row] = d;
    let lu = matrix.partial_piv_lu();
    let mut x = Mat::from_fn(n, 1, |i, _| rhs[i]);
    lu.solve_in_place(x.as_mut());

    let residual_of = |x: &CMat| -> Vec<Complex64> {
        let mx = matrix * x;
        (0..n).map(|i| rhs[i] - mx[(i, 0)]).collect()
    };
    let mut r = Mat::from_fn(n, 1, |i, _| residual_of(&x)[i]);
    lu.solve_in_place(r.as_mut());
    x += &r;

    let final_residual = residual_of(&x);
    let residual = linalg::norm2(&final_residual) / d.norm();
    Ok(ReservoirSolution {
        amplitudes: (0..n).map(|i| x[(i, 0)]).collect(),
        residual,
        condition_estimate: condition,
    })
}

/// Knobs for [`build_revival_with`].
#[derive(Debug, Clone, Copy)]
pub struct RevivalOptions {
    /// Row of the down block that carries the drive amplitude.
    pub designated_row: usize,
    /// Drive amplitude `d`; any nonzero value gives the same state up to scale.
    pub drive: Complex64,
}

impl Default for RevivalOptions {
    fn default() -> Self {
        RevivalOptions {
            designated_row: 0,
            drive: Complex64::new(1.0, 0.0),
        }
    }
}

/// A reviving initial state together with its construction diagnostics.
#[derive(Debug, Clone)]
pub struct RevivalConstruction {
    pub spec: ChainSpec,
    pub t_star: f64,
    /// Normalized initial state, already relabeled to the revival site.
    pub state: QuantumState,
    /// Unnormalized reservoir amplitudes `A` (site-1 frame) solved with the configured drive.
    pub reservoir_amplitudes: Vec<Complex64>,
    pub designated_index: BasisIndex,
    /// Top-block weight of `U(t*) Psi_in` per unit `|d|^2`.
    pub xi: f64,
    pub residual: f64,
    pub condition_estimate: f64,
    /// `max |(U(t*) Psi_in)_down - d e_designated|` before normalization.
    pub block_error: f64,
    /// `|<Psi_in|Psi_in(t*)>|` for the normalized state.
    pub overlap_at_tstar: f64,
    /// Norm of the normalized evolved state outside the top block.
    pub leaked_norm: f64,
    /// Revival value implied by the block weights at `t*`.
    pub predicted_value: f64,
}

impl RevivalConstruction {
    pub fn short_time_warning(&self) -> bool {
        self.overlap_at_tstar > SHORT_TIME_OVERLAP
    }

    /// The unnormalized state in the site-1 frame: `(A, 0, ..., 0)`.
    pub fn unnormalized_site1_state(&self) -> Result<QuantumState> {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.spec.dim()?];
        amps[..self.reservoir_amplitudes.len()].copy_from_slice(&self.reservoir_amplitudes);
        Ok(QuantumState::new(amps))
    }
}

/// Builds the revival for `spec.revival_site()` at `t_star` with the default options.
pub fn build_revival(eig: &EigenSystem, t_star: f64, spec: &ChainSpec) -> Result<RevivalConstruction> {
    build_revival_with(eig, t_star, spec, &RevivalOptions::default())
}

pub fn build_revival_with(
    eig: &EigenSystem,
    t_star: f64,
    spec: &ChainSpec,
    options: &RevivalOptions,
) -> Result<RevivalConstruction> {
    if !(t_star > 0.0 && t_star.is_finite()) {
        return Err(Error::invalid(format!("t_star must be positive, got {t_star}")));
    }
    let basis = spec.basis()?;
    let system = revival_system(eig, t_star, spec, options.designated_row)?;
    let solution = solve_reservoir(&system.matrix, system.rhs_row, options.drive)?;

    let dim = basis.dim();
    let block = system.top_positions.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[..block].copy_from_slice(&solution.amplitudes);
    let raw = QuantumState::new(amps);
    let evolved = eig.evolve(&raw, t_star)?;

    let d = options.drive;
    let d2 = d.norm_sqr();
    let g = basis.local_dim();
    let mut block_weight = vec![0.0f64; g];
    for (p, z) in evolved.amplitudes().iter().enumerate() {
        block_weight[basis.level(p, 1)] += z.norm_sqr();
    }
    let xi = block_weight[g - 1] / d2;
    let block_error = system
        .down_positions
        .iter()
        .map(|&p| {
            let target = if p == system.designated_position {
                d
            } else {
                Complex64::new(0.0, 0.0)
            };
            (evolved.amplitudes()[p] - target).norm()
        })
        .fold(0.0f64, f64::max);

    let total: f64 = block_weight.iter().sum();
    let leaked_norm = ((total - block_weight[g - 1]) / total).max(0.0).sqrt();
    let predicted_value = if g == 2 {
        (xi - 1.0) / (xi + 1.0)
    } else {
        let s = spec.spin();
        block_weight
            .iter()
            .enumerate()
            .map(|(level, w)| w * (level as f64 - s) / s)
            .sum::<f64>()
            / total
    };

    let state_site1 = raw.clone().normalized()?;
    let evolved_norm = evolved.scaled(Complex64::new(1.0 / raw.norm(), 0.0));
    let overlap_at_tstar = overlap(&state_site1, &evolved_norm)?.norm();
    if overlap_at_tstar > SHORT_TIME_OVERLAP {
        log::warn!("t* = {t_star} may be too short: |<psi|psi(t*)>| = {overlap_at_tstar:.3}");
    }

    let site = spec.revival_site();
    let (state, designated_index) = if site == 1 {
        (state_site1, BasisIndex::from_position(system.designated_position))
    } else {
        let perm = basis.translation_power(site - 1);
        (
            state_site1.permuted(&perm),
            BasisIndex::from_position(perm[system.designated_position]),
        )
    };

    Ok(RevivalConstruction {
        spec: spec.clone(),
        t_star,
        state,
        reservoir_amplitudes: solution.amplitudes,
        designated_index,
        xi,
        residual: solution.residual,
        condition_estimate: solution.condition_estimate,
        block_error,
        overlap_at_tstar,
        leaked_norm,
        predicted_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiPoint {
    pub length: usize,
    pub xi: f64,
}

/// `xi` for each chain in `specs` at a common `t_star`.
pub fn xi_scaling(specs: &[ChainSpec], t_star: f64) -> Result<Vec<XiPoint>> {
    specs
        .iter()
        .map(|spec| {
            let eig = EigenSystem::for_spec(spec)?;
            let c = build_revival(&eig, t_star, spec)?;
            Ok(XiPoint {
                length: spec.length(),
                xi: c.xi,
            })
        })
        .collect()
}

/// Least-squares slope of `log2 xi` against `L`.
pub fn log2_xi_slope(points: &[XiPoint]) -> Result<f64> {
    let xs: Vec<f64> = points.iter().map(|p| p.length as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.xi.log2()).collect();
    Ok(crate::stats::linear_fit(&xs, &ys)?.slope)
}

#[derive(Debug, Clone)]
pub struct Superposition {
    pub state: QuantumState,
    /// `<psi_i|psi_j>` between the normalized constituents.
    pub overlaps: Vec<Vec<Complex64>>,
}

/// Normalized `sum_i w_i |Psi_in(t*_i)>`.
pub fn superpose_revivals(constructions: &[RevivalConstruction], weights: &[Complex64]) -> Result<Superposition> {
    let states: Vec<&QuantumState> = constructions.iter().map(|c| &c.state).collect();
    let state = linear_combination(&states, weights)?.normalized()?;
    let overlaps = states
        .iter()
        .map(|a| states.iter().map(|b| overlap(a, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Superposition { state, overlaps })
}

/// Large-system revival value `1/(2S)` for spin `two_s / 2`.
pub fn predicted_high_spin_value(two_s: usize) -> Result<f64> {
    if two_s < 1 {
        return Err(Error::InvalidSpec("two_s must be >= 1".into()));
    }
    Ok(1.0 / two_s as f64)
}

/// `<S^z_site(t)>/S` of a construction at its own revival site.
pub fn revival_value(eig: &EigenSystem, probe: &SpinProbe, c: &RevivalConstruction, t: f64) -> Result<f64> {
    let psi = eig.evolve(&c.state, t)?;
    probe.sz(&psi, c.spec.revival_site())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn l8() -> &'static (ChainSpec, EigenSystem) {
        static CELL: OnceLock<(ChainSpec, EigenSystem)> = OnceLock::new();
        CELL.get_or_init(|| {
            let spec = ChainSpec::new(8, 1).unwrap();
            let eig = EigenSystem::for_spec(&spec).unwrap();
            (spec, eig)
        })
    }

    #[test]
    fn system_shapes() {
        let spec = ChainSpec::new(3, 1).unwrap();
        let eig = EigenSystem::for_spec(&spec).unwrap();
        let sys = revival_system(&eig, 1.0, &spec, 0).unwrap();
        assert_eq!((sys.matrix.nrows(), sys.matrix.ncols()), (4, 4));
        // 1-based rows 5..8, columns 1..4
        assert_eq!(sys.down_positions, vec![4, 5, 6, 7]);
        assert_eq!(sys.top_positions, vec![0, 1, 2, 3]);
        let u = eig.propagator(1.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((sys.matrix[(i, j)] - u.get(4 + i, j)).norm() < 1e-13);
            }
        }

        let spec = ChainSpec::new(2, 2).unwrap();
        let eig = EigenSystem::for_spec(&spec).unwrap();
        let sys = revival_system(&eig, 1.0, &spec, 0).unwrap();
        assert_eq!(sys.down_positions, vec![6, 7, 8]);
        assert_eq!(sys.top_positions, vec![0, 1, 2]);
        // designated: site 1 at level 0, site 2 at level g-1
        let basis = spec.basis().unwrap();
        assert_eq!(
            BasisIndex::from_position(sys.designated_position),
            basis.rank(&[0, 2]).unwrap()
        );
        assert_eq!(sys.designated_position + 1, 3 * (3 - 1) + 1);
    }

    #[test]
    fn zero_time_system_is_singular() {
        let (spec, eig) = l8();
        let sys = revival_system(eig, 0.0, spec, 0).unwrap();
        assert!(linalg::max_abs(sys.matrix.as_ref()) < 1e-12);
        assert!(matches!(
            solve_reservoir(&sys.matrix, 0, Complex64::new(1.0, 0.0)),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn identity_system() {
        let m = linalg::identity(5);
        let s = solve_reservoir(&m, 2, Complex64::new(1.0, 0.0)).unwrap();
        for (i, a) in s.amplitudes.iter().enumerate() {
            let e = if i == 2 { 1.0 } else { 0.0 };
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
        assert!((s.condition_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_drive_rejected() {
        let m = linalg::identity(3);
        assert!(matches!(
            solve_reservoir(&m, 0, Complex64::new(0.0, 0.0)),
            Err(Error::ZeroDrive)
        ));
        assert!(solve_reservoir(&Mat::zeros(2, 3), 0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn l8_solve_quality() {
        let (spec, eig) = l8();
        let sys = revival_system(eig, 5.0, spec, 0).unwrap();
        let s = solve_reservoir(&sys.matrix, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(s.residual <= 1e-10, "residual {}", s.residual);
        assert!(s.condition_estimate < 1e9, "condition {}", s.condition_estimate);
        // direct check of M A - e
        let a = Mat::from_fn(s.amplitudes.len(), 1, |i, _| s.amplitudes[i]);
        let ma = &sys.matrix * &a;
        for i in 0..ma.nrows() {
            let e = if i == 0 { 1.0 } else { 0.0 };
            assert!((ma[(i, 0)] - Complex64::new(e, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn construction_invariants_spin_half() {
        let (spec, eig) = l8();
        let c = build_revival(eig, 5.0, spec).unwrap();
        let probe = SpinProbe::new(spec).unwrap();
        assert!(c.block_error <= 1e-8);
        assert!(c.xi > 0.0);
        assert_eq!(probe.sz(&c.state, 1).unwrap(), 1.0);
        let at = revival_value(eig, &probe, &c, 5.0).unwrap();
        assert!((at - (c.xi - 1.0) / (c.xi + 1.0)).abs() <= 1e-9);
        assert!((c.predicted_value - at).abs() <= 1e-9);
        // support confined to the top block
        assert!(c.state.amplitudes()[128..].iter().all(|z| z.norm() == 0.0));
        assert_eq!(c.designated_index, BasisIndex(129));
    }

    #[test]
    fn revival_formula_instance() {
        let xi = 999.0;
        assert!(((xi - 1.0) / (xi + 1.0) - 0.998f64).abs() < 1e-15);
    }

    #[test]
    fn phase_covariance() {
        let (spec, eig) = l8();
        let base = build_revival(eig, 4.0, spec).unwrap();
        let phase = Complex64::from_polar(1.0, 0.9);
        let opts = RevivalOptions {
            drive: phase,
            ..RevivalOptions::default()
        };
        let rotated = build_revival_with(eig, 4.0, spec, &opts).unwrap();
        for (a, b) in base.reservoir_amplitudes.iter().zip(&rotated.reservoir_amplitudes) {
            assert!((a * phase - b).norm() <= 1e-9 * (1.0 + a.norm()));
        }
        assert!((base.xi - rotated.xi).abs() <= 1e-9 * base.xi);
        let probe = SpinProbe::new(spec).unwrap();
        let times = [0.0, 2.0, 4.0];
        let s1 = crate::evolution::observable_series(eig, &probe, &base.state, 1, &times).unwrap();
        let s2 = crate::evolution::observable_series(eig, &probe, &rotated.state, 1, &times).unwrap();
        for i in 0..times.len() {
            assert!((s1.sz[i] - s2.sz[i]).abs() <= 1e-10);
            assert!((s1.sx[i] - s2.sx[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn other_designated_row_is_valid() {
        let (spec, eig) = l8();
        let opts = RevivalOptions {
            designated_row: 17,
            ..RevivalOptions::default()
        };
        let c = build_revival_with(eig, 5.0, spec, &opts).unwrap();
        assert!(c.block_error <= 1e-8);
        assert_eq!(c.designated_index, BasisIndex(128 + 17 + 1));
    }

    #[test]
    fn site_covariance() {
        let (spec, eig) = l8();
        let probe = SpinProbe::new(spec).unwrap();
        let at1 = build_revival(eig, 5.0, spec).unwrap();
        let spec3 = spec.clone().with_revival_site(3).unwrap();
        let at3 = build_revival(eig, 5.0, &spec3).unwrap();
        let times = [0.0, 1.0, 5.0];
        let s1 = crate::evolution::observable_series(eig, &probe, &at1.state, 1, &times).unwrap();
        let s3 = crate::evolution::observable_series(eig, &probe, &at3.state, 3, &times).unwrap();
        for i in 0..times.len() {
            assert!((s1.sz[i] - s3.sz[i]).abs() <= 1e-9);
        }
        let basis = spec.basis().unwrap();
        let lv = basis.levels(at3.designated_index).unwrap();
        assert_eq!(lv, vec![1, 1, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn non_positive_t_star_rejected() {
        let (spec, eig) = l8();
        assert!(build_revival(eig, 0.0, spec).is_err());
        assert!(build_revival(eig, -1.0, spec).is_err());
        assert!(build_revival(eig, f64::NAN, spec).is_err());
    }

    #[test]
    fn high_spin_prediction() {
        assert_eq!(predicted_high_spin_value(1).unwrap(), 1.0);
        assert_eq!(predicted_high_spin_value(2).unwrap(), 0.5);
        assert_eq!(predicted_high_spin_value(4).unwrap(), 0.25);
        assert!(predicted_high_spin_value(0).is_err());
    }

    #[test]
    fn high_spin_constraint_count() {
        // g^(L-1) - 1 zeros plus the drive; the rest of the state is free
        let spec = ChainSpec::new(4, 2).unwrap();
        let eig = EigenSystem::for_spec(&spec).unwrap();
        let c = build_revival(&eig, 5.0, &spec).unwrap();
        assert!(c.block_error <= 1e-8);
        let raw = c.unnormalized_site1_state().unwrap();
        let evolved = eig.evolve(&raw, 5.0).unwrap();
        let zeros = evolved.amplitudes().iter().filter(|z| z.norm() <= 1e-8).count();
        assert_eq!(zeros, 27 - 1);
        let probe = SpinProbe::new(&spec).unwrap();
        let at = probe.sz(&eig.evolve(&c.state, 5.0).unwrap(), 1).unwrap();
        assert!((at - c.predicted_value).abs() < 1e-9);
    }

    #[test]
    fn single_superposition_is_identity() {
        let (spec, eig) = l8();
        let c = build_revival(eig, 5.0, spec).unwrap();
        let s = superpose_revivals(std::slice::from_ref(&c), &[Complex64::new(1.0, 0.0)]).unwrap();
        for (a, b) in s.state.amplitudes().iter().zip(c.state.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(superpose_revivals(&[], &[]).is_err());
    }
}
