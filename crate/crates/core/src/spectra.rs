//! Level statistics of the chain Hamiltonian.
//!
//! Translation invariance splits the spectrum into `L` momentum sectors.
//! Spacing statistics are only meaningful inside a single symmetry sector,
//! so the pipeline first block-diagonalizes `H` with the momentum basis
//! `|r, k> = R^{-1/2} sum_{j<R} w^{-kj} T^j |r>` (`w = exp(2 pi i / L)`,
//! `R` the orbit length of representative `r`), then computes ratio
//! statistics per sector and unfolded spacings.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{build_hamiltonian, ChainSpec, DenseOperator};

/// Minimum number of levels accepted by [`unfold`] and [`spacing_ratios`].
pub const MIN_LEVELS: usize = 50;

/// Fraction of levels trimmed at each spectral edge before unfolding.
pub const EDGE_TRIM: f64 = 0.05;

pub const DEFAULT_UNFOLD_DEGREE: usize = 10;

/// Mean ratio for uncorrelated (Poisson) levels, `2 ln 2 - 1`.
pub const POISSON_MEAN_R: f64 = 0.386_294_361_119_890_6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub momentum: usize,
    pub levels: Vec<f64>,
    pub dimension: usize,
}

fn permutation_of(t: &DenseOperator) -> Result<Vec<usize>> {
    let n = t.dim();
    let mut perm = Vec::with_capacity(n);
    for col in 0..n {
        let mut hit = None;
        for row in 0..n {
            let v = t.get(row, col);
            if v.norm() > 1e-12 {
                if hit.is_some() || (v - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                    return Err(Error::invalid("translation operator is not a permutation"));
                }
                hit = Some(row);
            }
        }
        perm.push(hit.ok_or_else(|| Error::invalid("translation operator has an empty column"))?);
    }
    let mut seen = vec![false; n];
    for &p in &perm {
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("translation operator is not a permutation"));
        }
    }
    Ok(perm)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Orbits of the permutation, each listed as `[r, T r, T^2 r, ...]` from its smallest element.
fn orbits(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut p = perm[start];
        while p != start {
            seen[p] = true;
            orbit.push(p);
            p = perm[p];
        }
        out.push(orbit);
    }
    out
}

/// Block-diagonalizes `H` by the eigenvalues `exp(2 pi i k / L)` of the
/// translation `T` and returns each block's spectrum, ordered by `k`.
pub fn momentum_sectors(h: &DenseOperator, t: &DenseOperator) -> Result<Vec<SectorSpectrum>> {
    if h.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            actual: t.dim(),
        });
    }
    momentum_sectors_by_permutation(h, &permutation_of(t)?)
}

/// [`momentum_sectors`] with the translation given as a basis permutation
/// (`perm[p]` is the image of position `p`).
pub fn momentum_sectors_by_permutation(h: &DenseOperator, perm: &[usize]) -> Result<Vec<SectorSpectrum>> {
    let hm = h.matrix();
    let n = h.dim();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("translation is not a permutation"));
        }
    }

    // T H T^† = H  <=>  H[perm i, perm j] = H[i, j]
    let scale = linalg::max_abs(hm.as_ref()).max(1.0);
    let mut residual = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            residual = residual.max((hm[(perm[i], perm[j])] - hm[(i, j)]).norm());
        }
    }
    if residual > 1e-10 * scale {
        return Err(Error::Symmetry { residual });
    }

    let orbits = orbits(perm);
    let order = orbits.iter().fold(1, |acc, o| acc / gcd(acc, o.len()) * o.len());
    let w = |k: usize, j: usize| -> Complex64 {
        Complex64::from_polar(1.0, -std::f64::consts::TAU * ((k * j) % order) as f64 / order as f64)
    };

    (0..order)
        .into_par_iter()
        .map(|k| {
            let members: Vec<&Vec<usize>> = orbits.iter().filter(|o| (k * o.len()) % order == 0).collect();
            let dim_k = members.len();
            let coeffs: Vec<Vec<Complex64>> = members
                .iter()
                .map(|o| {
                    let norm = 1.0 / (o.len() as f64).sqrt();
                    (0..o.len()).map(|j| w(k, j) * norm).collect()
                })
                .collect();

            let mut block = Mat::<Complex64>::zeros(dim_k, dim_k);
            let mut hb = vec![Complex64::new(0.0, 0.0); n];
            for (b, ob) in members.iter().enumerate() {
                hb.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for (&p, &c) in ob.iter().zip(&coeffs[b]) {
                    let col = hm.col(p);
                    for (slot, v) in hb.iter_mut().zip(col.iter()) {
                        *slot += v * c;
                    }
                }
                for (a, oa) in members.iter().enumerate() {
                    block[(a, b)] = oa.iter().zip(&coeffs[a]).map(|(&p, c)| c.conj() * hb[p]).sum();
                }
            }
            let sym = Mat::from_fn(dim_k, dim_k, |i, j| (block[(i, j)] + block[(j, i)].conj()) * 0.5);
            let levels = if dim_k == 0 {
                Vec::new()
            } else {
                linalg::hermitian_eigenvalues(sym.as_ref())?
            };
            Ok(SectorSpectrum {
                momentum: k,
                levels,
                dimension: dim_k,
            })
        })
        .collect()
}

/// Momentum-resolved spectrum of the chain Hamiltonian.
pub fn chain_momentum_sectors(spec: &ChainSpec) -> Result<Vec<SectorSpectrum>> {
    let h = build_hamiltonian(spec)?;
    momentum_sectors_by_permutation(&h, &spec.basis()?.translation_permutation())
}

fn sorted_finite(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("levels must be finite"));
    }
    let mut v = levels.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Chebyshev polynomials `T_0..T_degree` at `x`.
fn chebyshev_row(x: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = x;
    }
    for k in 2..=degree {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// Unfolded nearest-neighbor spacings, rescaled to unit mean.
///
/// The integrated density of states is fitted by a degree-`degree`
/// polynomial after trimming [`EDGE_TRIM`] of the levels at each edge; the
/// kept levels are mapped through the fit and consecutive differences taken.
pub fn unfold(levels: &[f64], degree: usize) -> Result<Vec<f64>> {
    if levels.len() < MIN_LEVELS {
        return Err(Error::invalid(format!(
            "unfolding needs at least {MIN_LEVELS} levels, got {}",
            levels.len()
        )));
    }
    if degree < 3 {
        return Err(Error::invalid("unfolding degree must be at least 3"));
    }
    let sorted = sorted_finite(levels)?;
    let n = sorted.len();
    let trim = (EDGE_TRIM * n as f64).floor() as usize;
    let kept = &sorted[trim..n - trim];
    if kept.len() <= degree + 1 {
        return Err(Error::invalid(format!(
            "degree {degree} too high for {} levels after trimming",
            kept.len()
        )));
    }
    let (lo, hi) = (kept[0], kept[kept.len() - 1]);
    let half = 0.5 * (hi - lo);
    if !(half > 0.0) {
        return Err(Error::invalid("levels are all degenerate"));
    }
    let mid = 0.5 * (hi + lo);
    let x = |e: f64| (e - mid) / half;

    let m = kept.len();
    let mut row = vec![0.0; degree + 1];
    let mut design = Mat::<f64>::zeros(m, degree + 1);
    for (i, &e) in kept.iter().enumerate() {
        chebyshev_row(x(e), degree, &mut row);
        for (k, v) in row.iter().enumerate() {
            design[(i, k)] = *v;
        }
    }
    // staircase N(E_i) = number of levels <= E_i
    let staircase = Mat::from_fn(m, 1, |i, _| (trim + i + 1) as f64);
    let coef = design.qr().solve_lstsq(&staircase);

    let mapped: Vec<f64> = kept
        .iter()
        .map(|&e| {
            chebyshev_row(x(e), degree, &mut row);
            row.iter().enumerate().map(|(k, v)| v * coef[(k, 0)]).sum()
        })
        .collect();
    let spacings: Vec<f64> = mapped.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::invalid("unfolded staircase is not increasing"));
    }
    Ok(spacings.into_iter().map(|s| s / mean).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub r_values: Vec<f64>,
    pub mean_r: f64,
    /// Ratios dropped because one of their gaps was degenerate.
    pub excluded: usize,
}

/// `min(s_n, s_{n+1}) / max(s_n, s_{n+1})` for every pair of consecutive gaps,
/// skipping pairs with a degenerate gap. Needs only three levels.
pub fn ratio_values(levels: &[f64]) -> Result<RatioStats> {
    let sorted = sorted_finite(levels)?;
    let width = match (sorted.first(), sorted.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let tol = 1e-10 * width.max(1e-300);
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let mut r_values = Vec::with_capacity(gaps.len().saturating_sub(1));
    let mut excluded = 0;
    for w in gaps.windows(2) {
        if w[0] <= tol || w[1] <= tol {
            excluded += 1;
            continue;
        }
        r_values.push(w[0].min(w[1]) / w[0].max(w[1]));
    }
    if excluded > 0 {
        log::warn!("degenerate spectrum: {excluded} spacing ratios excluded");
    }
    let mean_r = if r_values.is_empty() {
        f64::NAN
    } else {
        r_values.iter().sum::<f64>() / r_values.len() as f64
    };
    Ok(RatioStats {
        r_values,
        mean_r,
        excluded,
    })
}

/// [`ratio_values`] with the [`MIN_LEVELS`] precondition.
pub fn spacing_ratios(levels: &[f64]) -> Result<RatioStats> {
    if levels.len() < MIN_LEVELS {
        return Err(Error::invalid(format!(
            "ratio statistics need at least {MIN_LEVELS} levels, got {}",
            levels.len()
        )));
    }
    let stats = ratio_values(levels)?;
    if stats.r_values.is_empty() {
        return Err(Error::invalid("no nondegenerate spacings"));
    }
    Ok(stats)
}

/// Ratios pooled over all sectors except those listed in `exclude`.
pub fn pooled_ratios(sectors: &[SectorSpectrum], exclude: &[usize]) -> Result<RatioStats> {
    let mut r_values = Vec::new();
    let mut excluded = 0;
    for s in sectors.iter().filter(|s| !exclude.contains(&s.momentum)) {
        if s.levels.len() < 3 {
            continue;
        }
        let st = ratio_values(&s.levels)?;
        r_values.extend(st.r_values);
        excluded += st.excluded;
    }
    if r_values.is_empty() {
        return Err(Error::invalid("no sector provided any spacing ratio"));
    }
    let mean_r = r_values.iter().sum::<f64>() / r_values.len() as f64;
    Ok(RatioStats {
        r_values,
        mean_r,
        excluded,
    })
}

/// Momenta excluded from pooled statistics: `k = 0` and, for even `L`, `k = L/2`
/// (both carry an additional reflection symmetry).
pub fn reflection_symmetric_momenta(length: usize) -> Vec<usize> {
    if length % 2 == 0 {
        vec![0, length / 2]
    } else {
        vec![0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// `bins` equal bins on `[0, max)`; values outside are dropped.
    pub fn new(values: &[f64], bins: usize, max: f64) -> Self {
        let width = max / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            if (0.0..max).contains(&v) {
                counts[((v / width) as usize).min(bins - 1)] += 1;
            }
        }
        Histogram { edges, counts }
    }

    /// Fraction of all `total` samples falling in bins fully inside `[a, b]`.
    pub fn fraction_between(&self, a: f64, b: f64, total: usize) -> f64 {
        let inside: usize = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| self.edges[*i] >= a - 1e-12 && self.edges[i + 1] <= b + 1e-12)
            .map(|(_, c)| c)
            .sum();
        inside as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingStats {
    pub mean_r: f64,
    pub r_values: Vec<f64>,
    pub unfolded_spacings: Vec<f64>,
    pub histogram: Histogram,
}

impl SpacingStats {
    /// Ratio statistics plus unfolded spacings with a 0.1-wide histogram on `[0, 5)`.
    pub fn compute(levels: &[f64], degree: usize) -> Result<Self> {
        let ratios = spacing_ratios(levels)?;
        let unfolded_spacings = unfold(levels, degree)?;
        let histogram = Histogram::new(&unfolded_spacings, 50, 5.0);
        Ok(SpacingStats {
            mean_r: ratios.mean_r,
            r_values: ratios.r_values,
            unfolded_spacings,
            histogram,
        })
    }
}

/// Unfolded spacings of every sector not in `exclude`, each sector unfolded on its own.
pub fn pooled_unfolded_spacings(sectors: &[SectorSpectrum], exclude: &[usize], degree: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for s in sectors.iter().filter(|s| !exclude.contains(&s.momentum)) {
        if s.levels.len() >= MIN_LEVELS {
            out.extend(unfold(&s.levels, degree)?);
        }
    }
    Ok(out)
}
