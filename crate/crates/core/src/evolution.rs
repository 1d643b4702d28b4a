//! Exact time evolution through the eigenbasis of `H`.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{build_hamiltonian, spin_matrices, Basis, ChainSpec, DenseOperator};
use crate::rng;

const NORM_TOL: f64 = 1e-10;

/// Complex amplitudes over the product basis, in basis-position order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        QuantumState { amplitudes }
    }

    /// Basis state at 0-based `position`.
    pub fn basis_state(dim: usize, position: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[position] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite state"));
        }
        let inv = 1.0 / n;
        for z in &mut self.amplitudes {
            *z *= inv;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        QuantumState::new(self.amplitudes.iter().map(|z| z * factor).collect())
    }

    /// Relabels amplitudes: the amplitude at position `p` moves to `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim());
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (p, &z) in self.amplitudes.iter().enumerate() {
            out[perm[p]] = z;
        }
        QuantumState::new(out)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.dim(),
            });
        }
        Ok(())
    }
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn overlap(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    b.check_dim(a.dim())?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// Weighted sum `sum_i w_i |psi_i>`, not normalized.
pub fn linear_combination(states: &[&QuantumState], weights: &[Complex64]) -> Result<QuantumState> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::invalid("need one weight per state and at least one state"));
    }
    let dim = states[0].dim();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (s, &w) in states.iter().zip(weights) {
        s.check_dim(dim)?;
        for (o, z) in out.iter_mut().zip(&s.amplitudes) {
            *o += w * z;
        }
    }
    Ok(QuantumState::new(out))
}

/// Spectrum and eigenvectors of a Hermitian `H`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    energies: Vec<f64>,
    vectors: CMat,
    spec: Option<ChainSpec>,
}

/// Diagonalizes a Hermitian operator; energies come out ascending.
pub fn eigendecompose(h: &DenseOperator) -> Result<EigenSystem> {
    let residual = h.hermiticity_residual();
    if residual > 1e-12 * linalg::max_abs(h.matrix().as_ref()).max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { residual });
    }
    let (energies, vectors) = linalg::hermitian_eigen(h.matrix().as_ref())?;
    Ok(EigenSystem {
        energies,
        vectors,
        spec: None,
    })
}

impl EigenSystem {
    /// Builds and diagonalizes the chain Hamiltonian.
    pub fn for_spec(spec: &ChainSpec) -> Result<Self> {
        let h = build_hamiltonian(spec)?;
        let mut eig = eigendecompose(&h)?;
        eig.spec = Some(spec.clone());
        Ok(eig)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn spec(&self) -> Option<&ChainSpec> {
        self.spec.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn spectral_width(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Coefficients `<E_n|psi>`.
    pub fn to_eigenbasis(&self, state: &QuantumState) -> Result<Vec<Complex64>> {
        state.check_dim(self.dim())?;
        Ok(linalg::adjoint_matvec(self.vectors.as_ref(), state.amplitudes()))
    }

    /// `sum_n c_n |E_n>`.
    pub fn from_eigenbasis(&self, coeffs: &[Complex64]) -> Result<QuantumState> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: coeffs.len(),
            });
        }
        Ok(QuantumState::new(linalg::matvec(self.vectors.as_ref(), coeffs)))
    }

    fn phases(&self, t: f64) -> impl Iterator<Item = Complex64> + '_ {
        self.energies.iter().map(move |&e| Complex64::from_polar(1.0, -e * t))
    }

    /// `U(t) = V diag(exp(-i E_n t)) V^†`.
    pub fn propagator(&self, t: f64) -> DenseOperator {
        let n = self.dim();
        let phases: Vec<Complex64> = self.phases(t).collect();
        let scaled = Mat::from_fn(n, n, |i, k| self.vectors[(i, k)] * phases[k]);
        let u = &scaled * self.vectors.adjoint();
        DenseOperator::new(u, false).expect("square by construction")
    }

    /// Rows `rows` and columns `cols` of `U(t)`, without forming the full propagator.
    pub fn propagator_block(&self, t: f64, rows: &[usize], cols: &[usize]) -> CMat {
        let n = self.dim();
        let phases: Vec<Complex64> = self.phases(t).collect();
        let left = Mat::from_fn(rows.len(), n, |i, k| self.vectors[(rows[i], k)] * phases[k]);
        let right = Mat::from_fn(n, cols.len(), |k, j| self.vectors[(cols[j], k)].conj());
        &left * &right
    }

    /// `U(t) psi` via the eigenbasis.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        let coeffs = self.to_eigenbasis(state)?;
        self.evolve_coefficients(&coeffs, t)
    }

    /// `U(t) psi` for `psi` given by its eigenbasis coefficients.
    pub fn evolve_coefficients(&self, coeffs: &[Complex64], t: f64) -> Result<QuantumState> {
        let rotated: Vec<Complex64> = coeffs.iter().zip(self.phases(t)).map(|(c, p)| c * p).collect();
        self.from_eigenbasis(&rotated)
    }

    /// `<psi|H|psi>` computed from the eigenbasis weights.
    pub fn energy(&self, state: &QuantumState) -> Result<f64> {
        let coeffs = self.to_eigenbasis(state)?;
        Ok(coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c.norm_sqr() * e)
            .sum::<f64>()
            / state.norm_sqr())
    }
}

/// `<psi|O|psi>` for a Hermitian operator and a normalized state.
pub fn expectation(state: &QuantumState, op: &DenseOperator) -> Result<f64> {
    state.check_dim(op.dim())?;
    if !op.is_hermitian() {
        return Err(Error::NotHermitian {
            residual: op.hermiticity_residual(),
        });
    }
    if !state.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sqr: state.norm_sqr(),
        });
    }
    let o_psi = linalg::matvec(op.matrix().as_ref(), state.amplitudes());
    let value: Complex64 = state.amplitudes().iter().zip(&o_psi).map(|(a, b)| a.conj() * b).sum();
    debug_assert!(value.im.abs() <= 1e-10 * (1.0 + value.re.abs()));
    Ok(value.re)
}

/// `<psi|O_site|psi> / <psi|psi>` for a single-site operator `op` (dimension `g`).
pub fn local_expectation(state: &QuantumState, basis: &Basis, op: &DenseOperator, site: usize) -> Result<f64> {
    state.check_dim(basis.dim())?;
    if op.dim() != basis.local_dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.local_dim(),
            actual: op.dim(),
        });
    }
    let g = basis.local_dim();
    let stride = basis.stride(site);
    let amps = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, &z) in amps.iter().enumerate() {
        if z == Complex64::new(0.0, 0.0) {
            continue;
        }
        let c = (p / stride) % g;
        let base = p - c * stride;
        for r in 0..g {
            let v = op.get(r, c);
            if v != Complex64::new(0.0, 0.0) {
                acc += amps[base + r * stride].conj() * v * z;
            }
        }
    }
    Ok(acc.re / state.norm_sqr())
}

/// Normalized single-site spin expectations `<S^a_site> / S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Evaluates `<S^a_site>/S` for `a = x, y, z` on states of a fixed chain.
#[derive(Debug, Clone)]
pub struct SpinProbe {
    basis: Basis,
    spin: f64,
    sx: DenseOperator,
    sy: DenseOperator,
    sz: DenseOperator,
}

impl SpinProbe {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let m = spin_matrices(spec.two_s())?;
        Ok(SpinProbe {
            basis: spec.basis()?,
            spin: spec.spin(),
            sx: m.sx,
            sy: m.sy,
            sz: m.sz,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn sz(&self, state: &QuantumState, site: usize) -> Result<f64> {
        Ok(local_expectation(state, &self.basis, &self.sz, site)? / self.spin)
    }

    pub fn all(&self, state: &QuantumState, site: usize) -> Result<SpinVector> {
        Ok(SpinVector {
            x: local_expectation(state, &self.basis, &self.sx, site)? / self.spin,
            y: local_expectation(state, &self.basis, &self.sy, site)? / self.spin,
            z: local_expectation(state, &self.basis, &self.sz, site)? / self.spin,
        })
    }
}

/// Random superposition `sum_n c_n |E_n>` with i.i.d. complex Gaussian `c_n`, normalized.
pub fn sample_infinite_temperature<R: Rng + ?Sized>(eig: &EigenSystem, rng: &mut R) -> Result<QuantumState> {
    let coeffs: Vec<Complex64> = (0..eig.dim()).map(|_| rng::complex_gaussian(rng)).collect();
    eig.from_eigenbasis(&coeffs)?.normalized()
}

/// `|+S>_site (x) |reservoir>` with an infinite-temperature reservoir: a sampled
/// infinite-temperature state projected onto `site` at level `g-1` and renormalized.
pub fn thermal_reservoir_state<R: Rng + ?Sized>(
    eig: &EigenSystem,
    basis: &Basis,
    site: usize,
    rng: &mut R,
) -> Result<QuantumState> {
    let inf = sample_infinite_temperature(eig, rng)?;
    if inf.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: inf.dim(),
        });
    }
    let top = basis.local_dim() - 1;
    let amps = inf
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(p, &z)| {
            if basis.level(p, site) == top {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    QuantumState::new(amps).normalized()
}

/// `(|psi0> + U(-t*) |psi0>)`, renormalized.
pub fn dymarsky_state(eig: &EigenSystem, psi0: &QuantumState, t_star: f64) -> Result<QuantumState> {
    let back = eig.evolve(psi0, -t_star)?;
    let one = Complex64::new(1.0, 0.0);
    linear_combination(&[psi0, &back], &[one, one])?.normalized()
}

/// Time series of `<S^a_site>/S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub site: usize,
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value of `<S^z>/S` at the sample time closest to `t`.
    pub fn sz_near(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| self.sz[i])
    }
}

pub fn observable_series(
    eig: &EigenSystem,
    probe: &SpinProbe,
    state: &QuantumState,
    site: usize,
    times: &[f64],
) -> Result<ObservableSeries> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("observable times must be ascending"));
    }
    if site < 1 || site > probe.basis().length() {
        return Err(Error::OutOfRange {
            what: "site",
            value: site as i64,
            min: 1,
            max: probe.basis().length() as i64,
        });
    }
    let coeffs = eig.to_eigenbasis(state)?;
    let mut series = ObservableSeries {
        site,
        times: times.to_vec(),
        sx: Vec::with_capacity(times.len()),
        sy: Vec::with_capacity(times.len()),
        sz: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let psi = eig.evolve_coefficients(&coeffs, t)?;
        let v = probe.all(&psi, site)?;
        series.sx.push(v.x);
        series.sy.push(v.y);
        series.sz.push(v.z);
    }
    Ok(series)
}
