//! Spin-S chain definition.
//!
//! Basis convention: a basis state is labeled by one level per site, level
//! `g - 1` meaning `S^z = +S` and level `0` meaning `S^z = -S`. The 1-based
//! index of a state is `g^L - n`, where `n` is the base-`g` number whose most
//! significant digit is the level of site 1. Index 1 is therefore the all-up
//! state and index `g^L` the all-down state.
//!
//! Internally we work with the 0-based position `index - 1`. Writing
//! `c_j = g - 1 - level_j`, the position is `sum_j c_j g^(L-j)`: the ordinary
//! Kronecker layout with site 1 as the slowest factor and each local factor
//! ordered from `m = +S` down to `m = -S`.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Default cap on the Hilbert-space dimension `g^L`.
pub const DEFAULT_MAX_DIM: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub jx: f64,
    pub jy: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Couplings {
    /// `(Jx, Jy, hx, hy) = (-2.0, -4.0, 2.2, 2.2)`, a non-integrable point.
    pub const REFERENCE: Couplings = Couplings {
        jx: -2.0,
        jy: -4.0,
        hx: 2.2,
        hy: 2.2,
    };

    /// The reference bond couplings with both fields switched off (free-fermion XY chain).
    pub const INTEGRABLE: Couplings = Couplings {
        jx: -2.0,
        jy: -4.0,
        hx: 0.0,
        hy: 0.0,
    };
}

impl Default for Couplings {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Periodic spin-S chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainSpecRecord", into = "ChainSpecRecord")]
pub struct ChainSpec {
    length: usize,
    two_s: usize,
    pub couplings: Couplings,
    revival_site: usize,
    max_dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainSpecRecord {
    #[serde(rename = "L")]
    length: usize,
    #[serde(default = "default_two_s")]
    two_s: usize,
    #[serde(default = "default_jx")]
    jx: f64,
    #[serde(default = "default_jy")]
    jy: f64,
    #[serde(default = "default_hx")]
    hx: f64,
    #[serde(default = "default_hy")]
    hy: f64,
    #[serde(default = "default_site")]
    revival_site: usize,
}

fn default_two_s() -> usize {
    1
}
fn default_jx() -> f64 {
    Couplings::REFERENCE.jx
}
fn default_jy() -> f64 {
    Couplings::REFERENCE.jy
}
fn default_hx() -> f64 {
    Couplings::REFERENCE.hx
}
fn default_hy() -> f64 {
    Couplings::REFERENCE.hy
}
fn default_site() -> usize {
    1
}

impl TryFrom<ChainSpecRecord> for ChainSpec {
    type Error = Error;

    fn try_from(r: ChainSpecRecord) -> Result<Self> {
        ChainSpec::new(r.length, r.two_s)?
            .with_couplings(Couplings {
                jx: r.jx,
                jy: r.jy,
                hx: r.hx,
                hy: r.hy,
            })?
            .with_revival_site(r.revival_site)
    }
}

impl From<ChainSpec> for ChainSpecRecord {
    fn from(s: ChainSpec) -> Self {
        ChainSpecRecord {
            length: s.length,
            two_s: s.two_s,
            jx: s.couplings.jx,
            jy: s.couplings.jy,
            hx: s.couplings.hx,
            hy: s.couplings.hy,
            revival_site: s.revival_site,
        }
    }
}

impl ChainSpec {
    /// Chain of `length` sites with spin `two_s / 2` and reference couplings.
    pub fn new(length: usize, two_s: usize) -> Result<Self> {
        if length < 2 {
            return Err(Error::InvalidSpec(format!("length must be >= 2, got {length}")));
        }
        if two_s < 1 {
            return Err(Error::InvalidSpec("two_s must be >= 1".into()));
        }
        Ok(ChainSpec {
            length,
            two_s,
            couplings: Couplings::REFERENCE,
            revival_site: 1,
            max_dim: DEFAULT_MAX_DIM,
        })
    }

    pub fn with_couplings(mut self, couplings: Couplings) -> Result<Self> {
        let Couplings { jx, jy, hx, hy } = couplings;
        if ![jx, jy, hx, hy].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("couplings must be finite".into()));
        }
        self.couplings = couplings;
        Ok(self)
    }

    pub fn with_revival_site(mut self, site: usize) -> Result<Self> {
        check_site(site, self.length)?;
        self.revival_site = site;
        Ok(self)
    }

    pub fn with_max_dim(mut self, max_dim: usize) -> Self {
        self.max_dim = max_dim;
        self
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn two_s(&self) -> usize {
        self.two_s
    }

    /// Spin quantum number `S`.
    pub fn spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    /// Local dimension `g = 2S + 1`.
    pub fn local_dim(&self) -> usize {
        self.two_s + 1
    }

    pub fn revival_site(&self) -> usize {
        self.revival_site
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// `g^L`, checked against the dimension cap.
    pub fn dim(&self) -> Result<usize> {
        let g = self.local_dim() as u128;
        let mut dim: u128 = 1;
        for _ in 0..self.length {
            dim = dim.saturating_mul(g);
            if dim > self.max_dim as u128 {
                return Err(Error::DimensionCap { dim, cap: self.max_dim });
            }
        }
        Ok(dim as usize)
    }

    pub fn basis(&self) -> Result<Basis> {
        self.dim()?;
        Ok(Basis::new(self.local_dim(), self.length))
    }
}

fn check_site(site: usize, length: usize) -> Result<()> {
    if site < 1 || site > length {
        return Err(Error::OutOfRange {
            what: "site",
            value: site as i64,
            min: 1,
            max: length as i64,
        });
    }
    Ok(())
}

/// 1-based basis index in the chain's ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisIndex(pub usize);

impl BasisIndex {
    pub fn from_position(position: usize) -> Self {
        BasisIndex(position + 1)
    }

    /// 0-based storage position.
    pub fn position(self) -> usize {
        self.0 - 1
    }
}

/// Product basis of `length` sites with `g` levels each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    g: usize,
    length: usize,
    dim: usize,
}

impl Basis {
    /// Panics if `g^length` overflows; use [`ChainSpec::basis`] for checked construction.
    pub fn new(g: usize, length: usize) -> Self {
        assert!(g >= 2 && length >= 1);
        let dim = g.checked_pow(length as u32).expect("basis dimension overflows usize");
        Basis { g, length, dim }
    }

    pub fn local_dim(&self) -> usize {
        self.g
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distance between positions differing by one unit of the site's Kronecker digit.
    pub fn stride(&self, site: usize) -> usize {
        debug_assert!(site >= 1 && site <= self.length);
        self.g.pow((self.length - site) as u32)
    }

    /// Level (0 = `m = -S`, `g-1` = `m = +S`) of `site` in the state at `position`.
    pub fn level(&self, position: usize, site: usize) -> usize {
        self.g - 1 - (position / self.stride(site)) % self.g
    }

    /// 1-based index of the state with the given per-site levels (site 1 first).
    pub fn rank(&self, levels: &[usize]) -> Result<BasisIndex> {
        if levels.len() != self.length {
            return Err(Error::DimensionMismatch {
                expected: self.length,
                actual: levels.len(),
            });
        }
        let mut n = 0usize;
        for &d in levels {
            if d >= self.g {
                return Err(Error::OutOfRange {
                    what: "level",
                    value: d as i64,
                    min: 0,
                    max: self.g as i64 - 1,
                });
            }
            n = n * self.g + d;
        }
        Ok(BasisIndex(self.dim - n))
    }

    /// Per-site levels (site 1 first) of a 1-based index.
    pub fn levels(&self, index: BasisIndex) -> Result<Vec<usize>> {
        if index.0 < 1 || index.0 > self.dim {
            return Err(Error::OutOfRange {
                what: "basis index",
                value: index.0 as i64,
                min: 1,
                max: self.dim as i64,
            });
        }
        let mut n = self.dim - index.0;
        let mut levels = vec![0; self.length];
        for slot in levels.iter_mut().rev() {
            *slot = n % self.g;
            n /= self.g;
        }
        Ok(levels)
    }

    /// Positions of all states whose `site` sits at `level`, ascending.
    pub fn positions_with_level(&self, site: usize, level: usize) -> Vec<usize> {
        (0..self.dim).filter(|&p| self.level(p, site) == level).collect()
    }

    /// Image of each position under the cyclic shift moving site `j` to site `j+1`.
    pub fn translation_permutation(&self) -> Vec<usize> {
        let g = self.g;
        let top = self.stride(1);
        (0..self.dim)
            .map(|p| {
                let last = p % g;
                last * top + p / g
            })
            .collect()
    }

    /// `steps`-fold composition of [`Basis::translation_permutation`].
    pub fn translation_power(&self, steps: usize) -> Vec<usize> {
        let t = self.translation_permutation();
        let mut perm: Vec<usize> = (0..self.dim).collect();
        for _ in 0..steps % self.length {
            perm = perm.iter().map(|&p| t[p]).collect();
        }
        perm
    }
}

/// Dense complex square matrix, flagged when known to be Hermitian.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: CMat,
    hermitian: bool,
}

impl DenseOperator {
    /// Wraps `matrix`; with `hermitian` set the matrix is checked to be Hermitian
    /// within `1e-12 * max|entry|`.
    pub fn new(matrix: CMat, hermitian: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if hermitian {
            let residual = linalg::hermiticity_residual(matrix.as_ref());
            if residual > 1e-12 * linalg::max_abs(matrix.as_ref()) {
                return Err(Error::NotHermitian { residual });
            }
        }
        Ok(DenseOperator { matrix, hermitian })
    }

    pub fn identity(dim: usize) -> Self {
        DenseOperator {
            matrix: linalg::identity(dim),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(self.matrix.as_ref())
    }
}

/// `S^x`, `S^y`, `S^z` for a single spin, rows and columns ordered `m = +S, ..., -S`.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub sx: DenseOperator,
    pub sy: DenseOperator,
    pub sz: DenseOperator,
}

pub fn spin_matrices(two_s: usize) -> Result<SpinMatrices> {
    if two_s < 1 {
        return Err(Error::InvalidSpec("two_s must be >= 1".into()));
    }
    let g = two_s + 1;
    let s = two_s as f64 / 2.0;
    let m = |k: usize| s - k as f64;
    // <m+1| S^+ |m> = sqrt(S(S+1) - m(m+1)), i.e. row k-1, column k
    let raise = |i: usize, j: usize| -> f64 {
        if j == i + 1 {
            (s * (s + 1.0) - m(j) * (m(j) + 1.0)).sqrt()
        } else {
            0.0
        }
    };
    let sx = Mat::from_fn(g, g, |i, j| Complex64::new(0.5 * (raise(i, j) + raise(j, i)), 0.0));
    let sy = Mat::from_fn(g, g, |i, j| {
        // (S^+ - S^-) / 2i
        Complex64::new(0.0, -0.5 * (raise(i, j) - raise(j, i)))
    });
    let sz = Mat::from_fn(g, g, |i, j| Complex64::new(if i == j { m(i) } else { 0.0 }, 0.0));
    Ok(SpinMatrices {
        sx: DenseOperator::new(sx, true)?,
        sy: DenseOperator::new(sy, true)?,
        sz: DenseOperator::new(sz, true)?,
    })
}

/// Embeds a single-site operator acting on `site` into the full chain.
pub fn embed_local(op: &DenseOperator, site: usize, spec: &ChainSpec) -> Result<DenseOperator> {
    let basis = spec.basis()?;
    if op.dim() != basis.local_dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.local_dim(),
            actual: op.dim(),
        });
    }
    check_site(site, basis.length())?;
    let dim = basis.dim();
    let g = basis.local_dim();
    let stride = basis.stride(site);
    let mut out = Mat::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let c = (col / stride) % g;
        let base = col - c * stride;
        for r in 0..g {
            let v = op.get(r, c);
            if v != Complex64::new(0.0, 0.0) {
                out[(base + r * stride, col)] = v;
            }
        }
    }
    Ok(DenseOperator {
        matrix: out,
        hermitian: op.is_hermitian(),
    })
}

/// `H = sum_j (Jx Sx_j Sx_{j+1} + Jy Sy_j Sy_{j+1}) + sum_j (hx Sx_j + hy Sy_j)`
/// with `j+1` taken modulo `L`.
///
/// For `L = 2` both values of `j` address the same pair, so that bond is
/// counted twice, exactly as the sum is written.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<DenseOperator> {
    let basis = spec.basis()?;
    let spins = spin_matrices(spec.two_s())?;
    let Couplings { jx, jy, hx, hy } = spec.couplings;
    let g = basis.local_dim();
    let (sx, sy) = (spins.sx.matrix(), spins.sy.matrix());

    let field = Mat::from_fn(g, g, |i, j| sx[(i, j)] * hx + sy[(i, j)] * hy);
    // two-site bond operator, row/col = a * g + b for (site j, site j+1)
    let bond = Mat::from_fn(g * g, g * g, |r, c| {
        let (ra, rb, ca, cb) = (r / g, r % g, c / g, c % g);
        sx[(ra, ca)] * sx[(rb, cb)] * jx + sy[(ra, ca)] * sy[(rb, cb)] * jy
    });

    let dim = basis.dim();
    let length = basis.length();
    let zero = Complex64::new(0.0, 0.0);
    let mut h = Mat::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        for site in 1..=length {
            let stride = basis.stride(site);
            let c = (col / stride) % g;
            let base = col - c * stride;
            for r in 0..g {
                let v = field[(r, c)];
                if v != zero {
                    h[(base + r * stride, col)] += v;
                }
            }

            let next = site % length + 1;
            let stride_b = basis.stride(next);
            let cb = (col / stride_b) % g;
            let base = col - c * stride - cb * stride_b;
            for ra in 0..g {
                for rb in 0..g {
                    let v = bond[(ra * g + rb, c * g + cb)];
                    if v != zero {
                        h[(base + ra * stride + rb * stride_b, col)] += v;
                    }
                }
            }
        }
    }
    DenseOperator::new(h, true)
}

/// Cyclic translation `T`, mapping the level of site `j` onto site `j+1`.
pub fn translation_operator(spec: &ChainSpec) -> Result<DenseOperator> {
    let basis = spec.basis()?;
    let perm = basis.translation_permutation();
    let dim = basis.dim();
    let mut t = Mat::<Complex64>::zeros(dim, dim);
    for (col, &row) in perm.iter().enumerate() {
        t[(row, col)] = Complex64::new(1.0, 0.0);
    }
    Ok(DenseOperator {
        matrix: t,
        hermitian: false,
    })
}
