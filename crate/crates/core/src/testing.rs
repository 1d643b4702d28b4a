//! Independent reference implementations used by the test suites.
//!
//! Nothing here touches the production code paths: matrices are plain
//! row-major `Vec`s, products are naive triple loops, and the spin-1/2
//! Hamiltonian is assembled from hard-coded Pauli matrices.

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect::<Vec<_>>();
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Dense) -> Dense {
        Dense {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Dense {
        Dense {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let (n, m) = (self.n, other.n);
        let mut out = Dense::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * n * m + j * m + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Dense) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `exp(a)` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &Dense) -> Dense {
    let norm = a.norm_inf();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.25 {
        squarings += 1;
    }
    let scaled = a.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut sum = Dense::identity(a.n);
    let mut term = Dense::identity(a.n);
    for k in 1..=24 {
        term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Spin-1/2 operators in the order (up, down).
pub fn half_spin() -> [Dense; 3] {
    let z = c(0.0, 0.0);
    [
        Dense::from_rows(&[&[z, c(0.5, 0.0)], &[c(0.5, 0.0), z]]),
        Dense::from_rows(&[&[z, c(0.0, -0.5)], &[c(0.0, 0.5), z]]),
        Dense::from_rows(&[&[c(0.5, 0.0), z], &[z, c(-0.5, 0.0)]]),
    ]
}

/// `op` on `site` (1-based) of an `length`-site spin-1/2 chain; site 1 is the
/// leftmost Kronecker factor.
pub fn kron_site(op: &Dense, site: usize, length: usize) -> Dense {
    let id = Dense::identity(2);
    let mut out = if site == 1 { op.clone() } else { id.clone() };
    for j in 2..=length {
        out = out.kron(if j == site { op } else { &id });
    }
    out
}

/// Periodic spin-1/2 XY chain with transverse fields from explicit Kronecker products.
pub fn kron_hamiltonian(length: usize, jx: f64, jy: f64, hx: f64, hy: f64) -> Dense {
    let [sx, sy, _] = half_spin();
    let dim = 1 << length;
    let mut h = Dense::zeros(dim);
    for j in 1..=length {
        let k = j % length + 1;
        let xx = kron_site(&sx, j, length).mul(&kron_site(&sx, k, length));
        let yy = kron_site(&sy, j, length).mul(&kron_site(&sy, k, length));
        h = h
            .add(&xx.scale(c(jx, 0.0)))
            .add(&yy.scale(c(jy, 0.0)))
            .add(&kron_site(&sx, j, length).scale(c(hx, 0.0)))
            .add(&kron_site(&sy, j, length).scale(c(hy, 0.0)));
    }
    h
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`; each eigenvalue appears twice
/// in the embedding and is returned once.
pub fn jacobi_eigenvalues(h: &Dense) -> Vec<f64> {
    let n = h.n;
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = cs * akp - sn * akq;
                    a[k * m + q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = cs * apk - sn * aqk;
                    a[q * m + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// Spectrum of a real symmetric matrix with i.i.d. Gaussian entries
/// (off-diagonal variance 1/2, diagonal variance 1).
pub fn goe_levels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut a = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let x: f64 = StandardNormal.sample(rng);
            let v = if i == j { x } else { x * std::f64::consts::FRAC_1_SQRT_2 };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut ev = a.self_adjoint_eigenvalues(Side::Lower).expect("symmetric eigenvalues");
    ev.sort_by(f64::total_cmp);
    ev
}

/// Levels with i.i.d. unit-mean exponential gaps.
pub fn poisson_levels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let gap: f64 = Exp1.sample(rng);
            x += gap;
            x
        })
        .collect()
}

/// Copies a production operator into the oracle representation.
pub fn from_mat(m: faer::MatRef<'_, Complex64>) -> Dense {
    let n = m.nrows();
    Dense {
        n,
        data: (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])).collect(),
    }
}
