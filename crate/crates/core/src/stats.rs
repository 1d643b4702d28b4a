//! Small statistics helpers: least-squares lines, rank correlation, means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
///
/// Errors when fewer than two points are given or `x` is constant. A constant
/// `y` fits exactly and reports `r_squared = 1`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit("x and y lengths differ".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) || !sxx.is_finite() {
        return Err(Error::Fit("x values are constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Contiguous window `[start, end)` of at least `min_len` points maximizing `r^2`.
///
/// Ties prefer the longer window, then the earlier one.
pub fn best_linear_window(xs: &[f64], ys: &[f64], min_len: usize) -> Result<(usize, usize, LinearFit)> {
    let n = xs.len();
    if n < min_len || min_len < 2 {
        return Err(Error::Fit(format!("need at least {min_len} points, got {n}")));
    }
    let mut best: Option<(usize, usize, LinearFit)> = None;
    for start in 0..n {
        for end in start + min_len..=n {
            let Ok(fit) = linear_fit(&xs[start..end], &ys[start..end]) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((s, e, b)) => {
                    const TIE: f64 = 1e-12;
                    fit.r_squared > b.r_squared + TIE
                        || ((fit.r_squared - b.r_squared).abs() <= TIE && end - start > e - s)
                }
            };
            if better {
                best = Some((start, end, fit));
            }
        }
    }
    best.ok_or_else(|| Error::Fit("every window has constant x".into()))
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let fit = linear_fit(&rx, &ry)?;
    // correlation = sign(slope) * sqrt(r^2)
    Ok(fit.slope.signum() * fit.r_squared.sqrt())
}

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    // shifted by the first sample so identical samples give exactly zero spread
    let mean = v[0] + v.iter().map(|x| x - v[0]).sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
