//! Delayed reveal of a secret.
//!
//! Each bit of a secret is stored in a separate device (a copy of the chain).
//! A 1-bit device holds a reviving state for the key entry `(site, t*)`; a
//! 0-bit device holds `|+S>_site (x) |thermal reservoir>`. Both start with the
//! key site fully polarized, so nothing distinguishes them at `t = 0`. Reading
//! the bit means measuring `S^z_site` at `t*` on many fresh copies.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{thermal_reservoir_state, EigenSystem, QuantumState, SpinProbe};
use crate::model::{Basis, ChainSpec};
use crate::revival::{build_revival, RevivalConstruction};
use crate::rng;
use crate::stats;

pub const DEFAULT_COPIES: usize = 400;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyEntry {
    pub site: usize,
    pub t_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    spec: ChainSpec,
    n_copies: usize,
    threshold: f64,
    entries: Vec<KeyEntry>,
}

impl SecretKey {
    pub fn new(spec: ChainSpec, entries: Vec<KeyEntry>) -> Result<Self> {
        Self::with_options(spec, entries, DEFAULT_COPIES, DEFAULT_THRESHOLD)
    }

    pub fn with_options(spec: ChainSpec, entries: Vec<KeyEntry>, n_copies: usize, threshold: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("key needs at least one entry"));
        }
        if n_copies == 0 {
            return Err(Error::invalid("n_copies must be at least 1"));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::invalid(format!("threshold must lie in (0, 1), got {threshold}")));
        }
        for e in &entries {
            if e.site < 1 || e.site > spec.length() {
                return Err(Error::OutOfRange {
                    what: "key site",
                    value: e.site as i64,
                    min: 1,
                    max: spec.length() as i64,
                });
            }
            if !(e.t_star > 0.0 && e.t_star.is_finite()) {
                return Err(Error::invalid(format!("key time must be positive, got {}", e.t_star)));
            }
        }
        Ok(Self {
            spec,
            n_copies,
            threshold,
            entries,
        })
    }

    /// `q` entries with uniform sites and `t*` uniform in `[t_min, t_max)`.
    pub fn random<R: Rng + ?Sized>(spec: ChainSpec, q: usize, t_min: f64, t_max: f64, rng: &mut R) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::invalid(format!("bad time window [{t_min}, {t_max})")));
        }
        let entries = (0..q)
            .map(|_| KeyEntry {
                site: rng.random_range(1..=spec.length()),
                t_star: rng.random_range(t_min..t_max),
            })
            .collect();
        Self::new(spec, entries)
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn entries(&self) -> &[KeyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn with_copies(mut self, n_copies: usize) -> Result<Self> {
        if n_copies == 0 {
            return Err(Error::invalid("n_copies must be at least 1"));
        }
        self.n_copies = n_copies;
        Ok(self)
    }

    /// The same key with every time moved by `dt`.
    pub fn shifted(&self, dt: f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| KeyEntry {
                site: e.site,
                t_star: e.t_star + dt,
            })
            .collect();
        Self::with_options(self.spec.clone(), entries, self.n_copies, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub device_states: Vec<QuantumState>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.device_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.device_states.is_empty()
    }
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    if s.is_empty() {
        return Err(Error::invalid("empty bit string"));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::invalid(format!("invalid bit {other:?}"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn hamming_distance(a: &[bool], b: &[bool]) -> usize {
    assert_eq!(a.len(), b.len(), "bit strings differ in length");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn check_spec(key: &SecretKey, eig: &EigenSystem) -> Result<Basis> {
    let basis = key.spec.basis()?;
    if basis.dim() != eig.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: eig.dim(),
        });
    }
    Ok(basis)
}

/// One device state per bit. Thermal reservoirs for 0-bits come from
/// `substream(seed, device, 0)`.
pub fn encode_secret(bits: &[bool], key: &SecretKey, eig: &EigenSystem, seed: u64) -> Result<Codebook> {
    if bits.len() != key.len() {
        return Err(Error::invalid(format!(
            "{} bits for a key with {} entries",
            bits.len(),
            key.len()
        )));
    }
    let basis = check_spec(key, eig)?;
    let device_states = bits
        .par_iter()
        .zip(key.entries.par_iter())
        .enumerate()
        .map(|(i, (&bit, entry))| {
            if bit {
                let spec = key.spec.clone().with_revival_site(entry.site)?;
                Ok(build_revival(eig, entry.t_star, &spec)?.state)
            } else {
                let mut r = rng::substream(seed, i as u64, 0);
                thermal_reservoir_state(eig, &basis, entry.site, &mut r)
            }
        })
        .collect::<Result<_>>()?;
    Ok(Codebook { device_states })
}

/// Outcome distribution of `S^z_site`, indexed by level (`g-1` is `m = +S`).
pub fn born_probabilities(state: &QuantumState, basis: &Basis, site: usize) -> Result<Vec<f64>> {
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: state.dim(),
        });
    }
    if site < 1 || site > basis.length() {
        return Err(Error::OutOfRange {
            what: "site",
            value: site as i64,
            min: 1,
            max: basis.length() as i64,
        });
    }
    if !state.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sqr: state.norm_sqr(),
        });
    }
    let mut p = vec![0.0; basis.local_dim()];
    for (pos, z) in state.amplitudes().iter().enumerate() {
        p[basis.level(pos, site)] += z.norm_sqr();
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

fn sample_level<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (level, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = level;
        acc += p;
        if u < acc {
            return level;
        }
    }
    last
}

/// `S^z / S` for a level.
pub fn level_value(level: usize, two_s: usize) -> f64 {
    (2.0 * level as f64 - two_s as f64) / two_s as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: usize,
    pub collapsed: QuantumState,
}

/// Projective measurement of `S^z_site`: sample a level, project, renormalize.
pub fn projective_measure<R: Rng + ?Sized>(
    state: &QuantumState,
    basis: &Basis,
    site: usize,
    rng: &mut R,
) -> Result<Measurement> {
    let p = born_probabilities(state, basis, site)?;
    let outcome = sample_level(&p, rng);
    let mut collapsed = state.clone();
    for (pos, z) in collapsed.amplitudes_mut().iter_mut().enumerate() {
        if basis.level(pos, site) != outcome {
            *z = Default::default();
        }
    }
    collapsed.normalize()?;
    Ok(Measurement { outcome, collapsed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub bits: Vec<bool>,
    pub per_bit_estimate: Vec<f64>,
    pub per_bit_stderr: Vec<f64>,
}

/// Reads every device at its key entry. Copy `j` of device `i` draws its
/// outcome from `substream(seed, i, j)`.
pub fn decode_with_key(codebook: &Codebook, key: &SecretKey, eig: &EigenSystem, seed: u64) -> Result<Decoded> {
    if codebook.len() != key.len() {
        return Err(Error::invalid(format!(
            "codebook has {} devices, key has {} entries",
            codebook.len(),
            key.len()
        )));
    }
    let basis = check_spec(key, eig)?;
    let two_s = key.spec.two_s();
    let per_device: Vec<(f64, f64)> = codebook
        .device_states
        .par_iter()
        .zip(key.entries.par_iter())
        .enumerate()
        .map(|(i, (state, entry))| {
            let evolved = eig.evolve(state, entry.t_star)?.normalized()?;
            let p = born_probabilities(&evolved, &basis, entry.site)?;
            let outcomes: Vec<f64> = (0..key.n_copies)
                .map(|j| {
                    let mut r = rng::substream(seed, i as u64, j as u64);
                    level_value(sample_level(&p, &mut r), two_s)
                })
                .collect();
            Ok(stats::mean_stderr(&outcomes))
        })
        .collect::<Result<_>>()?;
    Ok(Decoded {
        bits: per_device.iter().map(|&(m, _)| m >= key.threshold).collect(),
        per_bit_estimate: per_device.iter().map(|p| p.0).collect(),
        per_bit_stderr: per_device.iter().map(|p| p.1).collect(),
    })
}

/// Ensemble mean of `<S^z_l(t*)>/S` for a reviving state whose revival site
/// `l` is projectively measured at `t_measure` first. Trial `k` uses
/// `substream(seed, 0, k)`.
pub fn premature_measurement(
    eig: &EigenSystem,
    construction: &RevivalConstruction,
    t_measure: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let t_star = construction.t_star;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if !(t_measure >= 0.0 && t_measure <= t_star) {
        return Err(Error::invalid("measurement must happen within [0, t*]"));
    }
    let site = construction.spec.revival_site();
    let probe = SpinProbe::new(&construction.spec)?;
    let basis = probe.basis();
    let at_measure = eig.evolve(&construction.state, t_measure)?.normalized()?;
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::substream(seed, 0, k as u64);
            let m = projective_measure(&at_measure, basis, site, &mut r)?;
            probe.sz(&eig.evolve(&m.collapsed, t_star - t_measure)?, site)
        })
        .collect::<Result<_>>()?;
    Ok(stats::mean_stderr(&values).0)
}
