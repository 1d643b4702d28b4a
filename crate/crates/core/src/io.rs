//! File formats and small text parsers.
//!
//! * state file `aclr-state-v1`: `{"format", "spec", "amplitudes": [[re, im], ...]}`
//! * revival file `aclr-revival-v1`: a state file plus construction diagnostics
//! * key file `aclr-key-v1`: `{"format", "spec", "n_copies", "threshold", "entries"}`
//! * codebook: JSON array of state files
//! * observable series: CSV `t,sx,sy,sz`

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chrono::{Codebook, KeyEntry, SecretKey};
use crate::error::{Error, Result};
use crate::evolution::{ObservableSeries, QuantumState};
use crate::model::{BasisIndex, ChainSpec};
use crate::revival::RevivalConstruction;

pub const STATE_FORMAT: &str = "aclr-state-v1";
pub const REVIVAL_FORMAT: &str = "aclr-revival-v1";
pub const KEY_FORMAT: &str = "aclr-key-v1";

/// Upper bound on the number of points a time grid may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

fn check_format(found: &str, expected: &'static str) -> Result<()> {
    if found != expected {
        return Err(Error::format(expected, format!("unexpected format tag {found:?}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    format: String,
    spec: ChainSpec,
    amplitudes: Vec<[f64; 2]>,
}

/// A state together with the chain it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub spec: ChainSpec,
    pub state: QuantumState,
}

impl StateFile {
    pub fn new(spec: ChainSpec, state: QuantumState) -> Result<Self> {
        let dim = spec.dim()?;
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: state.dim(),
            });
        }
        Ok(Self { spec, state })
    }

    fn to_record(&self) -> StateRecord {
        StateRecord {
            format: STATE_FORMAT.into(),
            spec: self.spec.clone(),
            amplitudes: self.state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    fn from_record(r: StateRecord, max_dim: usize) -> Result<Self> {
        check_format(&r.format, STATE_FORMAT)?;
        let spec = r.spec.with_max_dim(max_dim);
        let dim = spec.dim()?;
        if r.amplitudes.len() != dim {
            return Err(Error::format(
                STATE_FORMAT,
                format!("expected {dim} amplitudes, found {}", r.amplitudes.len()),
            ));
        }
        if r.amplitudes.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::format(STATE_FORMAT, "non-finite amplitude"));
        }
        let amps = r.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(Self {
            spec,
            state: QuantumState::new(amps),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    /// Parses a state file, rejecting chains larger than `max_dim`.
    pub fn from_json(s: &str, max_dim: usize) -> Result<Self> {
        Self::from_record(serde_json::from_str(s)?, max_dim)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RevivalRecord {
    format: String,
    state: StateRecord,
    t_star: f64,
    xi: f64,
    residual: f64,
    designated_index: BasisIndex,
    overlap_at_tstar: f64,
}

/// Serialized summary of a [`RevivalConstruction`].
#[derive(Debug, Clone, PartialEq)]
pub struct RevivalFile {
    pub state: StateFile,
    pub t_star: f64,
    pub xi: f64,
    pub residual: f64,
    pub designated_index: BasisIndex,
    pub overlap_at_tstar: f64,
}

impl RevivalFile {
    pub fn from_construction(c: &RevivalConstruction) -> Result<Self> {
        Ok(Self {
            state: StateFile::new(c.spec.clone(), c.state.clone())?,
            t_star: c.t_star,
            xi: c.xi,
            residual: c.residual,
            designated_index: c.designated_index,
            overlap_at_tstar: c.overlap_at_tstar,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&RevivalRecord {
            format: REVIVAL_FORMAT.into(),
            state: self.state.to_record(),
            t_star: self.t_star,
            xi: self.xi,
            residual: self.residual,
            designated_index: self.designated_index,
            overlap_at_tstar: self.overlap_at_tstar,
        })?)
    }

    pub fn from_json(s: &str, max_dim: usize) -> Result<Self> {
        let r: RevivalRecord = serde_json::from_str(s)?;
        check_format(&r.format, REVIVAL_FORMAT)?;
        let state = StateFile::from_record(r.state, max_dim)?;
        let dim = state.spec.dim()?;
        if r.designated_index.0 < 1 || r.designated_index.0 > dim {
            return Err(Error::format(REVIVAL_FORMAT, "designated index out of range"));
        }
        if !(r.t_star > 0.0 && r.t_star.is_finite()) {
            return Err(Error::format(REVIVAL_FORMAT, "t_star must be positive"));
        }
        Ok(Self {
            state,
            t_star: r.t_star,
            xi: r.xi,
            residual: r.residual,
            designated_index: r.designated_index,
            overlap_at_tstar: r.overlap_at_tstar,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyRecord {
    format: String,
    spec: ChainSpec,
    n_copies: usize,
    threshold: f64,
    entries: Vec<KeyEntry>,
}

pub fn key_to_json(key: &SecretKey) -> Result<String> {
    Ok(serde_json::to_string_pretty(&KeyRecord {
        format: KEY_FORMAT.into(),
        spec: key.spec().clone(),
        n_copies: key.n_copies(),
        threshold: key.threshold(),
        entries: key.entries().to_vec(),
    })?)
}

pub fn key_from_json(s: &str, max_dim: usize) -> Result<SecretKey> {
    let r: KeyRecord = serde_json::from_str(s)?;
    check_format(&r.format, KEY_FORMAT)?;
    let spec = r.spec.with_max_dim(max_dim);
    spec.dim()?;
    SecretKey::with_options(spec, r.entries, r.n_copies, r.threshold)
        .map_err(|e| Error::format(KEY_FORMAT, e.to_string()))
}

pub fn codebook_to_json(spec: &ChainSpec, book: &Codebook) -> Result<String> {
    let records = book
        .device_states
        .iter()
        .map(|s| Ok(StateFile::new(spec.clone(), s.clone())?.to_record()))
        .collect::<Result<Vec<_>>>()?;
    Ok(serde_json::to_string(&records)?)
}

/// Parses a codebook; every device must live on the same chain.
pub fn codebook_from_json(s: &str, max_dim: usize) -> Result<(ChainSpec, Codebook)> {
    let records: Vec<StateRecord> = serde_json::from_str(s)?;
    let mut spec: Option<ChainSpec> = None;
    let mut device_states = Vec::with_capacity(records.len());
    for r in records {
        let file = StateFile::from_record(r, max_dim)?;
        match &spec {
            None => spec = Some(file.spec.clone()),
            Some(first) if *first != file.spec => {
                return Err(Error::format("codebook", "devices disagree on the chain"));
            }
            Some(_) => {}
        }
        device_states.push(file.state);
    }
    let spec = spec.ok_or_else(|| Error::format("codebook", "no devices"))?;
    Ok((spec, Codebook { device_states }))
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const CSV_DIGITS: usize = 12;

/// CSV with a header row; every value printed with 12 significant digits.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_sig(x, CSV_DIGITS)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn series_csv(series: &ObservableSeries) -> String {
    csv_table(
        &["t", "sx", "sy", "sz"],
        (0..series.len()).map(|i| vec![series.times[i], series.sx[i], series.sy[i], series.sz[i]]),
    )
}

/// Reads back a `t,sx,sy,sz` table.
pub fn parse_series_csv(s: &str, site: usize) -> Result<ObservableSeries> {
    let mut lines = s.lines();
    if lines.next() != Some("t,sx,sy,sz") {
        return Err(Error::format("series csv", "missing header"));
    }
    let mut out = ObservableSeries {
        site,
        times: vec![],
        sx: vec![],
        sy: vec![],
        sz: vec![],
    };
    for (n, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::format("series csv", format!("row {}: {e}", n + 1)))?;
        let [t, x, y, z] = cells[..] else {
            return Err(Error::format(
                "series csv",
                format!("row {} has {} cells", n + 1, cells.len()),
            ));
        };
        out.times.push(t);
        out.sx.push(x);
        out.sy.push(y);
        out.sz.push(z);
    }
    Ok(out)
}

/// Inclusive grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if !(step > 0.0) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        if stop < start {
            return Err(Error::invalid(format!("grid stop {stop} is below start {start}")));
        }
        let grid = Self { start, stop, step };
        if ((stop - start) / step) >= MAX_GRID_POINTS as f64 {
            return Err(Error::invalid(format!("grid exceeds {MAX_GRID_POINTS} points")));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        // tolerate rounding in (stop - start) / step
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for TimeGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(Error::invalid(format!("expected start:stop:step, got {s:?}")));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad number {x:?}: {e}")))
        };
        Self::new(num(a)?, num(b)?, num(c)?)
    }
}

/// Comma-separated list of numbers, for example `3.5,7.0`.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(Error::invalid("empty list"));
    }
    s.split(',')
        .map(|x| {
            let v = x
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad number {x:?}: {e}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::invalid(format!("non-finite value {x:?}")))
            }
        })
        .collect()
}

/// A grid `start:stop:step` or an explicit list.
pub fn parse_grid_or_list(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        Ok(s.parse::<TimeGrid>()?.points())
    } else {
        parse_list(s)
    }
}

/// Pretty JSON with a trailing newline.
pub fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    writeln!(s).expect("writing to a String");
    Ok(s)
}
