use std::path::PathBuf;

use aclr::io::{parse_grid_or_list, parse_list, TimeGrid};
use aclr::model::DEFAULT_MAX_DIM;
use aclr::{ChainSpec, Couplings};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "aclr",
    version,
    about = "Almost complete local revivals in periodic spin chains"
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: one per core).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Polarized site plus infinite-temperature reservoir.
    Thermal(ThermalArgs),
    /// State that revives at `--t-star`.
    Revive(ReviveArgs),
    /// Equal-weight superposition of states reviving at several times.
    Superpose(SuperposeArgs),
    /// Revival at one time for several spin values.
    HigherSpin(HigherSpinArgs),
    /// Two-branch superposition `|psi> + U(-t*)|psi>`.
    Dymarsky(DymarskyArgs),
    /// Perturbation sweep of the preparation benchmark.
    Sweep(SweepArgs),
    /// Momentum-resolved level statistics.
    Spectra(SpectraArgs),
    /// Random key for the delayed-reveal protocol.
    Keygen(KeygenArgs),
    /// Encode a bit string into device states.
    Encode(EncodeArgs),
    /// Read a codebook back with a key.
    Decode(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Number of sites.
    #[arg(long, default_value_t = 10)]
    pub length: usize,
    /// Twice the spin (1 for spin-1/2).
    #[arg(long = "two-s", default_value_t = 1)]
    pub two_s: usize,
    #[arg(long, default_value_t = Couplings::REFERENCE.jx, allow_hyphen_values = true)]
    pub jx: f64,
    #[arg(long, default_value_t = Couplings::REFERENCE.jy, allow_hyphen_values = true)]
    pub jy: f64,
    #[arg(long, default_value_t = Couplings::REFERENCE.hx, allow_hyphen_values = true)]
    pub hx: f64,
    #[arg(long, default_value_t = Couplings::REFERENCE.hy, allow_hyphen_values = true)]
    pub hy: f64,
    /// Site whose magnetization is tracked (1-based).
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    #[command(flatten)]
    pub cap: CapArgs,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Largest Hilbert-space dimension accepted.
    #[arg(long, env = "ACLR_MAX_DIM", default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
}

impl ChainArgs {
    pub fn spec(&self) -> aclr::Result<ChainSpec> {
        self.spec_with(self.length, self.two_s)
    }

    pub fn spec_with(&self, length: usize, two_s: usize) -> aclr::Result<ChainSpec> {
        let spec = ChainSpec::new(length, two_s)?
            .with_couplings(Couplings {
                jx: self.jx,
                jy: self.jy,
                hx: self.hx,
                hy: self.hy,
            })?
            .with_revival_site(self.site)?
            .with_max_dim(self.cap.max_dim);
        spec.dim()?;
        Ok(spec)
    }
}

/// Comma list parsed as one argument value.
pub type Numbers = Vec<f64>;
pub type Integers = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Format of observable series.
    #[arg(long, value_enum, default_value_t = SeriesFormat::Csv)]
    pub format: SeriesFormat,
}

fn time_grid(s: &str) -> Result<TimeGrid, String> {
    s.parse::<TimeGrid>().map_err(|e| e.to_string())
}

fn number_list(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s).map_err(|e| e.to_string())
}

fn grid_or_list(s: &str) -> Result<Vec<f64>, String> {
    parse_grid_or_list(s).map_err(|e| e.to_string())
}

fn usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad integer {x:?}: {e}")))
        .collect()
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("expected a positive number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct TimesArgs {
    /// Sample times as `start:stop:step` (inclusive).
    #[arg(long, default_value = "0:10:0.05", value_parser = time_grid)]
    pub times: TimeGrid,
}

#[derive(Debug, Args)]
pub struct ThermalArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub times: TimesArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReviveArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long = "t-star", default_value_t = 5.0, value_parser = positive)]
    pub t_star: f64,
    /// Row of the down block that carries the drive (0 = first row).
    #[arg(long, default_value_t = 0)]
    pub designated_row: usize,
    #[command(flatten)]
    pub times: TimesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SuperposeArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Revival times, comma separated.
    #[arg(long = "t-stars", default_value = "3.5,7.0", value_parser = number_list)]
    pub t_stars: Numbers,
    #[command(flatten)]
    pub times: TimesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct HigherSpinArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Values of 2S, comma separated.
    #[arg(long = "two-s-list", default_value = "1,2,3,4", value_parser = usize_list)]
    pub two_s_list: Integers,
    /// Chain length for each entry of `--two-s-list`.
    #[arg(long = "lengths", default_value = "10,7,5,5", value_parser = usize_list)]
    pub lengths: Integers,
    #[arg(long = "t-star", default_value_t = 5.0, value_parser = positive)]
    pub t_star: f64,
    #[command(flatten)]
    pub times: TimesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DymarskyArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long = "t-star", default_value_t = 5.0, value_parser = positive)]
    pub t_star: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub times: TimesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long = "t-star", default_value_t = 5.0, value_parser = positive)]
    pub t_star: f64,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u32).range(1..))]
    pub realizations: u32,
    /// Perturbation strengths: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:3.5:0.5", value_parser = grid_or_list)]
    pub lambdas: Numbers,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Polynomial degree of the unfolding fit.
    #[arg(long, default_value_t = aclr::spectra::DEFAULT_UNFOLD_DEGREE)]
    pub degree: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Number of key entries (bits).
    #[arg(long, default_value_t = 8)]
    pub q: usize,
    #[arg(long, default_value_t = 4.0, value_parser = positive)]
    pub t_min: f64,
    #[arg(long, default_value_t = 8.0, value_parser = positive)]
    pub t_max: f64,
    #[arg(long, default_value_t = aclr::chrono::DEFAULT_COPIES)]
    pub copies: usize,
    #[arg(long, default_value_t = aclr::chrono::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Secret as a string of 0 and 1.
    #[arg(long)]
    pub bits: String,
    /// Key file.
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Key file.
    #[arg(long)]
    pub key: PathBuf,
    /// Directory holding `codebook.json`.
    #[arg(long)]
    pub book: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub cap: CapArgs,
    #[command(flatten)]
    pub out: OutArgs,
}
