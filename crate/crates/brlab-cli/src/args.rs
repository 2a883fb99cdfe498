use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "brlab", version, about = "Rough convex domains and Bochner-Riesz experiments")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for sweeps over independent scales.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Directory against which relative output paths are resolved.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Build a domain and write it with a metadata sidecar.
    Construct(ConstructArgs),
    /// Boundary decomposition at one scale.
    Decompose(DecomposeArgs),
    /// Cap covering numbers over a list of scales.
    Cover(CoverArgs),
    /// Fitted growth exponent of the covering number.
    Kappa(KappaArgs),
    /// Overlap measurements for a Cantor or AP domain.
    Energy(EnergyArgs),
    /// Largest multiplicity of the n-fold sumset of an interval family.
    Sumset(SumsetArgs),
    /// Maximal operator norm probe.
    Maximal(MaximalArgs),
    /// Kernel L^1 norms of the smoothed multiplier.
    Kernel(KernelArgs),
    /// Randomized lower-bound experiment.
    Khinchine(KhinchineArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DomainKind {
    Cantor,
    Ap,
    Disk,
    Square,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub kind: DomainKind,
    /// Order of the sum-free condition (cantor).
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Number of construction levels (cantor, ap).
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, default_value_t = 4)]
    pub base_shift: u32,
    /// Branching multiplier (cantor).
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.25)]
    pub kappa: f64,
    /// Vertical scale of the AP profile.
    #[arg(long, default_value_t = 16.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 4.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 1 << 16)]
    pub sides: usize,
    #[arg(long, default_value_t = 5.0)]
    pub half_side: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: String,
    #[arg(long, default_value_t = 0.0)]
    pub rotation: f64,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Comma-separated scales; `2^-e` terms and `2^-a..2^-b` ranges are accepted.
    #[arg(long, allow_hyphen_values = true)]
    pub deltas: String,
    /// Rotations used by the rotation-sum proxy.
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CoverKind {
    Caps,
    Rotation,
}

#[derive(Debug, Args, Serialize)]
pub struct KappaArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub deltas: String,
    #[arg(long, value_enum, default_value_t = CoverKind::Caps)]
    pub mode: CoverKind,
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EnergyArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub deltas: String,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PathKind {
    Enumerate,
    Convolve,
}

#[derive(Debug, Args, Serialize)]
pub struct SumsetArgs {
    /// JSON file: `{"denom": D, "intervals": [[a, b], ...]}` with integer endpoints over D.
    #[arg(long)]
    pub intervals: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = PathKind::Convolve)]
    pub path: PathKind,
    /// Largest number of multisets the enumeration path may visit.
    #[arg(long, default_value_t = 100_000_000)]
    pub budget: u128,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum TestKind {
    Ball,
    Bush,
    RandomSparse,
}

#[derive(Debug, Args, Serialize)]
pub struct MaximalArgs {
    /// One of `equispaced N`, `lacunary L`, `domain FILE`, `cantor-angles FILE`.
    /// For `equispaced`, N may be `auto` to use round(1/δ) directions.
    #[arg(long, num_args = 2, value_names = ["KIND", "VALUE"])]
    pub directions: Vec<String>,
    /// One or more scales; with several, the best ratios are fitted against 1/δ.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Grid points per side; defaults to the next power of two above 4/δ.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [TestKind::Ball, TestKind::Bush, TestKind::RandomSparse])]
    pub tests: Vec<TestKind>,
    #[arg(long, default_value_t = 2e10)]
    pub budget: f64,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum BumpKind {
    Polynomial,
    SmoothedTent,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub deltas: String,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    /// Frequency window relative to the smallest one containing the domain.
    #[arg(long, default_value_t = 1.05)]
    pub oversample: f64,
    #[arg(long, value_enum, default_value_t = BumpKind::Polynomial)]
    pub bump: BumpKind,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KhinchineArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: String,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long)]
    pub json: PathBuf,
}
