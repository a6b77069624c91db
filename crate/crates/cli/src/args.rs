use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "rabi",
    version,
    about = "Variational and exact ground states of the quantum Rabi model"
)]
pub struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, env = "RABI_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(flatten)]
    pub run: RunSettings,

    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every command; recorded in the manifest.
#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct RunSettings {
    /// Worker threads for grid work; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Grid output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Recorded for provenance; every algorithm is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Optimizer energy tolerance in units of max(ω, Ω).
    #[arg(long, global = true)]
    pub tol_energy: Option<f64>,

    /// Optimizer simplex size tolerance.
    #[arg(long, global = true)]
    pub tol_param: Option<f64>,

    /// Objective evaluations per optimizer start.
    #[arg(long, global = true)]
    pub max_evals: Option<usize>,

    /// Relative energy change accepted between ED cutoffs.
    #[arg(long, global = true)]
    pub ed_tol: Option<f64>,

    /// Largest ED photon cutoff.
    #[arg(long, global = true)]
    pub ed_n_max_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Single parameter point; writes solve.json.
    #[command(allow_negative_numbers = true)]
    Solve(SolveArgs),
    /// Coupling sweep at fixed ω/Ω; writes sweep.csv.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Grid over (ω/Ω, g/g_c) with boundary curves.
    #[command(allow_negative_numbers = true)]
    Diagram(DiagramArgs),
    /// Effective potential of one spin component.
    #[command(allow_negative_numbers = true)]
    Potential(PotentialArgs),
    /// Spin-resolved wavefunction amplitudes.
    #[command(allow_negative_numbers = true)]
    Wavefunction(WavefunctionArgs),
    /// Product ansatz for several oscillator modes.
    #[command(allow_negative_numbers = true)]
    Multimode(MultimodeArgs),
    /// Exact spectrum and ground observables.
    #[command(allow_negative_numbers = true)]
    Ed(EdArgs),
    /// Repeat a run from its manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Variational,
    Ed,
    Both,
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ParityArg {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SpinArg {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Variational,
    Ed,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct PointArgs {
    /// Oscillator frequency ω.
    #[arg(long)]
    pub omega: f64,
    /// Level splitting Ω.
    #[arg(long = "Omega", default_value_t = 1.0)]
    pub big_omega: f64,
    /// Coupling g.
    #[arg(long)]
    pub g: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SolveArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = Method::Variational)]
    pub method: Method,
    /// Oscillator level of the trial packets.
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Parity sector; defaults to the lower member of the level's doublet.
    #[arg(long, value_enum)]
    pub parity: Option<ParityArg>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub g_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub g_max: f64,
    #[arg(long, default_value_t = 40)]
    pub g_points: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SweepArgs {
    /// ω/Ω.
    #[arg(long)]
    pub omega_ratio: f64,
    #[arg(long = "Omega", default_value_t = 1.0)]
    pub big_omega: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Read the g range in units of g_c.
    #[arg(long)]
    pub relative: bool,
    /// Attach exact-diagonalization columns.
    #[arg(long)]
    pub with_ed: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct DiagramArgs {
    /// Explicit ω/Ω values, comma separated; overrides the ratio range.
    #[arg(long, value_delimiter = ',')]
    pub omega_ratio: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub ratio_min: f64,
    #[arg(long, default_value_t = 0.6)]
    pub ratio_max: f64,
    #[arg(long, default_value_t = 20)]
    pub ratio_points: usize,
    /// Lowest g/g_c.
    #[arg(long, default_value_t = 0.05)]
    pub g_min: f64,
    /// Highest g/g_c.
    #[arg(long, default_value_t = 2.0)]
    pub g_max: f64,
    #[arg(long, default_value_t = 20)]
    pub g_points: usize,
    #[arg(long = "Omega", default_value_t = 1.0)]
    pub big_omega: f64,
    #[arg(long)]
    pub with_ed: bool,
    /// Skip the numerical boundary searches.
    #[arg(long)]
    pub no_boundaries: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct XGridArgs {
    /// Grid limits; default ±(g′ + 5).
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 401)]
    pub x_points: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct PotentialArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = Source::Variational)]
    pub source: Source,
    #[arg(long, value_enum, default_value_t = SpinArg::Up)]
    pub spin: SpinArg,
    /// Use the self-consistent well conditions instead of the minimum.
    #[arg(long)]
    pub self_consistent: bool,
    #[command(flatten)]
    pub x: XGridArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Append the exact ground amplitudes.
    #[arg(long)]
    pub with_ed: bool,
    #[command(flatten)]
    pub x: XGridArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct MultimodeArgs {
    /// Modes as omega:g pairs, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "modes_file")]
    pub modes: Vec<String>,
    /// CSV file with one omega,g row per mode.
    #[arg(long)]
    pub modes_file: Option<PathBuf>,
    #[arg(long = "Omega", default_value_t = 1.0)]
    pub big_omega: f64,
    /// Mode whose coupling is swept (zero based).
    #[arg(long, default_value_t = 0)]
    pub sweep_mode: usize,
    /// Coupling range of the swept mode; omitted keeps the listed value.
    #[arg(long)]
    pub g_min: Option<f64>,
    #[arg(long)]
    pub g_max: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub g_points: usize,
    /// Two-mode exact reference per point.
    #[arg(long)]
    pub with_ed: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct EdArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Fixed initial photon cutoff.
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Args, PartialEq)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
}
