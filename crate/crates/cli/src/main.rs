//! `phasequant`: command-line driver for the phase-operator analyses.
//!
//! Exit codes: 0 on success, 1 when a computation or check fails, 2 for bad
//! flags. `PHASEQUANT_THREADS` caps the worker pool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{usage, OutputArgs, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "phasequant",
    version,
    about = "Phase operators for the positive discrete series of SO(1,2)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaChoice {
    /// ω = 1
    PlusOne,
    /// ω = i
    ImaginaryUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupChoice {
    Universal,
    Su11,
    So12,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorChoice {
    K3,
    Kplus,
    Kminus,
    K1,
    K2,
    Casimir,
    Cos,
    Sin,
}

#[derive(Debug, Clone, Args)]
pub struct LabelArgs {
    /// Bargmann index.
    #[arg(long)]
    pub k: f64,
    #[arg(long, value_enum, default_value_t = OmegaChoice::PlusOne)]
    pub omega: OmegaChoice,
    #[arg(long, value_enum, default_value_t = GroupChoice::Universal)]
    pub group: GroupChoice,
}

#[derive(Debug, Clone, Args)]
pub struct ReprArgs {
    #[command(flatten)]
    pub label: LabelArgs,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = OperatorChoice::K3)]
    pub operator: OperatorChoice,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseSpectrumArgs {
    #[command(flatten)]
    pub label: LabelArgs,
    #[arg(long, default_value_t = 2000)]
    pub dim: usize,
    /// Write the diagonals of [cos,sin] and cos²+sin² instead of eigenvalues.
    #[arg(long)]
    pub diagonal: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KGridArgs {
    /// Explicit comma-separated values, increasing.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["k_min", "k_max", "k_step"])]
    pub k: Vec<f64>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub k_step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GroundVarianceArgs {
    #[command(flatten)]
    pub grid: KGridArgs,
    /// Truncation for the matrix route.
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KboundScanArgs {
    #[command(flatten)]
    pub grid: KGridArgs,
    #[arg(long, default_value_t = 0.01)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub rho_max: f64,
    /// Log-spaced points between rho-min and rho-max.
    #[arg(long, default_value_t = 200)]
    pub rho_points: usize,
    /// Also write the per-k verdicts as JSON here.
    #[arg(long)]
    pub verdicts: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoherentArgs {
    #[arg(long)]
    pub k: f64,
    /// Comma-separated moduli, increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompletenessArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 20.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OscillatorMode {
    /// Commutator residuals of all five realizations.
    Residuals,
    /// h1, h2 on a grid of |α|.
    HCurve,
    /// Holstein-Primakoff vs Susskind-Glogower vs Dirac phase operators.
    Compare,
}

#[derive(Debug, Clone, Args)]
pub struct OscillatorArgs {
    #[arg(long)]
    pub k: f64,
    #[arg(long, value_enum, default_value_t = OscillatorMode::Residuals)]
    pub mode: OscillatorMode,
    /// Fock truncation; a perfect square is needed for the two-mode residual.
    #[arg(long, default_value_t = 256)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub margin: usize,
    #[arg(long, default_value_t = 20.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 200)]
    pub r_points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TwoModeArgs {
    #[arg(long, default_value_t = 24)]
    pub dim_per_mode: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Number,
    Bg,
}

#[derive(Debug, Clone, Args)]
pub struct NfmSimArgs {
    /// JSON run configuration; replaces the state flags below.
    #[arg(long, conflicts_with_all = ["state", "k", "n", "rho", "phi", "noise", "trials", "seed"])]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Relative Gaussian noise on each reading.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run a single module.
    #[arg(long)]
    pub module: Option<String>,
    /// Write the outcomes as JSON here.
    #[arg(long, short)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncated generator or phase-operator matrix.
    Repr(ReprArgs),
    /// Eigenvalues of the truncated cos operator.
    PhaseSpectrum(PhaseSpectrumArgs),
    /// Ground-state phase variance, closed form and matrix route.
    GroundVariance(GroundVarianceArgs),
    /// Sup over ρ of g/I per k, with BOUNDED/EXCEEDS verdicts.
    KboundScan(KboundScanArgs),
    /// Coherent-state expectation values.
    Coherent(CoherentArgs),
    /// Resolution-of-identity check on number states.
    Completeness(CompletenessArgs),
    /// Bosonic realizations.
    Oscillator(OscillatorArgs),
    /// Sector table of the two-mode realization.
    TwoMode(TwoModeArgs),
    /// Interference-reading simulation and reconstruction.
    NfmSim(NfmSimArgs),
    /// Run the invariant self-checks.
    VerifyAll(VerifyArgs),
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("PHASEQUANT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("PHASEQUANT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli, flags: String) -> anyhow::Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Repr(a) => commands::repr(a, flags),
        Command::PhaseSpectrum(a) => commands::phase_spectrum(a, flags),
        Command::GroundVariance(a) => commands::ground_variance(a, flags),
        Command::KboundScan(a) => commands::kbound_scan(a, flags),
        Command::Coherent(a) => commands::coherent(a, flags),
        Command::Completeness(a) => commands::completeness(a, flags),
        Command::Oscillator(a) => commands::oscillator(a, flags),
        Command::TwoMode(a) => commands::two_mode(a, flags),
        Command::NfmSim(a) => commands::nfm_sim(a, flags),
        Command::VerifyAll(a) => commands::verify_all(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    // the flags as given, for the output header
    let flags = std::env::args().skip(2).collect::<Vec<_>>().join(" ");
    match run(cli, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
