//! `ssk`: design, tabulate, analyse, simulate and certify SSK-family alphabets.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use ssk_core::framing::ArqMode;
use ssk_core::sim::Scheme;

/// Exit status for a request that cannot be satisfied (rate, code, limits).
const EXIT_INFEASIBLE: u8 = 2;
/// Exit status when a simulation point hit the frame cap first.
const EXIT_UNRELIABLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ssk",
    version,
    about = "Energy-efficient space-shift-keying design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the minimum-power prior design and print the solution.
    Design(DesignArgs),
    /// Print the prefix codebook (source bits to activation pattern).
    Table(TableArgs),
    /// Pairwise error probability of one symbol pair.
    Pep(PepArgs),
    /// Analytical symbol-error prediction over an SNR grid (CSV).
    SerEstimate(SerArgs),
    /// Monte Carlo link simulation over an Eb/N0 grid (CSV).
    Simulate(SimulateArgs),
    /// Achieved and optimum power against rate for several schemes (CSV).
    SweepPowerRate(SweepArgs),
    /// Exhaustive distance certification of constant-weight alphabets.
    Verify(VerifyArgs),
}

/// Shared by every subcommand; consumed before parsing.
#[derive(Args, Debug, Clone)]
struct ConfigArg {
    /// Key-value file (`key = value` per line); explicit flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[arg(long)]
    nt: usize,
    #[arg(long, default_value_t = 2)]
    dmin: u32,
    /// RF-chain limit; defaults to the antenna count.
    #[arg(long = "max-rf")]
    max_rf: Option<u32>,
    /// Target entropy in bits per channel use.
    #[arg(long)]
    rate: f64,
    /// Also emit the optimum curve sampled at this many tilts.
    #[arg(long, value_name = "POINTS")]
    locus: Option<usize>,
    /// Write the curve CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum TableLayout {
    /// `source_bits,symbol,weight,prior,achieved`
    #[default]
    Codebook,
    /// `bits_string,weight,prior,codeword`
    Alphabet,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    nt: usize,
    #[arg(long = "max-rf")]
    max_rf: Option<u32>,
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 2)]
    dmin: u32,
    #[arg(long, default_value = "ee-hssk")]
    scheme: Scheme,
    #[arg(long, value_enum, default_value_t)]
    layout: TableLayout,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args, Debug)]
struct PepArgs {
    /// Hamming distance of the pair.
    #[arg(long)]
    d: u32,
    /// Prior log-ratio ln(P_i / P_j).
    #[arg(
        long = "L",
        visible_alias = "log-ratio",
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    log_ratio: f64,
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long)]
    nt: usize,
    #[arg(long)]
    nr: usize,
    /// Numerical integration (default).
    #[arg(long, conflicts_with = "bound")]
    exact: bool,
    /// Closed-form exponential bound; requires L >= 0.
    #[arg(long)]
    bound: bool,
    /// Drop the 1/N_T factor in the distance scaling.
    #[arg(long = "no-nt-norm")]
    no_nt_norm: bool,
    #[command(flatten)]
    config: ConfigArg,
}

/// Which alphabet a command works on.
#[derive(Args, Debug, Clone)]
struct AlphabetSource {
    /// Alphabet table file (`bits_string,weight,prior,codeword`); overrides the scheme options.
    #[arg(long)]
    alphabet: Option<PathBuf>,
    #[arg(long, default_value = "ee-hssk")]
    scheme: Scheme,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 2)]
    dmin: u32,
    #[arg(long = "max-rf")]
    max_rf: Option<u32>,
}

#[derive(Args, Debug)]
struct SerArgs {
    #[command(flatten)]
    source: AlphabetSource,
    #[arg(long)]
    nr: usize,
    /// Es/N0 grid in dB: `start:stop:step` or a comma list.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: String,
    /// Use the closed-form bound wherever it applies.
    #[arg(long)]
    bound: bool,
    #[arg(long = "no-nt-norm")]
    no_nt_norm: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum MetricChoice {
    /// Noise-scaled log-posterior (MAP).
    #[default]
    Scaled,
    /// Unscaled distance minus log prior.
    Eq5,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    scheme: Scheme,
    #[arg(long)]
    nt: usize,
    /// Receive antennas; defaults to the transmit count.
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 2)]
    dmin: u32,
    #[arg(long = "max-rf")]
    max_rf: Option<u32>,
    /// Eb/N0 grid in dB: `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: String,
    #[arg(long = "frame-bits", default_value_t = ssk_core::framing::DEFAULT_FRAME_BITS)]
    frame_bits: usize,
    #[arg(long = "min-frame-errors", default_value_t = ssk_core::sim::DEFAULT_MIN_FRAME_ERRORS)]
    min_frame_errors: u64,
    #[arg(long = "max-frames", default_value_t = ssk_core::sim::DEFAULT_MAX_FRAMES)]
    max_frames: u64,
    /// Random seed; the SSK_SEED environment variable takes precedence.
    #[arg(long)]
    seed: Option<u64>,
    /// Retransmission of flagged frames: off, paper or real.
    #[arg(long, default_value = "off")]
    arq: ArqMode,
    /// Redraw the channel once per frame instead of once per symbol.
    #[arg(long = "block-fading")]
    block_fading: bool,
    #[arg(long, value_enum, default_value_t)]
    metric: MetricChoice,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    nt: usize,
    #[arg(long, default_value_t = 2)]
    dmin: u32,
    /// RF-chain limits for the optimized curves, comma separated.
    #[arg(long = "max-rf", value_delimiter = ',')]
    max_rf: Vec<u32>,
    /// Rate grid in bits: `start:stop:step` or a comma list.
    #[arg(long)]
    rates: String,
    #[arg(long, value_delimiter = ',', default_value = "ssk,gssk,hssk,ee-hssk")]
    schemes: Vec<Scheme>,
    #[arg(long = "locus-points", default_value_t = 100)]
    locus_points: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    nt: usize,
    /// Restrict the checks to one number of active antennas.
    #[arg(long)]
    ntx: Option<usize>,
    /// Also certify the minimum distance of the fixed-weight alphabet of this rate.
    #[arg(long)]
    rate: Option<u32>,
    /// Largest weight class searched exhaustively.
    #[arg(long = "node-budget", default_value_t = ssk_core::gssk_props::DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    /// Write the bounds CSV here instead of after the report.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

/// Raised when statistics are flagged unreliable; output is still written.
#[derive(Debug)]
struct Unreliable(String);

impl std::fmt::Display for Unreliable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unreliable statistics: {}", self.0)
    }
}

impl std::error::Error for Unreliable {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use ssk_core::Error as E;
    if err.downcast_ref::<Unreliable>().is_some() {
        return EXIT_UNRELIABLE;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::RateInfeasible(_)
            | E::InvalidCode(_)
            | E::InvalidProblem(_)
            | E::DegenerateAlphabet(_)
            | E::Unsupported(_)
            | E::BudgetExceeded { .. },
        ) => EXIT_INFEASIBLE,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::merge_config(&Cli::command(), raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = Cli::parse_from(args);
    let result = match cli.command {
        Command::Design(a) => commands::design(a),
        Command::Table(a) => commands::table(a),
        Command::Pep(a) => commands::pep(a),
        Command::SerEstimate(a) => commands::ser_estimate(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::SweepPowerRate(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
