//! Command-line front end: resolves a simulation configuration from
//! defaults, an optional TOML file, and flag overrides (in that
//! order of increasing precedence), runs the requested campaign, and
//! emits versioned CSV or JSON results.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 invalid flags,
//! 3 configuration that violates a model constraint, 4 I/O failure.

mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linksim_core::feedback::SchemeId;
use linksim_core::sim::{asymptotic_experiment, run_campaign, SimConfig, Sweep};

/// SNR grid (linear) for the high-SNR convergence experiment.
const ASYMPTOTIC_RHO_GRID: [f64; 6] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

#[derive(Parser)]
#[command(
    name = "linksim",
    version,
    about = "Link-level Monte Carlo simulator for multiuser MIMO-OFDMA \
             downlink beamforming, limited feedback, and opportunistic scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured schemes at a single operating point.
    Run(SimArgs),
    /// Sweep the terminal count K over 1..=10.
    SweepK(SimArgs),
    /// Sweep the codebook exponent B over {2, 4, 6, 8} plus exact mode.
    SweepB(SimArgs),
    /// Sweep the cluster count G over {4, 8, 16, 32} and G = Q.
    SweepG(SimArgs),
    /// Measure convergence of the reduced-feedback rate toward the
    /// eigen-beamforming rate over an SNR grid of 10^1..10^6.
    Asymptotic(SimArgs),
    /// Run the built-in invariant suite, printing pass/fail per check.
    Selftest,
}

#[derive(Args)]
struct SimArgs {
    /// TOML configuration file; flags override values from the file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Number of subcarriers Q [default: 128]
    #[arg(long, value_name = "Q")]
    subcarriers: Option<usize>,

    /// Number of mobile terminals K [default: 10]
    #[arg(long, value_name = "K")]
    num_mts: Option<usize>,

    /// Codebook exponent B (2^B entries), or "inf" for exact-mode
    /// feedback of the unquantized beamforming matrix [default: 8]
    #[arg(long, value_name = "B")]
    codebook_bits: Option<BitsValue>,

    /// Number of subcarrier clusters G; must divide Q [default: 8]
    #[arg(long, value_name = "G")]
    clusters: Option<usize>,

    /// Operating SNR in dB [default: 10]
    #[arg(long, value_name = "DB")]
    snr_db: Option<f64>,

    /// Monte Carlo trials per sweep point [default: 200]
    #[arg(long, value_name = "N")]
    trials: Option<usize>,

    /// Master seed; identical invocations reproduce byte-identical
    /// results [default: 1]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Scheme to simulate, repeatable (PS-RF-OS, PC-RF-OS, PS-EB-OS,
    /// PC-EB-OS) [default: all four]
    #[arg(long, value_name = "NAME", value_parser = parse_scheme)]
    scheme: Vec<SchemeId>,

    /// Output file; results go to stdout when omitted. Files are
    /// written atomically (temp-then-rename).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

/// A codebook size that is either an exponent or the exact-mode marker.
#[derive(Clone, Copy)]
struct BitsValue(Option<u32>);

impl std::str::FromStr for BitsValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase();
        if norm == "inf" || norm == "exact" {
            return Ok(BitsValue(None));
        }
        norm.parse::<u32>()
            .map(|b| BitsValue(Some(b)))
            .map_err(|_| format!("expected a nonnegative integer or \"inf\", got {s:?}"))
    }
}

fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    s.parse::<SchemeId>().map_err(|e| e.to_string())
}

enum CliError {
    /// A constraint on the resolved configuration is violated (exit 3).
    Invalid(String),
    /// Reading input or writing results failed (exit 4).
    Io(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(args) => campaign(&args, |_| Sweep::None),
        Command::SweepK(args) => campaign(&args, |_| Sweep::MtCount((1..=10).collect())),
        Command::SweepB(args) => campaign(&args, |_| {
            Sweep::CodebookBits(vec![Some(2), Some(4), Some(6), Some(8), None])
        }),
        Command::SweepG(args) => campaign(&args, |cfg| {
            let mut counts: Vec<usize> = [4, 8, 16, 32]
                .into_iter()
                .filter(|&g| g < cfg.num_subcarriers)
                .collect();
            counts.push(cfg.num_subcarriers);
            Sweep::ClusterCount(counts)
        }),
        Command::Asymptotic(args) => asymptotic(&args),
        Command::Selftest => Ok(selftest::run()),
    }
}

fn campaign(args: &SimArgs, sweep_for: impl Fn(&SimConfig) -> Sweep) -> Result<ExitCode, CliError> {
    let cfg = resolve_config(args)?;
    let sweep = sweep_for(&cfg);
    let summary = run_campaign(&cfg, &sweep).map_err(|e| CliError::Invalid(e.to_string()))?;
    let text = match args.format {
        OutputFormat::Csv => output::summary_csv(&summary),
        OutputFormat::Json => output::summary_json(&summary),
    };
    output::deliver(&text, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn asymptotic(args: &SimArgs) -> Result<ExitCode, CliError> {
    let cfg = resolve_config(args)?;
    let points = asymptotic_experiment(&cfg, &ASYMPTOTIC_RHO_GRID)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let text = match args.format {
        OutputFormat::Csv => output::asymptotic_csv(&points),
        OutputFormat::Json => output::asymptotic_json(&points),
    };
    output::deliver(&text, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

/// Builds the effective configuration: defaults, then the config
/// file, then flag overrides; validates the result.
fn resolve_config(args: &SimArgs) -> Result<SimConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<SimConfig>(&text).map_err(|e| {
                CliError::Invalid(format!(
                    "config file {}: {}",
                    path.display(),
                    one_line(&e.to_string())
                ))
            })?
        }
        None => SimConfig::default(),
    };
    if let Some(q) = args.subcarriers {
        cfg.num_subcarriers = q;
    }
    if let Some(k) = args.num_mts {
        cfg.num_mts = k;
    }
    if let Some(bits) = args.codebook_bits {
        cfg.codebook_bits = bits.0;
    }
    if let Some(g) = args.clusters {
        cfg.num_clusters = g;
    }
    if let Some(snr) = args.snr_db {
        cfg.snr_db = snr;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if !args.scheme.is_empty() {
        let mut schemes = Vec::new();
        for &s in &args.scheme {
            if !schemes.contains(&s) {
                schemes.push(s);
            }
        }
        cfg.schemes = schemes;
    }
    cfg.validate()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(cfg)
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
