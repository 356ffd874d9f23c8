use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use covert_relay::cli::{self, config::parse_series, Command, Overrides, SweepVariable};
use covert_relay::params::file::parse_scenario;
use covert_relay::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "covert-relay",
    version,
    about = "Covert communication sweeps for an amplify-and-forward relay"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// False alarm, miss detection and total error versus the threshold.
    DetectionSweep(Args),
    /// Minimum total error versus covert power, per relay power budget.
    MinerrorSweep(Args),
    /// Effective covert rate versus covert power, per source channel gain.
    RateSweep(Args),
    /// Covert power maximizing the rate under the covertness constraint.
    Optimize(Args),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum Var {
    Tau,
    PDelta,
    PRMax,
    HSr2,
}

impl From<Var> for SweepVariable {
    fn from(v: Var) -> Self {
        match v {
            Var::Tau => SweepVariable::Tau,
            Var::PDelta => SweepVariable::PDelta,
            Var::PRMax => SweepVariable::PRMax,
            Var::HSr2 => SweepVariable::HSr2,
        }
    }
}

#[derive(clap::Args, Debug)]
struct Args {
    /// Scenario file (`key = value` lines, optional `_db` keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario override, e.g. `--set p_s_db=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Monte Carlo trials per point; 0 disables the overlay.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Covertness slack: the warden's minimum error must stay >= 1 - epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Swept variable.
    #[arg(long, value_enum)]
    sweep: Option<Var>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// One curve per value, e.g. `h_sr2=1,2`; `none` for a single curve.
    #[arg(long)]
    series: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn overrides(args: &Args) -> Result<Overrides> {
    let mut o = Overrides::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
        o.config_file = Some(parse_scenario(&text).map_err(|e| match e {
            Error::Config { context, message } => Error::Config {
                context: format!("{}: {context}", path.display()),
                message,
            },
            other => other,
        })?);
    }
    for pair in &args.set {
        o.set.assign_pair(pair)?;
    }
    o.sweep = args.sweep.map(Into::into);
    o.from = args.from;
    o.to = args.to;
    o.points = args.points;
    o.series = match args.series.as_deref() {
        None => None,
        Some("none") => Some(None),
        Some(text) => Some(Some(parse_series(text)?)),
    };
    o.trials = args.trials;
    o.seed = args.seed;
    o.epsilon = args.epsilon;
    Ok(o)
}

fn execute(command: Command, args: &Args) -> Result<()> {
    let cfg = overrides(args)?.resolve(command)?;
    let csv = cli::run(command, &cfg)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::Config {
            context: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::DetectionSweep(a) => (Command::DetectionSweep, a),
        Cmd::MinerrorSweep(a) => (Command::MinErrorSweep, a),
        Cmd::RateSweep(a) => (Command::RateSweep, a),
        Cmd::Optimize(a) => (Command::Optimize, a),
    };
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
