//! `afdm`: run PAPR / BER experiments, the oracle self-test, and plots.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use afdm_core::harness::output::{ber_rows, ccdf_rows, encode, sweep_rows, Format};
use afdm_core::harness::plot::{render_svg, PlotKind};
use afdm_core::harness::selftest::run_selftest;
use afdm_core::harness::{run_ber, run_ccdf, run_sweep, ExperimentConfig, ExperimentKind};
use afdm_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "afdm", version, about = "AFDM grouped pre-chirp selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PAPR CCDF curves for each scheme cell.
    Ccdf(RunArgs),
    /// BER over random LTV channels with MMSE equalization.
    Ber(RunArgs),
    /// PAPR at fixed CCDF levels across a V / W / pattern grid.
    Sweep(RunArgs),
    /// Compare fast paths against direct evaluations.
    Selftest {
        #[arg(long, default_value_t = 0x5EED)]
        seed: u64,
    },
    /// Render a CCDF or BER CSV written by this tool as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "ccdf")]
        kind: String,
        /// Output file; defaults to the input path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; the file is named after the experiment.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::BudgetExceeded { .. } => 2,
        Error::Io(_) | Error::Csv { .. } | Error::Json(_) => 1,
        _ => 3,
    }
}

fn load(args: &RunArgs, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = kind;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn destination(args: &RunArgs, cfg: &ExperimentConfig, name: &str, format: Format) -> Option<PathBuf> {
    match (&args.out, &cfg.output) {
        (Some(dir), _) => Some(dir.join(format!("{name}.{}", format.extension()))),
        (None, Some(path)) => Some(PathBuf::from(path)),
        (None, None) => None,
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_experiment(args: &RunArgs, kind: ExperimentKind) -> Result<(), Error> {
    let format: Format = args.format.parse()?;
    let cfg = load(args, kind)?;
    let (name, text) = match kind {
        ExperimentKind::Ccdf => ("ccdf", encode(&ccdf_rows(&run_ccdf(&cfg)?)?, format)?),
        ExperimentKind::Ber => ("ber", encode(&ber_rows(&run_ber(&cfg)?), format)?),
        ExperimentKind::Sweep => ("sweep", encode(&sweep_rows(&run_sweep(&cfg)?)?, format)?),
        ExperimentKind::Selftest => unreachable!("selftest has its own subcommand"),
    };
    emit(&text, destination(args, &cfg, name, format).as_deref())
}

fn selftest(seed: u64) -> Result<bool, Error> {
    let checks = run_selftest(seed)?;
    for c in &checks {
        println!(
            "{} {:<24} max_error={:.3e} tolerance={:.0e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance
        );
    }
    Ok(checks.iter().all(|c| c.passed()))
}

fn plot(input: &Path, kind: &str, out: Option<&Path>) -> Result<(), Error> {
    let kind: PlotKind = kind.parse()?;
    let text = std::fs::read_to_string(input)?;
    let svg = render_svg(&text, kind)?;
    let out = out.map_or_else(|| input.with_extension("svg"), Path::to_path_buf);
    emit(&svg, Some(&out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ccdf(args) => run_experiment(args, ExperimentKind::Ccdf),
        Command::Ber(args) => run_experiment(args, ExperimentKind::Ber),
        Command::Sweep(args) => run_experiment(args, ExperimentKind::Sweep),
        Command::Selftest { seed } => match selftest(*seed) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
        Command::Plot { input, kind, out } => plot(input, kind, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
