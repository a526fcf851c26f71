use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use twinfocal::cli::commands::{self, CliError, Options, Outcome, DEFAULT_WAISTS};
use twinfocal::cli::config::{parse_length, parse_length_list};
use twinfocal::cli::RunConfig;
use twinfocal::Instrument;

#[derive(Parser)]
#[command(name = "twinfocal", version, about = "Twin-photon coincidence microscope resolution model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Configuration file; the reference geometry is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination (overrides output.csv). Without one, CSV goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// SVG destination (overrides output.svg).
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Drop the pump-focus Gaussian from the coincidence PSF.
    #[arg(long, global = true)]
    no_pump_gaussian: bool,
    /// Dip contrast that counts as resolved.
    #[arg(long, global = true, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Derived focus quantities, PSF widths and two-point limits.
    Params,
    /// Confocal and twin-photon PSFs at several pump waists.
    Compare {
        /// Comma-separated pump waists, e.g. 1mm,8mm,12mm; empty for confocal only.
        #[arg(long)]
        waists: Option<String>,
    },
    /// Twin-photon FWHM against pump waist.
    Sweep {
        #[arg(long, default_value = "1mm", value_parser = parse_length)]
        w0_min: f64,
        #[arg(long, default_value = "20mm", value_parser = parse_length)]
        w0_max: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Scan the configured sample.
    Scan {
        /// Instrument override: widefield, confocal or twin.
        #[arg(long)]
        instrument: Option<Instrument>,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("TWINFOCAL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("TWINFOCAL_THREADS: expected a thread count, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("TWINFOCAL_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.common;
    configure_threads()?;
    let run = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let opts = Options {
        no_pump_gaussian: common.no_pump_gaussian,
        threshold: common.threshold,
        instrument: None,
    };
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) {
        return Err(CliError::Config("--threshold must lie in (0, 1)".into()));
    }
    let outcome: Outcome = match cli.command {
        Command::Params => commands::params(&run, &opts)?,
        Command::Compare { waists } => {
            let waists = match waists {
                Some(text) => parse_length_list(&text).map_err(|e| CliError::Config(format!("--waists: {e}")))?,
                None => DEFAULT_WAISTS.to_vec(),
            };
            commands::compare(&run, &opts, &waists)?
        }
        Command::Sweep { w0_min, w0_max, steps } => commands::sweep(&run, &opts, w0_min, w0_max, steps)?,
        Command::Scan { instrument } => {
            let mut warnings = Vec::new();
            let outcome = commands::scan_command(&run, &Options { instrument, ..opts }, &mut warnings);
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            outcome?
        }
    };
    let csv_path = common.out.or_else(|| run.output.csv.as_ref().map(|p| run.base_dir.join(p)));
    let svg_path = common.svg.or_else(|| run.output.svg.as_ref().map(|p| run.base_dir.join(p)));
    match (&outcome.csv, &csv_path) {
        (Some(csv), Some(path)) => {
            write_file(path, csv)?;
            print!("{}", outcome.report);
        }
        (Some(csv), None) => {
            eprint!("{}", outcome.report);
            print!("{csv}");
        }
        (None, _) => print!("{}", outcome.report),
    }
    if let (Some(svg), Some(path)) = (&outcome.svg, &svg_path) {
        write_file(path, svg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twinfocal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
