use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fwexact_cli::commands::{self, failure_messages};
use fwexact_cli::config::RunConfig;
use fwexact_cli::report::Report;
use fwexact_cli::{CliError, EXIT_INVARIANT, EXIT_IO, EXIT_PASS};

#[derive(Parser)]
#[command(name = "fwexact", version, about = "Exact Foldy-Wouthuysen transformations of catalog Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model catalog
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Exact FW transformation with the full verification chain
    Transform(RunArgs),
    /// Repeat the transformation over values of one parameter
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Write the sweep CSV here instead of stdout
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Compare the adiabatic sign with Λ on the Floquet space
    Floquet(RunArgs),
}

#[derive(Subcommand)]
enum ModelsAction {
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. pz=0.5 or tolerances.gap_tol=1e-9
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
    /// Dump matrices as CSV into output.dump_dir
    #[arg(long)]
    dump: bool,
}

fn load(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(args.config.as_deref(), &args.set)?;
    if let Some(r) = &args.report {
        cfg.output.report = Some(r.display().to_string());
    }
    cfg.output.dump |= args.dump;
    Ok(cfg)
}

fn finish(name: &str, cfg: &RunConfig, outcome: Result<Report, CliError>, report_to_stdout: bool) -> ExitCode {
    let (report, code) = match outcome {
        Ok(report) => {
            let failures = failure_messages(&report);
            for f in &failures {
                eprintln!("{f}");
            }
            (report, if failures.is_empty() { EXIT_PASS } else { EXIT_INVARIANT })
        }
        Err(e) => {
            eprintln!("error: {e}");
            (Report::failed(name, cfg, &e), e.exit_code())
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &cfg.output.report {
        Some(path) => {
            if let Err(e) = report.write(&PathBuf::from(path)) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_IO as u8);
            }
        }
        None if report_to_stdout => print!("{}", report.to_json()),
        None => {}
    }
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Models {
            action: ModelsAction::List { format },
        } => {
            print!("{}", commands::models_list(matches!(format, Format::Json)));
            return ExitCode::SUCCESS;
        }
        Command::Transform(a) => ("transform", a),
        Command::Sweep { run, .. } => ("sweep", run),
        Command::Floquet(a) => ("floquet", a),
    };
    let mut cfg = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.command {
        Command::Transform(_) => finish(name, &cfg, commands::transform(&cfg), true),
        Command::Floquet(_) => finish(name, &cfg, commands::floquet(&cfg), true),
        Command::Sweep { table, .. } => {
            if let Some(t) = table {
                cfg.output.table = Some(t.display().to_string());
            }
            let outcome = commands::sweep(&cfg).and_then(|(report, csv)| {
                match &cfg.output.table {
                    Some(path) => std::fs::write(path, csv)
                        .map_err(|e| CliError::Io(format!("cannot write table {path}: {e}")))?,
                    None => print!("{csv}"),
                }
                Ok(report)
            });
            finish(name, &cfg, outcome, false)
        }
        Command::Models { .. } => unreachable!(),
    }
}
