use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cn_duality_cli::config::{parse_override, RunConfig};
use cn_duality_cli::dualize::{cmd_dualize, Direction};
use cn_duality_cli::error::{CliError, CliResult};
use cn_duality_cli::simulate::{cmd_simulate, OutputPaths};
use cn_duality_cli::verify::{run_suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "cn-duality", version, about = "Simulate, dualize and verify the C_n Sutherland / RSvD pair")]
struct Cli {
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one model and write its trajectory as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON sidecar with the config echo and conservation diagnostics.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Also write `t x_1 … x_n` columns next to the CSV (`.dat`).
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Map states across the duality and report the roundtrip residual.
    Dualize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        direction: Option<Direction>,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "n-max", default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("CN_DUALITY_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("CN_DUALITY_THREADS must be a positive integer, got '{v}'"))),
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    let overrides = cli
        .tol
        .iter()
        .map(|s| parse_override(s))
        .collect::<CliResult<Vec<_>>>()?;
    match cli.command {
        Command::Simulate {
            config,
            out,
            sidecar,
            emit_plot_data,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let paths = OutputPaths {
                csv: out,
                sidecar,
                plot_data: emit_plot_data,
            };
            cmd_simulate(&cfg, &overrides, &paths)?;
            Ok(0)
        }
        Command::Dualize { config, direction } => {
            let cfg = RunConfig::from_path(&config)?;
            for rec in cmd_dualize(&cfg, direction, &overrides)? {
                println!("{}", serde_json::to_string(&rec).expect("records serialize"));
            }
            Ok(0)
        }
        Command::Verify {
            seed,
            n_max,
            draws,
            report,
        } => {
            let opts = VerifyOptions {
                seed,
                n_max,
                draws,
                tolerances: overrides.into_iter().collect(),
                threads: threads_from_env()?,
                ..VerifyOptions::default()
            };
            let rep = run_suite(&opts)?;
            print!("{}", rep.summary_lines());
            if let Some(path) = report {
                std::fs::write(&path, rep.to_json()).map_err(|source| CliError::Io { path, source })?;
            }
            Ok(if rep.all_passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
