use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, CommandFactory, Parser, Subcommand};
use cqt_cli::{presets_table, run_solve, run_verify, CliError, Input, RunConfig};
use cqt_core::DEFAULT_CR_TOL;

#[derive(Parser)]
#[command(name = "cqt", version, about = "Cyclic reduction on quasi-Toeplitz QBD blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve A1 X^2 + A0 X + A-1 = 0 for G (or R with --right) and print a TSV report.
    #[command(group(ArgGroup::new("input").required(true).args(["preset", "params", "blocks"])))]
    Solve {
        /// Built-in case: a Jackson preset, `scalar`, or `all`.
        #[arg(long)]
        preset: Option<String>,
        /// File with six labeled Jackson parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Matrix files for A-1, A0 and A1.
        #[arg(long, num_args = 3, value_names = ["AM1", "A0", "A1"])]
        blocks: Option<Vec<PathBuf>>,
        /// CR stopping tolerance, in (0, 1e-2].
        #[arg(long, default_value_t = DEFAULT_CR_TOL, allow_hyphen_values = true)]
        tol: f64,
        #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
        max_iter: u64,
        /// Solve X^2 A-1 + X A0 + A1 = 0 for R instead.
        #[arg(long)]
        right: bool,
        /// Directory for the serialized solutions.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Report file (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare sum, product and inverse sections of two matrix files with dense arithmetic.
    Verify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        section_size: u64,
    },
    /// List the built-in Jackson presets.
    Presets,
}

fn sink(output: Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match output {
        Some(path) => File::create(&path)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|source| CliError::Write { path, source }),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            preset,
            params,
            blocks,
            tol,
            max_iter,
            right,
            emit,
            output,
        } => {
            let input = match (preset, params, blocks) {
                (Some(name), _, _) => Input::Preset(name),
                (_, Some(path), _) => Input::Params(path),
                (_, _, Some(paths)) => Input::Blocks(paths.try_into().expect("clap enforces three paths")),
                _ => unreachable!("clap enforces one input"),
            };
            let mut cfg = RunConfig::new(input, tol, max_iter as usize)?;
            cfg.right = right;
            cfg.emit = emit;
            let mut out = sink(output.clone())?;
            run_solve(&cfg, &mut out)?;
            out.flush().map_err(|source| CliError::Write {
                path: output.unwrap_or_else(|| "<stdout>".into()),
                source,
            })
        }
        Command::Verify { a, b, section_size } => {
            run_verify(&a, &b, section_size as usize, &mut io::stdout().lock()).map(drop)
        }
        Command::Presets => {
            print!("{}", presets_table());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqt: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
