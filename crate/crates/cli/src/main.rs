use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clonebound::{OptimizerOptions, Partition};
use clonebound_cli::commands::{self, Family, SweepSpec};
use clonebound_cli::format::to_json;
use clonebound_cli::task::TaskFile;
use clonebound_cli::{CliError, Result, EXIT_INPUT, EXIT_VERIFY};
use serde::Serialize;

/// Upper bounds and numerical optima for state-dependent M -> N cloning.
///
/// Without a subcommand, `-i` computes the bounds and, for at most 6 states,
/// the optimal fidelity.
#[derive(Debug, Parser)]
#[command(name = "clonebound", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long)]
    partition: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute every applicable upper bound.
    Bounds {
        #[command(flatten)]
        io: Io,
        /// Cycles for the partition bound, e.g. "0,1,2;3,4".
        #[arg(long)]
        partition: Option<String>,
    },
    /// Maximize the global fidelity numerically.
    Optimize {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Tabulate optimum and bounds over a one-parameter family as CSV.
    Sweep {
        #[arg(long, value_enum, default_value = "two-state")]
        family: FamilyArg,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 15)]
        steps: usize,
        /// Input copies M.
        #[arg(long, default_value_t = 1)]
        from: u32,
        /// Output copies N.
        #[arg(long, default_value_t = 2)]
        to: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Check bound dominance, the span restriction and (optionally) the grid oracle.
    Verify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[arg(long)]
        partition: Option<String>,
        /// Also compare against the brute-force grid optimum when feasible.
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    TwoState,
    ThreeStateArithmetic,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::TwoState => Family::TwoState,
            FamilyArg::ThreeStateArithmetic => Family::ThreeStateArithmetic,
        }
    }
}

#[derive(Debug, Args)]
struct Io {
    /// Task file (JSON).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Let outputs leave the span of the ideal clones.
    #[arg(long)]
    allow_leak: bool,
}

impl OptimizerArgs {
    fn options(&self) -> OptimizerOptions {
        OptimizerOptions {
            restarts: self.restarts,
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tol,
            allow_leak: self.allow_leak,
        }
    }
}

fn load(io: &Io, partition: Option<&str>) -> Result<(clonebound::CloneTask<f64>, Option<Partition>)> {
    let path = io
        .input
        .as_deref()
        .ok_or_else(|| CliError::TaskFile("no task file given (use -i/--input)".into()))?;
    let file = TaskFile::load(path)?;
    let task = file.task()?;
    let partition = match partition {
        Some(text) => Some(text.parse::<Partition>()?),
        None => file.partition()?,
    };
    if let Some(p) = &partition {
        p.validate(task.n_states())?;
    }
    Ok((task, partition))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliError::Write { path: path.to_path_buf(), source }),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    emit(output, &to_json(value)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        None => {
            let (task, partition) = load(&cli.io, cli.partition.as_deref())?;
            let report = commands::combined(&task, partition.as_ref(), &cli.optimizer.options())?;
            eprint!("{}", report.bounds.table());
            if let Some(s) = &report.optimizer {
                eprintln!("  {:<22} {:.12}", "optimal_fidelity", s.fidelity);
            }
            emit_json(cli.io.output.as_deref(), &report)?;
        }
        Some(Command::Bounds { io, partition }) => {
            let (task, partition) = load(&io, partition.as_deref())?;
            let report = commands::bounds(&task, partition.as_ref());
            eprint!("{}", report.table());
            emit_json(io.output.as_deref(), &report)?;
        }
        Some(Command::Optimize { io, optimizer }) => {
            let (task, _) = load(&io, None)?;
            let report = commands::optimize(&task, &optimizer.options())?;
            if report.non_convergence {
                eprintln!("warning: no restart converged; reporting the best point found");
            }
            emit_json(io.output.as_deref(), &report)?;
        }
        Some(Command::Sweep { family, t_min, t_max, steps, from, to, output, optimizer }) => {
            let spec = SweepSpec { family: family.into(), t_min, t_max, steps, from, to };
            let rows = commands::sweep(&spec, &optimizer.options())?;
            let mut buf = Vec::new();
            commands::write_sweep_csv(&rows, &mut buf)?;
            emit(output.as_deref(), &String::from_utf8(buf).expect("csv is UTF-8"))?;
        }
        Some(Command::Verify { io, optimizer, partition, oracle }) => {
            let (task, partition) = load(&io, partition.as_deref())?;
            let report = commands::verify(&task, partition.as_ref(), &optimizer.options(), oracle)?;
            for c in &report.checks {
                let status = match (c.passed, c.asserted) {
                    (true, true) => "PASS",
                    (false, true) => "FAIL",
                    (_, false) => "NOTE",
                };
                eprintln!("{status} {}: {}", c.name, c.detail);
            }
            if let Some(path) = io.output.as_deref() {
                emit_json(Some(path), &report)?;
            }
            if !report.passed {
                return Ok(ExitCode::from(EXIT_VERIFY as u8));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors; usage errors map to the input-error status.
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
