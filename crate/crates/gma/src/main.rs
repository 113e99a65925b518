//! `gma`: problem files in, JSON reports and CSV/binary dumps out.

mod commands;
mod config;
mod error;
mod model;
mod problem;
mod report;
mod runner;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{resolve_threads, GridPolicy, Outputs, RunConfig, Tolerances};
use error::{CliError, EXIT_CODES};

#[derive(Parser, Debug)]
#[command(name = "gma", version, about = "Monge-Ampere solver and verification suite for det D²u = h/∏lᵢ with Guillemin boundary behaviour", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads; overrides GMA_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fixed summation order and no timing fields, so identical inputs give identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Seed for the sample-based verifiers.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Exit with code 5 when any verification check fails.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Numerics {
    /// Base grid subdivisions per axis.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Refinement levels `grid·2ʲ`.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Newton tolerance on the max-norm residual.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 60)]
    max_iter: usize,
    /// Relative tolerance of the vertex compatibility check.
    #[arg(long, default_value_t = 1e-8)]
    tau_comp: f64,
    /// Largest admissible mismatch between traces on adjacent faces.
    #[arg(long, default_value_t = 1e-9)]
    tau_match: f64,
}

#[derive(Args, Debug, Clone)]
struct Dumps {
    /// CSV dump of the finest solution.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Binary dump of the finest solution ("GMA1" header).
    #[arg(long)]
    dump_bin: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ChartKind {
    Global,
    Face,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Form {
    X,
    Z,
    Legendre,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracles,
    Barriers,
    Asymptotics,
    Appendix,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Liouville,
    Guillemin,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a problem: simplicity and vertex compatibility.
    Check {
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tau_comp: f64,
    },
    /// Induce the boundary data face by face; per-face CSV traces and a consistency report.
    Boundary {
        problem: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
        /// Directory for the per-face CSV tables.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Solve the interior problem on a grid chart.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        dumps: Dumps,
        /// `face` re-solves on a box chart next to `--face` with the global solution as outer data.
        #[arg(long, value_enum, default_value_t = ChartKind::Global)]
        chart: ChartKind,
        /// Facet index for `--chart face`.
        #[arg(long, default_value_t = 0)]
        face: usize,
        /// Chart half-width for `--chart face`.
        #[arg(long, default_value_t = 0.2)]
        width: f64,
    },
    /// Half-space and quadrant model problems with Liouville traces.
    Model {
        #[arg(long, value_enum, default_value_t = Form::X)]
        form: Form,
        /// Number of singular directions for `--form x` (1 or 2).
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Density perturbation `h = 1 + c·(bump vanishing on the singular sides)`.
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        dumps: Dumps,
    },
    /// Run verification suites and emit a ledger.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Base level of the estimator refinement study.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Samples per sampled check.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Newton tolerance of the refinement solves.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 60)]
        max_iter: usize,
        /// CSV table of every ratio and margin.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate an exact oracle at a point.
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        /// Singular directions of the Liouville model.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Problem file, for the Guillemin oracle.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
}

fn base_config(cli: &Cli, subcommand: &str, threads: usize) -> RunConfig {
    RunConfig {
        problem: None,
        subcommand: subcommand.into(),
        grid: GridPolicy { base: 32, levels: 1 },
        tolerances: Tolerances { tol_solve: 1e-10, tau_comp: 1e-8, tau_match: 1e-9 },
        max_iter: 60,
        outputs: Outputs { report: cli.report.clone(), ..Outputs::default() },
        deterministic: cli.deterministic,
        seed: cli.seed,
        threads,
        strict: cli.strict,
    }
}

fn apply_numerics(c: &mut RunConfig, n: &Numerics) {
    c.grid = GridPolicy { base: n.grid, levels: n.levels };
    c.tolerances = Tolerances { tol_solve: n.tol, tau_comp: n.tau_comp, tau_match: n.tau_match };
    c.max_iter = n.max_iter;
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = resolve_threads(cli.threads, std::env::var("GMA_THREADS").ok().as_deref())?;
    let name = match &cli.command {
        Command::Check { .. } => "check",
        Command::Boundary { .. } => "boundary",
        Command::Solve { .. } => "solve",
        Command::Model { .. } => "model",
        Command::Verify { .. } => "verify",
        Command::Oracle { .. } => "oracle",
    };
    let mut config = base_config(&cli, name, threads);
    match &cli.command {
        Command::Check { problem, tau_comp } => {
            config.problem = Some(problem.clone());
            config.tolerances.tau_comp = *tau_comp;
            config.validate()?;
            commands::check(&config)
        }
        Command::Boundary { problem, numerics, out_dir } => {
            config.problem = Some(problem.clone());
            apply_numerics(&mut config, numerics);
            config.outputs.out_dir = out_dir.clone();
            config.validate()?;
            commands::boundary(&config)
        }
        Command::Solve { problem, numerics, dumps, chart, face, width } => {
            config.problem = Some(problem.clone());
            apply_numerics(&mut config, numerics);
            config.outputs.dump = dumps.dump.clone();
            config.outputs.dump_bin = dumps.dump_bin.clone();
            config.validate()?;
            if !(*width > 0.0 && width.is_finite()) {
                return Err(CliError::Usage(format!("--width must be positive, got {width}")));
            }
            commands::solve(&config, (*chart == ChartKind::Face).then_some((*face, *width)))
        }
        Command::Model { form, k, c, numerics, dumps } => {
            apply_numerics(&mut config, numerics);
            config.outputs.dump = dumps.dump.clone();
            config.outputs.dump_bin = dumps.dump_bin.clone();
            config.validate()?;
            if !(1..=2).contains(k) {
                return Err(CliError::Usage(format!("--k must be 1 or 2, got {k}")));
            }
            if !c.is_finite() || *c < 0.0 {
                return Err(CliError::Usage(format!("--c must be a nonnegative number, got {c}")));
            }
            model::run(&config, *form, *k, *c)
        }
        Command::Verify { suite, grid, samples, tol, max_iter, csv } => {
            config.grid = GridPolicy { base: *grid, levels: 3 };
            config.tolerances.tol_solve = *tol;
            config.max_iter = *max_iter;
            config.outputs.csv = csv.clone();
            config.validate()?;
            if *samples < 1 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            verify::run(&config, *suite, *samples)
        }
        Command::Oracle { kind, point, k, problem } => {
            config.problem = problem.clone();
            config.validate()?;
            commands::oracle(&config, *kind == OracleKind::Guillemin, point, *k)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_documents_every_exit_code() {
        let help = Cli::command().render_long_help().to_string();
        for code in ["0 ", "1 ", "2 ", "3 ", "4 ", "5 ", "64 "] {
            assert!(help.contains(&format!("  {code}")), "{code}");
        }
    }

    #[test]
    fn parses_negative_points() {
        let cli = Cli::try_parse_from(["gma", "oracle", "liouville", "--k", "1", "--point", "0.5,-0.25"]).unwrap();
        match cli.command {
            Command::Oracle { point, .. } => assert_eq!(point, vec![0.5, -0.25]),
            _ => unreachable!(),
        }
    }
}
