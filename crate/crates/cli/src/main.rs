use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sepopt::bodies::{random_instance, Placement};
use sepopt::harness::{
    budget_table, compare, generate_corpus, load_corpus, CompareConfig, Execution, GeneratorSpec,
};
use sepopt::io::{error_exit_code, trace2d_csv, ErrorRecord, InstanceFile, ResultRecord, EXIT_USAGE};
use sepopt::reductions::{separate, ReductionConfig};
use sepopt::trace::Mode;
use sepopt::{Error, Result};

const DEFAULT_DELTA: f64 = 1e-3;

/// Separation from linear optimization over convex bodies.
#[derive(Parser, Debug)]
#[command(name = "sepopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide one instance; prints a result record and exits 0 (separated),
    /// 1 (in body) or 2 (inconclusive).
    Separate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the full run trace (JSON) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every mode over a corpus and write a JSON report plus a CSV next to it.
    Compare {
        /// Directory of instance files.
        #[arg(long, required_unless_present = "generate")]
        corpus: Option<PathBuf>,
        /// Generate random instances instead of reading a corpus.
        #[arg(long, conflicts_with = "corpus")]
        generate: bool,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        per_dim: usize,
        /// Seed of the generated corpus.
        #[arg(long, default_value_t = 1)]
        gen_seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also run the bare correction heuristic.
        #[arg(long)]
        heuristic: bool,
        /// Add feasibility iteration counts on the x_1 >= 1 - t family.
        #[arg(long)]
        budget: bool,
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Export centers and cuts of a 2-D run as CSV.
    Trace2d {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write a random instance file.
    Generate {
        #[arg(long)]
        dimension: usize,
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Side::Outside)]
        side: Side,
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Overrides the instance's delta (compare: also the generated corpus's).
    #[arg(long)]
    delta: Option<f64>,
    /// Cut offset relative to the center (<= 0; 0 means central cuts).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    cut_depth: f64,
    #[arg(long)]
    max_cuts: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> ReductionConfig {
        ReductionConfig {
            cut_depth: self.cut_depth,
            max_cuts: self.max_cuts,
            r_min: self.r_min,
            max_iterations: self.max_iterations,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Side {
    Inside,
    Outside,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn cmd_separate(instance: &Path, mode: Mode, solver: &SolverArgs, trace: Option<&Path>) -> Result<i32> {
    let inst = InstanceFile::load(instance)?;
    let body = inst.body()?;
    let delta = solver.delta.unwrap_or(inst.delta);
    let run = separate(mode, &body, &inst.query(), delta, &solver.config())?;
    if let Some(path) = trace {
        write_file(path, &serde_json::to_string_pretty(&run.trace)?)?;
    }
    let record = ResultRecord::new(&run, delta, trace.map(|p| p.display().to_string()));
    print_json(&record)?;
    Ok(record.exit_code())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    corpus: Option<&Path>,
    spec: GeneratorSpec,
    out: &Path,
    heuristic: bool,
    budget: bool,
    sequential: bool,
    solver: &SolverArgs,
) -> Result<i32> {
    let mut entries = match corpus {
        Some(dir) => load_corpus(dir)?,
        None => generate_corpus(&spec)?,
    };
    if let Some(delta) = solver.delta {
        for inst in entries.iter_mut().filter_map(|e| e.instance.as_mut().ok()) {
            inst.delta = delta;
        }
    }
    let execution = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let cfg = CompareConfig {
        reduction: solver.config(),
        execution,
        include_heuristic: heuristic,
    };
    log::info!("comparing {} instances", entries.len());
    let mut report = compare(&entries, &cfg);
    if budget {
        report.budget = budget_table(&[2, 4, 8], &[1e-1, 1e-2, 1e-3], execution)?;
    }
    report.write(out)?;
    print_json(&report.aggregates)?;
    Ok(0)
}

fn cmd_trace2d(instance: &Path, mode: Mode, out: &Path, solver: &SolverArgs) -> Result<i32> {
    let inst = InstanceFile::load(instance)?;
    if inst.dimension != 2 {
        return Err(Error::DimensionNot2D(inst.dimension));
    }
    let delta = solver.delta.unwrap_or(inst.delta);
    let run = separate(mode, &inst.body()?, &inst.query(), delta, &solver.config())?;
    write_file(out, &trace2d_csv(&run.trace)?)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Separate {
            instance,
            mode,
            solver,
            trace,
        } => cmd_separate(&instance, mode, &solver, trace.as_deref()),
        Command::Compare {
            corpus,
            generate: _,
            dims,
            per_dim,
            gen_seed,
            out,
            heuristic,
            budget,
            sequential,
            solver,
        } => {
            let spec = GeneratorSpec {
                dims,
                per_dim,
                seed: gen_seed,
                delta: solver.delta.unwrap_or(DEFAULT_DELTA),
            };
            cmd_compare(corpus.as_deref(), spec, &out, heuristic, budget, sequential, &solver)
        }
        Command::Trace2d {
            instance,
            mode,
            out,
            solver,
        } => cmd_trace2d(&instance, mode, &out, &solver),
        Command::Generate {
            dimension,
            vertices,
            seed,
            side,
            margin,
            delta,
            out,
        } => {
            let placement = match side {
                Side::Inside => Placement::Inside(margin),
                Side::Outside => Placement::Outside(margin),
            };
            let (body, p) = random_instance(dimension, vertices, seed, placement)?;
            InstanceFile::new(&body, &p, delta).save(&out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SEPOPT_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        log::error!("{e}");
        let _ = print_json(&ErrorRecord::from(&e));
        error_exit_code(&e)
    });
    ExitCode::from(code as u8)
}
