use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tdlek::agent::trace_to_jsonl;
use tdlek::dynamics::Reducer;
use tdlek::gen::GenBounds;
use tdlek::scenario::{parse_scenario, run_statements, ScenarioRun};
use tdlek::suites::{rand_test, Suite, SuiteConfig, SuiteReport};
use tdlek::{parse, Error, TLekModel};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  logical failure (expect mismatch, counterexample, exhausted budget, unreducible formula)
  2  usage, parse or input errors";

#[derive(Parser)]
#[command(name = "tdlek", version, about = "Timed epistemic logic checker and rule-based agent", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and print it in canonical form
    Parse {
        formula: String,
        /// Print the syntax tree instead
        #[arg(long)]
        ast: bool,
    },
    /// Evaluate a ground formula at a world of a model file
    Check {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        world: String,
        formula: String,
    },
    /// Rewrite a dynamic formula into an equivalent static one
    Reduce {
        formula: String,
        /// Time horizon for expanding revision guards
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Run a scenario script and print the final working memory
    Run {
        scenario: PathBuf,
        /// Write the inference trace as JSON lines to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a randomized property suite
    RandTest {
        /// frame, axioms-lek, property1 or reduction-oracle
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
        #[arg(long, default_value_t = 3)]
        max_preds: usize,
        #[arg(long, default_value_t = 10)]
        horizon: u64,
    },
}

enum Failure {
    Logical(String),
    Input(String),
    Closed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ExpectMismatch { .. } | Error::BudgetExhausted(_) | Error::UnreducibleShape(_) => Failure::Logical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cmd: Cmd, out: &mut impl Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| match e.kind() {
        std::io::ErrorKind::BrokenPipe => Failure::Closed,
        _ => Failure::Input(e.to_string()),
    };
    match cmd {
        Cmd::Parse { formula, ast } => {
            let f = parse(&formula)?;
            if ast {
                writeln!(out, "{f:#?}").map_err(io)?;
            } else {
                writeln!(out, "{f}").map_err(io)?;
            }
        }
        Cmd::Check { model, world, formula } => {
            let m = TLekModel::load(&read(&model)?)?;
            let w = m.world_index(&world)?;
            let f = parse(&formula)?;
            writeln!(out, "{}", m.check(w, &f)?).map_err(io)?;
        }
        Cmd::Reduce { formula, horizon } => {
            let f = parse(&formula)?;
            writeln!(out, "{}", Reducer::new(horizon).reduce(&f)?).map_err(io)?;
        }
        Cmd::Run { scenario, trace } => {
            let stmts = parse_scenario(&read(&scenario)?)?;
            let ScenarioRun { state, answers } = run_statements(&stmts).map_err(|e| {
                if let Error::ExpectMismatch { line, query, expected, actual } = &e {
                    eprintln!("{}:{line}: {query}", scenario.display());
                    eprintln!("- expected: {expected}");
                    eprintln!("+ actual:   {actual}");
                }
                Failure::from(e)
            })?;
            for a in &answers {
                writeln!(out, "{}: {}", a.query, a.value).map_err(io)?;
            }
            writeln!(out, "{}", state.render_wm()).map_err(io)?;
            if let Some(path) = trace {
                fs::write(&path, trace_to_jsonl(state.trace())).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
        }
        Cmd::RandTest { suite, seed, count, max_worlds, max_preds, horizon } => {
            let cfg = SuiteConfig { seed, count, bounds: GenBounds { max_worlds, max_preds, horizon, anchor: None } };
            let report = rand_test(suite, &cfg)?;
            writeln!(out, "{}", summary(suite, &report)).map_err(io)?;
            if let Some(f) = report.failures.first() {
                writeln!(out, "counterexample (trial {}):", f.trial).map_err(io)?;
                writeln!(out, "formula: {}", f.formula).map_err(io)?;
                if let Some(w) = &f.world {
                    writeln!(out, "world: {w}").map_err(io)?;
                }
                writeln!(out, "detail: {}", f.detail).map_err(io)?;
                write!(out, "{}", f.model).map_err(io)?;
                return Err(Failure::Logical(format!("{} failing trials", report.failures.len())));
            }
        }
    }
    Ok(())
}

fn summary(suite: Suite, r: &SuiteReport) -> String {
    let bad = r.failures.len();
    match suite {
        Suite::Frame => format!("{} trials, {bad} violations", r.trials),
        Suite::Property1 => format!("{} models, {} instances, {bad} counterexamples", r.trials, r.exercised),
        Suite::AxiomsLek => format!("{}/{} ok", r.trials.saturating_sub(bad), r.trials),
        Suite::ReductionOracle => {
            let reduced = r.trials - r.unreduced;
            let pct = 100.0 * r.unreduced as f64 / r.trials.max(1) as f64;
            format!("{}/{reduced} ok, {} of {} unreduced ({pct:.1}%)", reduced.saturating_sub(bad), r.unreduced, r.trials)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Logical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
