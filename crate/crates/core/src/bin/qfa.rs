use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qfa_core::classical::AcceptanceMode;
use qfa_core::format::{parse_automaton, serialize_automaton};
use qfa_core::harness::{
    cmd_bench, cmd_classify, cmd_demo, cmd_equiv, cmd_run, DemoParams, RunOptions,
};
use qfa_core::numeric::Real;
use qfa_core::report::OutputFormat;
use qfa_core::{Error, Rational, Result};

/// Simulate, classify and compare finite automata (classical and quantum).
#[derive(Parser, Debug)]
#[command(name = "qfa", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Output format: table, csv or json.
    #[arg(long, global = true, default_value = "table")]
    format: OutputFormat,
    /// Validation and classification tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Exact rational arithmetic for one-way models.
    #[arg(long, global = true)]
    exact: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Step cap for two-way machines.
    #[arg(long, global = true)]
    max_steps: Option<u64>,
    /// Monte Carlo trials for 2QCFA evaluation.
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a machine file on the given words.
    Run {
        file: PathBuf,
        /// Words to evaluate; use "" for the empty word.
        words: Vec<String>,
        /// cutpoint:λ, nonstrict:λ, bounded:ε, positive, negative, negative-bounded:ε
        #[arg(long, default_value = "cutpoint:0.5")]
        mode: AcceptanceMode,
    },
    /// Evaluate every word up to a length and list the members.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value = "cutpoint:0.5")]
        mode: AcceptanceMode,
    },
    /// Decide whether two one-way machines have the same acceptance function.
    /// Exit status 0 means equal, 1 inequivalent, 2 error.
    Equiv { left: PathBuf, right: PathBuf },
    /// Run a named construction: modp-2state, modp-log, neq, eq-2qcfa,
    /// pal-2qcfa, eq-15kwqfa.
    Demo {
        name: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        /// Word to evaluate (repeatable); defaults to a small grid.
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Also write the machine to this file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Runtime scaling of the EQ machines on (ab)^m.
    Bench {
        #[arg(long, default_value_t = 4)]
        max_m: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
}

fn options(g: &Global) -> RunOptions {
    RunOptions {
        tol: g.tol,
        seed: g.seed,
        trials: g.trials,
        max_steps: g.max_steps,
    }
}

fn run_file<R: Real>(g: &Global, cmd: &Command) -> Result<ExitCode> {
    let opts = options(g);
    let report = match cmd {
        Command::Run { file, words, mode } => {
            cmd_run(&parse_automaton::<R>(file, g.tol)?, words, *mode, &opts)?
        }
        Command::Classify {
            file,
            max_len,
            mode,
        } => cmd_classify(&parse_automaton::<R>(file, g.tol)?, *max_len, *mode, &opts)?,
        Command::Equiv { left, right } => {
            let out = cmd_equiv(
                &parse_automaton::<R>(left, g.tol)?,
                &parse_automaton::<R>(right, g.tol)?,
                g.tol,
            )?;
            print!("{}", out.text);
            return Ok(ExitCode::from(if out.verdict.equal { 0 } else { 1 }));
        }
        _ => unreachable!("file commands only"),
    };
    print!("{}", report.render(g.format));
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Demo {
            name,
            p,
            k,
            eps,
            theta,
            words,
            max_len,
            export,
        } => {
            let params = DemoParams {
                p: *p,
                k: *k,
                eps: *eps,
                theta: *theta,
                words: words.clone(),
                max_len: *max_len,
            };
            let demo = cmd_demo(name, &params, &options(g))?;
            if let Some(path) = export {
                std::fs::write(path, serialize_automaton(&demo.machine) + "\n")?;
            }
            print!("{}", demo.report.render(g.format));
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { max_m, k } => {
            print!("{}", cmd_bench(*max_m, *k, &options(g))?.render(g.format));
            Ok(ExitCode::SUCCESS)
        }
        cmd if g.exact => run_file::<Rational>(g, cmd),
        cmd => run_file::<f64>(g, cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Validation { .. } = e {
                eprintln!("hint: pass --tol to relax validation");
            }
            ExitCode::from(2)
        }
    }
}
