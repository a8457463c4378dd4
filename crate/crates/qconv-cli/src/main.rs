use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qconv::apps::SearchMode;
use qconv::harness::{run_experiment, run_suite, worker_pool, ExperimentConfig, ExperimentKind, ExperimentOutput};
use qconv::spanprog::{complement, parse_input, witness, SpanProgram, WitnessKind};
use qconv::Error;

#[derive(Parser)]
#[command(name = "qconv", version, about = "Span-program and state-conversion query algorithm simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Witness kind and size of one input.
    Witness {
        #[arg(long)]
        span: PathBuf,
        #[arg(long)]
        input: String,
        /// Use the complement program.
        #[arg(long)]
        complement: bool,
    },
    /// Promise-free decision on a span program, a graph or OR.
    Decide(RunArgs),
    /// State conversion from a decision tree file or the OR tree.
    Convert(RunArgs),
    /// Any experiment kind, optionally from a JSON config file.
    Experiment {
        kind: Option<ExperimentKind>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs every invariant check and reports pass/fail counts.
    CheckInvariants {
        /// Fewer random cases per check.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Flags mirroring [`ExperimentConfig`]; each one overrides the config file.
#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Alias of `--n` for OR programs and trees.
    #[arg(long = "or", conflicts_with = "n")]
    or_bits: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long)]
    p_plus: Option<f64>,
    #[arg(long)]
    mode: Option<SearchMode>,
    #[arg(long)]
    span: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    max_dim: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        match (kind, &self.config) {
            (Some(k), _) => cfg.kind = k,
            (None, None) => return Err(Error::Validation("give an experiment kind or --config".into())),
            (None, Some(_)) => {}
        }
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = self.$field { cfg.$field = v; })*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$(if self.$field.is_some() { cfg.$field = self.$field; })*};
        }
        set!(grid, k, p_plus, mode, delta, epsilon, trials, seed, max_dim);
        set_opt!(n, span, graph, tree, input, workers, output);
        if self.or_bits.is_some() {
            cfg.n = self.or_bits;
        }
        cfg.timing |= self.timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: &ExperimentOutput, path: Option<&PathBuf>) -> Result<(), Error> {
    let csv = out.to_csv()?;
    match path {
        Some(p) => std::fs::write(p, &csv)?,
        None => print!("{csv}"),
    }
    print!("{}", out.summary_block());
    Ok(())
}

/// Shortest decimal that round-trips at nine places.
fn short(x: f64) -> String {
    let s = format!("{x:.9}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Witness { span, input, complement: dual } => {
            let mut p = SpanProgram::from_json(&std::fs::read_to_string(&span)?)?;
            if dual {
                p = complement(&p)?;
            }
            let w = witness(&p, &parse_input(&input)?)?;
            let kind = match w.kind {
                WitnessKind::Positive => "positive",
                WitnessKind::Negative => "negative",
                WitnessKind::None => "none",
            };
            println!("kind={kind} size={}", short(w.size));
            Ok(true)
        }
        Command::Decide(run) => experiment(run, ExperimentKind::Decide),
        Command::Convert(run) => experiment(run, ExperimentKind::Convert),
        Command::Experiment { kind, run } => {
            let cfg = run.into_config(kind)?;
            let out = run_experiment(&cfg)?;
            emit(&out, cfg.output.as_ref())?;
            Ok(cfg.kind != ExperimentKind::Invariants || out.all_passed())
        }
        Command::CheckInvariants { quick, seed, workers } => {
            let pool = worker_pool(workers)?;
            let reports = pool.install(|| run_suite(quick, seed))?;
            for r in &reports {
                println!("{r}");
            }
            let out = ExperimentOutput::Checks(reports);
            print!("{}", out.summary_block());
            Ok(out.all_passed())
        }
    }
}

fn experiment(run: RunArgs, kind: ExperimentKind) -> Result<bool, Error> {
    let cfg = run.into_config(Some(kind))?;
    let out = run_experiment(&cfg)?;
    emit(&out, cfg.output.as_ref())?;
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
