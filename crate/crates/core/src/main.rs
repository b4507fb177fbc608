use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddos5g::ingest;
use ddos5g::learners::ModelKind;
use ddos5g::pipeline::{self, GenerateSource, Mode, PipelineConfig, PipelineError};
use ddos5g::report::{self, RunManifest};
use ddos5g::schema;
use ddos5g::synthgen::{self, FaultSpec};

/// Overrides `output_dir` for `run` and `generate`.
const OUTPUT_DIR_ENV: &str = "DDOS5G_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "ddos5g", version, about = "DDoS attack-type and 5G latency-quality classification pipeline")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic flow table as CSV.
    Generate(GenerateArgs),
    /// Run the full pipeline from a TOML config.
    Run(RunArgs),
    /// Recompute scores from saved models and test sets.
    Score(ScoreArgs),
    /// Print label counts and shares of a flow CSV.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Divide the 13-label table by this factor.
    #[arg(long, default_value_t = 100)]
    divisor: usize,
    #[arg(long, default_value_t = 1.0)]
    separability: f64,
    /// Fraction of rows given a non-finite rate value.
    #[arg(long)]
    faults: Option<f64>,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    #[arg(long, default_value = "flows.csv")]
    file_name: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Default,
    PaperFaithful,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    k_best: Option<usize>,
    #[arg(long)]
    rfe_final: Option<usize>,
    /// Generate at this divisor instead of the configured source.
    #[arg(long)]
    divisor: Option<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Output directory of a previous `run`.
    #[arg(long)]
    run_dir: PathBuf,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct InspectArgs {
    input: PathBuf,
    #[arg(long, default_value = schema::LABEL_COLUMN)]
    label_column: String,
    #[arg(long, default_value_t = usize::MAX)]
    cap: usize,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config { .. } => Failure::Usage(e.to_string()),
            PipelineError::Stage { .. } => Failure::Runtime(e.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn env_output_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    if a.divisor == 0 || !(0.0..=1.0).contains(&a.separability) {
        return Err(Failure::Usage("--divisor must be >= 1 and --separability in [0, 1]".into()));
    }
    let src = GenerateSource {
        divisor: a.divisor,
        separability: a.separability,
        faults: a.faults.map(|fraction| FaultSpec { fraction, ..FaultSpec::default() }),
        ..GenerateSource::default()
    };
    let spec = src.spec(a.seed);
    let table = synthgen::generate(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    let dir = env_output_dir().unwrap_or(a.output_dir);
    std::fs::create_dir_all(&dir).map_err(runtime)?;
    let path = dir.join(&a.file_name);
    ingest::write_csv(&table, &path, Some(&synthgen::output_order(&spec))).map_err(runtime)?;
    println!("wrote {} rows to {}", table.n_rows(), path.display());
    Ok(())
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::Default => Mode::Default,
            ModeArg::PaperFaithful => Mode::PaperFaithful,
        };
    }
    if let Some(k) = a.k_best {
        cfg.k_best = k;
    }
    if let Some(r) = a.rfe_final {
        cfg.rfe_final = r;
    }
    if let Some(d) = a.divisor {
        cfg.ingest = None;
        cfg.generate = Some(GenerateSource { divisor: d, ..cfg.generate.unwrap_or_default() });
    }
    if let Some(d) = a.output_dir {
        cfg.output_dir = d;
    }
    if let Some(d) = env_output_dir() {
        cfg.output_dir = d;
    }
    let manifest = pipeline::run_pipeline(&cfg)?;
    print_summary(&manifest);
    println!("results in {}", cfg.output_dir.display());
    Ok(())
}

fn print_summary(m: &RunManifest) {
    println!("mode {} ({} averaging)", m.mode, m.averaging);
    if let Some(w) = &m.leakage_warning {
        println!("warning: {w}");
    }
    for t in &m.tasks {
        println!("\n[{}] {} classes, {} train / {} test rows", t.task, t.classes.len(), t.n_train, t.n_test);
        println!("{:<20} {:>9} {:>9} {:>9} {:>9}", "model", "accuracy", "precision", "recall", "f1");
        for r in &t.models {
            let s = r.scores;
            println!(
                "{:<20} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                r.model, s.accuracy, s.precision_macro, s.recall_macro, s.f1_macro
            );
        }
    }
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let manifest =
        RunManifest::load(&a.run_dir.join(report::RESULTS_FILE)).map_err(|e| Failure::Usage(e.to_string()))?;
    let wanted_kind = match &a.model {
        Some(m) => Some(m.parse::<ModelKind>().map_err(|e| Failure::Usage(e.to_string()))?),
        None => None,
    };
    let mut mismatches = 0;
    println!("{:<8} {:<20} {:>9} {:>9} {:>9} {:>9}  recorded", "task", "model", "accuracy", "precision", "recall", "f1");
    for t in manifest.tasks.iter().filter(|t| a.task.as_ref().is_none_or(|w| *w == t.task)) {
        for r in &t.models {
            let kind: ModelKind = r.model.parse().map_err(runtime)?;
            if wanted_kind.is_some_and(|w| w != kind) {
                continue;
            }
            let s = pipeline::rescore(&a.run_dir, &t.task, kind)?;
            let same = s == r.scores;
            mismatches += usize::from(!same);
            println!(
                "{:<8} {:<20} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  {}",
                t.task,
                r.model,
                s.accuracy,
                s.precision_macro,
                s.recall_macro,
                s.f1_macro,
                if same { "match" } else { "DIFFERS" }
            );
        }
    }
    if mismatches > 0 {
        return Err(Failure::Runtime(format!("{mismatches} recomputed score set(s) differ from results")));
    }
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<(), Failure> {
    let table = ingest::load_csv(&a.input, a.cap, &a.label_column).map_err(runtime)?;
    let counts = ingest::label_counts(&table, &a.label_column).map_err(runtime)?;
    println!("{} rows, {} columns, {} labels\n", table.n_rows(), table.n_columns() + table.string_columns().len(), counts.len());
    print!("{}", report::distribution_table(&counts));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Score(a) => score(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
