use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use obskit_core::model::DerivBound;
use obskit_core::{analyze, parse_model, Algorithm, AnalysisOptions, Error, Model};

/// Structural observability, identifiability and input invertibility of
/// ODE models.
#[derive(Parser, Debug)]
#[command(name = "obskit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze a model file and print a report.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    Fispo,
    Orcdf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Model file.
    model: PathBuf,
    #[arg(long, value_enum, default_value = "fispo")]
    algorithm: AlgorithmArg,
    /// Last iteration to compute.
    #[arg(long)]
    kmax: Option<u32>,
    /// Time limit for each iteration, in seconds.
    #[arg(long = "stage-timeout", value_name = "SECONDS")]
    stage_timeout: Option<f64>,
    /// Time limit for the whole analysis, in seconds.
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<f64>,
    /// Seed of the random evaluation points.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of experiments to analyze jointly.
    #[arg(long, default_value_t = 1)]
    multiexp: usize,
    /// Derivative bound of a known input, `name=N` or `name=unbounded`.
    /// A bare value applies to every known input.
    #[arg(long = "u-deriv-bound", value_name = "NAME=N")]
    u_deriv_bound: Vec<String>,
    /// Derivative bound of an unknown input, `name=N`. A bare value applies
    /// to every unknown input.
    #[arg(long = "w-deriv-bound", value_name = "NAME=N")]
    w_deriv_bound: Vec<String>,
    /// Variables to leave out of classification.
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Record the wall-clock time of each iteration.
    #[arg(long)]
    timings: bool,
}

enum Failure {
    Usage(String),
    Model(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Model(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Model(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidOptions(_) => Failure::Usage(e.to_string()),
            Error::DegenerateEvaluation => Failure::Numeric(e.to_string()),
            _ => Failure::Model(e.to_string()),
        }
    }
}

fn seconds(flag: &str, v: Option<f64>) -> Result<Option<Duration>, Failure> {
    v.map(|s| {
        Duration::try_from_secs_f64(s)
            .ok()
            .filter(|d| !d.is_zero())
            .ok_or_else(|| Failure::Usage(format!("--{flag} must be a positive number of seconds")))
    })
    .transpose()
}

/// Split `name=value`; a bare value has no name.
fn split_bound(arg: &str) -> (Option<&str>, &str) {
    match arg.split_once('=') {
        Some((n, v)) => (Some(n.trim()), v.trim()),
        None => (None, arg.trim()),
    }
}

fn apply_bounds(model: &mut Model, args: &AnalyzeArgs) -> Result<(), Failure> {
    for arg in &args.u_deriv_bound {
        let (name, value) = split_bound(arg);
        let bound: DerivBound = value
            .parse()
            .map_err(|e| Failure::Usage(format!("--u-deriv-bound: {e}")))?;
        match name {
            Some(n) => model
                .set_u_deriv_bound(n, bound)
                .map_err(|e| Failure::Usage(e.to_string()))?,
            None => model.set_all_u_deriv_bounds(bound),
        }
    }
    for arg in &args.w_deriv_bound {
        let (name, value) = split_bound(arg);
        let bound: u32 = value.parse().map_err(|_| {
            Failure::Usage(format!(
                "--w-deriv-bound: expected a non-negative integer, got `{value}`"
            ))
        })?;
        match name {
            Some(n) => model
                .set_w_deriv_bound(n, bound)
                .map_err(|e| Failure::Usage(e.to_string()))?,
            None => model.set_all_w_deriv_bounds(bound),
        }
    }
    if !args.exclude.is_empty() {
        let mut names: Vec<String> = model.excluded().iter().map(|s| s.name().to_string()).collect();
        names.extend(
            args.exclude
                .iter()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty()),
        );
        model.set_excluded(&names).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(args: &AnalyzeArgs) -> Result<String, Failure> {
    if args.model.as_os_str().is_empty() {
        return Err(Failure::Usage("model path is empty".into()));
    }
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| Failure::Model(format!("cannot read {}: {e}", args.model.display())))?;
    let name = args
        .model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut model = parse_model(&text)?.with_name(name);
    apply_bounds(&mut model, args)?;

    let mut opts = AnalysisOptions::default().with_algorithm(match args.algorithm {
        AlgorithmArg::Fispo => Algorithm::Fispo,
        AlgorithmArg::Orcdf => Algorithm::Orcdf,
    });
    opts.kmax = args.kmax;
    opts.stage_time_budget = seconds("stage-timeout", args.stage_timeout)?;
    opts.total_time_budget = seconds("timeout", args.timeout)?;
    if let Some(seed) = args.seed {
        opts = opts.with_seed(seed);
    }
    opts.multiexp = args.multiexp;
    opts.threads = args.threads;
    opts.record_timings = args.timings;

    let report = analyze(&model, &opts)?;
    Ok(match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Analyze(args) = cli.command;
    match run(&args) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("obskit: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
