//! Command-line entry point: convert, run, metrics, variability, report.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use newsjudge::classify::{Orientation, ThresholdPolicy};
use newsjudge::domain::{DatasetId, ModelConfig};
use newsjudge::image_prep::ImagePrepConfig;
use newsjudge::ingest::{
    self, convert_fakeddit, convert_fakenewsnet, FakeNewsNetSubset, FakedditColumns, Subsample,
};
use newsjudge::metrics::{self, MetricsDoc};
use newsjudge::report;
use newsjudge::runner::{self, BackendChoice, RunConfig};
use newsjudge::score::Score;
use newsjudge::variability::{self, ComparisonMode, RepetitionMatrix};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "newsjudge",
    version,
    about = "Batch evaluation harness for rubric-prompted multimodal news verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw dataset layout into a canonical manifest
    Convert {
        #[command(subcommand)]
        format: ConvertFormat,
    },
    /// Evaluate every manifest item against the configured backend
    Run(RunArgs),
    /// Compute the metric suite for one repetition of a results file
    Metrics(MetricsArgs),
    /// Quantify prediction disagreement across repetitions
    Variability(VariabilityArgs),
    /// Render SVG charts and a summary page from metrics files
    Report(ReportArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Subsample: number of real items to keep
    #[arg(long)]
    sample_real: Option<usize>,
    /// Subsample: number of fake items to keep
    #[arg(long)]
    sample_fake: Option<usize>,
    /// Seed for the subsample shuffle
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SampleArgs {
    fn to_subsample(&self) -> Result<Option<Subsample>, UsageError> {
        match (self.sample_real, self.sample_fake) {
            (None, None) => Ok(None),
            (Some(n_real), Some(n_fake)) => Ok(Some(Subsample {
                n_real,
                n_fake,
                seed: self.seed,
            })),
            _ => Err(UsageError(anyhow!(
                "--sample-real and --sample-fake must be given together"
            ))),
        }
    }
}

#[derive(Subcommand)]
enum ConvertFormat {
    /// FakeNewsNet-style tree: root/<subset>/{fake,real}/<article>/
    Fakenewsnet {
        /// Dataset root directory
        #[arg(long)]
        root: PathBuf,
        /// Which subset to convert
        #[arg(long, value_enum)]
        subset: SubsetArg,
        /// Output manifest path
        #[arg(long)]
        out: PathBuf,
        /// Skip-report path (default: <out>.skips.jsonl)
        #[arg(long)]
        skip_report: Option<PathBuf>,
        #[command(flatten)]
        sample: SampleArgs,
    },
    /// Fakeddit TSV plus an image directory of <id>.jpg files
    Fakeddit {
        /// TSV file with id, title, and binary label columns
        #[arg(long)]
        tsv: PathBuf,
        /// Directory holding <id>.jpg images
        #[arg(long)]
        image_dir: PathBuf,
        /// Output manifest path
        #[arg(long)]
        out: PathBuf,
        /// Flip the binary label mapping (default: 1=real, 0=fake)
        #[arg(long)]
        invert_labels: bool,
        #[arg(long, default_value = "id")]
        id_col: String,
        #[arg(long, default_value = "clean_title")]
        title_col: String,
        #[arg(long, default_value = "2_way_label")]
        label_col: String,
        /// Skip-report path (default: <out>.skips.jsonl)
        #[arg(long)]
        skip_report: Option<PathBuf>,
        #[command(flatten)]
        sample: SampleArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsetArg {
    Gossipcop,
    Politifact,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Live,
    Mock,
    Replay,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    ScaleConsistent,
    PaperLiteral,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run-config file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manifest of items to evaluate
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Response backend
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Script file for the mock backend
    #[arg(long)]
    mock_script: Option<PathBuf>,
    /// Directory for results, metadata, and the default cache
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Cache directory (default: <out-dir>/cache)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Repetitions per item
    #[arg(long)]
    reps: Option<u32>,
    /// Chat-completions base URL, e.g. https://api.openai.com/v1
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent in requests
    #[arg(long)]
    model: Option<String>,
    /// Sampling temperature in [0, 2]
    #[arg(long)]
    temperature: Option<f64>,
    /// Cap on generated tokens per reply
    #[arg(long)]
    max_output_tokens: Option<u32>,
    /// Per-request timeout in seconds
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// Retries for transient failures (429/5xx/timeouts)
    #[arg(long)]
    max_retries: Option<u32>,
    /// Maximum in-flight requests
    #[arg(long)]
    concurrency: Option<usize>,
    /// Token-bucket rate limit in requests per minute
    #[arg(long)]
    rpm: Option<u32>,
    /// Environment variable holding the API key
    #[arg(long)]
    api_key_env: Option<String>,
    /// Request seed, for endpoints that support one
    #[arg(long)]
    seed: Option<u64>,
    /// Long-side pixel cap for prepared images
    #[arg(long)]
    max_dimension: Option<u32>,
    /// JPEG re-encode quality, 1-100
    #[arg(long)]
    image_quality: Option<u8>,
    /// Byte cap on re-encoded images
    #[arg(long)]
    max_encoded_bytes: Option<usize>,
    /// Decision threshold on q6
    #[arg(long)]
    fake_threshold: Option<String>,
    /// Threshold orientation
    #[arg(long, value_enum)]
    orientation: Option<OrientationArg>,
    /// Character budget for injected article text
    #[arg(long)]
    text_char_budget: Option<usize>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Results JSONL from a run
    #[arg(long)]
    results: PathBuf,
    /// Manifest the run was evaluated against
    #[arg(long)]
    manifest: PathBuf,
    /// Which repetition to score
    #[arg(long, default_value_t = 0)]
    repetition: u32,
    /// Dataset label for the report (default: derived from the manifest)
    #[arg(long)]
    label: Option<String>,
    /// Write the metrics document here
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the plain-text table here
    #[arg(long)]
    out_table: Option<PathBuf>,
}

#[derive(Args)]
struct VariabilityArgs {
    /// Results JSONL with at least two repetitions
    #[arg(long)]
    results: PathBuf,
    /// Manifest providing gold labels for per-repetition accuracy
    #[arg(long)]
    manifest: PathBuf,
    /// Count differing rejection reasons as disagreement
    #[arg(long)]
    strict_reasons: bool,
    /// Write the report document here
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write per-item verdicts and indicators here
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory for charts and the summary page
    #[arg(long)]
    out_dir: PathBuf,
    /// Metrics JSON files, one per dataset
    #[arg(required = true)]
    metrics: Vec<PathBuf>,
}

/// Marks errors that should exit with the usage code (2).
#[derive(Debug)]
struct UsageError(anyhow::Error);

fn usage(err: impl Into<anyhow::Error>) -> UsageError {
    UsageError(err.into())
}

/// Restore default SIGPIPE handling so piping into `head` ends the process
/// quietly instead of panicking on a closed stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

#[tokio::main]
async fn main() -> ExitCode {
    reset_sigpipe();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match dispatch(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

async fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Convert { format } => cmd_convert(format).map_err(Failure::Usage),
        Command::Run(args) => cmd_run(args).await,
        Command::Metrics(args) => cmd_metrics(args).map_err(Failure::Runtime),
        Command::Variability(args) => cmd_variability(args),
        Command::Report(args) => cmd_report(args).map_err(Failure::Runtime),
    }
}

fn cmd_convert(format: ConvertFormat) -> Result<()> {
    let (conversion, out, skip_report) = match format {
        ConvertFormat::Fakenewsnet {
            root,
            subset,
            out,
            skip_report,
            sample,
        } => {
            let subset = match subset {
                SubsetArg::Gossipcop => FakeNewsNetSubset::Gossipcop,
                SubsetArg::Politifact => FakeNewsNetSubset::Politifact,
            };
            let sub = sample.to_subsample().map_err(|e| e.0)?;
            (convert_fakenewsnet(&root, subset, sub)?, out, skip_report)
        }
        ConvertFormat::Fakeddit {
            tsv,
            image_dir,
            out,
            invert_labels,
            id_col,
            title_col,
            label_col,
            skip_report,
            sample,
        } => {
            let columns = FakedditColumns {
                id: id_col,
                title: title_col,
                label: label_col,
            };
            let sub = sample.to_subsample().map_err(|e| e.0)?;
            (
                convert_fakeddit(&tsv, &image_dir, &columns, invert_labels, sub)?,
                out,
                skip_report,
            )
        }
    };
    let counts = ingest::write_manifest(&out, &conversion.items)?;
    let skip_path = skip_report.unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".skips.jsonl");
        PathBuf::from(p)
    });
    ingest::write_skip_report(&skip_path, &conversion.skipped)?;
    println!(
        "real={} fake={} skipped={} -> {}",
        counts.real,
        counts.fake,
        conversion.skipped.len(),
        out.display()
    );
    Ok(())
}

fn build_run_config(args: &RunArgs) -> Result<RunConfig, UsageError> {
    let mut config: RunConfig = match &args.config {
        Some(path) => {
            let raw = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(usage)?;
            serde_json::from_str(&raw)
                .with_context(|| format!("parsing config {}", path.display()))
                .map_err(usage)?
        }
        None => {
            let manifest = args
                .manifest
                .clone()
                .ok_or_else(|| usage(anyhow!("--manifest is required without --config")))?;
            let out_dir = args
                .out_dir
                .clone()
                .ok_or_else(|| usage(anyhow!("--out-dir is required without --config")))?;
            let backend = args
                .backend
                .ok_or_else(|| usage(anyhow!("--backend is required without --config")))?;
            RunConfig {
                manifest,
                model: ModelConfig::default(),
                image: ImagePrepConfig::default(),
                policy: ThresholdPolicy::default(),
                repetitions: 1,
                cache_dir: PathBuf::new(),
                output_dir: out_dir,
                backend: resolve_backend(backend, &args.mock_script)?,
                text_char_budget: newsjudge::prompting::DEFAULT_TEXT_CHAR_BUDGET,
            }
        }
    };
    // Flags win over the config file.
    if let Some(v) = &args.manifest {
        config.manifest = v.clone();
    }
    if let Some(v) = &args.out_dir {
        config.output_dir = v.clone();
    }
    if let Some(v) = args.backend {
        config.backend = resolve_backend(v, &args.mock_script)?;
    }
    if let Some(v) = &args.cache_dir {
        config.cache_dir = v.clone();
    }
    if config.cache_dir.as_os_str().is_empty() {
        config.cache_dir = config.output_dir.join("cache");
    }
    if let Some(v) = args.reps {
        config.repetitions = v;
    }
    if let Some(v) = &args.endpoint {
        config.model.endpoint_url = v.clone();
    }
    if let Some(v) = &args.model {
        config.model.model_name = v.clone();
    }
    if let Some(v) = args.temperature {
        config.model.temperature = v;
    }
    if let Some(v) = args.max_output_tokens {
        config.model.max_output_tokens = v;
    }
    if let Some(v) = args.timeout_secs {
        config.model.request_timeout_secs = v;
    }
    if let Some(v) = args.max_retries {
        config.model.max_retries = v;
    }
    if let Some(v) = args.concurrency {
        config.model.concurrency_limit = v;
    }
    if let Some(v) = args.rpm {
        config.model.requests_per_minute = Some(v);
    }
    if let Some(v) = &args.api_key_env {
        config.model.api_key_env = v.clone();
    }
    if let Some(v) = args.seed {
        config.model.seed = Some(v);
    }
    if let Some(v) = args.max_dimension {
        config.image.max_dimension = v;
    }
    if let Some(v) = args.image_quality {
        config.image.reencode_quality = v;
    }
    if let Some(v) = args.max_encoded_bytes {
        config.image.max_encoded_bytes = v;
    }
    if let Some(v) = &args.fake_threshold {
        config.policy.fake_threshold =
            Score::parse_decimal(v).map_err(|e| usage(anyhow!("invalid --fake-threshold: {e}")))?;
    }
    if let Some(v) = args.orientation {
        config.policy.orientation = match v {
            OrientationArg::ScaleConsistent => Orientation::ScaleConsistent,
            OrientationArg::PaperLiteral => Orientation::PaperLiteral,
        };
    }
    if let Some(v) = args.text_char_budget {
        config.text_char_budget = v;
    }
    config.validate().map_err(usage)?;
    Ok(config)
}

fn resolve_backend(
    backend: BackendArg,
    mock_script: &Option<PathBuf>,
) -> Result<BackendChoice, UsageError> {
    Ok(match backend {
        BackendArg::Live => BackendChoice::Live,
        BackendArg::Replay => BackendChoice::Replay,
        BackendArg::Mock => {
            let script = mock_script
                .clone()
                .ok_or_else(|| usage(anyhow!("--mock-script is required with --backend mock")))?;
            BackendChoice::Mock { script }
        }
    })
}

async fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let config = build_run_config(&args)?;
    let summary = runner::run(&config).await?;
    let rejected = summary
        .records
        .iter()
        .filter(|r| r.verdict.is_rejected())
        .count();
    println!(
        "wrote {} records ({} rejected) -> {}",
        summary.records.len(),
        rejected,
        summary.results_path.display()
    );
    println!("metadata -> {}", summary.metadata_path.display());
    Ok(())
}

fn derive_label(manifest: &ingest::Manifest) -> String {
    let mut datasets: Vec<DatasetId> = manifest.items.iter().map(|i| i.dataset).collect();
    datasets.sort_by_key(|d| d.to_string());
    datasets.dedup();
    match datasets.as_slice() {
        [one] => one.to_string(),
        _ => "mixed".to_string(),
    }
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let manifest = ingest::load_manifest(&args.manifest)?;
    let gold = manifest.gold_labels();
    let records = runner::load_records(&args.results)?;
    let selected: Vec<_> = records
        .into_iter()
        .filter(|r| r.repetition == args.repetition)
        .collect();
    if selected.is_empty() {
        bail!(
            "no records with repetition {} in {}",
            args.repetition,
            args.results.display()
        );
    }
    let counts = metrics::tally(&selected, &gold)?;
    let label = args.label.unwrap_or_else(|| derive_label(&manifest));
    let mut summary = metrics::compute_metrics(&label, counts);
    summary.breakdown = metrics::confidence_breakdown(&selected, &gold)?;
    let table = metrics::render_table(std::slice::from_ref(&summary));
    print!("{table}");
    if let Some(path) = &args.out_json {
        let doc = summary.to_doc();
        fs::write(path, serde_json::to_vec_pretty(&doc)?)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("metrics json -> {}", path.display());
    }
    if let Some(path) = &args.out_table {
        fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?;
        println!("metrics table -> {}", path.display());
    }
    Ok(())
}

fn cmd_variability(args: VariabilityArgs) -> Result<(), Failure> {
    let manifest = ingest::load_manifest(&args.manifest).map_err(anyhow::Error::from)?;
    let gold = manifest.gold_labels();
    let records = runner::load_records(&args.results)?;
    let reps_present = records.iter().map(|r| r.repetition).max().map(|m| m + 1);
    if reps_present.unwrap_or(0) < 2 {
        return Err(Failure::Usage(anyhow!(
            "variability needs at least 2 repetitions in the results file"
        )));
    }
    let matrix = RepetitionMatrix::from_records(&records).map_err(anyhow::Error::from)?;
    let mode = if args.strict_reasons {
        ComparisonMode::DistinguishRejectReasons
    } else {
        ComparisonMode::CollapseRejected
    };
    let report =
        variability::variability_rate(&matrix, mode, Some(&gold)).map_err(anyhow::Error::from)?;
    let doc = report.to_doc();
    println!(
        "items={} reps={} variability={:.1}% ({} items disagree)",
        doc.items, doc.reps, doc.variability_percent, doc.disagreeing_items
    );
    for acc in &doc.per_rep_accuracy {
        println!(
            "rep {} accuracy: {:.1}%",
            acc.repetition, acc.accuracy_percent
        );
    }
    if let Some(path) = &args.out_json {
        fs::write(
            path,
            serde_json::to_vec_pretty(&doc).map_err(anyhow::Error::from)?,
        )
        .with_context(|| format!("writing {}", path.display()))?;
        println!("variability json -> {}", path.display());
    }
    if let Some(path) = &args.out_csv {
        fs::write(path, report.to_csv(&matrix))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("variability csv -> {}", path.display());
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut docs: Vec<MetricsDoc> = Vec::new();
    for path in &args.metrics {
        let raw = fs::read_to_string(path)
            .with_context(|| format!("reading metrics {}", path.display()))?;
        let doc: MetricsDoc = serde_json::from_str(&raw)
            .with_context(|| format!("parsing metrics {}", path.display()))?;
        docs.push(doc);
    }
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let writes = [
        ("comparison.svg", report::comparison_chart(&docs)),
        (
            "confidence_real.svg",
            report::confidence_chart("real", &docs),
        ),
        (
            "confidence_fake.svg",
            report::confidence_chart("fake", &docs),
        ),
        ("summary.html", report::summary_page(&docs)),
    ];
    for (name, content) in writes {
        let path = args.out_dir.join(name);
        write_if_changed(&path, content.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_if_changed(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Ok(existing) = fs::read(path) {
        if existing == bytes {
            return Ok(());
        }
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
