//! End-to-end evaluation runs: manifest in, records plus metadata out.
//!
//! Each (item, repetition) pair becomes exactly one record; failures degrade
//! to rejected records instead of disappearing. Work is journaled as it
//! completes, then the final results file is written sorted by
//! (item_id, repetition) via a temp-file rename, so two runs over the same
//! cache produce byte-identical results.

use crate::classify::{classify, ThresholdPolicy};
use crate::client::{LlmClient, MockScript, RawResponse, SendError};
use crate::domain::{
    ConfidenceLevel, EvaluationRecord, ModelConfig, NewsItem, RejectReason, Verdict,
};
use crate::image_prep::{prepare_image_file, ImagePrepConfig, PreparedImage};
use crate::ingest::{self, Manifest};
use crate::parser::{extract_confidence, parse_response};
use crate::prompting::{build_payload, build_prompt, PromptTemplate, DEFAULT_TEXT_CHAR_BUDGET};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use tokio::task::JoinSet;

/// Which backend serves responses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Live,
    Mock { script: PathBuf },
    Replay,
}

/// Full configuration of one run; serialized into the run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifest: PathBuf,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub image: ImagePrepConfig,
    #[serde(default)]
    pub policy: ThresholdPolicy,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    pub backend: BackendChoice,
    #[serde(default = "default_char_budget")]
    pub text_char_budget: usize,
}

fn default_repetitions() -> u32 {
    1
}

fn default_char_budget() -> usize {
    DEFAULT_TEXT_CHAR_BUDGET
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            bail!("repetitions must be at least 1");
        }
        self.model.validate().context("model config")?;
        self.image.validate().context("image config")?;
        self.policy.validate().context("threshold policy")?;
        Ok(())
    }
}

/// Per-run failure tallies, written into the metadata.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct RunTallies {
    pub image_errors: usize,
    pub transport_failures: usize,
    pub parse_failures: usize,
    pub q6_unanswered: usize,
    pub truncated_texts: usize,
}

/// Self-describing run header: with the cache directory it is enough to
/// re-execute the run in replay mode and get identical outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub prompt_digest: String,
    pub prompt_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub items_total: usize,
    pub repetitions: u32,
    pub records_written: usize,
    pub tallies: RunTallies,
    pub config: RunConfig,
}

#[derive(Debug)]
pub struct RunSummary {
    pub results_path: PathBuf,
    pub metadata_path: PathBuf,
    pub records: Vec<EvaluationRecord>,
    pub metadata: RunMetadata,
}

pub const RESULTS_FILE: &str = "results.jsonl";
pub const JOURNAL_FILE: &str = "results.partial.jsonl";
pub const METADATA_FILE: &str = "run_metadata.json";

fn build_client(config: &RunConfig) -> Result<LlmClient> {
    let client = match &config.backend {
        BackendChoice::Live => LlmClient::live(&config.model, &config.cache_dir)?,
        BackendChoice::Mock { script } => {
            let script = MockScript::load(script).context("loading mock script")?;
            LlmClient::mock(&config.model, script, &config.cache_dir)?
        }
        BackendChoice::Replay => LlmClient::replay(&config.model, &config.cache_dir)?,
    };
    Ok(client)
}

fn rejected_record(
    item: &NewsItem,
    repetition: u32,
    reason: RejectReason,
    text_truncated: bool,
    raw: Option<&RawResponse>,
) -> EvaluationRecord {
    EvaluationRecord {
        item_id: item.id.clone(),
        repetition,
        verdict: Verdict::Rejected(reason),
        scores: None,
        confidence: raw
            .map(|r| extract_confidence(&r.text))
            .unwrap_or(ConfidenceLevel::Unstated),
        explanation: String::new(),
        text_truncated,
        raw_response_digest: raw.map(|r| r.digest.clone()),
    }
}

fn record_from_response(
    item: &NewsItem,
    repetition: u32,
    text_truncated: bool,
    raw: &RawResponse,
    policy: &ThresholdPolicy,
) -> EvaluationRecord {
    match parse_response(&raw.text) {
        Ok(parsed) => {
            let verdict = classify(&parsed.scores, policy);
            EvaluationRecord {
                item_id: item.id.clone(),
                repetition,
                verdict,
                scores: Some(parsed.scores),
                confidence: parsed.confidence,
                explanation: parsed.explanation,
                text_truncated,
                raw_response_digest: Some(raw.digest.clone()),
            }
        }
        Err(failure) => {
            tracing::debug!(
                item = %item.id,
                repetition,
                reason = %failure.reason,
                span = %failure.offending_span,
                "response did not parse"
            );
            rejected_record(
                item,
                repetition,
                RejectReason::NoParse,
                text_truncated,
                Some(raw),
            )
        }
    }
}

struct Journal {
    writer: Mutex<std::io::BufWriter<fs::File>>,
}

impl Journal {
    fn create(path: &Path) -> Result<Self> {
        let file = fs::File::create(path)
            .with_context(|| format!("creating journal {}", path.display()))?;
        Ok(Journal {
            writer: Mutex::new(std::io::BufWriter::new(file)),
        })
    }

    fn append(&self, record: &EvaluationRecord) {
        let mut guard = self.writer.lock().expect("journal lock");
        let line = serde_json::to_string(record).expect("record serializes");
        let _ = writeln!(guard, "{line}");
        let _ = guard.flush();
    }
}

/// Runs the full evaluation described by `config`.
pub async fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating output directory {}", config.output_dir.display()))?;
    fs::create_dir_all(&config.cache_dir)
        .with_context(|| format!("creating cache directory {}", config.cache_dir.display()))?;
    let started_at = chrono::Utc::now().to_rfc3339();

    let template: Arc<PromptTemplate> = Arc::new(build_prompt());
    let manifest: Manifest = ingest::load_manifest(&config.manifest)?;
    let base_dir = manifest.base_dir();
    let client = Arc::new(build_client(config)?);
    let journal = Arc::new(Journal::create(&config.output_dir.join(JOURNAL_FILE))?);

    // Images are prepared once per item and reused across repetitions.
    let mut prepared: Vec<(Arc<NewsItem>, Option<Arc<PreparedImage>>)> =
        Vec::with_capacity(manifest.items.len());
    let mut tallies = RunTallies::default();
    for item in &manifest.items {
        let path = item.resolved_image_path(&base_dir);
        match prepare_image_file(&path, &config.image) {
            Ok(image) => prepared.push((Arc::new(item.clone()), Some(Arc::new(image)))),
            Err(e) => {
                tracing::warn!(item = %item.id, error = %e, "image preparation failed");
                tallies.image_errors += 1;
                prepared.push((Arc::new(item.clone()), None));
            }
        }
    }

    let mut records: Vec<EvaluationRecord> = Vec::new();
    let mut tasks: JoinSet<Result<EvaluationRecord, SendError>> = JoinSet::new();
    // Payloads carry the full prompt plus the encoded image, so they are
    // built inside the workers behind this gate rather than all upfront.
    let gate = Arc::new(tokio::sync::Semaphore::new(config.model.concurrency_limit));
    let model = Arc::new(config.model.clone());
    let char_budget = config.text_char_budget;
    for (item, image) in &prepared {
        for repetition in 0..config.repetitions {
            match image {
                None => {
                    let record =
                        rejected_record(item, repetition, RejectReason::ImageError, false, None);
                    journal.append(&record);
                    records.push(record);
                }
                Some(image) => {
                    let client = Arc::clone(&client);
                    let journal = Arc::clone(&journal);
                    let item = Arc::clone(item);
                    let image = Arc::clone(image);
                    let template = Arc::clone(&template);
                    let model = Arc::clone(&model);
                    let gate = Arc::clone(&gate);
                    let policy = config.policy;
                    tasks.spawn(async move {
                        let _slot = gate.acquire_owned().await.expect("gate never closed");
                        let payload = build_payload(
                            &template,
                            &item,
                            (*image).clone(),
                            &model,
                            repetition,
                            char_budget,
                        );
                        let truncated = payload.text_truncated;
                        let record = match client.send(&payload).await {
                            Ok(raw) => {
                                record_from_response(&item, repetition, truncated, &raw, &policy)
                            }
                            Err(e) if e.is_fatal() => return Err(e),
                            Err(e) => {
                                tracing::warn!(item = %item.id, repetition, error = %e, "send failed");
                                rejected_record(
                                    &item,
                                    repetition,
                                    RejectReason::TransportFailure,
                                    truncated,
                                    None,
                                )
                            }
                        };
                        journal.append(&record);
                        Ok(record)
                    });
                }
            }
        }
    }

    let expected = prepared.len() * config.repetitions as usize;
    while let Some(joined) = tasks.join_next().await {
        let record = joined.context("worker task panicked")??;
        records.push(record);
        if records.len().is_multiple_of(50) {
            tracing::info!(done = records.len(), total = expected, "progress");
        }
    }

    records.sort_by(|a, b| {
        a.item_id
            .cmp(&b.item_id)
            .then(a.repetition.cmp(&b.repetition))
    });
    for record in &records {
        match record.verdict {
            Verdict::Rejected(RejectReason::TransportFailure) => tallies.transport_failures += 1,
            Verdict::Rejected(RejectReason::NoParse) => tallies.parse_failures += 1,
            Verdict::Rejected(RejectReason::Q6NotAnswered) => tallies.q6_unanswered += 1,
            _ => {}
        }
        if record.text_truncated {
            tallies.truncated_texts += 1;
        }
    }

    let metadata = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        prompt_digest: template.digest().to_string(),
        prompt_version: template.version_tag.clone(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        items_total: manifest.items.len(),
        repetitions: config.repetitions,
        records_written: records.len(),
        tallies,
        config: config.clone(),
    };

    // Metadata lands first; the results rename is the finalize marker.
    let metadata_path = config.output_dir.join(METADATA_FILE);
    write_atomic(
        &metadata_path,
        &serde_json::to_vec_pretty(&metadata).expect("metadata serializes"),
    )?;
    let results_path = config.output_dir.join(RESULTS_FILE);
    let mut body = Vec::new();
    for record in &records {
        serde_json::to_writer(&mut body, record).expect("record serializes");
        body.push(b'\n');
    }
    write_atomic(&results_path, &body)?;
    let _ = fs::remove_file(config.output_dir.join(JOURNAL_FILE));

    Ok(RunSummary {
        results_path,
        metadata_path,
        records,
        metadata,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().context("output path has no parent")?;
    let tmp = parent.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Loads a results JSONL file, validating every record.
pub fn load_records(path: &Path) -> Result<Vec<EvaluationRecord>> {
    let raw =
        fs::read_to_string(path).with_context(|| format!("reading results {}", path.display()))?;
    let mut records = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EvaluationRecord = serde_json::from_str(line)
            .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
        records.push(record);
    }
    Ok(records)
}
