//! Batch evaluation harness for prompt-based multimodal news verification.
//!
//! The pipeline feeds (text, image) news items with a six-criterion rubric
//! prompt to a vision-capable chat-completion model, parses the structured
//! verdict out of the reply, and computes recall/specificity/rejection
//! metrics plus a repeated-run prediction-variability analysis. Runs are
//! cached content-addressed so replays are offline and byte-deterministic.

pub mod classify;
pub mod client;
pub mod digest;
pub mod domain;
pub mod image_prep;
pub mod ingest;
pub mod metrics;
pub mod parser;
pub mod prompting;
pub mod report;
pub mod runner;
pub mod score;
pub mod variability;

pub use classify::{classify, Orientation, ThresholdPolicy};
pub use domain::{
    ConfidenceLevel, DatasetId, EvaluationRecord, GoldLabel, ModelConfig, NewsItem, Rating,
    RejectReason, RubricScores, Verdict,
};
pub use parser::{extract_confidence, parse_response, render_canonical, ParsedEvaluation};
pub use score::Score;
