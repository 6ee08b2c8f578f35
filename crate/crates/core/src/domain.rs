//! Shared evaluation types: items, rubric scores, verdicts, records.
//!
//! Everything here is immutable after construction and safe to share across
//! worker tasks. Records persist as one JSON object per line; answered scores
//! are rendered as JSON numbers and unanswered ones as the literal string
//! "NaN", so the wire format mirrors the rubric's own convention while the
//! in-memory form stays an exact rational.

use crate::score::Score;
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Source dataset of an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetId {
    Gossipcop,
    Politifact,
    Fakeddit,
    Mmfakebench,
    Ammeba,
    Custom,
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DatasetId::Gossipcop => "gossipcop",
            DatasetId::Politifact => "politifact",
            DatasetId::Fakeddit => "fakeddit",
            DatasetId::Mmfakebench => "mmfakebench",
            DatasetId::Ammeba => "ammeba",
            DatasetId::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// Ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldLabel {
    Real,
    Fake,
}

/// One evaluation unit: a text/image pair with its gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsItem {
    pub id: String,
    pub dataset: DatasetId,
    pub text: String,
    pub image_path: PathBuf,
    pub gold_label: GoldLabel,
}

impl NewsItem {
    /// Image path resolved against the manifest's directory when relative.
    pub fn resolved_image_path(&self, base_dir: &Path) -> PathBuf {
        if self.image_path.is_absolute() {
            self.image_path.clone()
        } else {
            base_dir.join(&self.image_path)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationIssue {
    EmptyText,
    MissingImage,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::EmptyText => f.write_str("EmptyText"),
            ValidationIssue::MissingImage => f.write_str("MissingImage"),
        }
    }
}

/// Reports every violated item invariant; an empty list means the item is ok.
pub fn validate_item(item: &NewsItem, base_dir: &Path) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if item.text.trim().is_empty() {
        issues.push(ValidationIssue::EmptyText);
    }
    if !item.resolved_image_path(base_dir).is_file() {
        issues.push(ValidationIssue::MissingImage);
    }
    issues
}

/// One rubric answer: a rating in 0..=9 or the distinguished "not answered".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rating {
    Answered(Score),
    NotAnswered,
}

impl Rating {
    pub fn score(&self) -> Option<Score> {
        match self {
            Rating::Answered(s) => Some(*s),
            Rating::NotAnswered => None,
        }
    }

    pub fn is_answered(&self) -> bool {
        matches!(self, Rating::Answered(_))
    }

    /// Rendering used in canonical text and the JSONL scores array.
    pub fn render(&self) -> String {
        match self {
            Rating::Answered(s) => s.to_decimal_string(),
            Rating::NotAnswered => "NaN".to_string(),
        }
    }
}

impl Serialize for Rating {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Rating::NotAnswered => serializer.serialize_str("NaN"),
            Rating::Answered(s) => {
                // Scores hold at most 12 fractional digits, so the decimal
                // text maps to a unique f64 that prints back identically.
                let n = serde_json::Number::from_f64(s.as_f64())
                    .ok_or_else(|| serde::ser::Error::custom("non-finite score"))?;
                n.serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Rating {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatingVisitor;

        impl Visitor<'_> for RatingVisitor {
            type Value = Rating;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"NaN\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rating, E> {
                if v.eq_ignore_ascii_case("nan") {
                    Ok(Rating::NotAnswered)
                } else {
                    Score::parse_decimal(v)
                        .map(Rating::Answered)
                        .map_err(|e| E::custom(format!("invalid score {v:?}: {e}")))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rating, E> {
                i64::try_from(v)
                    .map(|i| Rating::Answered(Score::from_int(i)))
                    .map_err(|_| E::custom("score out of integer range"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rating, E> {
                Ok(Rating::Answered(Score::from_int(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rating, E> {
                if !v.is_finite() {
                    return Ok(Rating::NotAnswered);
                }
                // Shortest round-trip text keeps the decimal exact.
                let text = format!("{v}");
                Score::parse_decimal(&text)
                    .map(Rating::Answered)
                    .map_err(|e| E::custom(format!("invalid score {v}: {e}")))
            }
        }

        deserializer.deserialize_any(RatingVisitor)
    }
}

/// The six ratings answering the rubric's six questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RubricScores {
    pub q1_source_reliability: Rating,
    pub q2_emotional_coherence: Rating,
    pub q3_manipulation: Rating,
    pub q4_temporal_consistency: Rating,
    pub q5_semantic_coherence: Rating,
    pub q6_classification: Rating,
}

impl RubricScores {
    pub fn from_array(ratings: [Rating; 6]) -> Self {
        RubricScores {
            q1_source_reliability: ratings[0],
            q2_emotional_coherence: ratings[1],
            q3_manipulation: ratings[2],
            q4_temporal_consistency: ratings[3],
            q5_semantic_coherence: ratings[4],
            q6_classification: ratings[5],
        }
    }

    pub fn as_array(&self) -> [Rating; 6] {
        [
            self.q1_source_reliability,
            self.q2_emotional_coherence,
            self.q3_manipulation,
            self.q4_temporal_consistency,
            self.q5_semantic_coherence,
            self.q6_classification,
        ]
    }

    pub fn all_answered_in_range(&self) -> bool {
        self.as_array()
            .iter()
            .all(|r| r.score().is_none_or(|s| s.in_rubric_range()))
    }
}

impl Serialize for RubricScores {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(6))?;
        for r in self.as_array() {
            seq.serialize_element(&r)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RubricScores {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScoresVisitor;

        impl<'de> Visitor<'de> for ScoresVisitor {
            type Value = RubricScores;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of exactly six ratings")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RubricScores, A::Error> {
                let mut ratings = [Rating::NotAnswered; 6];
                for (i, slot) in ratings.iter_mut().enumerate() {
                    *slot = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                if seq.next_element::<Rating>()?.is_some() {
                    return Err(de::Error::custom("scores array has more than six elements"));
                }
                Ok(RubricScores::from_array(ratings))
            }
        }

        deserializer.deserialize_seq(ScoresVisitor)
    }
}

/// Model's self-reported certainty; `Unstated` when no marker was found.
/// Ordering follows declaration order (High first) for stable bucket output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceLevel {
    High,
    Medium,
    Low,
    Unstated,
}

impl ConfidenceLevel {
    pub const ALL: [ConfidenceLevel; 4] = [
        ConfidenceLevel::High,
        ConfidenceLevel::Medium,
        ConfidenceLevel::Low,
        ConfidenceLevel::Unstated,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ConfidenceLevel::High => "High",
            ConfidenceLevel::Medium => "Medium",
            ConfidenceLevel::Low => "Low",
            ConfidenceLevel::Unstated => "Unstated",
        }
    }
}

/// Why the pipeline abstained on an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoParse,
    Q6NotAnswered,
    ImageError,
    TransportFailure,
}

/// Final decision for one (item, repetition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Real,
    Fake,
    Rejected(RejectReason),
}

impl Verdict {
    pub fn is_rejected(&self) -> bool {
        matches!(self, Verdict::Rejected(_))
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            Verdict::Real => "real",
            Verdict::Fake => "fake",
            Verdict::Rejected(_) => "rejected",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Real => f.write_str("real"),
            Verdict::Fake => f.write_str("fake"),
            Verdict::Rejected(r) => write!(f, "rejected({})", reason_str(*r)),
        }
    }
}

fn reason_str(r: RejectReason) -> &'static str {
    match r {
        RejectReason::NoParse => "no_parse",
        RejectReason::Q6NotAnswered => "q6_not_answered",
        RejectReason::ImageError => "image_error",
        RejectReason::TransportFailure => "transport_failure",
    }
}

/// Persisted outcome of evaluating one item once.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub item_id: String,
    pub repetition: u32,
    pub verdict: Verdict,
    pub scores: Option<RubricScores>,
    pub confidence: ConfidenceLevel,
    pub explanation: String,
    pub text_truncated: bool,
    pub raw_response_digest: Option<String>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record {item_id} rep {repetition}: {message}")]
    Invariant {
        item_id: String,
        repetition: u32,
        message: String,
    },
}

impl EvaluationRecord {
    /// Checks the coupling between verdict, scores and response digest.
    pub fn validate(&self) -> Result<(), RecordError> {
        let fail = |message: &str| {
            Err(RecordError::Invariant {
                item_id: self.item_id.clone(),
                repetition: self.repetition,
                message: message.to_string(),
            })
        };
        if let Some(scores) = &self.scores {
            if !scores.all_answered_in_range() {
                return fail("answered score outside 0..=9");
            }
        }
        match self.verdict {
            Verdict::Real | Verdict::Fake => {
                let Some(scores) = &self.scores else {
                    return fail("answered verdict without scores");
                };
                if !scores.q6_classification.is_answered() {
                    return fail("answered verdict with unanswered q6");
                }
                if self.raw_response_digest.is_none() {
                    return fail("answered verdict without a raw response digest");
                }
            }
            Verdict::Rejected(RejectReason::Q6NotAnswered) => {
                let Some(scores) = &self.scores else {
                    return fail("q6_not_answered rejection without scores");
                };
                if scores.q6_classification.is_answered() {
                    return fail("q6_not_answered rejection with answered q6");
                }
                if self.raw_response_digest.is_none() {
                    return fail("q6_not_answered rejection without a raw response digest");
                }
            }
            Verdict::Rejected(RejectReason::NoParse) => {
                if self.scores.is_some() {
                    return fail("no_parse rejection carries scores");
                }
                if self.raw_response_digest.is_none() {
                    return fail("no_parse rejection without a raw response digest");
                }
            }
            Verdict::Rejected(RejectReason::ImageError)
            | Verdict::Rejected(RejectReason::TransportFailure) => {
                if self.scores.is_some() {
                    return fail("image/transport rejection carries scores");
                }
                if self.raw_response_digest.is_some() {
                    return fail("image/transport rejection carries a response digest");
                }
            }
        }
        Ok(())
    }
}

/// Wire form: verdict kind plus an optional reason, flat in the JSON object.
#[derive(Serialize, Deserialize)]
struct RecordWire {
    item_id: String,
    repetition: u32,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    reject_reason: Option<RejectReason>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    scores: Option<RubricScores>,
    confidence: ConfidenceLevel,
    explanation: String,
    text_truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    raw_response_digest: Option<String>,
}

impl Serialize for EvaluationRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (verdict, reject_reason) = match self.verdict {
            Verdict::Real => ("real", None),
            Verdict::Fake => ("fake", None),
            Verdict::Rejected(r) => ("rejected", Some(r)),
        };
        RecordWire {
            item_id: self.item_id.clone(),
            repetition: self.repetition,
            verdict: verdict.to_string(),
            reject_reason,
            scores: self.scores,
            confidence: self.confidence,
            explanation: self.explanation.clone(),
            text_truncated: self.text_truncated,
            raw_response_digest: self.raw_response_digest.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EvaluationRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = RecordWire::deserialize(deserializer)?;
        let verdict = match (wire.verdict.as_str(), wire.reject_reason) {
            ("real", None) => Verdict::Real,
            ("fake", None) => Verdict::Fake,
            ("rejected", Some(r)) => Verdict::Rejected(r),
            ("rejected", None) => {
                return Err(de::Error::custom("rejected verdict without reject_reason"))
            }
            (other, Some(_)) if other == "real" || other == "fake" => {
                return Err(de::Error::custom("answered verdict carries reject_reason"))
            }
            (other, _) => return Err(de::Error::custom(format!("unknown verdict {other:?}"))),
        };
        let record = EvaluationRecord {
            item_id: wire.item_id,
            repetition: wire.repetition,
            verdict,
            scores: wire.scores,
            confidence: wire.confidence,
            explanation: wire.explanation,
            text_truncated: wire.text_truncated,
            raw_response_digest: wire.raw_response_digest,
        };
        record.validate().map_err(de::Error::custom)?;
        Ok(record)
    }
}

/// Connection and sampling settings for the chat-completions endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub request_timeout_secs: u64,
    pub max_retries: u32,
    pub concurrency_limit: usize,
    pub requests_per_minute: Option<u32>,
    pub api_key_env: String,
    pub seed: Option<u64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            endpoint_url: "https://api.openai.com/v1".to_string(),
            model_name: "gpt-4o".to_string(),
            temperature: 0.7,
            max_output_tokens: 500,
            request_timeout_secs: 60,
            max_retries: 4,
            concurrency_limit: 4,
            requests_per_minute: None,
            api_key_env: "OPENAI_API_KEY".to_string(),
            seed: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("temperature {0} outside [0, 2]")]
    Temperature(f64),
    #[error("concurrency_limit must be at least 1")]
    Concurrency,
    #[error("endpoint_url is empty")]
    Endpoint,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=2.0).contains(&self.temperature) || !self.temperature.is_finite() {
            return Err(ConfigError::Temperature(self.temperature));
        }
        if self.concurrency_limit < 1 {
            return Err(ConfigError::Concurrency);
        }
        if self.endpoint_url.trim().is_empty() {
            return Err(ConfigError::Endpoint);
        }
        Ok(())
    }
}
