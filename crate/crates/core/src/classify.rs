//! Threshold rule mapping rubric scores to a verdict.
//!
//! Only the overall classification rating (q6) decides; the rubric folds
//! q1-q5 into it before answering. The scale runs 0 = very real to
//! 9 = highly fake, so the default orientation calls a rating at or above
//! the threshold Fake. The opposite orientation (`PaperLiteral`) is kept
//! behind a flag for fidelity experiments and is the exact complement on
//! answered scores.

use crate::domain::{RejectReason, RubricScores, Verdict};
use crate::score::Score;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// q6 >= threshold means Fake (consistent with the rubric's scale).
    ScaleConsistent,
    /// q6 >= threshold means Real (the literal reading of the source rule).
    PaperLiteral,
}

/// Decision rule applied to q6. Recorded in run metadata so every results
/// file names the rule that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    #[serde(
        serialize_with = "serialize_threshold",
        deserialize_with = "deserialize_threshold"
    )]
    pub fake_threshold: Score,
    pub orientation: Orientation,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy {
            fake_threshold: Score::from_int(5),
            orientation: Orientation::ScaleConsistent,
        }
    }
}

#[derive(Debug, Error)]
#[error("fake_threshold must lie in (0, 9], got {0}")]
pub struct ThresholdError(String);

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        if self.fake_threshold > Score::from_int(0) && self.fake_threshold <= Score::from_int(9) {
            Ok(())
        } else {
            Err(ThresholdError(self.fake_threshold.to_decimal_string()))
        }
    }
}

fn serialize_threshold<S: serde::Serializer>(s: &Score, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&s.to_decimal_string())
}

fn deserialize_threshold<'de, D: serde::Deserializer<'de>>(de: D) -> Result<Score, D::Error> {
    let text = String::deserialize(de)?;
    Score::parse_decimal(&text).map_err(serde::de::Error::custom)
}

/// Applies the threshold rule; an unanswered q6 is an abstention.
pub fn classify(scores: &RubricScores, policy: &ThresholdPolicy) -> Verdict {
    let Some(q6) = scores.q6_classification.score() else {
        return Verdict::Rejected(RejectReason::Q6NotAnswered);
    };
    let at_or_above = q6 >= policy.fake_threshold;
    match policy.orientation {
        Orientation::ScaleConsistent => {
            if at_or_above {
                Verdict::Fake
            } else {
                Verdict::Real
            }
        }
        Orientation::PaperLiteral => {
            if at_or_above {
                Verdict::Real
            } else {
                Verdict::Fake
            }
        }
    }
}
