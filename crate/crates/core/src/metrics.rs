//! Confusion counts, headline rates, and confidence-bucketed breakdowns.
//!
//! Real news is the positive class: recall is the fraction of gold-real
//! items answered Real, specificity the fraction of gold-fake items answered
//! Fake. Rejected items stay out of those four cells but remain in the
//! accuracy and rejection-rate denominators. All arithmetic is exact
//! rational; rounding happens only when rendering.

use crate::domain::{ConfidenceLevel, EvaluationRecord, GoldLabel, Verdict};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

/// Partition of evaluated items: tp + tn + fp + fn + rejected = total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub rejected: u64,
    pub total: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64, rejected: u64) -> Self {
        ConfusionCounts {
            tp,
            tn,
            fp,
            fn_,
            rejected,
            total: tp + tn + fp + fn_ + rejected,
        }
    }

    pub fn partition_holds(&self) -> bool {
        self.tp + self.tn + self.fp + self.fn_ + self.rejected == self.total
    }
}

/// A rate in [0, 1]; `None` at call sites means 0/0, rendered as an em dash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate(Ratio<u64>);

impl Rate {
    fn checked(numer: u64, denom: u64) -> Option<Rate> {
        if denom == 0 {
            None
        } else {
            Some(Rate(Ratio::new(numer, denom)))
        }
    }

    pub fn from_ratio(r: Ratio<u64>) -> Rate {
        Rate(r)
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Percentage with one decimal digit, half-up.
    pub fn percent_one_decimal(&self) -> f64 {
        let n = *self.0.numer() as u128;
        let d = *self.0.denom() as u128;
        let tenths = (n * 2000 + d) / (2 * d);
        tenths as f64 / 10.0
    }

    /// Integer percentage, half-up; the rendering used in the report table.
    pub fn percent_rounded(&self) -> u32 {
        let n = *self.0.numer() as u128;
        let d = *self.0.denom() as u128;
        ((n * 200 + d) / (2 * d)) as u32
    }

    pub fn display_percent(&self) -> String {
        format!("{}%", self.percent_rounded())
    }
}

fn display_rate(rate: Option<Rate>) -> String {
    rate.map_or_else(|| "—".to_string(), |r| r.display_percent())
}

/// Correct detections for one gold class, bucketed by confidence level.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBreakdown {
    pub counts: BTreeMap<ConfidenceLevel, u64>,
    pub total_correct: u64,
}

impl ClassBreakdown {
    pub fn share(&self, level: ConfidenceLevel) -> Rate {
        Rate(Ratio::new(
            self.counts.get(&level).copied().unwrap_or(0),
            self.total_correct,
        ))
    }
}

/// Per-class breakdowns; a class with no correct detections is `None`
/// rather than a row of 0/0 shares.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfidenceBreakdown {
    pub real: Option<ClassBreakdown>,
    pub fake: Option<ClassBreakdown>,
}

/// The full metric suite for one results set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    pub label: String,
    pub counts: ConfusionCounts,
    pub recall: Option<Rate>,
    pub specificity: Option<Rate>,
    pub precision: Option<Rate>,
    pub f1: Option<Rate>,
    pub accuracy: Option<Rate>,
    pub rejection_rate: Option<Rate>,
    pub breakdown: ConfidenceBreakdown,
}

#[derive(Debug, Error)]
pub enum TallyError {
    #[error("record references unknown item {0:?}")]
    UnknownItem(String),
    #[error("duplicate record for item {0:?}")]
    DuplicateItem(String),
    #[error("{missing} manifest items have no record (first: {first:?})")]
    MissingItems { missing: usize, first: String },
}

/// Counts verdicts against gold labels; exactly one verdict per gold item.
pub fn tally_pairs<'a, I>(
    pairs: I,
    gold: &HashMap<String, GoldLabel>,
) -> Result<ConfusionCounts, TallyError>
where
    I: IntoIterator<Item = (&'a str, Verdict)>,
{
    let mut seen: HashSet<&str> = HashSet::new();
    let (mut tp, mut tn, mut fp, mut fn_, mut rejected) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for (id, verdict) in pairs {
        let Some(label) = gold.get(id) else {
            return Err(TallyError::UnknownItem(id.to_string()));
        };
        if !seen.insert(id) {
            return Err(TallyError::DuplicateItem(id.to_string()));
        }
        match (label, verdict) {
            (_, Verdict::Rejected(_)) => rejected += 1,
            (GoldLabel::Real, Verdict::Real) => tp += 1,
            (GoldLabel::Real, Verdict::Fake) => fn_ += 1,
            (GoldLabel::Fake, Verdict::Fake) => tn += 1,
            (GoldLabel::Fake, Verdict::Real) => fp += 1,
        }
    }
    if seen.len() != gold.len() {
        let first = gold
            .keys()
            .filter(|id| !seen.contains(id.as_str()))
            .min()
            .cloned()
            .unwrap_or_default();
        return Err(TallyError::MissingItems {
            missing: gold.len() - seen.len(),
            first,
        });
    }
    Ok(ConfusionCounts::new(tp, tn, fp, fn_, rejected))
}

/// Tallies one repetition's records against the gold labels.
pub fn tally(
    records: &[EvaluationRecord],
    gold: &HashMap<String, GoldLabel>,
) -> Result<ConfusionCounts, TallyError> {
    tally_pairs(
        records.iter().map(|r| (r.item_id.as_str(), r.verdict)),
        gold,
    )
}

/// Headline rates from counts. Any 0/0 is reported as `None`.
pub fn compute_metrics(label: &str, counts: ConfusionCounts) -> MetricsSummary {
    let recall = Rate::checked(counts.tp, counts.tp + counts.fn_);
    let specificity = Rate::checked(counts.tn, counts.tn + counts.fp);
    let precision = Rate::checked(counts.tp, counts.tp + counts.fp);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => {
            let sum = p.0 + r.0;
            if *sum.numer() == 0 {
                None
            } else {
                Some(Rate((p.0 * r.0 * Ratio::from_integer(2)) / sum))
            }
        }
        _ => None,
    };
    let accuracy = Rate::checked(counts.tp + counts.tn, counts.total);
    let rejection_rate = Rate::checked(counts.rejected, counts.total);
    MetricsSummary {
        label: label.to_string(),
        counts,
        recall,
        specificity,
        precision,
        f1,
        accuracy,
        rejection_rate,
        breakdown: ConfidenceBreakdown::default(),
    }
}

/// Buckets correct detections by the model's stated confidence, per class.
pub fn confidence_breakdown(
    records: &[EvaluationRecord],
    gold: &HashMap<String, GoldLabel>,
) -> Result<ConfidenceBreakdown, TallyError> {
    let mut real: BTreeMap<ConfidenceLevel, u64> = BTreeMap::new();
    let mut fake: BTreeMap<ConfidenceLevel, u64> = BTreeMap::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for record in records {
        let Some(label) = gold.get(&record.item_id) else {
            return Err(TallyError::UnknownItem(record.item_id.clone()));
        };
        if !seen.insert(record.item_id.as_str()) {
            return Err(TallyError::DuplicateItem(record.item_id.clone()));
        }
        let bucket = match (label, record.verdict) {
            (GoldLabel::Real, Verdict::Real) => &mut real,
            (GoldLabel::Fake, Verdict::Fake) => &mut fake,
            _ => continue,
        };
        *bucket.entry(record.confidence).or_insert(0) += 1;
    }
    let finish = |mut counts: BTreeMap<ConfidenceLevel, u64>| {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return None;
        }
        for level in ConfidenceLevel::ALL {
            counts.entry(level).or_insert(0);
        }
        Some(ClassBreakdown {
            counts,
            total_correct: total,
        })
    };
    Ok(ConfidenceBreakdown {
        real: finish(real),
        fake: finish(fake),
    })
}

// --- serialized document form ---

/// Rate as written to metrics JSON: fraction, one-decimal percent, and the
/// integer-rounded display string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDoc {
    pub value: f64,
    pub percent: f64,
    pub display: String,
}

impl From<Rate> for RateDoc {
    fn from(rate: Rate) -> Self {
        RateDoc {
            value: rate.as_f64(),
            percent: rate.percent_one_decimal(),
            display: rate.display_percent(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBreakdownDoc {
    pub total_correct: u64,
    pub counts: BTreeMap<String, u64>,
    pub shares: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub label: String,
    pub counts: ConfusionCounts,
    pub recall: Option<RateDoc>,
    pub specificity: Option<RateDoc>,
    pub precision: Option<RateDoc>,
    pub f1: Option<RateDoc>,
    pub accuracy: Option<RateDoc>,
    pub rejection_rate: Option<RateDoc>,
    pub confidence_breakdown: BTreeMap<String, Option<ClassBreakdownDoc>>,
}

fn breakdown_doc(b: &Option<ClassBreakdown>) -> Option<ClassBreakdownDoc> {
    b.as_ref().map(|cb| {
        let mut counts = BTreeMap::new();
        let mut shares = BTreeMap::new();
        for level in ConfidenceLevel::ALL {
            let key = level.label().to_ascii_lowercase();
            counts.insert(key.clone(), cb.counts.get(&level).copied().unwrap_or(0));
            shares.insert(key, cb.share(level).as_f64());
        }
        ClassBreakdownDoc {
            total_correct: cb.total_correct,
            counts,
            shares,
        }
    })
}

impl MetricsSummary {
    pub fn to_doc(&self) -> MetricsDoc {
        let mut confidence_breakdown = BTreeMap::new();
        confidence_breakdown.insert("real".to_string(), breakdown_doc(&self.breakdown.real));
        confidence_breakdown.insert("fake".to_string(), breakdown_doc(&self.breakdown.fake));
        MetricsDoc {
            label: self.label.clone(),
            counts: self.counts,
            recall: self.recall.map(RateDoc::from),
            specificity: self.specificity.map(RateDoc::from),
            precision: self.precision.map(RateDoc::from),
            f1: self.f1.map(RateDoc::from),
            accuracy: self.accuracy.map(RateDoc::from),
            rejection_rate: self.rejection_rate.map(RateDoc::from),
            confidence_breakdown,
        }
    }

    /// Plain-text table mirroring the report's column order.
    pub fn render_table_row(&self) -> String {
        format!(
            "{:<16} {:>7} {:>12} {:>9} {:>9}",
            self.label,
            display_rate(self.recall),
            display_rate(self.specificity),
            display_rate(self.rejection_rate),
            display_rate(self.accuracy),
        )
    }
}

/// Renders the comparison table: Recall, Specificity, Rejected, Accuracy.
pub fn render_table(summaries: &[MetricsSummary]) -> String {
    let mut out = format!(
        "{:<16} {:>7} {:>12} {:>9} {:>9}\n",
        "Dataset", "Recall", "Specificity", "Rejected", "Accuracy"
    );
    for s in summaries {
        out.push_str(&s.render_table_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RejectReason;

    fn gold(pairs: &[(&str, GoldLabel)]) -> HashMap<String, GoldLabel> {
        pairs.iter().map(|(id, l)| (id.to_string(), *l)).collect()
    }

    fn record(id: &str, verdict: Verdict, confidence: ConfidenceLevel) -> EvaluationRecord {
        EvaluationRecord {
            item_id: id.to_string(),
            repetition: 0,
            verdict,
            scores: None,
            confidence,
            explanation: String::new(),
            text_truncated: false,
            raw_response_digest: match verdict {
                Verdict::Rejected(RejectReason::ImageError)
                | Verdict::Rejected(RejectReason::TransportFailure) => None,
                _ => Some("00".repeat(32)),
            },
        }
    }

    #[test]
    fn tally_counts_clean_split() {
        let gold = gold(&[
            ("r1", GoldLabel::Real),
            ("r2", GoldLabel::Real),
            ("f1", GoldLabel::Fake),
            ("f2", GoldLabel::Fake),
        ]);
        let records = vec![
            record("r1", Verdict::Real, ConfidenceLevel::High),
            record("r2", Verdict::Real, ConfidenceLevel::High),
            record("f1", Verdict::Fake, ConfidenceLevel::High),
            record("f2", Verdict::Fake, ConfidenceLevel::High),
        ];
        let counts = tally(&records, &gold).unwrap();
        assert_eq!(
            (counts.tp, counts.tn, counts.fp, counts.fn_, counts.rejected),
            (2, 2, 0, 0, 0)
        );
        assert!(counts.partition_holds());
    }

    #[test]
    fn rejected_items_excluded_from_cells() {
        let gold = gold(&[("r1", GoldLabel::Real)]);
        let records = vec![record(
            "r1",
            Verdict::Rejected(RejectReason::TransportFailure),
            ConfidenceLevel::Unstated,
        )];
        let counts = tally(&records, &gold).unwrap();
        assert_eq!(counts.rejected, 1);
        assert_eq!(counts.tp + counts.fn_, 0);
    }

    #[test]
    fn tally_aborts_on_unknown_and_duplicate() {
        let gold = gold(&[("a", GoldLabel::Real)]);
        let unknown = vec![record("zzz", Verdict::Real, ConfidenceLevel::High)];
        assert!(matches!(
            tally(&unknown, &gold),
            Err(TallyError::UnknownItem(_))
        ));
        let dup = vec![
            record("a", Verdict::Real, ConfidenceLevel::High),
            record("a", Verdict::Real, ConfidenceLevel::High),
        ];
        assert!(matches!(
            tally(&dup, &gold),
            Err(TallyError::DuplicateItem(_))
        ));
    }

    #[test]
    fn gossipcop_style_reconstruction() {
        let counts = ConfusionCounts::new(480, 195, 305, 20, 0);
        let m = compute_metrics("gossipcop", counts);
        assert_eq!(m.recall.unwrap().percent_rounded(), 96);
        assert_eq!(m.specificity.unwrap().percent_rounded(), 39);
        assert_eq!(m.accuracy.unwrap().percent_one_decimal(), 67.5);
        assert_eq!(m.accuracy.unwrap().percent_rounded(), 68);
    }

    #[test]
    fn perfect_counts_give_all_hundred() {
        let m = compute_metrics("t", ConfusionCounts::new(5, 5, 0, 0, 0));
        for rate in [m.recall, m.specificity, m.precision, m.accuracy, m.f1] {
            assert_eq!(rate.unwrap().percent_rounded(), 100);
        }
    }

    #[test]
    fn zero_over_zero_is_undefined() {
        let m = compute_metrics("t", ConfusionCounts::new(0, 3, 0, 2, 0));
        assert!(m.precision.is_none());
        assert!(m.f1.is_none());
        assert_eq!(display_rate(m.precision), "—");
    }

    #[test]
    fn accuracy_includes_rejected_in_denominator() {
        let m = compute_metrics("t", ConfusionCounts::new(50, 20, 30, 164, 36));
        assert_eq!(m.counts.total, 300);
        assert_eq!(m.accuracy.unwrap().percent_one_decimal(), 23.3);
        assert_eq!(m.rejection_rate.unwrap().percent_rounded(), 12);
    }

    #[test]
    fn breakdown_shares_sum_to_one() {
        let gold = gold(&[
            ("a", GoldLabel::Real),
            ("b", GoldLabel::Real),
            ("c", GoldLabel::Real),
            ("d", GoldLabel::Real),
            ("e", GoldLabel::Fake),
        ]);
        let records = vec![
            record("a", Verdict::Real, ConfidenceLevel::High),
            record("b", Verdict::Real, ConfidenceLevel::High),
            record("c", Verdict::Real, ConfidenceLevel::High),
            record("d", Verdict::Real, ConfidenceLevel::Medium),
            record("e", Verdict::Real, ConfidenceLevel::High), // wrong: not counted
        ];
        let b = confidence_breakdown(&records, &gold).unwrap();
        let real = b.real.unwrap();
        assert_eq!(real.share(ConfidenceLevel::High).as_f64(), 0.75);
        assert_eq!(real.share(ConfidenceLevel::Medium).as_f64(), 0.25);
        assert_eq!(real.share(ConfidenceLevel::Low).as_f64(), 0.0);
        assert!(
            b.fake.is_none(),
            "no correct fake detections -> class empty"
        );
    }

    #[test]
    fn missing_records_reported() {
        let gold = gold(&[("a", GoldLabel::Real), ("b", GoldLabel::Fake)]);
        let records = vec![record("a", Verdict::Real, ConfidenceLevel::High)];
        assert!(matches!(
            tally(&records, &gold),
            Err(TallyError::MissingItems { missing: 1, .. })
        ));
    }
}
