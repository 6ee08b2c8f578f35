//! Extraction of rubric answers from free-text model replies.
//!
//! The reply contract asks for a final bracketed list of six ratings plus a
//! confidence marker, but real model output drifts: code fences, quoted
//! lists, decimals, stray prose lists. The parser scans every bracketed
//! candidate, keeps the last well-formed six-element list (final-answer
//! position), and degrades to a typed [`ParseFailure`] instead of ever
//! panicking.

use crate::domain::{ConfidenceLevel, Rating, RubricScores};
use crate::score::{Score, ScoreParseError};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Everything extracted from one reply.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEvaluation {
    pub scores: RubricScores,
    pub confidence: ConfidenceLevel,
    pub explanation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailureReason {
    NoListFound,
    WrongArity,
    OutOfRange,
    MalformedElement,
}

impl fmt::Display for ParseFailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseFailureReason::NoListFound => "NoListFound",
            ParseFailureReason::WrongArity => "WrongArity",
            ParseFailureReason::OutOfRange => "OutOfRange",
            ParseFailureReason::MalformedElement => "MalformedElement",
        };
        f.write_str(s)
    }
}

/// Why no scores could be extracted, with a short excerpt of the culprit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: ParseFailureReason,
    pub offending_span: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}", self.reason, self.offending_span)
    }
}

const SPAN_LIMIT: usize = 120;
const CONFIDENCE_WINDOW_CHARS: usize = 40;

/// What one bracketed `[...]` span turned out to be.
enum Candidate {
    /// Six elements, every one a rating in range or NaN.
    Valid([Rating; 6]),
    /// Six numeric elements but at least one outside 0..=9.
    OutOfRange,
    /// Six elements, some numeric, some junk.
    Malformed,
    /// All-numeric list with arity != 6.
    WrongArity,
    /// Not a numeric list at all; ignore as prose.
    Prose,
}

enum Element {
    Rating(Rating),
    OutOfRange,
    Junk,
}

fn classify_element(raw: &str) -> Element {
    let mut t = raw.trim();
    // Tolerate elements wrapped in matching quotes, e.g. '"NaN"'.
    loop {
        let b = t.as_bytes();
        if b.len() >= 2
            && (b[0] == b'"' && b[b.len() - 1] == b'"' || b[0] == b'\'' && b[b.len() - 1] == b'\'')
        {
            t = t[1..t.len() - 1].trim();
        } else {
            break;
        }
    }
    if t.eq_ignore_ascii_case("nan") {
        return Element::Rating(Rating::NotAnswered);
    }
    match Score::parse_decimal(t) {
        Ok(s) if s.in_rubric_range() => Element::Rating(Rating::Answered(s)),
        Ok(_) => Element::OutOfRange,
        // A parseable-looking number too large to represent is still a number
        // outside the rubric range, not junk.
        Err(ScoreParseError::TooLarge) => Element::OutOfRange,
        Err(_) => Element::Junk,
    }
}

fn classify_candidate(span: &str) -> Candidate {
    if span.trim().is_empty() {
        return Candidate::Prose;
    }
    // Tolerate one trailing comma, a frequent Python-list habit.
    let span = span.trim_end().strip_suffix(',').unwrap_or(span);
    let elements: Vec<Element> = span.split(',').map(classify_element).collect();
    let numeric = elements
        .iter()
        .filter(|e| matches!(e, Element::Rating(_) | Element::OutOfRange))
        .count();
    let junk = elements.len() - numeric;
    if junk == 0 {
        if elements.len() != 6 {
            return Candidate::WrongArity;
        }
        if elements.iter().any(|e| matches!(e, Element::OutOfRange)) {
            return Candidate::OutOfRange;
        }
        let mut ratings = [Rating::NotAnswered; 6];
        for (slot, e) in ratings.iter_mut().zip(&elements) {
            if let Element::Rating(r) = e {
                *slot = *r;
            }
        }
        Candidate::Valid(ratings)
    } else if elements.len() == 6 && numeric > 0 {
        Candidate::Malformed
    } else {
        Candidate::Prose
    }
}

fn truncate_span(s: &str) -> String {
    let trimmed = s.trim();
    if trimmed.chars().count() <= SPAN_LIMIT {
        trimmed.to_string()
    } else {
        trimmed.chars().take(SPAN_LIMIT).collect()
    }
}

/// Parses a raw reply into scores, confidence, and explanation.
///
/// Scans every innermost bracketed span for a six-element list of ratings
/// (numbers in 0..=9 or "NaN"); the last such list wins. On failure the
/// most specific diagnosis is reported: an out-of-range six-list beats a
/// malformed six-list, which beats wrong-arity numeric lists; text with no
/// numeric list at all is `NoListFound`.
pub fn parse_response(text: &str) -> Result<ParsedEvaluation, ParseFailure> {
    let mut chosen: Option<([Rating; 6], usize)> = None;
    let mut out_of_range_span: Option<&str> = None;
    let mut malformed_span: Option<&str> = None;
    let mut wrong_arity_span: Option<&str> = None;

    let mut open: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match c {
            '[' => open = Some(i),
            ']' => {
                if let Some(start) = open.take() {
                    let span = &text[start + 1..i];
                    match classify_candidate(span) {
                        Candidate::Valid(ratings) => chosen = Some((ratings, start)),
                        Candidate::OutOfRange => out_of_range_span = Some(span),
                        Candidate::Malformed => malformed_span = Some(span),
                        Candidate::WrongArity => wrong_arity_span = Some(span),
                        Candidate::Prose => {}
                    }
                }
            }
            _ => {}
        }
    }

    if let Some((ratings, list_start)) = chosen {
        let scores = RubricScores::from_array(ratings);
        let confidence = extract_confidence(text);
        let explanation = longest_prose_block(&text[..list_start]);
        return Ok(ParsedEvaluation {
            scores,
            confidence,
            explanation,
        });
    }

    let failure = if let Some(span) = out_of_range_span {
        ParseFailure {
            reason: ParseFailureReason::OutOfRange,
            offending_span: truncate_span(span),
        }
    } else if let Some(span) = malformed_span {
        ParseFailure {
            reason: ParseFailureReason::MalformedElement,
            offending_span: truncate_span(span),
        }
    } else if let Some(span) = wrong_arity_span {
        ParseFailure {
            reason: ParseFailureReason::WrongArity,
            offending_span: truncate_span(span),
        }
    } else {
        ParseFailure {
            reason: ParseFailureReason::NoListFound,
            offending_span: truncate_span(text),
        }
    };
    Err(failure)
}

/// Longest blank-line-separated block in the text before the answer list.
fn longest_prose_block(prefix: &str) -> String {
    let normalized = prefix.replace("\r\n", "\n");
    normalized
        .split("\n\n")
        .map(str::trim)
        .max_by_key(|block| block.chars().count())
        .unwrap_or("")
        .to_string()
}

/// Finds the model's stated confidence: the word "confidence" followed within
/// 40 characters by high/medium/low (case-insensitive, word-bounded). The
/// last such pairing wins; none means `Unstated`.
pub fn extract_confidence(text: &str) -> ConfidenceLevel {
    let lower = text.to_ascii_lowercase();
    let mut found = ConfidenceLevel::Unstated;
    for (pos, _) in lower.match_indices("confidence") {
        let window_start = pos + "confidence".len();
        let window_end = lower[window_start..]
            .char_indices()
            .nth(CONFIDENCE_WINDOW_CHARS)
            .map(|(off, _)| window_start + off)
            .unwrap_or(lower.len());
        let window = &lower[window_start..window_end];
        let mut best: Option<(usize, ConfidenceLevel)> = None;
        for (word, level) in [
            ("high", ConfidenceLevel::High),
            ("medium", ConfidenceLevel::Medium),
            ("low", ConfidenceLevel::Low),
        ] {
            for (wpos, _) in window.match_indices(word) {
                if !word_bounded(window, wpos, word.len()) {
                    continue;
                }
                if best.is_none_or(|(bpos, _)| wpos < bpos) {
                    best = Some((wpos, level));
                }
            }
        }
        if let Some((_, level)) = best {
            found = level;
        }
    }
    found
}

fn word_bounded(s: &str, start: usize, len: usize) -> bool {
    let before_ok = start == 0
        || !s[..start]
            .chars()
            .next_back()
            .is_some_and(|c| c.is_ascii_alphabetic());
    let after_ok = !s[start + len..]
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic());
    before_ok && after_ok
}

/// Canonical rendering used as the parse round-trip oracle:
/// `{explanation}\n[{q1}, ..., {q6}], Confidence: {level}`.
pub fn render_canonical(parsed: &ParsedEvaluation) -> String {
    let rendered: Vec<String> = parsed
        .scores
        .as_array()
        .iter()
        .map(Rating::render)
        .collect();
    format!(
        "{}\n[{}], Confidence: {}",
        parsed.explanation,
        rendered.join(", "),
        parsed.confidence.label()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratings(values: [&str; 6]) -> [Rating; 6] {
        values.map(|v| {
            if v == "NaN" {
                Rating::NotAnswered
            } else {
                Rating::Answered(Score::parse_decimal(v).unwrap())
            }
        })
    }

    #[test]
    fn parses_prompt_box_example() {
        let text = "Explanation: the source is reputable. [1, 2, 0, 3, 0, 2], Confidence: Medium";
        let parsed = parse_response(text).unwrap();
        assert_eq!(
            parsed.scores.as_array(),
            ratings(["1", "2", "0", "3", "0", "2"])
        );
        assert_eq!(parsed.confidence, ConfidenceLevel::Medium);
        assert!(parsed.explanation.contains("reputable"));
    }

    #[test]
    fn nan_elements_become_not_answered() {
        let parsed = parse_response("[NaN, 3, 3, 2, 2, 8] Confidence: low").unwrap();
        assert_eq!(
            parsed.scores.as_array(),
            ratings(["NaN", "3", "3", "2", "2", "8"])
        );
        assert_eq!(parsed.confidence, ConfidenceLevel::Low);
    }

    #[test]
    fn last_valid_six_list_wins() {
        let text = "scores are [1,2,3] and also [2, 2, 1, 0, 1, 7.5]. Confidence: HIGH";
        let parsed = parse_response(text).unwrap();
        assert_eq!(
            parsed.scores.as_array(),
            ratings(["2", "2", "1", "0", "1", "7.5"])
        );
        assert_eq!(parsed.confidence, ConfidenceLevel::High);
    }

    #[test]
    fn prose_reports_no_list() {
        let err = parse_response("I cannot evaluate this.").unwrap_err();
        assert_eq!(err.reason, ParseFailureReason::NoListFound);
    }

    #[test]
    fn out_of_range_element_reported() {
        let err = parse_response("[1, 2, 0, 3, 0, 12]").unwrap_err();
        assert_eq!(err.reason, ParseFailureReason::OutOfRange);
        assert!(err.offending_span.contains("12"));
    }

    #[test]
    fn wrong_arity_beats_no_list() {
        let err = parse_response("the list [1, 2, 3] is short").unwrap_err();
        assert_eq!(err.reason, ParseFailureReason::WrongArity);
    }

    #[test]
    fn malformed_six_list_reported() {
        let err = parse_response("[1, 2, ?, 3, 0, 2]").unwrap_err();
        assert_eq!(err.reason, ParseFailureReason::MalformedElement);
    }

    #[test]
    fn trailing_comma_tolerated() {
        let parsed = parse_response("[1, 2, 0, 3, 0, 2,] Confidence: High").unwrap();
        assert_eq!(
            parsed.scores.as_array(),
            ratings(["1", "2", "0", "3", "0", "2"])
        );
        // Only one trailing comma is forgiven.
        assert!(parse_response("[1, 2, 0, 3, 0, 2,,]").is_err());
    }

    #[test]
    fn code_fence_and_quotes_accepted() {
        let text = "```\n\"[1, 2, 0, 3, 0, 2], Confidence: Medium\"\n```";
        let parsed = parse_response(text).unwrap();
        assert_eq!(parsed.confidence, ConfidenceLevel::Medium);
        let quoted = parse_response("['1', '2', '0', '3', '0', '2']").unwrap();
        assert_eq!(
            quoted.scores.as_array(),
            ratings(["1", "2", "0", "3", "0", "2"])
        );
    }

    #[test]
    fn nested_brackets_use_innermost() {
        let parsed = parse_response("[[1, 2, 0, 3, 0, 2]] Confidence: low").unwrap();
        assert_eq!(
            parsed.scores.as_array(),
            ratings(["1", "2", "0", "3", "0", "2"])
        );
    }

    #[test]
    fn negative_scores_are_out_of_range() {
        let err = parse_response("[-1, 2, 0, 3, 0, 2]").unwrap_err();
        assert_eq!(err.reason, ParseFailureReason::OutOfRange);
    }

    #[test]
    fn confidence_extraction_cases() {
        assert_eq!(
            extract_confidence("Confidence: Medium"),
            ConfidenceLevel::Medium
        );
        assert_eq!(
            extract_confidence("confidence level is LOW."),
            ConfidenceLevel::Low
        );
        assert_eq!(
            extract_confidence("The model is confident."),
            ConfidenceLevel::Unstated
        );
        // Last pairing wins.
        assert_eq!(
            extract_confidence("Confidence: High ... final confidence: low"),
            ConfidenceLevel::Low
        );
        // Level word must fall within 40 characters of the marker.
        let far = format!("confidence {} high", "x".repeat(60));
        assert_eq!(extract_confidence(&far), ConfidenceLevel::Unstated);
        // "lower"/"higher" do not count as level words.
        assert_eq!(
            extract_confidence("confidence is higher now"),
            ConfidenceLevel::Unstated
        );
    }

    #[test]
    fn render_canonical_matches_contract() {
        let parsed = ParsedEvaluation {
            scores: RubricScores::from_array(ratings(["1", "2", "0", "3", "0", "2"])),
            confidence: ConfidenceLevel::Medium,
            explanation: "ok".to_string(),
        };
        assert_eq!(
            render_canonical(&parsed),
            "ok\n[1, 2, 0, 3, 0, 2], Confidence: Medium"
        );
    }

    #[test]
    fn render_all_nan_unstated_round_trips_scores() {
        let parsed = ParsedEvaluation {
            scores: RubricScores::from_array(ratings(["NaN"; 6])),
            confidence: ConfidenceLevel::Unstated,
            explanation: String::new(),
        };
        let text = render_canonical(&parsed);
        assert_eq!(
            text,
            "\n[NaN, NaN, NaN, NaN, NaN, NaN], Confidence: Unstated"
        );
        let back = parse_response(&text).unwrap();
        assert_eq!(back.scores, parsed.scores);
        assert_eq!(back.confidence, ConfidenceLevel::Unstated);
    }

    #[test]
    fn appending_second_list_changes_result() {
        let base = "Explanation here. [1, 2, 0, 3, 0, 2], Confidence: Medium";
        let appended = format!("{base}\n[9, 9, 9, 9, 9, 9]");
        let parsed = parse_response(&appended).unwrap();
        assert_eq!(parsed.scores.as_array(), ratings(["9"; 6]));
    }

    #[test]
    fn explanation_is_longest_preceding_block() {
        let text = "Short.\n\nThis block is considerably longer than the first one.\n\n[1, 2, 0, 3, 0, 2], Confidence: High";
        let parsed = parse_response(text).unwrap();
        assert_eq!(
            parsed.explanation,
            "This block is considerably longer than the first one."
        );
    }
}
