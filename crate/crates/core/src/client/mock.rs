//! Scriptable offline backend.
//!
//! A script file maps items to canned response text, either by exact item id
//! (optionally narrowed to one repetition) or by a regex over the rendered
//! payload text. Rules are tried in order; the first match wins, then the
//! optional default. Tests and CI run entirely on this backend.

use crate::prompting::RequestPayload;
use regex::Regex;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Deserialize)]
struct ScriptFile {
    rules: Vec<RuleFile>,
    #[serde(default)]
    default_response: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RuleFile {
    #[serde(default)]
    item_id: Option<String>,
    #[serde(default)]
    repetition: Option<u32>,
    #[serde(default)]
    text_regex: Option<String>,
    response: String,
}

#[derive(Debug)]
struct Rule {
    item_id: Option<String>,
    repetition: Option<u32>,
    text_regex: Option<Regex>,
    response: String,
}

#[derive(Debug)]
pub struct MockScript {
    rules: Vec<Rule>,
    default_response: Option<String>,
}

#[derive(Debug, Error)]
pub enum MockScriptError {
    #[error("cannot read script {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid script json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rule {0} matches nothing: needs item_id or text_regex")]
    EmptyRule(usize),
    #[error("rule {index}: bad regex: {source}")]
    Regex { index: usize, source: regex::Error },
}

impl MockScript {
    pub fn load(path: &Path) -> Result<Self, MockScriptError> {
        let raw = std::fs::read_to_string(path).map_err(|e| MockScriptError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&raw)
    }

    pub fn from_json(raw: &str) -> Result<Self, MockScriptError> {
        let file: ScriptFile = serde_json::from_str(raw)?;
        let mut rules = Vec::with_capacity(file.rules.len());
        for (index, rule) in file.rules.into_iter().enumerate() {
            if rule.item_id.is_none() && rule.text_regex.is_none() {
                return Err(MockScriptError::EmptyRule(index));
            }
            let text_regex = rule
                .text_regex
                .map(|r| Regex::new(&r).map_err(|source| MockScriptError::Regex { index, source }))
                .transpose()?;
            rules.push(Rule {
                item_id: rule.item_id,
                repetition: rule.repetition,
                text_regex,
                response: rule.response,
            });
        }
        Ok(MockScript {
            rules,
            default_response: file.default_response,
        })
    }

    /// First matching rule's response, falling back to the default.
    pub fn lookup(&self, payload: &RequestPayload) -> Option<String> {
        for rule in &self.rules {
            if let Some(id) = &rule.item_id {
                if id != &payload.item_id {
                    continue;
                }
            }
            if let Some(rep) = rule.repetition {
                if rep != payload.repetition {
                    continue;
                }
            }
            if let Some(re) = &rule.text_regex {
                if !re.is_match(&payload.message_text) {
                    continue;
                }
            }
            return Some(rule.response.clone());
        }
        self.default_response.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DatasetId, GoldLabel, ModelConfig, NewsItem};
    use crate::image_prep::{prepare_image, ImagePrepConfig};
    use crate::prompting::{build_payload, build_prompt};

    fn payload(item_id: &str, text: &str, repetition: u32) -> RequestPayload {
        let img = image::RgbImage::from_pixel(8, 8, image::Rgb([0, 0, 0]));
        let mut buf = std::io::Cursor::new(Vec::new());
        image::DynamicImage::ImageRgb8(img)
            .write_to(&mut buf, image::ImageFormat::Png)
            .unwrap();
        let prepared = prepare_image(&buf.into_inner(), &ImagePrepConfig::default()).unwrap();
        let item = NewsItem {
            id: item_id.to_string(),
            dataset: DatasetId::Custom,
            text: text.to_string(),
            image_path: "x.png".into(),
            gold_label: GoldLabel::Real,
        };
        build_payload(
            &build_prompt(),
            &item,
            prepared,
            &ModelConfig::default(),
            repetition,
            6000,
        )
    }

    #[test]
    fn item_id_rule_matches() {
        let script = MockScript::from_json(
            r#"{"rules":[{"item_id":"a","response":"[1,2,0,3,0,2], Confidence: Medium"}]}"#,
        )
        .unwrap();
        let got = script.lookup(&payload("a", "t", 0)).unwrap();
        assert_eq!(got, "[1,2,0,3,0,2], Confidence: Medium");
        assert!(script.lookup(&payload("b", "t", 0)).is_none());
    }

    #[test]
    fn repetition_narrows_a_rule() {
        let script = MockScript::from_json(
            r#"{"rules":[
                {"item_id":"a","repetition":1,"response":"rep1"},
                {"item_id":"a","response":"other"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(script.lookup(&payload("a", "t", 1)).unwrap(), "rep1");
        assert_eq!(script.lookup(&payload("a", "t", 0)).unwrap(), "other");
    }

    #[test]
    fn regex_rule_matches_payload_text() {
        let script = MockScript::from_json(
            r#"{"rules":[{"text_regex":"celebrity","response":"gossip"}],"default_response":"dflt"}"#,
        )
        .unwrap();
        assert_eq!(
            script
                .lookup(&payload("x", "a celebrity story", 0))
                .unwrap(),
            "gossip"
        );
        assert_eq!(script.lookup(&payload("x", "politics", 0)).unwrap(), "dflt");
    }

    #[test]
    fn empty_rule_rejected() {
        let err = MockScript::from_json(r#"{"rules":[{"response":"r"}]}"#).unwrap_err();
        assert!(matches!(err, MockScriptError::EmptyRule(0)));
    }
}
