//! Shared fixtures: a 20-item manifest with generated images and the mock
//! script that drives it. Expected metrics for the fixture are hand-computed
//! in the acceptance suite.

#![allow(dead_code)]

use newsjudge::domain::{DatasetId, GoldLabel, NewsItem};
use newsjudge::ingest;
use std::fs;
use std::path::{Path, PathBuf};

pub struct Fixture {
    pub manifest: PathBuf,
    pub script: PathBuf,
    pub items: Vec<NewsItem>,
}

pub fn write_png(path: &Path, seed: u32) {
    let img = image::RgbImage::from_fn(40, 30, |x, y| {
        image::Rgb([
            ((x + seed * 13) % 256) as u8,
            ((y + seed * 7) % 256) as u8,
            ((x + y + seed) % 256) as u8,
        ])
    });
    image::DynamicImage::ImageRgb8(img)
        .save_with_format(path, image::ImageFormat::Png)
        .unwrap();
}

/// Scripted replies for the 20-item fixture, repetition-independent except
/// where noted. Verdicts under the default policy (threshold 5):
///
/// gold real r01..r12:
///   r01 q6=2 High -> Real      r02 q6=1 High -> Real
///   r03 q6=3 Medium -> Real    r04 q6=4.5 Medium -> Real
///   r05 q6=0 Low -> Real       r06 q6=2 (no marker) -> Real
///   r07 q6=7 High -> Fake      r08 q6=5 Medium -> Fake
///   r09 prose -> no_parse      r10 q6=NaN -> q6_not_answered
///   r11 3-list -> no_parse     r12 q6=1 HIGH. -> Real
/// gold fake f01..f08:
///   f01 q6=9 High -> Fake      f02 q6=8 Medium -> Fake
///   f03 q6=7.5 Medium -> Fake  f04 q6=6 Low -> Fake
///   f05 q6=2 High -> Real      f06 q6=3 Medium -> Real
///   f07 q6=4 Low -> Real       f08 q6=8 Medium -> Fake
///
/// => tp=7 tn=5 fp=3 fn=2 rejected=3 (of 20)
pub const FIXTURE_RESPONSES: [(&str, &str); 20] = [
    (
        "r01",
        "The source appears reputable and consistent. [1, 2, 0, 3, 0, 2], Confidence: High",
    ),
    (
        "r02",
        "Explanation: imagery matches the report.\n[0, 1, 1, 2, 0, 1], Confidence: High",
    ),
    ("r03", "[2, 2, 1, 0, 1, 3], Confidence: Medium"),
    ("r04", "[1, 1, 1, 1, 1, 4.5], Confidence: Medium"),
    ("r05", "[0, 0, 0, 0, 0, 0], Confidence: Low"),
    ("r06", "Scores follow. [3, 2, 2, 1, 1, 2]"),
    ("r07", "[2, 3, 4, 5, 6, 7], Confidence: High"),
    ("r08", "[1, 2, 3, 4, 5, 5], Confidence: Medium"),
    ("r09", "I cannot assess this item."),
    ("r10", "[NaN, 2, 3, 1, 0, NaN], Confidence: Low"),
    ("r11", "[9, 9, 9]"),
    ("r12", "[1, 0, 2, 1, 3, 1], Confidence: HIGH."),
    ("f01", "[8, 7, 9, 6, 8, 9], Confidence: High"),
    ("f02", "[7, 6, 5, 8, 7, 8], Confidence: Medium"),
    ("f03", "[6, 5, 7, 7, 8, 7.5], Confidence: Medium"),
    ("f04", "[5, 5, 5, 5, 5, 6], Confidence: Low"),
    ("f05", "[2, 1, 1, 0, 1, 2], Confidence: High"),
    ("f06", "[1, 2, 0, 1, 1, 3], Confidence: Medium"),
    ("f07", "[0, 1, 2, 3, 4, 4], Confidence: Low"),
    ("f08", "[8, 8, 8, 8, 8, 8], Confidence: Medium"),
];

/// Builds the fixture under `dir`. With `rep_disagreement`, item r03 answers
/// Fake at repetition 1 only, giving exactly one disagreeing item.
pub fn build_fixture(dir: &Path, rep_disagreement: bool) -> Fixture {
    let image_dir = dir.join("images");
    fs::create_dir_all(&image_dir).unwrap();
    let mut items = Vec::new();
    for (idx, (id, _)) in FIXTURE_RESPONSES.iter().enumerate() {
        let image_name = format!("{id}.png");
        write_png(&image_dir.join(&image_name), idx as u32);
        items.push(NewsItem {
            id: (*id).to_string(),
            dataset: DatasetId::Custom,
            text: format!("Fixture headline for {id}: a short text body."),
            image_path: PathBuf::from("images").join(image_name),
            gold_label: if id.starts_with('r') {
                GoldLabel::Real
            } else {
                GoldLabel::Fake
            },
        });
    }
    let manifest = dir.join("manifest.jsonl");
    ingest::write_manifest(&manifest, &items).unwrap();

    let mut rules = Vec::new();
    if rep_disagreement {
        rules.push(serde_json::json!({
            "item_id": "r03",
            "repetition": 1,
            "response": "[2, 2, 1, 0, 1, 8], Confidence: Medium"
        }));
    }
    for (id, response) in FIXTURE_RESPONSES {
        rules.push(serde_json::json!({ "item_id": id, "response": response }));
    }
    let script = dir.join("script.json");
    fs::write(
        &script,
        serde_json::to_vec_pretty(&serde_json::json!({ "rules": rules })).unwrap(),
    )
    .unwrap();

    Fixture {
        manifest,
        script,
        items,
    }
}
