//! Dataset conversion and manifest loading.
//!
//! The evaluator only ever reads the canonical manifest: JSONL of
//! `{id, dataset, text, image_path, gold_label}`. Converters turn raw
//! dataset layouts into that form, skip items missing either modality, and
//! write a sidecar skip report so the selection step stays auditable.
//! Conversion is deterministic: items are sorted by id, so the same input
//! tree always produces byte-identical output.

use crate::domain::{DatasetId, GoldLabel, NewsItem};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// A loaded, validated manifest.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub path: PathBuf,
    pub items: Vec<NewsItem>,
    pub counts: LabelCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub real: usize,
    pub fake: usize,
}

impl Manifest {
    /// Directory image paths resolve against.
    pub fn base_dir(&self) -> PathBuf {
        self.path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn gold_labels(&self) -> std::collections::HashMap<String, GoldLabel> {
        self.items
            .iter()
            .map(|i| (i.id.clone(), i.gold_label))
            .collect()
    }
}

fn tally_counts(items: &[NewsItem]) -> LabelCounts {
    let real = items
        .iter()
        .filter(|i| i.gold_label == GoldLabel::Real)
        .count();
    LabelCounts {
        real,
        fake: items.len() - real,
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate item id {id:?} at {path}:{line}")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("no usable items under {0}")]
    ZeroUsableItems(PathBuf),
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads a manifest, preserving file order. Schema violations are reported
/// with their line number; a duplicate id aborts the load.
pub fn load_manifest(path: &Path) -> Result<Manifest, IngestError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: NewsItem = serde_json::from_str(&line).map_err(|e| IngestError::Line {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if item.text.trim().is_empty() {
            return Err(IngestError::Line {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("item {:?} has empty text", item.id),
            });
        }
        if !seen.insert(item.id.clone()) {
            return Err(IngestError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: item.id,
            });
        }
        items.push(item);
    }
    let counts = tally_counts(&items);
    Ok(Manifest {
        path: path.to_path_buf(),
        items,
        counts,
    })
}

/// Writes items as manifest JSONL. Callers pass items already sorted when
/// determinism matters; this function preserves the given order.
pub fn write_manifest(path: &Path, items: &[NewsItem]) -> Result<LabelCounts, IngestError> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("manifest item serializes");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))?;
    Ok(tally_counts(items))
}

/// One skipped source item and why, written as a JSONL sidecar.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SkipEntry {
    pub id: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    MissingText,
    MissingImage,
    UndecodableImage,
    BadMetadata,
}

pub fn write_skip_report(path: &Path, entries: &[SkipEntry]) -> Result<(), IngestError> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    for entry in entries {
        serde_json::to_writer(&mut file, entry).expect("skip entry serializes");
        file.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Optional seeded subsample taken before the final sort-by-id.
#[derive(Debug, Clone, Copy)]
pub struct Subsample {
    pub n_real: usize,
    pub n_fake: usize,
    pub seed: u64,
}

fn apply_subsample(mut items: Vec<NewsItem>, subsample: Option<Subsample>) -> Vec<NewsItem> {
    let Some(sub) = subsample else {
        items.sort_by(|a, b| a.id.cmp(&b.id));
        return items;
    };
    // Shuffle within each class with the given seed, take the requested
    // counts, then restore id order.
    let mut rng = StdRng::seed_from_u64(sub.seed);
    items.sort_by(|a, b| a.id.cmp(&b.id));
    let (mut real, mut fake): (Vec<_>, Vec<_>) = items
        .into_iter()
        .partition(|i| i.gold_label == GoldLabel::Real);
    real.shuffle(&mut rng);
    fake.shuffle(&mut rng);
    real.truncate(sub.n_real);
    fake.truncate(sub.n_fake);
    let mut picked: Vec<NewsItem> = real.into_iter().chain(fake).collect();
    picked.sort_by(|a, b| a.id.cmp(&b.id));
    picked
}

/// Result of a conversion: manifest items plus the skip report.
#[derive(Debug)]
pub struct Conversion {
    pub items: Vec<NewsItem>,
    pub skipped: Vec<SkipEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FakeNewsNetSubset {
    Gossipcop,
    Politifact,
}

impl FakeNewsNetSubset {
    fn dir_name(&self) -> &'static str {
        match self {
            FakeNewsNetSubset::Gossipcop => "gossipcop",
            FakeNewsNetSubset::Politifact => "politifact",
        }
    }

    fn dataset(&self) -> DatasetId {
        match self {
            FakeNewsNetSubset::Gossipcop => DatasetId::Gossipcop,
            FakeNewsNetSubset::Politifact => DatasetId::Politifact,
        }
    }
}

#[derive(Deserialize)]
struct FnnArticle {
    #[serde(default)]
    text: String,
    #[serde(default)]
    title: String,
}

const IMAGE_EXTENSIONS: [&str; 5] = ["jpg", "jpeg", "png", "gif", "webp"];

/// Converts a FakeNewsNet-style tree:
/// `root/<subset>/{fake,real}/<article>/news content.json` plus image files
/// in the article folder. Only articles with both non-empty text and a
/// decodable image become items; the rest land in the skip report.
pub fn convert_fakenewsnet(
    root: &Path,
    subset: FakeNewsNetSubset,
    subsample: Option<Subsample>,
) -> Result<Conversion, IngestError> {
    let subset_dir = root.join(subset.dir_name());
    let base = if subset_dir.is_dir() {
        subset_dir
    } else {
        root.to_path_buf()
    };
    if !base.is_dir() {
        return Err(io_err(
            &base,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (label_dir, label) in [("fake", GoldLabel::Fake), ("real", GoldLabel::Real)] {
        let dir = base.join(label_dir);
        if !dir.is_dir() {
            continue;
        }
        let mut article_dirs: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| io_err(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        article_dirs.sort();
        for article_dir in article_dirs {
            let id = article_dir
                .file_name()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or_default();
            if !seen.insert(id.clone()) {
                return Err(IngestError::DuplicateId {
                    path: article_dir,
                    line: 0,
                    id,
                });
            }
            match read_fnn_article(&article_dir) {
                Ok((text, image_path)) => items.push(NewsItem {
                    id,
                    dataset: subset.dataset(),
                    text,
                    image_path,
                    gold_label: label,
                }),
                Err(reason) => skipped.push(SkipEntry { id, reason }),
            }
        }
    }
    if items.is_empty() {
        return Err(IngestError::ZeroUsableItems(base));
    }
    Ok(Conversion {
        items: apply_subsample(items, subsample),
        skipped,
    })
}

fn read_fnn_article(dir: &Path) -> Result<(String, PathBuf), SkipReason> {
    let json_path = dir.join("news content.json");
    let text = if json_path.is_file() {
        let raw = fs::read_to_string(&json_path).map_err(|_| SkipReason::BadMetadata)?;
        let article: FnnArticle =
            serde_json::from_str(&raw).map_err(|_| SkipReason::BadMetadata)?;
        if !article.text.trim().is_empty() {
            article.text
        } else {
            article.title
        }
    } else {
        let txt_path = dir.join("article.txt");
        if txt_path.is_file() {
            fs::read_to_string(&txt_path).map_err(|_| SkipReason::BadMetadata)?
        } else {
            String::new()
        }
    };
    if text.trim().is_empty() {
        return Err(SkipReason::MissingText);
    }
    let image = first_decodable_image(dir)?;
    Ok((text, image))
}

fn first_decodable_image(dir: &Path) -> Result<PathBuf, SkipReason> {
    let mut candidates: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|_| SkipReason::MissingImage)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                    .unwrap_or(false)
        })
        .collect();
    if candidates.is_empty() {
        return Err(SkipReason::MissingImage);
    }
    candidates.sort();
    for path in &candidates {
        if let Ok(bytes) = fs::read(path) {
            if image::load_from_memory(&bytes).is_ok() {
                return Ok(path.clone());
            }
        }
    }
    Err(SkipReason::UndecodableImage)
}

/// Column names for the Fakeddit TSV export.
#[derive(Debug, Clone)]
pub struct FakedditColumns {
    pub id: String,
    pub title: String,
    pub label: String,
}

impl Default for FakedditColumns {
    fn default() -> Self {
        FakedditColumns {
            id: "id".to_string(),
            title: "clean_title".to_string(),
            label: "2_way_label".to_string(),
        }
    }
}

/// Converts a Fakeddit TSV plus its image directory (`<image_dir>/<id>.jpg`).
/// Binary label 1 maps to Real and 0 to Fake, matching the released 2-way
/// labels; `invert_labels` flips that for exports with the opposite coding.
pub fn convert_fakeddit(
    tsv_path: &Path,
    image_dir: &Path,
    columns: &FakedditColumns,
    invert_labels: bool,
    subsample: Option<Subsample>,
) -> Result<Conversion, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(true)
        .from_path(tsv_path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let id_idx = col(&columns.id)?;
    let title_idx = col(&columns.title)?;
    let label_idx = col(&columns.label)?;

    let mut items = Vec::new();
    let mut skipped = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (row_no, row) in reader.records().enumerate() {
        let row = row?;
        let id = row.get(id_idx).unwrap_or("").trim().to_string();
        if id.is_empty() {
            skipped.push(SkipEntry {
                id: format!("row-{}", row_no + 2),
                reason: SkipReason::BadMetadata,
            });
            continue;
        }
        if !seen.insert(id.clone()) {
            return Err(IngestError::DuplicateId {
                path: tsv_path.to_path_buf(),
                line: row_no + 2,
                id,
            });
        }
        let title = row.get(title_idx).unwrap_or("").trim().to_string();
        if title.is_empty() {
            skipped.push(SkipEntry {
                id,
                reason: SkipReason::MissingText,
            });
            continue;
        }
        let label_raw = row.get(label_idx).unwrap_or("").trim();
        let one = match label_raw {
            "1" => true,
            "0" => false,
            _ => {
                skipped.push(SkipEntry {
                    id,
                    reason: SkipReason::BadMetadata,
                });
                continue;
            }
        };
        let gold_label = match one ^ invert_labels {
            true => GoldLabel::Real,
            false => GoldLabel::Fake,
        };
        let image_path = image_dir.join(format!("{id}.jpg"));
        if !image_path.is_file() {
            skipped.push(SkipEntry {
                id,
                reason: SkipReason::MissingImage,
            });
            continue;
        }
        items.push(NewsItem {
            id,
            dataset: DatasetId::Fakeddit,
            text: title,
            image_path,
            gold_label,
        });
    }
    if items.is_empty() {
        return Err(IngestError::ZeroUsableItems(tsv_path.to_path_buf()));
    }
    Ok(Conversion {
        items: apply_subsample(items, subsample),
        skipped,
    })
}
