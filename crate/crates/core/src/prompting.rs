//! The rubric prompt and per-item request payloads.
//!
//! The prompt ships as a versioned resource file compiled into the binary;
//! its SHA-256 digest is pinned into every run's metadata, so any edit to
//! the wording shows up as a new version tag. The item text is appended
//! after the rubric under a fixed delimiter, keeping the rubric position
//! identical across items.

use crate::digest::sha256_hex;
use crate::domain::{ModelConfig, NewsItem};
use crate::image_prep::PreparedImage;

/// The rubric prompt resource, verbatim.
pub const PROMPT_RESOURCE: &str = include_str!("../resources/rubric_prompt.txt");

/// Opening role-framing sentence; the rubric follows it in the resource.
const ROLE_SENTENCE: &str = "You are an expert in multimodal analysis tasked with evaluating \
the reliability of information using both text and images.";

/// Delimiter line separating the rubric from the injected article text.
pub const NEWS_TEXT_DELIMITER: &str = "\n\nNEWS TEXT:\n";

/// Default cap on injected article text, in characters.
pub const DEFAULT_TEXT_CHAR_BUDGET: usize = 6_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub system_role_text: String,
    pub rubric_text: String,
    pub version_tag: String,
    digest: String,
}

impl PromptTemplate {
    /// The full prompt exactly as shipped.
    pub fn full_text(&self) -> &'static str {
        PROMPT_RESOURCE
    }

    /// SHA-256 hex of the resource bytes; recorded in run metadata.
    pub fn digest(&self) -> &str {
        &self.digest
    }
}

/// Loads the shipped prompt. The resource is a compile-time constant, so a
/// malformed split is a build defect and panics rather than returning an
/// error.
pub fn build_prompt() -> PromptTemplate {
    let trimmed = PROMPT_RESOURCE.trim_start();
    let after_quote = trimmed.strip_prefix('"').unwrap_or(trimmed);
    assert!(
        after_quote.starts_with(ROLE_SENTENCE),
        "prompt resource must open with the role sentence"
    );
    let rubric_text = after_quote[ROLE_SENTENCE.len()..].trim_start().to_string();
    for required in [
        "1. Source Reliability",
        "2. Emotional Coherence",
        "3. Potential Manipulations",
        "4. Temporal Consistency",
        "5. Semantic Coherence",
        "6. Information Classification",
        "use NaN for that question",
        "High, Medium, or Low",
    ] {
        assert!(
            rubric_text.contains(required),
            "prompt resource is missing {required:?}"
        );
    }
    let digest = sha256_hex(PROMPT_RESOURCE.as_bytes());
    let version_tag = format!("rubric-v1-{}", &digest[..12]);
    PromptTemplate {
        system_role_text: ROLE_SENTENCE.to_string(),
        rubric_text,
        version_tag,
        digest,
    }
}

/// One request to the model: the full prompt plus this item's text and image.
#[derive(Debug, Clone)]
pub struct RequestPayload {
    pub item_id: String,
    pub prompt_digest: String,
    pub prompt_version: String,
    /// Full user-message text: prompt, delimiter, then the (possibly
    /// truncated) article text.
    pub message_text: String,
    /// The injected article text after truncation.
    pub item_text: String,
    pub text_truncated: bool,
    pub image: PreparedImage,
    pub model: ModelConfig,
    pub repetition: u32,
}

/// Assembles the payload, truncating the article text to `char_budget`
/// characters and flagging when truncation happened.
pub fn build_payload(
    template: &PromptTemplate,
    item: &NewsItem,
    image: PreparedImage,
    model: &ModelConfig,
    repetition: u32,
    char_budget: usize,
) -> RequestPayload {
    let total_chars = item.text.chars().count();
    let (item_text, text_truncated) = if total_chars > char_budget {
        (item.text.chars().take(char_budget).collect(), true)
    } else {
        (item.text.clone(), false)
    };
    let message_text = format!(
        "{}{}{}",
        template.full_text(),
        NEWS_TEXT_DELIMITER,
        item_text
    );
    RequestPayload {
        item_id: item.id.clone(),
        prompt_digest: template.digest().to_string(),
        prompt_version: template.version_tag.clone(),
        message_text,
        item_text,
        text_truncated,
        image,
        model: model.clone(),
        repetition,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DatasetId, GoldLabel};
    use crate::image_prep::{prepare_image, ImagePrepConfig};

    fn tiny_image() -> PreparedImage {
        let img = image::RgbImage::from_pixel(8, 8, image::Rgb([1, 2, 3]));
        let mut buf = std::io::Cursor::new(Vec::new());
        image::DynamicImage::ImageRgb8(img)
            .write_to(&mut buf, image::ImageFormat::Png)
            .unwrap();
        prepare_image(&buf.into_inner(), &ImagePrepConfig::default()).unwrap()
    }

    fn item_with_text(text: &str) -> NewsItem {
        NewsItem {
            id: "n1".to_string(),
            dataset: DatasetId::Custom,
            text: text.to_string(),
            image_path: "img.png".into(),
            gold_label: GoldLabel::Real,
        }
    }

    #[test]
    fn prompt_contains_pinned_substrings() {
        let t = build_prompt();
        assert!(t.rubric_text.contains("6. Information Classification"));
        assert!(t.rubric_text.contains("use NaN for that question"));
        assert!(t.rubric_text.contains("High, Medium, or Low"));
        assert!(t.full_text().starts_with('"'));
    }

    #[test]
    fn version_tag_tracks_digest() {
        let t = build_prompt();
        assert_eq!(t.digest(), &sha256_hex(PROMPT_RESOURCE.as_bytes()));
        assert!(t.version_tag.ends_with(&t.digest()[..12]));
    }

    #[test]
    fn short_text_is_kept_verbatim() {
        let t = build_prompt();
        let payload = build_payload(
            &t,
            &item_with_text("ten chars!"),
            tiny_image(),
            &ModelConfig::default(),
            0,
            DEFAULT_TEXT_CHAR_BUDGET,
        );
        assert!(payload.message_text.ends_with("ten chars!"));
        assert!(!payload.text_truncated);
    }

    #[test]
    fn long_text_truncates_and_flags() {
        let t = build_prompt();
        let long = "x".repeat(50_000);
        let payload = build_payload(
            &t,
            &item_with_text(&long),
            tiny_image(),
            &ModelConfig::default(),
            0,
            DEFAULT_TEXT_CHAR_BUDGET,
        );
        assert!(payload.text_truncated);
        assert_eq!(payload.item_text.chars().count(), DEFAULT_TEXT_CHAR_BUDGET);
    }

    #[test]
    fn payloads_differ_only_in_injected_text() {
        let t = build_prompt();
        let img = tiny_image();
        let cfg = ModelConfig::default();
        let a = build_payload(&t, &item_with_text("alpha"), img.clone(), &cfg, 0, 100);
        let b = build_payload(&t, &item_with_text("beta"), img, &cfg, 0, 100);
        let prefix = format!("{}{}", t.full_text(), NEWS_TEXT_DELIMITER);
        assert_eq!(&a.message_text[..prefix.len()], prefix);
        assert_eq!(&b.message_text[..prefix.len()], prefix);
        assert_eq!(&a.message_text[prefix.len()..], "alpha");
        assert_eq!(&b.message_text[prefix.len()..], "beta");
    }

    #[test]
    fn repetition_is_carried() {
        let t = build_prompt();
        let payload = build_payload(
            &t,
            &item_with_text("text"),
            tiny_image(),
            &ModelConfig::default(),
            2,
            100,
        );
        assert_eq!(payload.repetition, 2);
    }
}
