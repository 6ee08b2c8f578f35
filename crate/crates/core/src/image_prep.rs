//! Image resizing and re-encoding for the multimodal payload.
//!
//! Every source image is decoded, resized to fit the configured long side,
//! stripped of metadata, and re-encoded with fixed encoder parameters even
//! when it already fits, so identical input always yields identical encoded
//! bytes. Sources with an alpha channel become PNG, everything else JPEG.

use crate::digest::sha256_hex;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::{CompressionType, FilterType as PngFilter, PngEncoder};
use image::DynamicImage;
use serde::{Deserialize, Serialize};
use std::io::Cursor;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaType {
    Jpeg,
    Png,
}

impl MediaType {
    pub fn mime(&self) -> &'static str {
        match self {
            MediaType::Jpeg => "image/jpeg",
            MediaType::Png => "image/png",
        }
    }
}

/// Payload-ready image: base64 of the re-encoded bytes plus provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedImage {
    pub media_type: MediaType,
    pub encoded: String,
    pub width: u32,
    pub height: u32,
    pub source_digest: String,
}

impl PreparedImage {
    /// Data URL embedded into the request payload.
    pub fn data_url(&self) -> String {
        format!("data:{};base64,{}", self.media_type.mime(), self.encoded)
    }

    /// Digest of the encoded bytes; part of the request cache key.
    pub fn encoded_digest(&self) -> String {
        sha256_hex(self.encoded.as_bytes())
    }

    pub fn decode(&self) -> Result<DynamicImage, ImagePrepError> {
        let bytes = BASE64
            .decode(&self.encoded)
            .map_err(|e| ImagePrepError::Undecodable(e.to_string()))?;
        image::load_from_memory(&bytes).map_err(|e| ImagePrepError::Undecodable(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ImagePrepConfig {
    /// Long-side cap in pixels.
    pub max_dimension: u32,
    /// JPEG quality, 1-100.
    pub reencode_quality: u8,
    /// Cap on the re-encoded byte size before base64 expansion.
    pub max_encoded_bytes: usize,
}

impl Default for ImagePrepConfig {
    fn default() -> Self {
        ImagePrepConfig {
            max_dimension: 768,
            reencode_quality: 85,
            max_encoded_bytes: 4_000_000,
        }
    }
}

pub const MIN_DIMENSION: u32 = 64;

#[derive(Debug, Error)]
pub enum ImagePrepError {
    #[error("undecodable image: {0}")]
    Undecodable(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("max_dimension {0} below minimum {MIN_DIMENSION}")]
    BadConfig(u32),
}

impl ImagePrepConfig {
    pub fn validate(&self) -> Result<(), ImagePrepError> {
        if self.max_dimension < MIN_DIMENSION {
            return Err(ImagePrepError::BadConfig(self.max_dimension));
        }
        Ok(())
    }
}

/// Decodes, resizes to fit `max_dimension`, strips metadata, re-encodes.
///
/// Deterministic: equal (bytes, config) give equal encoded output. Animated
/// sources keep only the first frame (the decoder's default).
pub fn prepare_image(
    bytes: &[u8],
    config: &ImagePrepConfig,
) -> Result<PreparedImage, ImagePrepError> {
    config.validate()?;
    if bytes.is_empty() {
        return Err(ImagePrepError::Undecodable("empty input".to_string()));
    }
    let format =
        image::guess_format(bytes).map_err(|e| ImagePrepError::UnsupportedFormat(e.to_string()))?;
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImagePrepError::Undecodable(e.to_string()))?;
    let source_digest = sha256_hex(bytes);

    let mut img = decoded;
    let mut dimension_cap = config.max_dimension;
    loop {
        let resized = if img.width().max(img.height()) > dimension_cap {
            img.resize(
                dimension_cap,
                dimension_cap,
                image::imageops::FilterType::Lanczos3,
            )
        } else {
            img.clone()
        };
        let (media_type, encoded_bytes) = encode(&resized, config.reencode_quality)?;
        if encoded_bytes.len() <= config.max_encoded_bytes || dimension_cap <= MIN_DIMENSION {
            return Ok(PreparedImage {
                media_type,
                encoded: BASE64.encode(&encoded_bytes),
                width: resized.width(),
                height: resized.height(),
                source_digest,
            });
        }
        // Too large even after quality-controlled re-encode: shrink and retry.
        dimension_cap = (dimension_cap * 3 / 4).max(MIN_DIMENSION);
        img = resized;
    }
}

fn encode(img: &DynamicImage, quality: u8) -> Result<(MediaType, Vec<u8>), ImagePrepError> {
    let mut buf = Cursor::new(Vec::new());
    if img.color().has_alpha() {
        let encoder =
            PngEncoder::new_with_quality(&mut buf, CompressionType::Default, PngFilter::Adaptive);
        img.write_with_encoder(encoder)
            .map_err(|e| ImagePrepError::Undecodable(format!("png encode: {e}")))?;
        Ok((MediaType::Png, buf.into_inner()))
    } else {
        let rgb = DynamicImage::ImageRgb8(img.to_rgb8());
        let encoder = JpegEncoder::new_with_quality(&mut buf, quality);
        rgb.write_with_encoder(encoder)
            .map_err(|e| ImagePrepError::Undecodable(format!("jpeg encode: {e}")))?;
        Ok((MediaType::Jpeg, buf.into_inner()))
    }
}

/// Reads and prepares an image file.
pub fn prepare_image_file(
    path: &std::path::Path,
    config: &ImagePrepConfig,
) -> Result<PreparedImage, ImagePrepError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ImagePrepError::Undecodable(format!("{}: {e}", path.display())))?;
    prepare_image(&bytes, config)
}
