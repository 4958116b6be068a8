//! Decoupled multimodal embeddings.
//!
//! The embedding of a target is `[f(template), f(overlay)]` — features of
//! the matched blank template concatenated with features of the difference
//! image — optionally extended with an externally supplied text feature
//! vector. Targets whose text is missing get the mean text vector of their
//! template's other members (corpus-wide mean when the template has no
//! texted member at all).
//!
//! `f` is pluggable; the built-in extractors are raw pixels and
//! non-overlapping block means.

pub mod table;

use std::collections::BTreeMap;

use crate::image::{vectorize, ImageGrid};
use crate::matcher::MatchResult;
use crate::{Error, Result};

pub use table::TextTable;

/// Image feature extractor choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureExtractor {
    /// Flattened pixel values.
    RawPixels,
    /// Mean over non-overlapping `b x b` blocks.
    BlockMean(usize),
}

impl FeatureExtractor {
    pub fn output_dim(&self, width: usize, height: usize, channels: usize) -> Result<usize> {
        match self {
            FeatureExtractor::RawPixels => Ok(width * height * channels),
            FeatureExtractor::BlockMean(b) => {
                if *b == 0 || width % b != 0 || height % b != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "block size {b} does not divide {width}x{height}"
                    )));
                }
                Ok((width / b) * (height / b) * channels)
            }
        }
    }

    pub fn extract(&self, img: &ImageGrid) -> Result<Vec<f64>> {
        match self {
            FeatureExtractor::RawPixels => Ok(vectorize(img).into_values()),
            FeatureExtractor::BlockMean(b) => {
                // Validates divisibility.
                self.output_dim(img.width(), img.height(), img.channels())?;
                let b = *b;
                let (bw, bh) = (img.width() / b, img.height() / b);
                let channels = img.channels();
                let norm = (b * b) as f64;
                let mut out = Vec::with_capacity(bw * bh * channels);
                for by in 0..bh {
                    for bx in 0..bw {
                        for c in 0..channels {
                            let mut sum = 0.0;
                            for y in by * b..(by + 1) * b {
                                for x in bx * b..(bx + 1) * b {
                                    sum += img.pixel(x, y, c);
                                }
                            }
                            out.push(sum / norm);
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

impl std::str::FromStr for FeatureExtractor {
    type Err = Error;

    /// Accepts `raw-pixels` or `block-mean:<b>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "raw-pixels" {
            return Ok(FeatureExtractor::RawPixels);
        }
        if let Some(b) = s.strip_prefix("block-mean:") {
            let b: usize = b
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad block size in {s:?}")))?;
            if b == 0 {
                return Err(Error::InvalidParameter("block size must be >= 1".into()));
            }
            return Ok(FeatureExtractor::BlockMean(b));
        }
        Err(Error::InvalidParameter(format!(
            "unknown extractor {s:?} (expected raw-pixels or block-mean:<b>)"
        )))
    }
}

impl std::fmt::Display for FeatureExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureExtractor::RawPixels => write!(f, "raw-pixels"),
            FeatureExtractor::BlockMean(b) => write!(f, "block-mean:{b}"),
        }
    }
}

/// `[f(template_image), f(overlay)]` for one match result.
///
/// Fallback targets embed as `[f(target), f(0)]`; the zero image goes
/// through the extractor like any other so both cases stay uniform.
pub fn decoupled_embedding(result: &MatchResult, extractor: FeatureExtractor) -> Result<Vec<f64>> {
    let mut v = extractor.extract(&result.template_image)?;
    let second = extractor.extract(&result.overlay)?;
    if second.len() != v.len() {
        return Err(Error::DimensionMismatch(
            "template and overlay feature dims differ".into(),
        ));
    }
    v.extend(second);
    Ok(v)
}

/// One embedded target with provenance.
#[derive(Debug, Clone)]
pub struct EmbeddingRecord {
    pub target_id: String,
    pub template_id: Option<usize>,
    /// `[f(template), f(overlay)]`.
    pub image_part: Vec<f64>,
    pub text_part: Option<Vec<f64>>,
    pub text_imputed: bool,
}

impl EmbeddingRecord {
    pub fn new(target_id: String, result: &MatchResult, extractor: FeatureExtractor) -> Result<Self> {
        Ok(Self {
            target_id,
            template_id: result.template_id,
            image_part: decoupled_embedding(result, extractor)?,
            text_part: None,
            text_imputed: false,
        })
    }

    /// Image part followed by the text part (when present).
    pub fn full(&self) -> Vec<f64> {
        let mut v = self.image_part.clone();
        if let Some(text) = &self.text_part {
            v.extend_from_slice(text);
        }
        v
    }
}

/// Attach text features by target id and fill the gaps.
///
/// A record missing from the table keeps any text it already carries;
/// otherwise it receives the mean text vector over the texted records of its
/// template. Fallback targets (no template) and templates without any texted
/// member fall back to the corpus-wide mean; if no record has text at all,
/// the mean of the table entries stands in, and an empty table is an error.
pub fn impute_missing_text(
    mut records: Vec<EmbeddingRecord>,
    table: &TextTable,
) -> Result<Vec<EmbeddingRecord>> {
    for record in &mut records {
        if record.text_part.is_none() {
            if let Some(v) = table.get(&record.target_id) {
                record.text_part = Some(v.to_vec());
            }
        }
    }
    let dims: Vec<usize> = records
        .iter()
        .filter_map(|r| r.text_part.as_ref().map(|t| t.len()))
        .collect();
    if let Some(&first) = dims.first() {
        if dims.iter().any(|&d| d != first) {
            return Err(Error::DimensionMismatch(
                "records carry text features of different dims".into(),
            ));
        }
        if first != table.dim() && !table.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "record text dim {} != table dim {}",
                first,
                table.dim()
            )));
        }
    }

    // Mean text per template over records that have text.
    let mut sums: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    let mut corpus_sum: Option<(Vec<f64>, usize)> = None;
    for record in &records {
        let Some(text) = &record.text_part else { continue };
        let entry = corpus_sum.get_or_insert_with(|| (vec![0.0; text.len()], 0));
        add_into(&mut entry.0, text);
        entry.1 += 1;
        if let Some(template) = record.template_id {
            let entry = sums
                .entry(template)
                .or_insert_with(|| (vec![0.0; text.len()], 0));
            add_into(&mut entry.0, text);
            entry.1 += 1;
        }
    }
    let corpus_mean: Option<Vec<f64>> = match corpus_sum {
        Some((sum, count)) => Some(mean_of(sum, count)),
        None if !table.is_empty() => {
            // No target carries text; the table itself is the only prior.
            let mut sum = vec![0.0; table.dim()];
            let mut count = 0;
            for (_, v) in table.iter() {
                add_into(&mut sum, v);
                count += 1;
            }
            Some(mean_of(sum, count))
        }
        None => None,
    };
    let template_means: BTreeMap<usize, Vec<f64>> = sums
        .into_iter()
        .map(|(t, (sum, count))| (t, mean_of(sum, count)))
        .collect();

    for record in &mut records {
        if record.text_part.is_some() {
            continue;
        }
        let mean = record
            .template_id
            .and_then(|t| template_means.get(&t))
            .or(corpus_mean.as_ref())
            .ok_or(Error::CannotImpute)?;
        record.text_part = Some(mean.clone());
        record.text_imputed = true;
    }
    Ok(records)
}

fn add_into(sum: &mut [f64], v: &[f64]) {
    for (s, x) in sum.iter_mut().zip(v) {
        *s += x;
    }
}

fn mean_of(mut sum: Vec<f64>, count: usize) -> Vec<f64> {
    for s in &mut sum {
        *s /= count as f64;
    }
    sum
}
