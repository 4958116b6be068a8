//! Deterministic synthetic macro corpora.
//!
//! Templates are seeded smooth random fields (sums of low-frequency cosine
//! waves) quantized to `[0, 255]`, kept mutually decorrelated so they behave
//! like distinct base images. Macros overwrite a masked region of a template
//! with a text band, an image patch, or both; the mask is returned so tests
//! can check exactly which pixels were touched.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::image::ImageGrid;
use crate::matcher::mix_seed;
use crate::{Error, Result};

/// Maximum pairwise normalized correlation allowed between templates.
pub const MAX_TEMPLATE_CORRELATION: f64 = 0.5;

/// The generator redraws until pairs sit below this tighter bound; the
/// slack against [`MAX_TEMPLATE_CORRELATION`] keeps sparse matching from
/// confusing templates even after overlays shift correlations around.
const GEN_TARGET_CORRELATION: f64 = 0.35;

/// The overlay shapes macros are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlayKind {
    /// Full-width horizontal band at a seeded vertical offset.
    TextBand,
    /// Axis-aligned rectangular patch at a seeded position.
    ImagePatch,
    /// A band and a patch, placed to avoid each other vertically.
    Combined,
}

/// What the masked region is filled with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlayFill {
    Constant(f64),
    /// Seeded uniform integers in `[0, 255]`.
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlaySpec {
    pub kind: OverlayKind,
    /// Fraction of pixels to overwrite, in `(0, 0.5]`.
    pub coverage: f64,
    pub fill: OverlayFill,
}

/// Which pixels an overlay touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl OverlayMask {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// K mutually decorrelated smooth grayscale fields, deterministic per seed.
///
/// If a draw correlates above [`MAX_TEMPLATE_CORRELATION`] with an earlier
/// template it is regenerated from a new sub-seed.
pub fn gen_templates(count: usize, seed: u64, w: usize, h: usize) -> Result<Vec<ImageGrid>> {
    if count == 0 {
        return Err(Error::InvalidParameter("template count must be >= 1".into()));
    }
    if w == 0 || h == 0 {
        return Err(Error::InvalidParameter("zero-sized template".into()));
    }
    let mut templates: Vec<ImageGrid> = Vec::with_capacity(count);
    for t in 0..count {
        let mut accepted = None;
        for attempt in 0..64u64 {
            let candidate = smooth_field(mix_seed(seed, (t as u64) << 8 | attempt), w, h)?;
            let ok = templates
                .iter()
                .all(|prev| normalized_correlation(prev.data(), candidate.data()).abs()
                    < GEN_TARGET_CORRELATION);
            if ok {
                accepted = Some(candidate);
                break;
            }
        }
        templates.push(accepted.ok_or_else(|| {
            Error::Degenerate(format!(
                "could not draw template {t} decorrelated from the previous ones"
            ))
        })?);
    }
    Ok(templates)
}

/// Sum of a few low-frequency cosine waves, min-max scaled to `[0, 255]`
/// and quantized to integers.
fn smooth_field(seed: u64, w: usize, h: usize) -> Result<ImageGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const WAVES: usize = 8;
    let mut waves = Vec::with_capacity(WAVES);
    for _ in 0..WAVES {
        let u: f64 = rng.gen_range(0.5..3.5);
        let v: f64 = rng.gen_range(0.5..3.5);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let amp: f64 = rng.gen_range(0.5..1.0);
        let flip_u = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        waves.push((u * flip_u, v, phase, amp));
    }
    let mut data = Vec::with_capacity(w * h);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for y in 0..h {
        for x in 0..w {
            let mut value = 0.0;
            for (u, v, phase, amp) in &waves {
                let arg = std::f64::consts::TAU
                    * (u * x as f64 / w as f64 + v * y as f64 / h as f64)
                    + phase;
                value += amp * arg.cos();
            }
            lo = lo.min(value);
            hi = hi.max(value);
            data.push(value);
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    for v in &mut data {
        *v = ((*v - lo) / span * 255.0).round();
    }
    ImageGrid::gray(w, h, data)
}

/// Pearson correlation of two equal-length pixel sets.
pub fn normalized_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Overwrite a masked region of `template` according to `spec`.
///
/// Unmasked pixels are copied bit-for-bit; the mask is returned alongside
/// the macro.
pub fn gen_macro(
    template: &ImageGrid,
    spec: &OverlaySpec,
    seed: u64,
) -> Result<(ImageGrid, OverlayMask)> {
    if !(spec.coverage > 0.0 && spec.coverage <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "coverage {} out of (0, 0.5]",
            spec.coverage
        )));
    }
    let (w, h) = (template.width(), template.height());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = vec![false; w * h];
    match spec.kind {
        OverlayKind::TextBand => {
            mask_band(&mut bits, w, h, spec.coverage, None, &mut rng);
        }
        OverlayKind::ImagePatch => {
            mask_patch(&mut bits, w, h, spec.coverage, None, &mut rng);
        }
        OverlayKind::Combined => {
            let band_rows = mask_band(&mut bits, w, h, spec.coverage / 2.0, None, &mut rng);
            // Keep the patch clear of the band so the union stays near the
            // requested coverage.
            mask_patch(&mut bits, w, h, spec.coverage / 2.0, band_rows, &mut rng);
        }
    }

    let mut data = template.data().to_vec();
    let channels = template.channels();
    for y in 0..h {
        for x in 0..w {
            if !bits[y * w + x] {
                continue;
            }
            for c in 0..channels {
                let value = match spec.fill {
                    OverlayFill::Constant(v) => v,
                    OverlayFill::Noise => rng.gen_range(0u32..=255) as f64,
                };
                data[(y * w + x) * channels + c] = value;
            }
        }
    }
    let mask = OverlayMask {
        width: w,
        height: h,
        bits,
    };
    Ok((ImageGrid::new(w, h, channels, data)?, mask))
}

/// A macro corpus over the given templates: `per_template` macros each,
/// kinds and fills cycling deterministically, coverage drawn from
/// `(0.05, max_coverage]`. Returns `(macro, template_index)` pairs in
/// round-robin template order.
pub fn gen_corpus(
    templates: &[ImageGrid],
    per_template: usize,
    max_coverage: f64,
    seed: u64,
) -> Result<Vec<(ImageGrid, usize)>> {
    if templates.is_empty() {
        return Err(Error::EmptyInput("no templates to build macros from"));
    }
    if !(max_coverage > 0.05 && max_coverage <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "max coverage {max_coverage} out of (0.05, 0.5]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xC0));
    let mut corpus = Vec::with_capacity(templates.len() * per_template);
    for round in 0..per_template {
        for (t, template) in templates.iter().enumerate() {
            let kind = match (round + t) % 3 {
                0 => OverlayKind::TextBand,
                1 => OverlayKind::ImagePatch,
                _ => OverlayKind::Combined,
            };
            let fill = if (round + t) % 2 == 0 {
                OverlayFill::Constant(rng.gen_range(0.0f64..256.0).floor().min(255.0))
            } else {
                OverlayFill::Noise
            };
            let spec = OverlaySpec {
                kind,
                coverage: rng.gen_range(0.05..max_coverage),
                fill,
            };
            let (image, _) = gen_macro(template, &spec, rng.gen())?;
            corpus.push((image, t));
        }
    }
    Ok(corpus)
}

/// Mask a full-width band of `round(coverage * h)` rows; returns the row
/// range used (None when the rounded height is zero).
fn mask_band(
    bits: &mut [bool],
    w: usize,
    h: usize,
    coverage: f64,
    avoid: Option<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, usize)> {
    let rows = ((coverage * h as f64).round() as usize).min(h);
    if rows == 0 {
        return None;
    }
    let _ = avoid;
    let y0 = rng.gen_range(0..=h - rows);
    for y in y0..y0 + rows {
        for x in 0..w {
            bits[y * w + x] = true;
        }
    }
    Some((y0, y0 + rows))
}

/// Mask a roughly square patch of about `coverage * w * h` pixels, keeping
/// its rows outside `avoid` when a row range is given. If the free segment
/// is shorter than the square side, the patch flattens and widens to
/// preserve its area.
fn mask_patch(
    bits: &mut [bool],
    w: usize,
    h: usize,
    coverage: f64,
    avoid: Option<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) {
    let area = coverage * (w * h) as f64;
    if area.round() < 1.0 {
        return;
    }
    let mut ph = ((area * h as f64 / w as f64).sqrt().round() as usize).clamp(1, h);
    // Vertical segment the patch may occupy.
    let (seg_lo, seg_hi) = match avoid {
        Some((band_lo, band_hi)) => {
            let above = band_lo;
            let below = h - band_hi;
            if above >= below {
                (0, band_lo)
            } else {
                (band_hi, h)
            }
        }
        None => (0, h),
    };
    let seg = seg_hi - seg_lo;
    ph = ph.min(seg.max(1));
    let pw = ((area / ph as f64).round() as usize).clamp(1, w);
    let x0 = rng.gen_range(0..=w - pw);
    let y0 = if seg >= ph {
        seg_lo + rng.gen_range(0..=seg - ph)
    } else {
        rng.gen_range(0..=h - ph)
    };
    for y in y0..(y0 + ph).min(h) {
        for x in x0..x0 + pw {
            bits[y * w + x] = true;
        }
    }
}
