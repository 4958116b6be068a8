//! Discover the template set from the targets alone.
//!
//! One sequential pass: the first target seeds the library; each later
//! target is sparse-matched against the current (possibly garbled) template
//! images. A match joins that template's member set and, unless the template
//! has converged, re-blends it as the pixel-wise median of its members; a
//! rejection seeds a new template. Convergence — the blend moving less than
//! `t_b` — freezes a template for good. Finalization augments every
//! discovered template into the matching dictionary.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::image::{downsample, vectorize, ImageGrid, PixelVector};
use crate::matcher::{
    class_votes, mix_seed, MatchConfig, TemplateDictionary, DEFAULT_AUGMENT,
    DEFAULT_CROP_AREA,
};
use crate::sparse::{residual_norm, solve_l1, Dictionary, SparseCode};
use crate::{Error, Result};

/// Default blend-convergence threshold as RMS gray levels per pixel: the
/// blend has converged once it moves the template by less than this much on
/// the 0-255 scale, i.e. `||v - s||_2 <= rms * sqrt(n)`.
///
/// Set low enough that templates are not frozen while the median is still
/// shedding overlay residue; a 2.0 threshold froze templates at a mean
/// pixel error near 8 on the calibration corpus, 0.5 converges near 0.
pub const DEFAULT_BLEND_RMS: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct ConstructConfig {
    /// Matching thresholds and solver settings used inside the loop.
    pub match_cfg: MatchConfig,
    /// RMS-per-pixel convergence threshold for median blending.
    pub blend_rms: f64,
    /// Augmented columns per template in the finalized dictionary.
    pub augment_per_template: usize,
    pub crop_area_fraction: f64,
    pub seed: u64,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        Self {
            match_cfg: MatchConfig::default(),
            blend_rms: DEFAULT_BLEND_RMS,
            augment_per_template: DEFAULT_AUGMENT,
            crop_area_fraction: DEFAULT_CROP_AREA,
            seed: 0,
        }
    }
}

/// One discovered template.
#[derive(Debug, Clone)]
pub struct DiscoveredTemplate {
    /// Current blended image, in working space.
    pub image: ImageGrid,
    /// Indices of the targets assigned to this template, in arrival order.
    pub members: Vec<usize>,
    /// Set once the blend stops moving; the image is frozen afterwards.
    pub converged: bool,
}

/// The discovered template set plus the finalized, augmented dictionary.
#[derive(Debug)]
pub struct TemplateLibrary {
    pub templates: Vec<DiscoveredTemplate>,
    pub dictionary: TemplateDictionary,
}

/// Per-pixel median of a stack of same-sized images.
///
/// Even-sized stacks use the lower median, which keeps integer inputs
/// integral and the result deterministic.
pub fn median_blend(images: &[&ImageGrid]) -> Result<ImageGrid> {
    let first = *images.first().ok_or(Error::EmptyInput("median of no images"))?;
    for img in images {
        if img.width() != first.width()
            || img.height() != first.height()
            || img.channels() != first.channels()
        {
            return Err(Error::DimensionMismatch(
                "median blend needs identical dimensions".into(),
            ));
        }
    }
    if images.len() == 1 {
        return Ok(first.clone());
    }
    let len = first.data().len();
    let mid = (images.len() - 1) / 2;
    let mut data = Vec::with_capacity(len);
    let mut stack = vec![0.0; images.len()];
    for i in 0..len {
        for (s, img) in stack.iter_mut().zip(images) {
            *s = img.data()[i];
        }
        let (_, median, _) = stack.select_nth_unstable_by(mid, f64::total_cmp);
        data.push(*median);
    }
    Ok(ImageGrid::new(first.width(), first.height(), first.channels(), data)?
        .with_normalized(first.is_normalized()))
}

/// `[original, horizontal flip]` plus `n_crops` random crops of
/// `crop_area_fraction` of the area, each resized back to the original
/// resolution. Deterministic under `seed`.
pub fn augment(
    template: &ImageGrid,
    n_crops: usize,
    crop_area_fraction: f64,
    seed: u64,
) -> Result<Vec<ImageGrid>> {
    if !(crop_area_fraction > 0.0 && crop_area_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "crop area fraction {crop_area_fraction} out of (0, 1]"
        )));
    }
    let (w, h) = (template.width(), template.height());
    let mut out = Vec::with_capacity(2 + n_crops);
    out.push(template.clone());
    out.push(template.hflip());
    let side = crop_area_fraction.sqrt();
    let cw = ((w as f64 * side).round() as usize).clamp(1, w);
    let ch = ((h as f64 * side).round() as usize).clamp(1, h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_crops {
        let x0 = rng.gen_range(0..=w - cw);
        let y0 = rng.gen_range(0..=h - ch);
        let cropped = template.crop(x0, y0, cw, ch)?;
        out.push(downsample(&cropped, w, h)?);
    }
    Ok(out)
}

/// Run template-set construction over preprocessed targets.
///
/// Targets must already be in working space. The pass is order-dependent by
/// design; a fixed input order and seed give a fully deterministic library.
pub fn construct_templates(targets: &[ImageGrid], cfg: &ConstructConfig) -> Result<TemplateLibrary> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("no targets to construct templates from"));
    }
    let mut templates: Vec<DiscoveredTemplate> = Vec::new();
    // The in-loop dictionary has one column per template image; it goes
    // stale only when a template image changes or a new template appears,
    // not when a converged template merely gains members.
    let mut dict: Option<Dictionary> = None;

    for (index, target) in targets.iter().enumerate() {
        if templates.is_empty() {
            templates.push(DiscoveredTemplate {
                image: target.clone(),
                members: vec![index],
                converged: false,
            });
            dict = None;
            continue;
        }
        let current = match &dict {
            Some(d) => d,
            None => {
                let columns: Vec<PixelVector> =
                    templates.iter().map(|t| vectorize(&t.image)).collect();
                let ids = (0..templates.len()).collect();
                dict = Some(Dictionary::from_unnormalized(columns, ids)?);
                dict.as_ref().unwrap()
            }
        };
        let y = vectorize(target);
        let (code, residual) = solve_against(current, &y, &cfg.match_cfg)?;
        let threshold = cfg.match_cfg.threshold.effective(y.norm_l2());
        if residual <= threshold {
            let votes = class_votes(&code, current, cfg.match_cfg.eps_z, cfg.match_cfg.count_abs);
            let winner = crate::matcher::vote_winner(&votes);
            let tpl = &mut templates[winner];
            tpl.members.push(index);
            if !tpl.converged {
                let stack: Vec<&ImageGrid> =
                    tpl.members.iter().map(|&i| &targets[i]).collect();
                let blended = median_blend(&stack)?;
                let moved = l2_distance(blended.data(), tpl.image.data());
                let t_b = cfg.blend_rms * (blended.data().len() as f64).sqrt();
                if moved <= t_b {
                    tpl.converged = true;
                }
                tpl.image = blended;
                dict = None;
            }
        } else {
            templates.push(DiscoveredTemplate {
                image: target.clone(),
                members: vec![index],
                converged: false,
            });
            dict = None;
        }
    }

    let groups: Vec<Vec<ImageGrid>> = templates.iter().map(|t| vec![t.image.clone()]).collect();
    let dictionary = TemplateDictionary::from_working_groups(
        &groups,
        cfg.augment_per_template,
        cfg.crop_area_fraction,
        mix_seed(cfg.seed, 0xA06),
    )?;
    Ok(TemplateLibrary {
        templates,
        dictionary,
    })
}

fn solve_against(dict: &Dictionary, y: &PixelVector, cfg: &MatchConfig) -> Result<(SparseCode, f64)> {
    let lambda = match cfg.lambda {
        crate::matcher::LambdaRule::Fixed(v) => v,
        crate::matcher::LambdaRule::Fraction(f) => {
            let corr_inf = dict
                .correlations(y.values())?
                .iter()
                .fold(0.0f64, |a, c| a.max(c.abs()));
            f * corr_inf
        }
    };
    let code = if lambda > 0.0 {
        solve_l1(dict, y, lambda, cfg.tol, cfg.max_iter)?
    } else {
        SparseCode {
            coeffs: vec![0.0; dict.num_columns()],
            iterations: 0,
            converged: true,
            objective: 0.5 * y.norm_l2().powi(2),
        }
    };
    let residual = residual_norm(dict, &code, y)?;
    Ok((code, residual))
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Re-match every target against the finalized dictionary; used for the
/// self-consistency checks and by callers that want final assignments.
pub fn rematch_members(
    library: &TemplateLibrary,
    targets: &[ImageGrid],
    cfg: &MatchConfig,
) -> Result<Vec<Option<usize>>> {
    crate::matcher::match_all(&library.dictionary, targets, cfg)
        .map(|results| results.into_iter().map(|r| r.template_id).collect())
}
