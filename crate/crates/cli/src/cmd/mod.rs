pub mod build_templates;
pub mod cluster;
pub mod embed;
pub mod matching;
pub mod metrics;
pub mod retrieve;
pub mod synth;
pub mod tree;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use macroembed_core::image::{load_image, ImageGrid, Preprocessor, WORK_SIZE};
use macroembed_core::manifest::Manifest;
use macroembed_core::matcher::{LambdaRule, MatchConfig, Threshold};

/// One corpus entry with its image loaded.
pub struct LoadedEntry {
    pub id: String,
    pub image: ImageGrid,
    pub template_id: Option<usize>,
    pub text_id: Option<String>,
}

/// Load a manifest and every image it references, preserving entry order.
pub fn load_corpus(path: &Path) -> Result<Vec<LoadedEntry>> {
    let manifest = Manifest::load(path)
        .with_context(|| format!("loading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let mut entries = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let resolved = manifest.resolve(&base, entry);
        let image = load_image(&resolved)
            .with_context(|| format!("loading image {}", resolved.display()))?;
        entries.push(LoadedEntry {
            id: entry.id.clone(),
            image,
            template_id: entry.template_id,
            text_id: entry.text_id.clone(),
        });
    }
    if entries.is_empty() {
        bail!("{}: manifest has no entries", path.display());
    }
    Ok(entries)
}

/// Group template images by contiguous template id.
pub fn template_groups(entries: &[LoadedEntry], source: &Path) -> Result<Vec<Vec<ImageGrid>>> {
    let mut groups: BTreeMap<usize, Vec<ImageGrid>> = BTreeMap::new();
    for entry in entries {
        let id = entry.template_id.with_context(|| {
            format!(
                "{}: template entry {:?} has no template id",
                source.display(),
                entry.id
            )
        })?;
        groups.entry(id).or_default().push(entry.image.clone());
    }
    let k = *groups.last_key_value().unwrap().0 + 1;
    if groups.len() != k {
        bail!(
            "{}: template ids must be contiguous from 0 (found {} ids, max {})",
            source.display(),
            groups.len(),
            k - 1
        );
    }
    Ok(groups.into_values().collect())
}

/// Fit the shared preprocessing over the whole working set.
pub fn fit_preprocessor<'a, I>(images: I) -> Result<Preprocessor>
where
    I: IntoIterator<Item = &'a ImageGrid>,
{
    Ok(Preprocessor::fit(images, WORK_SIZE, WORK_SIZE)?)
}

/// Matching flags shared by `match`, `embed`, and `build-templates`.
#[derive(clap::Args, Debug)]
pub struct MatchFlags {
    /// Residual acceptance threshold, as a fraction of the target norm.
    #[arg(long, default_value_t = macroembed_core::matcher::DEFAULT_RESIDUAL_FRACTION)]
    pub tr: f64,

    /// l1 penalty as a fraction of the peak correlation.
    #[arg(long, default_value_t = macroembed_core::matcher::DEFAULT_LAMBDA_FRACTION)]
    pub lambda: f64,

    /// Augmented columns per template beyond the original.
    #[arg(long, default_value_t = macroembed_core::matcher::DEFAULT_AUGMENT)]
    pub augment: usize,

    /// Count negative coefficients as votes too.
    #[arg(long)]
    pub count_abs: bool,
}

impl MatchFlags {
    pub fn to_config(&self) -> Result<MatchConfig> {
        if !(self.tr > 0.0) {
            bail!("--tr must be positive");
        }
        if !(self.lambda > 0.0) {
            bail!("--lambda must be positive");
        }
        Ok(MatchConfig {
            threshold: Threshold::Relative(self.tr),
            lambda: LambdaRule::Fraction(self.lambda),
            count_abs: self.count_abs,
            ..MatchConfig::default()
        })
    }
}

/// Write with a trailing newline, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// Output path helper: file name inside the `--out` directory.
pub fn in_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
