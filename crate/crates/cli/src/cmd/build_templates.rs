use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use macroembed_core::image::{normalize_contrast, save_igrd};
use macroembed_core::manifest::{Manifest, ManifestEntry};
use macroembed_core::template_set::{construct_templates, ConstructConfig, DEFAULT_BLEND_RMS};

use super::{ensure_dir, fit_preprocessor, in_dir, load_corpus, write_text, MatchFlags};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Target corpus manifest.
    #[arg(long)]
    pub targets: PathBuf,

    /// Output directory for template images and the manifest.
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub matching: MatchFlags,

    /// Median-blend convergence threshold, RMS gray levels per pixel.
    #[arg(long, default_value_t = DEFAULT_BLEND_RMS)]
    pub tb: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: Args) -> Result<()> {
    if !(args.tb > 0.0) {
        anyhow::bail!("--tb must be positive");
    }
    ensure_dir(&args.out)?;
    let entries = load_corpus(&args.targets)?;
    let pre = fit_preprocessor(entries.iter().map(|e| &e.image))?;
    let working = entries
        .iter()
        .map(|e| pre.apply(&e.image))
        .collect::<macroembed_core::Result<Vec<_>>>()?;

    let cfg = ConstructConfig {
        match_cfg: args.matching.to_config()?,
        blend_rms: args.tb,
        augment_per_template: args.matching.augment,
        seed: args.seed,
        ..ConstructConfig::default()
    };
    let library = construct_templates(&working, &cfg)?;

    let mut manifest = Manifest::default();
    manifest.set_param("tr", args.matching.tr);
    manifest.set_param("tb", args.tb);
    manifest.set_param("lambda", args.matching.lambda);
    manifest.set_param("seed", args.seed);
    manifest.set_param("global_mean", pre.global_mean());
    manifest.set_param("work_size", pre.work_width());

    let mut members = String::new();
    for (t, template) in library.templates.iter().enumerate() {
        // Store templates de-normalized so they read back like any other
        // template image; IGRD keeps the fractional values intact.
        let restored = normalize_contrast(&template.image, &[-pre.global_mean()])?;
        let name = format!("template_{t:02}.igrd");
        save_igrd(&restored, &in_dir(&args.out, &name))?;
        manifest.entries.push(ManifestEntry {
            id: format!("template_{t:02}"),
            path: name.into(),
            template_id: Some(t),
            text_id: None,
        });
        for &m in &template.members {
            writeln!(members, "{t}\t{}", entries[m].id)?;
        }
    }
    manifest.save(&in_dir(&args.out, "templates.manifest"))?;
    write_text(&in_dir(&args.out, "members.tsv"), &members)?;
    println!(
        "discovered {} templates from {} targets ({} converged)",
        library.templates.len(),
        entries.len(),
        library.templates.iter().filter(|t| t.converged).count()
    );
    Ok(())
}
