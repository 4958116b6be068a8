use std::path::PathBuf;

use anyhow::Result;
use macroembed_core::image::save_pgm;
use macroembed_core::manifest::{Manifest, ManifestEntry};
use macroembed_core::synth;

use super::{ensure_dir, in_dir};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Number of templates to generate.
    #[arg(long)]
    pub templates: usize,

    /// Macros per template.
    #[arg(long)]
    pub per: usize,

    /// Output directory for images and manifests.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 96)]
    pub width: usize,

    #[arg(long, default_value_t = 96)]
    pub height: usize,

    /// Upper bound on overlay coverage per macro.
    #[arg(long, default_value_t = 0.3)]
    pub max_coverage: f64,
}

pub fn run(args: Args) -> Result<()> {
    ensure_dir(&args.out)?;
    let templates = synth::gen_templates(args.templates, args.seed, args.width, args.height)?;

    let mut template_manifest = Manifest::default();
    template_manifest.set_param("seed", args.seed);
    template_manifest.set_param("width", args.width);
    template_manifest.set_param("height", args.height);
    for (t, image) in templates.iter().enumerate() {
        let name = format!("template_{t:02}.pgm");
        save_pgm(image, &in_dir(&args.out, &name))?;
        template_manifest.entries.push(ManifestEntry {
            id: format!("template_{t:02}"),
            path: name.into(),
            template_id: Some(t),
            text_id: None,
        });
    }
    template_manifest.save(&in_dir(&args.out, "templates.manifest"))?;

    let corpus = synth::gen_corpus(&templates, args.per, args.max_coverage, args.seed)?;
    let mut corpus_manifest = Manifest::default();
    corpus_manifest.set_param("seed", args.seed);
    corpus_manifest.set_param("templates", args.templates);
    corpus_manifest.set_param("per", args.per);
    corpus_manifest.set_param("max_coverage", args.max_coverage);
    for (i, (image, truth)) in corpus.iter().enumerate() {
        let name = format!("macro_{i:04}.pgm");
        save_pgm(image, &in_dir(&args.out, &name))?;
        corpus_manifest.entries.push(ManifestEntry {
            id: format!("macro_{i:04}"),
            path: name.into(),
            template_id: Some(*truth),
            text_id: None,
        });
    }
    corpus_manifest.save(&in_dir(&args.out, "corpus.manifest"))?;
    println!(
        "wrote {} templates and {} macros to {}",
        templates.len(),
        corpus.len(),
        args.out.display()
    );
    Ok(())
}
