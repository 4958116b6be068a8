use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use macroembed_core::analysis::{davies_bouldin, silhouette};
use macroembed_core::embed::table::ingest_text_features;

use super::write_text;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Embedding table (ETBL/ETBB).
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Labels file: "id<TAB>label" lines, as written by `cluster`.
    #[arg(long)]
    pub labels: PathBuf,

    /// Metrics output (key=value lines); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let table = ingest_text_features(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    let text = std::fs::read_to_string(&args.labels)
        .with_context(|| format!("reading {}", args.labels.display()))?;
    let mut labels_by_id: BTreeMap<&str, usize> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, label)) = line.split_once('\t') else {
            bail!("{}: line {}: expected id<TAB>label", args.labels.display(), lineno + 1);
        };
        let label: usize = label.trim().parse().with_context(|| {
            format!("{}: line {}: bad label {label:?}", args.labels.display(), lineno + 1)
        })?;
        labels_by_id.insert(id, label);
    }

    let mut points = Vec::with_capacity(table.len());
    let mut labels = Vec::with_capacity(table.len());
    for (id, v) in table.iter() {
        let Some(&label) = labels_by_id.get(id) else {
            bail!("{}: no label for id {id:?}", args.labels.display());
        };
        points.push(v.to_vec());
        labels.push(label);
    }

    let sil = silhouette(&points, &labels)?;
    let dbi = davies_bouldin(&points, &labels)?;
    let out = format!(
        "silhouette_mean={}\nsilhouette_std_across_clusters={}\ndbi={}\n",
        sil.mean, sil.std_across_clusters, dbi
    );
    match &args.out {
        Some(path) => write_text(path, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}
