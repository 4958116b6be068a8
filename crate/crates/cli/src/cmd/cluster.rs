use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use macroembed_core::analysis::kmeans;
use macroembed_core::embed::table::ingest_text_features;

use super::write_text;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Embedding table (ETBL/ETBB).
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Number of clusters.
    #[arg(long)]
    pub k: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,

    /// Labels output path ("id<TAB>label" lines); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let table = ingest_text_features(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    // Entries come back in id order; all downstream output follows it.
    let ids: Vec<&str> = table.iter().map(|(id, _)| id).collect();
    let points: Vec<Vec<f64>> = table.iter().map(|(_, v)| v.to_vec()).collect();
    let assignment = kmeans(&points, args.k, args.seed, args.max_iter)?;
    let mut out = String::new();
    for (id, label) in ids.iter().zip(&assignment.labels) {
        writeln!(out, "{id}\t{label}")?;
    }
    match &args.out {
        Some(path) => write_text(path, &out)?,
        None => print!("{out}"),
    }
    eprintln!(
        "k-means: k={} inertia={:.6} iterations={}",
        args.k, assignment.inertia, assignment.iterations
    );
    Ok(())
}
