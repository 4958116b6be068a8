use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use macroembed_core::analysis::{pairwise_distances, upgma, Metric};
use macroembed_core::embed::table::ingest_text_features;

use super::write_text;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Embedding table (ETBL/ETBB).
    #[arg(long)]
    pub embeddings: PathBuf,

    /// euclidean or cosine.
    #[arg(long, default_value = "euclidean")]
    pub metric: String,

    /// Newick output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let metric = Metric::from_str(&args.metric)?;
    let table = ingest_text_features(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    let names: Vec<String> = table.iter().map(|(id, _)| id.to_string()).collect();
    let points: Vec<Vec<f64>> = table.iter().map(|(_, v)| v.to_vec()).collect();
    let d = pairwise_distances(&points, metric)?;
    let tree = upgma(&d, &names)?;
    // The bracketed prefix is a legal Newick comment naming the method.
    let text = format!("[linkage=upgma metric={}]\n{}\n", args.metric, tree.to_newick());
    match &args.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
