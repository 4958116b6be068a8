use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use macroembed_core::analysis::{knn_retrieve, Metric};
use macroembed_core::embed::table::ingest_text_features;

use super::write_text;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Embedding table (ETBL/ETBB).
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Id of the query embedding; excluded from its own results.
    #[arg(long)]
    pub query: String,

    /// Number of neighbors.
    #[arg(long, default_value_t = 4)]
    pub k: usize,

    /// euclidean or cosine.
    #[arg(long, default_value = "euclidean")]
    pub metric: String,

    /// Results output ("id<TAB>distance" lines); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let metric = Metric::from_str(&args.metric)?;
    let table = ingest_text_features(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    let Some(query) = table.get(&args.query) else {
        bail!(
            "{}: no embedding with id {:?}",
            args.embeddings.display(),
            args.query
        );
    };
    let db: Vec<(String, Vec<f64>)> = table
        .iter()
        .map(|(id, v)| (id.to_string(), v.to_vec()))
        .collect();
    let hits = knn_retrieve(query, Some(&args.query), &db, args.k, metric)?;
    let mut out = String::new();
    for (id, distance) in &hits {
        writeln!(out, "{id}\t{distance}")?;
    }
    match &args.out {
        Some(path) => write_text(path, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}
