use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use macroembed_core::embed::table::{ingest_text_features, write_binary_table, write_text_table};
use macroembed_core::embed::{impute_missing_text, EmbeddingRecord, FeatureExtractor};
use macroembed_core::matcher::{build_dictionary, match_all};

use super::{fit_preprocessor, load_corpus, template_groups, write_text, MatchFlags};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Template set manifest.
    #[arg(long)]
    pub templates: PathBuf,

    /// Target corpus manifest.
    #[arg(long)]
    pub targets: PathBuf,

    /// Text feature table (ETBL/ETBB) keyed by target id or the manifest's
    /// text id; missing entries are imputed per template.
    #[arg(long)]
    pub text: Option<PathBuf>,

    /// Image feature extractor: raw-pixels or block-mean:<b>.
    #[arg(long, default_value = "raw-pixels")]
    pub extractor: String,

    /// Output table format: etbl (text) or etbb (binary).
    #[arg(long, default_value = "etbl")]
    pub format: String,

    #[command(flatten)]
    pub matching: MatchFlags,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Embedding table output path.
    #[arg(long)]
    pub out: PathBuf,

    /// Optional per-target assignment report (TSV).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let extractor = FeatureExtractor::from_str(&args.extractor)?;
    let template_entries = load_corpus(&args.templates)?;
    let target_entries = load_corpus(&args.targets)?;
    let pre = fit_preprocessor(
        target_entries
            .iter()
            .chain(template_entries.iter())
            .map(|e| &e.image),
    )?;
    let groups = template_groups(&template_entries, &args.templates)?;
    let dictionary = build_dictionary(&groups, args.matching.augment, args.seed, &pre)?;
    let working = target_entries
        .iter()
        .map(|e| pre.apply(&e.image))
        .collect::<macroembed_core::Result<Vec<_>>>()?;
    let cfg = args.matching.to_config()?;
    let results = match_all(&dictionary, &working, &cfg)?;

    let mut records = Vec::with_capacity(results.len());
    for (entry, result) in target_entries.iter().zip(&results) {
        // Text features are keyed by the manifest's text id when present.
        let key = entry.text_id.clone().unwrap_or_else(|| entry.id.clone());
        let mut record = EmbeddingRecord::new(key, result, extractor)?;
        record.target_id = entry.id.clone();
        records.push((record, entry.text_id.clone()));
    }

    let records: Vec<EmbeddingRecord> = if let Some(text_path) = &args.text {
        let table = ingest_text_features(text_path)
            .with_context(|| format!("reading {}", text_path.display()))?;
        // Attach by text id first (ids may differ from target ids).
        let mut recs = Vec::with_capacity(records.len());
        for (mut record, text_id) in records {
            let key = text_id.as_deref().unwrap_or(record.target_id.as_str());
            if let Some(v) = table.get(key) {
                record.text_part = Some(v.to_vec());
            }
            recs.push(record);
        }
        impute_missing_text(recs, &table)?
    } else {
        records.into_iter().map(|(r, _)| r).collect()
    };

    let rows: Vec<(String, Vec<f64>)> = records
        .iter()
        .map(|r| (r.target_id.clone(), r.full()))
        .collect();
    let dim = rows.first().map(|(_, v)| v.len()).unwrap_or(0);
    match args.format.as_str() {
        "etbl" => write_text_table(&args.out, dim, &rows)?,
        "etbb" => write_binary_table(&args.out, dim, &rows)?,
        other => bail!("unknown --format {other:?} (expected etbl or etbb)"),
    }

    if let Some(report_path) = &args.report {
        let mut report = String::new();
        for (record, result) in records.iter().zip(&results) {
            let template = record
                .template_id
                .map(|t| t.to_string())
                .unwrap_or_else(|| "-".into());
            writeln!(
                report,
                "{}\ttemplate={}\tmatched={}\ttext_imputed={}",
                record.target_id, template, result.matched, record.text_imputed
            )?;
        }
        write_text(report_path, &report)?;
    }
    eprintln!(
        "embedded {} targets at dim {} -> {}",
        records.len(),
        dim,
        args.out.display()
    );
    Ok(())
}
