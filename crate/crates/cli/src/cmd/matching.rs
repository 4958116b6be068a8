use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
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

    #[command(flatten)]
    pub matching: MatchFlags,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let template_entries = load_corpus(&args.templates)?;
    let target_entries = load_corpus(&args.targets)?;
    // The global mean is fitted over the whole working set.
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

    let mut report = String::new();
    let mut matched = 0usize;
    for (entry, result) in target_entries.iter().zip(&results) {
        let template = result
            .template_id
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".into());
        matched += result.matched as usize;
        writeln!(
            report,
            "{}\ttemplate={}\tmatched={}\tresidual={:.6}\tthreshold={:.6}",
            entry.id, template, result.matched, result.residual, result.threshold
        )?;
    }
    match &args.out {
        Some(path) => write_text(path, &report)?,
        None => print!("{report}"),
    }
    eprintln!("matched {matched}/{} targets", results.len());
    Ok(())
}
