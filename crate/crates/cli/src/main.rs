//! `macroembed` — synthesize macro corpora, recover template sets, match
//! targets to templates, build decoupled embeddings, and analyze them.
//!
//! Every subcommand is a pure function of its input files, flags, and seed;
//! running one twice produces byte-identical outputs. Exit codes: 0 on
//! success, 1 on usage errors, 2 on data errors (missing files, malformed
//! formats), with the offending path or line in the message.

mod cmd;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "macroembed", version, about)]
struct Cli {
    /// Worker threads for matching and embedding (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic corpus of templates and macros.
    Synth(cmd::synth::Args),
    /// Discover the template set from a target corpus alone.
    BuildTemplates(cmd::build_templates::Args),
    /// Match each target against a template set and report assignments.
    Match(cmd::matching::Args),
    /// Produce decoupled embeddings, optionally with text features.
    Embed(cmd::embed::Args),
    /// K-means cluster an embedding table.
    Cluster(cmd::cluster::Args),
    /// Nearest-neighbor retrieval within an embedding table.
    Retrieve(cmd::retrieve::Args),
    /// Average-linkage tree over an embedding table, as Newick text.
    Tree(cmd::tree::Args),
    /// Cluster-quality metrics for a labeling of an embedding table.
    Metrics(cmd::metrics::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        // Output never depends on the pool size; this only bounds workers.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let result = match cli.command {
        Command::Synth(args) => cmd::synth::run(args),
        Command::BuildTemplates(args) => cmd::build_templates::run(args),
        Command::Match(args) => cmd::matching::run(args),
        Command::Embed(args) => cmd::embed::run(args),
        Command::Cluster(args) => cmd::cluster::run(args),
        Command::Retrieve(args) => cmd::retrieve::run(args),
        Command::Tree(args) => cmd::tree::run(args),
        Command::Metrics(args) => cmd::metrics::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
