//! End-to-end subcommand behavior: exit codes, output formats, and the
//! wiring between stages.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_macroembed"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn macroembed")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in [
        "synth",
        "build-templates",
        "match",
        "embed",
        "cluster",
        "retrieve",
        "tree",
        "metrics",
    ] {
        let out = run(&[sub, "--help"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--"), "{sub} help should document flags");
    }
    let out = run(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["synth", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two_and_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["match", "--templates", "absent.manifest", "--targets", "absent.manifest"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("absent.manifest"), "{stderr}");

    fs::write(dir.path().join("bad.etbl"), "ETBL1 2\nx 1\n").unwrap();
    let out = run(&["cluster", "--embeddings", "bad.etbl", "--k", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_then_match_recovers_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(
        &["synth", "--templates", "3", "--per", "4", "--out", "c", "--seed", "5"],
        dir.path(),
    ));
    assert_ok(&run(
        &[
            "match",
            "--templates",
            "c/templates.manifest",
            "--targets",
            "c/corpus.manifest",
            "--out",
            "report.tsv",
        ],
        dir.path(),
    ));
    let report = fs::read_to_string(dir.path().join("report.tsv")).unwrap();
    let manifest = fs::read_to_string(dir.path().join("c/corpus.manifest")).unwrap();
    let mut checked = 0;
    for line in report.lines() {
        let id = line.split('\t').next().unwrap();
        let truth = manifest
            .lines()
            .find(|l| l.starts_with(&format!("{id}\t")))
            .and_then(|l| l.split('\t').nth(2))
            .unwrap();
        assert!(
            line.contains(&format!("template={truth}\tmatched=true")),
            "bad report line for {id}: {line}"
        );
        checked += 1;
    }
    assert_eq!(checked, 12);
}

#[test]
fn jobs_flag_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(
        &["synth", "--templates", "2", "--per", "3", "--out", "c", "--seed", "3"],
        dir.path(),
    ));
    for (jobs, name) in [("1", "r1.tsv"), ("2", "r2.tsv")] {
        assert_ok(&run(
            &[
                "--jobs",
                jobs,
                "match",
                "--templates",
                "c/templates.manifest",
                "--targets",
                "c/corpus.manifest",
                "--out",
                name,
            ],
            dir.path(),
        ));
    }
    let a = fs::read(dir.path().join("r1.tsv")).unwrap();
    let b = fs::read(dir.path().join("r2.tsv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn build_templates_writes_manifest_and_members() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(
        &["synth", "--templates", "2", "--per", "8", "--out", "c", "--seed", "11", "--max-coverage", "0.2"],
        dir.path(),
    ));
    assert_ok(&run(
        &[
            "build-templates",
            "--targets",
            "c/corpus.manifest",
            "--out",
            "d",
            "--seed",
            "11",
        ],
        dir.path(),
    ));
    let manifest = fs::read_to_string(dir.path().join("d/templates.manifest")).unwrap();
    assert!(manifest.starts_with("MMAN1\n"));
    assert!(manifest.contains("global_mean="));
    let members = fs::read_to_string(dir.path().join("d/members.tsv")).unwrap();
    assert_eq!(members.lines().count(), 16, "every target lands in a member set");
    // The discovered templates feed straight back into match.
    assert_ok(&run(
        &[
            "match",
            "--templates",
            "d/templates.manifest",
            "--targets",
            "c/corpus.manifest",
            "--out",
            "r.tsv",
        ],
        dir.path(),
    ));
}

#[test]
fn embed_attaches_and_imputes_text() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(
        &["synth", "--templates", "2", "--per", "3", "--out", "c", "--seed", "2"],
        dir.path(),
    ));
    fs::write(
        dir.path().join("text.etbl"),
        "ETBL1 2\nmacro_0000 1 2\nmacro_0001 5 6\n",
    )
    .unwrap();
    assert_ok(&run(
        &[
            "embed",
            "--templates",
            "c/templates.manifest",
            "--targets",
            "c/corpus.manifest",
            "--text",
            "text.etbl",
            "--extractor",
            "block-mean:24",
            "--out",
            "e.etbl",
            "--report",
            "rep.tsv",
        ],
        dir.path(),
    ));
    let table = fs::read_to_string(dir.path().join("e.etbl")).unwrap();
    // 2 * (48/24)^2 image dims + 2 text dims.
    assert!(table.starts_with("ETBL1 10\n"), "{}", &table[..20.min(table.len())]);
    assert_eq!(table.lines().count(), 1 + 6);
    let report = fs::read_to_string(dir.path().join("rep.tsv")).unwrap();
    assert!(report.contains("macro_0000\ttemplate=0\tmatched=true\ttext_imputed=false"));
    assert!(report.contains("macro_0002\t") && report.contains("text_imputed=true"));
}

#[test]
fn embed_binary_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(
        &["synth", "--templates", "2", "--per", "2", "--out", "c", "--seed", "9"],
        dir.path(),
    ));
    for format in ["etbl", "etbb"] {
        assert_ok(&run(
            &[
                "embed",
                "--templates",
                "c/templates.manifest",
                "--targets",
                "c/corpus.manifest",
                "--extractor",
                "block-mean:16",
                "--format",
                format,
                "--out",
                &format!("e.{format}"),
            ],
            dir.path(),
        ));
    }
    // Same ids either way; retrieval works off the binary file too.
    let out = run(
        &["retrieve", "--embeddings", "e.etbb", "--query", "macro_0000", "--k", "2"],
        dir.path(),
    );
    assert_ok(&out);
    let hits = String::from_utf8_lossy(&out.stdout);
    assert_eq!(hits.lines().count(), 2);
    assert!(!hits.contains("macro_0000\t"), "query must be excluded: {hits}");
}

#[test]
fn tree_newick_is_exact_on_lattice_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    // Distances: |ab| = 8, |ac| = |bc| = 5 — all exactly representable, so
    // the merge heights (2.5, 3.25) and branch lengths print exactly.
    fs::write(
        dir.path().join("e.etbl"),
        "ETBL1 2\na 0 0\nb 8 0\nc 4 3\n",
    )
    .unwrap();
    let out = run(
        &["tree", "--embeddings", "e.etbl", "--metric", "euclidean"],
        dir.path(),
    );
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("[linkage=upgma metric=euclidean]"));
    assert_eq!(lines.next(), Some("((a:2.5,c:2.5):0.75,b:3.25);"));
}

#[test]
fn cluster_and_metrics_report_expected_keys() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("e.etbl"),
        "ETBL1 2\np0 0 0\np1 0 1\np2 10 0\np3 10 1\n",
    )
    .unwrap();
    assert_ok(&run(
        &["cluster", "--embeddings", "e.etbl", "--k", "2", "--out", "labels.tsv"],
        dir.path(),
    ));
    let labels = fs::read_to_string(dir.path().join("labels.tsv")).unwrap();
    assert_eq!(labels.lines().count(), 4);
    for line in labels.lines() {
        assert!(line.split_once('\t').is_some());
    }
    let out = run(
        &["metrics", "--embeddings", "e.etbl", "--labels", "labels.tsv"],
        dir.path(),
    );
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("silhouette_mean="));
    assert!(text.contains("silhouette_std_across_clusters="));
    assert!(text.contains("dbi=0.1"), "{text}");
}
