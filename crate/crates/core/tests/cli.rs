//! The `wikiner` command line, run in-process against temp projects.

mod common;

use std::fs;
use std::path::Path;

use common::cli;
use wikiner::candidates::{group_links, score_groups, HeuristicTagger, ScoringConfig};
use wikiner::corpus::{compute_stats, read_corpus_file, CorpusFormat, CorpusStats, PipelineCounts};
use wikiner::ingest::{extract_links, ContentKind, RawPage};
use wikiner::project::Project;

const SUBCOMMANDS: &[&str] = &[
    "init",
    "fetch",
    "extract",
    "candidates",
    "score",
    "stats",
    "serve",
    "agreement",
    "adjudicate",
    "finalize",
    "export",
    "evaluate",
    "train",
    "learning-curve",
];

fn ok(dir: &Path, args: &[&str]) -> String {
    let (code, out, err) = cli(dir, args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn run_pipeline(dir: &Path) {
    let pages = common::fixture("pages");
    ok(dir, &["fetch", "--from", pages.to_str().unwrap()]);
    ok(dir, &["extract"]);
    ok(dir, &["candidates"]);
    ok(dir, &["score"]);
    ok(dir, &["stats"]);
}

const STAGE_FILES: &[&str] = &["links.jsonl", "candidates.jsonl", "scored.jsonl", "stats.json"];

fn snapshot(dir: &Path) -> Vec<Vec<u8>> {
    STAGE_FILES.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn help_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = cli(dir.path(), &["--help"]);
    assert_eq!(code, 0);
    for sub in SUBCOMMANDS.iter().filter(|s| **s != "train") {
        assert!(out.contains(sub), "top-level help lacks {sub}");
    }
    for sub in SUBCOMMANDS {
        let (code, out, err) = cli(dir.path(), &[sub, "--help"]);
        assert_eq!(code, 0, "{sub}: {err}");
        assert!(out.contains("Usage"), "{sub}: {out}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(dir.path(), &["frobnicate"]).0, 2);
    assert_eq!(cli(dir.path(), &["evaluate", "--model", "forest"]).0, 2);
    assert_eq!(cli(dir.path(), &["score", "--pos-agg", "most"]).0, 2);
    assert_eq!(cli(dir.path(), &["learning-curve", "--fractions", "half"]).0, 2);
    ok(dir.path(), &["init"]);
    let (code, _, err) = cli(dir.path(), &["adjudicate", "only-an-id"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn missing_inputs_name_the_producing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let (code, _, err) = cli(&missing, &["extract"]);
    assert_eq!(code, 1);
    assert!(err.contains("wikiner init"), "{err}");

    ok(dir.path(), &["init"]);
    for (stage, producer) in [
        ("extract", "wikiner fetch"),
        ("candidates", "wikiner extract"),
        ("score", "wikiner candidates"),
        ("agreement", "wikiner serve"),
        ("finalize", "wikiner serve"),
        ("export", "wikiner finalize"),
        ("evaluate", "wikiner finalize"),
    ] {
        let (code, _, err) = cli(dir.path(), &[stage]);
        assert_eq!(code, 1, "{stage}");
        assert!(err.contains(producer), "{stage}: {err}");
    }
}

#[test]
fn init_keeps_existing_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["init"]);
    fs::write(dir.path().join("seeds.txt"), "Category:Rivers of India\n").unwrap();
    let toml = fs::read_to_string(dir.path().join("wikiner.toml")).unwrap();
    fs::write(dir.path().join("wikiner.toml"), toml.replace("folds = 5", "folds = 3")).unwrap();
    ok(dir.path(), &["init"]);
    assert_eq!(
        fs::read_to_string(dir.path().join("seeds.txt")).unwrap(),
        "Category:Rivers of India\n"
    );
    let p = Project::open(dir.path()).unwrap();
    assert_eq!(p.config().eval.folds, 3);
}

#[test]
fn bad_config_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["init"]);
    fs::write(dir.path().join("wikiner.toml"), "[eval]\nfold = 3\n").unwrap();
    let (code, _, err) = cli(dir.path(), &["extract"]);
    assert_eq!(code, 1);
    assert!(err.contains("fold"), "{err}");
}

#[test]
fn offline_fetch_of_uncached_seed_fails() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["init"]);
    fs::write(dir.path().join("seeds.txt"), "Category:Rivers of India\n").unwrap();
    let (code, _, err) = cli(dir.path(), &["fetch"]);
    assert_eq!(code, 1);
    assert!(err.contains("Rivers of India"), "{err}");
}

/// Independent recomputation of every stage from the fixture pages.
fn library_stats(records_path: &Path) -> CorpusStats {
    let mut pages = Vec::new();
    for entry in fs::read_dir(common::fixture("pages")).unwrap() {
        let path = entry.unwrap().path();
        let kind = match path.extension().unwrap().to_str().unwrap() {
            "html" => ContentKind::Html,
            _ => ContentKind::Wikitext,
        };
        let title = path.file_stem().unwrap().to_str().unwrap();
        pages.push(RawPage::new(title, kind, fs::read_to_string(&path).unwrap()).unwrap());
    }
    let links: Vec<_> = pages.iter().flat_map(|p| extract_links(p).links).collect();
    let groups = group_links(&links);
    let (scored, _) = score_groups(&groups, &HeuristicTagger::default(), ScoringConfig::default()).unwrap();
    let records = read_corpus_file(records_path, CorpusFormat::Tsv).unwrap();
    compute_stats(
        &records,
        PipelineCounts {
            pages: pages.len(),
            links: links.len(),
            probable: groups.len(),
            selected: scored.iter().filter(|s| s.candidate.selected).count(),
        },
    )
    .unwrap()
}

#[test]
fn fixture_pipeline_matches_library() {
    let dir = common::fixture_project();
    run_pipeline(dir.path());
    let stats: CorpusStats =
        serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats, library_stats(&common::fixture("corpus.tsv")));
    assert_eq!(stats.pages_accessed, 2);
    assert_eq!(stats.links_extracted, 87);
    assert_eq!(stats.labeled_total(), 300);

    let out = ok(dir.path(), &["stats"]);
    assert!(out.contains("link expressions extracted"));
    assert!(out.contains("Overall"));
}

#[test]
fn stages_are_idempotent() {
    let dir = common::fixture_project();
    run_pipeline(dir.path());
    let first = snapshot(dir.path());
    run_pipeline(dir.path());
    assert_eq!(first, snapshot(dir.path()));

    // a second project fed the same pages produces the same bytes
    let other = common::fixture_project();
    run_pipeline(other.path());
    assert_eq!(first, snapshot(other.path()));
}

#[test]
fn evaluate_is_byte_stable() {
    let dir = common::fixture_project();
    let table = ok(dir.path(), &["evaluate", "--model", "nb", "--folds", "3"]);
    assert!(table.contains("MISC"), "{table}");
    let a = fs::read(dir.path().join("report.json")).unwrap();
    ok(dir.path(), &["train", "--model", "nb", "--folds", "3"]);
    assert_eq!(a, fs::read(dir.path().join("report.json")).unwrap());

    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["config_echo"]["model"], "nb");
    assert_eq!(report["config_echo"]["folds"], 3);

    ok(dir.path(), &["evaluate", "--model", "nb", "--folds", "3", "--without-misc"]);
    let no_misc: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("report_without_misc.json")).unwrap()).unwrap();
    assert_eq!(no_misc["config_echo"]["misc_included"], false);
    assert!(no_misc["class_distribution"].get("MISC").is_none());
    // the full report was not overwritten
    assert_eq!(a, fs::read(dir.path().join("report.json")).unwrap());
}

#[test]
fn learning_curve_rejects_bad_fractions() {
    let dir = common::fixture_project();
    let (code, _, err) = cli(dir.path(), &["learning-curve", "--fractions", "0.5,0.25"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = cli(dir.path(), &["learning-curve", "--fractions", "0.5,1.5"]);
    assert_eq!(code, 1);
    let out = ok(dir.path(), &["learning-curve", "--model", "nb", "--fractions", "0.5,1"]);
    assert_eq!(out.lines().count(), 2);
    let csv = fs::read_to_string(dir.path().join("learning_curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn adjudicate_and_finalize_through_the_journal() {
    let dir = common::fixture_project();
    fs::remove_file(dir.path().join("corpus.tsv")).unwrap();
    run_pipeline(dir.path());
    let project = Project::open(dir.path()).unwrap();

    let (code, _, err) = cli(dir.path(), &["finalize"]);
    assert_eq!(code, 1);
    assert!(err.contains("wikiner serve"), "{err}");

    // two annotators label everything; they disagree on the first entity
    let mut service = project.annotation_service().unwrap();
    let ids: Vec<String> = service.entities().iter().map(|e| e.id.clone()).collect();
    assert!(ids.len() > 10);
    for (i, id) in ids.iter().enumerate() {
        service.submit_label("annotator1", id, "PER").unwrap();
        let second = if i == 0 { "LOC" } else { "PER" };
        service.submit_label("annotator2", id, second).unwrap();
    }
    drop(service);

    let out = ok(dir.path(), &["agreement"]);
    assert!(out.contains(&format!("{} labeled by both", ids.len())), "{out}");
    assert!(dir.path().join("agreement.json").exists());

    let (code, _, err) = cli(dir.path(), &["finalize"]);
    assert_eq!(code, 1);
    assert!(err.contains(&ids[0]), "{err}");

    let listing = ok(dir.path(), &["adjudicate"]);
    assert_eq!(listing.lines().count(), 1);
    assert!(listing.starts_with(&ids[0]));
    assert!(listing.contains("annotator1=PER annotator2=LOC"), "{listing}");

    let (code, _, _) = cli(dir.path(), &["adjudicate", &ids[0], "PERSON"]);
    assert_eq!(code, 1);
    ok(dir.path(), &["adjudicate", &ids[0], "LOC"]);
    assert_eq!(ok(dir.path(), &["adjudicate"]), "");

    let out = ok(dir.path(), &["finalize"]);
    assert_eq!(out, format!("{} entities written\n", ids.len()));
    let records = project.corpus().unwrap();
    let first = records.iter().find(|r| r.id == ids[0]).unwrap();
    assert_eq!(first.final_label.map(|l| l.as_str()), Some("LOC"));

    let tsv = ok(dir.path(), &["export"]);
    assert_eq!(tsv, fs::read_to_string(dir.path().join("corpus.tsv")).unwrap());
    let out_file = dir.path().join("out.jsonl");
    ok(dir.path(), &["export", "--format", "jsonl", "--out", out_file.to_str().unwrap()]);
    assert_eq!(
        fs::read(&out_file).unwrap(),
        fs::read(dir.path().join("corpus.jsonl")).unwrap()
    );
}

#[test]
fn env_overrides_the_config_file() {
    use wikiner::project::ProjectConfig;
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["init"]);
    fs::write(dir.path().join("wikiner.toml"), "[eval]\nfolds = 3\nmodel = \"svm\"\n").unwrap();
    let vars = [
        ("WIKINER_EVAL_FOLDS".to_string(), "7".to_string()),
        ("WIKINER_SERVICE_HOST".to_string(), "0.0.0.0".to_string()),
        ("WIKINER_LOG".to_string(), "debug".to_string()),
    ];
    let cfg = ProjectConfig::load_with_env(dir.path(), vars).unwrap();
    assert_eq!(cfg.eval.folds, 7);
    assert_eq!(cfg.eval.model.as_str(), "svm");
    assert_eq!(cfg.service.host, "0.0.0.0");
    assert_eq!(cfg.service.port, 8750);

    let bad = [("WIKINER_EVAL_FOLDZ".to_string(), "7".to_string())];
    assert!(ProjectConfig::load_with_env(dir.path(), bad).is_err());
}
