#![allow(dead_code)]

use std::path::{Path, PathBuf};

use wikiner::corpus::{read_corpus_file, CorpusFormat};
use wikiner::eval::LabeledItem;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn fixture_corpus() -> Vec<LabeledItem> {
    let records = read_corpus_file(&fixture("corpus.tsv"), CorpusFormat::Tsv).expect("fixture corpus");
    LabeledItem::from_records(&records)
}

/// A fresh project directory with the fixture pages imported and the
/// fixture corpus in place of an annotated one.
pub fn fixture_project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    wikiner::project::Project::init(dir.path()).unwrap();
    std::fs::copy(fixture("corpus.tsv"), dir.path().join("corpus.tsv")).unwrap();
    dir
}

/// Runs the CLI in-process; returns (exit code, stdout, stderr).
pub fn cli(project: &Path, args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["wikiner".to_string(), "-C".to_string(), project.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = wikiner::project::run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}
