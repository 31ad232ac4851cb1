//! Stratified cross-validation of every classifier on a labeled corpus.
//!
//! `cargo run --release --example cross_validate -- [corpus.tsv]`

use wikiner::corpus::{read_corpus_file, CorpusFormat};
use wikiner::eval::{cross_validate, CvConfig, LabeledItem, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.tsv").to_string());
    let corpus = LabeledItem::from_records(&read_corpus_file(path.as_ref(), CorpusFormat::Tsv)?);
    for kind in [ModelKind::LogisticRegression, ModelKind::LinearSvm, ModelKind::SgdLog, ModelKind::NaiveBayes] {
        for include_misc in [true, false] {
            let config = CvConfig {
                include_misc,
                ..CvConfig::default()
            };
            let report = cross_validate(&corpus, kind, &config)?;
            println!("{}", report.render_table());
        }
    }
    Ok(())
}
