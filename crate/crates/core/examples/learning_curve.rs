//! Accuracy as the training set grows, on a fixed held-out fold.
//!
//! `cargo run --release --example learning_curve -- [corpus.tsv]`

use wikiner::corpus::{read_corpus_file, CorpusFormat};
use wikiner::eval::{curve_to_csv, learning_curve, CvConfig, LabeledItem, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.tsv").to_string());
    let corpus = LabeledItem::from_records(&read_corpus_file(path.as_ref(), CorpusFormat::Tsv)?);
    let fractions = [0.1, 0.25, 0.5, 0.75, 1.0];
    let points = learning_curve(&corpus, &fractions, ModelKind::LogisticRegression, &CvConfig::default())?;
    for p in &points {
        let bar = "#".repeat((p.accuracy * 50.0).round() as usize);
        println!("{:>5.2} n={:<4} {:.4} {bar}", p.fraction, p.train_size, p.accuracy);
    }
    print!("\n{}", curve_to_csv(&points));
    Ok(())
}
