//! Corpus statistics from pipeline counts and a labeled TSV corpus.
//!
//! `cargo run --example corpus_stats -- [corpus.tsv]`

use std::collections::BTreeMap;

use wikiner::corpus::{compute_stats, compute_stats_from_classes, read_corpus_file, CorpusFormat, NELabel, PipelineCounts};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let counts = PipelineCounts {
        pages: 13,
        links: 7285,
        probable: 5401,
        selected: 2916,
    };
    let stats = match std::env::args().nth(1) {
        Some(path) => compute_stats(&read_corpus_file(path.as_ref(), CorpusFormat::Tsv)?, counts)?,
        None => {
            let classes = BTreeMap::from([
                (NELabel::Per, 1883),
                (NELabel::Loc, 492),
                (NELabel::Org, 388),
                (NELabel::Misc, 153),
            ]);
            compute_stats_from_classes(classes, counts)?
        }
    };
    print!("{}", stats.render_table());
    Ok(())
}
