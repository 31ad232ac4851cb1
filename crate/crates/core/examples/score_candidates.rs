//! Tags and scores a handful of anchor texts under each aggregation.

use wikiner::candidates::{dedup, score_candidates, Aggregation, HeuristicTagger, ScoringConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let anchors = [
        "Akhilesh Yadav",
        "Bharatiya Janata Party",
        "Lok Sabha",
        "Lok Sabha",
        "list of rivers",
        "2014 general election",
        "U.P. cabinet",
    ];
    let surfaces = dedup(&anchors);
    let tagger = HeuristicTagger::default();
    for agg in [Aggregation::Any, Aggregation::All, Aggregation::First] {
        let config = ScoringConfig {
            pos_agg: agg,
            wt_agg: agg,
        };
        println!("pos/wordtype aggregation: {agg:?}");
        for c in score_candidates(&surfaces, &tagger, config)? {
            let tags: Vec<&str> = c.tags().iter().map(|t| t.as_str()).collect();
            println!(
                "  {:<26} x{}  {:<16} {:<20} pos={} wt={} {}",
                c.surface,
                c.occurrence_count,
                tags.join(" "),
                c.wordtypes.join(" "),
                c.pos_score,
                c.wordtype_score,
                if c.selected { "selected" } else { "dropped" }
            );
        }
    }
    Ok(())
}
