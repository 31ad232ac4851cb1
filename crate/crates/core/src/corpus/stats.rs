use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CorpusError, EntityRecord, NELabel};

/// Stage sizes from the extraction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineCounts {
    pub pages: usize,
    pub links: usize,
    pub probable: usize,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pages_accessed: usize,
    pub links_extracted: usize,
    pub probable_after_dedup: usize,
    pub selected: usize,
    /// Percentage of extracted links that became selected entities, two
    /// decimals.
    pub ne_density: f64,
    pub class_counts: BTreeMap<NELabel, usize>,
    /// Full precision; see [`CorpusStats::display_percentages`].
    pub class_percentages: BTreeMap<NELabel, f64>,
}

impl CorpusStats {
    /// Class percentages rounded to whole numbers for tables.
    pub fn display_percentages(&self) -> BTreeMap<NELabel, u32> {
        self.class_percentages
            .iter()
            .map(|(&l, &p)| (l, p.round() as u32))
            .collect()
    }

    pub fn labeled_total(&self) -> usize {
        self.class_counts.values().sum()
    }

    /// Two small tables: stage counts and the label distribution.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{:<40}{:>10}\n", "category pages accessed", self.pages_accessed));
        s.push_str(&format!("{:<40}{:>10}\n", "link expressions extracted", self.links_extracted));
        s.push_str(&format!("{:<40}{:>10}\n", "probable NEs after dedup", self.probable_after_dedup));
        s.push_str(&format!("{:<40}{:>10}\n", "selected NEs", self.selected));
        s.push_str(&format!("{:<40}{:>9.2}%\n", "NE density", self.ne_density));
        if !self.class_counts.is_empty() {
            s.push_str(&format!("\n{:<8}{:>6}{:>10}\n", "label", "%", "entities"));
            let pct = self.display_percentages();
            for (label, count) in &self.class_counts {
                s.push_str(&format!("{:<8}{:>6}{:>10}\n", label.as_str(), pct[label], count));
            }
            s.push_str(&format!("{:<8}{:>6}{:>10}\n", "Overall", 100, self.labeled_total()));
        }
        s
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Class distribution from records carrying a final label.
pub fn class_counts(records: &[EntityRecord]) -> BTreeMap<NELabel, usize> {
    let mut counts = BTreeMap::new();
    for label in records.iter().filter_map(|r| r.final_label) {
        *counts.entry(label).or_insert(0) += 1;
    }
    counts
}

pub fn compute_stats(
    records: &[EntityRecord],
    counts: PipelineCounts,
) -> Result<CorpusStats, CorpusError> {
    compute_stats_from_classes(class_counts(records), counts)
}

/// Same as [`compute_stats`] when only the class table is at hand.
pub fn compute_stats_from_classes(
    class_counts: BTreeMap<NELabel, usize>,
    counts: PipelineCounts,
) -> Result<CorpusStats, CorpusError> {
    if !(counts.links >= counts.probable && counts.probable >= counts.selected) {
        return Err(CorpusError::InconsistentCounts {
            links: counts.links,
            probable: counts.probable,
            selected: counts.selected,
        });
    }
    let ne_density = if counts.links == 0 {
        0.0
    } else {
        round2(counts.selected as f64 / counts.links as f64 * 100.0)
    };
    let total: usize = class_counts.values().sum();
    let class_percentages = class_counts
        .iter()
        .map(|(&l, &c)| (l, c as f64 / total as f64 * 100.0))
        .collect();
    Ok(CorpusStats {
        pages_accessed: counts.pages,
        links_extracted: counts.links,
        probable_after_dedup: counts.probable,
        selected: counts.selected,
        ne_density,
        class_counts,
        class_percentages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pages: usize, links: usize, probable: usize, selected: usize) -> PipelineCounts {
        PipelineCounts {
            pages,
            links,
            probable,
            selected,
        }
    }

    #[test]
    fn table_one_density() {
        let s = compute_stats(&[], counts(13, 7285, 5401, 2916)).unwrap();
        assert_eq!(s.ne_density, 40.03);
        assert!((s.ne_density - 40.02).abs() <= 0.02 + 1e-9);
    }

    #[test]
    fn table_two_distribution() {
        let mut records = Vec::new();
        for (label, n) in [
            (NELabel::Per, 1883),
            (NELabel::Loc, 492),
            (NELabel::Org, 388),
            (NELabel::Misc, 153),
        ] {
            for i in 0..n {
                records.push(EntityRecord::labeled(&format!("{label}{i}"), label));
            }
        }
        let s = compute_stats(&records, counts(13, 7285, 5401, 2916)).unwrap();
        assert_eq!(s.labeled_total(), 2916);
        let pct: Vec<u32> = s.display_percentages().into_values().collect();
        assert_eq!(pct, [65, 17, 13, 5]);
    }

    #[test]
    fn zero_case() {
        let s = compute_stats(&[], counts(0, 0, 0, 0)).unwrap();
        assert_eq!(s.ne_density, 0.0);
        assert!(s.class_counts.is_empty());
        assert!(s.class_percentages.is_empty());
    }

    #[test]
    fn monotonicity_enforced() {
        assert!(matches!(
            compute_stats(&[], counts(1, 10, 20, 5)),
            Err(CorpusError::InconsistentCounts { .. })
        ));
        assert!(compute_stats(&[], counts(1, 10, 5, 6)).is_err());
    }

    #[test]
    fn unlabeled_records_not_counted() {
        let records = vec![EntityRecord::labeled("A", NELabel::Loc), EntityRecord::new("B")];
        let s = compute_stats(&records, counts(1, 2, 2, 2)).unwrap();
        assert_eq!(s.labeled_total(), 1);
        assert_eq!(s.class_percentages[&NELabel::Loc], 100.0);
    }
}
