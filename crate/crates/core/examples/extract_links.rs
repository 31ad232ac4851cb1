//! Extracts article links from a wikitext snippet, or from a file given as
//! `cargo run --example extract_links -- PATH [wikitext|html]`.

use wikiner::ingest::{extract_links, ContentKind, RawPage};

const SAMPLE: &str = "\
'''Politicians''' from [[Uttar Pradesh]] who sat in the [[Lok Sabha]].
* [[Akhilesh Yadav|Akhilesh]] {{small|(born 1973)}}
* [[Mayawati]] <!-- [[Not a link]] -->
[[Category:Politicians from Uttar Pradesh]]
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let page = match args.next() {
        Some(path) => {
            let kind = match args.next().as_deref() {
                Some("html") => ContentKind::Html,
                _ if path.ends_with(".html") => ContentKind::Html,
                _ => ContentKind::Wikitext,
            };
            let title = std::path::Path::new(&path)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("Page")
                .to_string();
            RawPage::new(&title, kind, std::fs::read_to_string(&path)?)?
        }
        None => RawPage::new("Category:Politicians from Uttar Pradesh", ContentKind::Wikitext, SAMPLE)?,
    };
    let ex = extract_links(&page);
    for link in &ex.links {
        println!("{:>3}  {:<30} -> {}", link.position_index, link.anchor_text, link.target_title);
    }
    println!("{} links, {} warnings", ex.links.len(), ex.warnings);
    Ok(())
}
