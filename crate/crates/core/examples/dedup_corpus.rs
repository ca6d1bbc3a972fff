// Near-duplicate removal on the bundled 100-document corpus.
//
//     cargo run --example dedup_corpus

use std::error::Error;
use std::path::Path;

use corpusforge::corpus_io::read_jsonl;
use corpusforge::dedup::{dedup_corpus, DedupConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus100.jsonl");
    let docs = read_jsonl(&corpus)?;

    let cfg = DedupConfig::default();
    let (kept, report) = dedup_corpus(&docs, &cfg)?;
    println!(
        "{} documents in, {} kept ({} bands x {} rows, threshold {})",
        report.docs_in, report.docs_kept, report.bands, report.rows, cfg.threshold
    );
    for c in &report.clusters {
        println!("  keep {:>3}, drop {:?}", c.kept, c.removed);
    }
    assert_eq!(kept.len() + report.removed_count(), docs.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
