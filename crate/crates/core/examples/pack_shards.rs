// Split, tokenize, pack, and shard a corpus, then read it back through the
// manifest with digest verification and a seeded shuffle.
//
//     cargo run --example pack_shards

use std::error::Error;
use std::fs;
use std::path::Path;

use corpusforge::corpus_io::{read_jsonl, split_jsonl_into};
use corpusforge::shardstore::{convert_splits, merge_manifests, open_dataset, shuffled_order, ShardError};
use corpusforge::tokenizer::train_bpe;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus100.jsonl");
    let tokenizer = train_bpe(&read_jsonl(&corpus)?, 600)?;
    let dir = tempfile::tempdir()?;

    let splits = split_jsonl_into(&corpus, 3, dir.path())?;
    let conversions = convert_splits(&splits, &tokenizer, 256, dir.path(), 0)?;
    for c in &conversions {
        println!(
            "{}: {} docs, {} tokens -> {} samples, {} tail tokens dropped",
            c.split, c.docs, c.tokens, c.meta.num_samples, c.dropped_tail
        );
    }
    let manifest_path = dir.path().join("manifest.json");
    let manifest = merge_manifests(conversions.into_iter().map(|c| c.meta).collect(), &manifest_path)?;
    println!("manifest: {} samples of {} tokens", manifest.total_samples, manifest.context_length);

    let reader = open_dataset(&manifest_path)?;
    let order = shuffled_order(reader.len(), 42);
    let first = reader.read_sample(order[0])?;
    println!("sample {} starts {:?}", order[0], &first[..8]);

    // Corrupt one payload byte: the next fresh reader refuses the shard.
    let shard = dir.path().join(&manifest.shards[0].path);
    let mut bytes = fs::read(&shard)?;
    let last = bytes.len() - 1;
    bytes[last] ^= 0x01;
    fs::write(&shard, bytes)?;
    match open_dataset(&manifest_path)?.read_sample(0) {
        Err(ShardError::Integrity { shard, .. }) => println!("corruption in {shard} detected"),
        other => return Err(format!("corruption went unnoticed: {other:?}").into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
