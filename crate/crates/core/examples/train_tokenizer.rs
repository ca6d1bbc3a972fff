// Train a byte-level BPE tokenizer and measure it against raw bytes.
//
//     cargo run --example train_tokenizer

use std::error::Error;
use std::path::Path;

use corpusforge::corpus_io::read_jsonl;
use corpusforge::tokenizer::{compare_tokenizers, train_bpe, TokenizerModel};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus100.jsonl");
    let docs = read_jsonl(&corpus)?;

    let model = train_bpe(&docs, 800)?;
    println!("vocab size {} ({} merges)", model.vocab_size(), model.merges().len());

    for text in ["kerajaan negeri pulau pinang", "வணக்கம் உலகம்", "def add(a, b):\n    return a + b"] {
        let ids = model.encode(text);
        let pieces: Vec<String> = ids
            .iter()
            .map(|&id| String::from_utf8_lossy(model.token_bytes(id).unwrap_or_default()).into_owned())
            .collect();
        println!("{:>3} tokens  {:?}", ids.len(), pieces);
        assert_eq!(model.decode(&ids)?, text);
    }

    let report = compare_tokenizers(&model, &TokenizerModel::byte_level(), &docs)?;
    println!(
        "{} tokens vs {} bytes: {:.1}% fewer",
        report.tokens_a,
        report.tokens_b,
        report.reduction * 100.0
    );

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("tokenizer.json");
    model.save(&path)?;
    assert_eq!(TokenizerModel::load(&path)?, model);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
