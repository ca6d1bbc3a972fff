// Cross-entropy of tokenized text under a uniform and a unigram model.
//
//     cargo run --example cross_entropy

use std::error::Error;
use std::path::Path;

use corpusforge::corpus_io::read_jsonl;
use corpusforge::run_controller::{corpus_cross_entropy, TokenSequence, UniformModel, UnigramModel};
use corpusforge::tokenizer::train_bpe;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus100.jsonl");
    let docs = read_jsonl(&corpus)?;
    let tokenizer = train_bpe(&docs, 500)?;
    let vocab = tokenizer.vocab_size();

    let seqs = docs
        .iter()
        .map(|d| TokenSequence::new(tokenizer.encode(&d.text), vocab))
        .filter(|s| s.is_ok())
        .collect::<Result<Vec<_>, _>>()?;

    let mut counts = vec![0u64; vocab];
    for s in &seqs {
        for &id in s.ids() {
            counts[id as usize] += 1;
        }
    }
    // add-one smoothing keeps every probability positive
    counts.iter_mut().for_each(|c| *c += 1);

    let uniform = corpus_cross_entropy(&UniformModel { vocab_size: vocab }, &seqs)?;
    let unigram = corpus_cross_entropy(&UnigramModel::from_counts(&counts), &seqs)?;
    println!("uniform: {:.4} nats/token, perplexity {:.1}", uniform.nats_per_token, uniform.perplexity);
    println!("unigram: {:.4} nats/token, perplexity {:.1}", unigram.nats_per_token, unigram.perplexity);
    assert!(unigram.nats_per_token < uniform.nats_per_token);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
