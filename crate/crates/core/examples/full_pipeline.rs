// The whole staged pipeline through the command-line front end, exactly as
// a shell script would drive the binary.
//
//     cargo run --example full_pipeline

use std::error::Error;
use std::path::Path;

use corpusforge::cli;

fn stage(args: &[&str]) -> Result<(), Box<dyn Error>> {
    println!("$ corpusforge {}", args.join(" "));
    match cli::run(std::iter::once("corpusforge").chain(args.iter().copied())) {
        0 => Ok(()),
        code => Err(format!("stage exited with {code}").into()),
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus100.jsonl");
    let dir = tempfile::tempdir()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let input = corpus.to_string_lossy();

    stage(&["split", "--input", &input, "--k", "2", "--outdir", &p("splits")])?;
    stage(&["dedup", "--input", &input, "--output", &p("deduped.jsonl"), "--report", &p("dedup.json")])?;
    stage(&["train-tokenizer", "--input", &p("deduped.jsonl"), "--vocab-size", "1000", "--output", &p("tok.json")])?;
    stage(&[
        "tokenize-shard",
        "--input",
        &p("deduped.jsonl"),
        "--tokenizer",
        &p("tok.json"),
        "--context-length",
        "256",
        "--splits",
        "2",
        "--outdir",
        &p("shards"),
    ])?;
    stage(&["merge", "--indir", &p("shards"), "--manifest", &p("manifest.json")])?;
    stage(&["stats", "--manifest", &p("manifest.json"), "--label", "fixture"])?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
