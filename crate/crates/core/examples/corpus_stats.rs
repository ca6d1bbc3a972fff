// Per-source token distribution, using billions-of-tokens counts for a
// Malaysian pretraining mix.
//
//     cargo run --example corpus_stats

use std::error::Error;

use corpusforge::stats::TokenDistribution;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let counts = [
        ("deduped text", 31.7),
        ("filtered starcoder", 40.98),
        ("madlad 400", 14.98),
        ("instructions", 1.58),
        ("journals and papers", 1.14),
    ];
    let dist = TokenDistribution::from_counts(&counts)?;
    print!("{}", dist.render_table());
    println!("~{:.0}B tokens", dist.total_tokens);
    assert!((dist.fraction_sum() - 1.0).abs() < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
