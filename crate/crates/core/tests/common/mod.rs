#![allow(dead_code)]

use std::collections::BTreeSet;

use corpusforge::corpus_io::Document;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_word(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let len = rng.gen_range(min..=max);
    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

pub fn vocabulary(rng: &mut impl Rng, n: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        seen.insert(random_word(rng, 4, 10));
    }
    let mut v: Vec<String> = seen.into_iter().collect();
    v.shuffle(rng);
    v
}

pub fn random_text(rng: &mut impl Rng, vocab: &[String], words: usize) -> Vec<String> {
    (0..words).map(|_| vocab[rng.gen_range(0..vocab.len())].clone()).collect()
}

/// Exact Jaccard of two explicit sets.
pub fn exact_jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Two sets of fresh random elements with prescribed overlap; returns the
/// sets and their exact Jaccard computed by counting.
pub fn set_pair(rng: &mut impl Rng, only_a: usize, only_b: usize, shared: usize) -> (BTreeSet<u64>, BTreeSet<u64>) {
    let mut pool = BTreeSet::new();
    while pool.len() < only_a + only_b + shared {
        pool.insert(rng.gen::<u64>());
    }
    let mut items: Vec<u64> = pool.into_iter().collect();
    items.shuffle(rng);
    let (s, rest) = items.split_at(shared);
    let (a_only, b_only) = rest.split_at(only_a);
    let a = s.iter().chain(a_only).copied().collect();
    let b = s.iter().chain(b_only).copied().collect();
    (a, b)
}

/// Planted dedup fixture.
pub struct DedupFixture {
    pub docs: Vec<Document>,
    /// (original id, exact copy id)
    pub exact_pairs: Vec<(u64, u64)>,
    /// (original id, near copy id), one word changed at the end
    pub near_pairs: Vec<(u64, u64)>,
    /// (original id, half-overlap id)
    pub partial_pairs: Vec<(u64, u64)>,
}

/// 460 unique documents, 10 half-overlap variants, 20 exact copies, and 10
/// near copies: 500 documents in total, ids shuffled through the file.
pub fn dedup_fixture(seed: u64) -> DedupFixture {
    let mut r = rng(seed);
    let vocab = vocabulary(&mut r, 8000);
    let base: Vec<Vec<String>> = (0..460).map(|_| random_text(&mut r, &vocab, 300)).collect();

    let mut texts: Vec<String> = base.iter().map(|w| w.join(" ")).collect();
    let mut exact = Vec::new();
    let mut near = Vec::new();
    let mut partial = Vec::new();
    for i in 0..10 {
        let mut w = base[i][..150].to_vec();
        w.extend(random_text(&mut r, &vocab, 150));
        partial.push((i, texts.len()));
        texts.push(w.join(" "));
    }
    for i in 0..20 {
        let src = 100 + i;
        exact.push((src, texts.len()));
        texts.push(texts[src].clone());
    }
    for i in 0..10 {
        let src = 200 + i;
        let mut w = base[src].clone();
        let last = w.len() - 1;
        w[last] = format!("{}zz", w[last]);
        near.push((src, texts.len()));
        texts.push(w.join(" "));
    }
    assert_eq!(texts.len(), 500);

    // Scatter: document at position p gets id ids[p].
    let mut ids: Vec<u64> = (0..500).collect();
    ids.shuffle(&mut r);
    let docs = texts
        .into_iter()
        .enumerate()
        .map(|(p, t)| Document::new(ids[p], t))
        .collect();
    let map = |pairs: Vec<(usize, usize)>| pairs.into_iter().map(|(a, b)| (ids[a], ids[b])).collect();
    DedupFixture {
        docs,
        exact_pairs: map(exact),
        near_pairs: map(near),
        partial_pairs: map(partial),
    }
}

/// Text generator mixing ASCII, newlines, Arabic-script and Tamil-script
/// words, used for tokenizer training and fuzzing.
pub fn multiscript_corpus(seed: u64, docs: usize, words_per_doc: usize) -> Vec<Document> {
    let mut r = rng(seed);
    let latin = vocabulary(&mut r, 300);
    let arabic: Vec<String> = (0..80)
        .map(|_| (0..r.gen_range(2..7)).map(|_| char::from_u32(r.gen_range(0x0627..=0x064A)).unwrap()).collect())
        .collect();
    let tamil: Vec<String> = (0..80)
        .map(|_| (0..r.gen_range(2..7)).map(|_| char::from_u32(r.gen_range(0x0B85..=0x0BB9)).unwrap()).collect())
        .collect();
    (0..docs)
        .map(|i| {
            let mut s = String::new();
            for w in 0..words_per_doc {
                if w > 0 {
                    s.push(if r.gen_bool(0.1) { '\n' } else { ' ' });
                }
                let pool = match r.gen_range(0..10) {
                    0..=5 => &latin,
                    6 | 7 => &arabic,
                    _ => &tamil,
                };
                s.push_str(&pool[r.gen_range(0..pool.len())]);
            }
            Document::new(i as u64, s)
        })
        .collect()
}

/// Random valid UTF-8 string biased toward newlines, NUL, Arabic and Tamil.
pub fn fuzz_string(r: &mut impl Rng, max_chars: usize) -> String {
    let n = r.gen_range(0..=max_chars);
    (0..n)
        .map(|_| match r.gen_range(0..10) {
            0 => '\n',
            1 => '\0',
            2 => ' ',
            3 | 4 => char::from_u32(r.gen_range(0x0600..=0x06FF)).unwrap(),
            5 | 6 => char::from_u32(r.gen_range(0x0B80..=0x0BFF)).unwrap_or('\u{0B85}'),
            7 => r.gen_range(b'a'..=b'z') as char,
            _ => loop {
                if let Some(c) = char::from_u32(r.gen_range(0..=0x10FFFF)) {
                    break c;
                }
            },
        })
        .collect()
}

/// Loss stream of constant 2.0 with 10x spikes at the given positions.
pub fn spike_stream(len: usize, spikes: &[usize]) -> Vec<f64> {
    (0..len).map(|i| if spikes.contains(&i) { 20.0 } else { 2.0 }).collect()
}

/// A run of consecutive trace rows: steps `first_step..first_step + rows`
/// at a fixed multiplier, all NONE except possibly the last.
pub struct Segment {
    pub first_step: u64,
    pub rows: u64,
    pub multiplier: f64,
    pub last_action: corpusforge::run_controller::Action,
}

/// Expand hand-written segments into the trace they describe.
pub fn expand_segments(
    schedule: &corpusforge::run_controller::LrSchedule,
    segments: &[Segment],
    losses: &[f64],
) -> Vec<corpusforge::run_controller::TraceRow> {
    use corpusforge::run_controller::{Action, TraceRow};
    let mut out = Vec::new();
    for seg in segments {
        for i in 0..seg.rows {
            let step = seg.first_step + i;
            out.push(TraceRow {
                step,
                effective_lr: schedule.lr_at(step).unwrap() * seg.multiplier,
                loss: losses[out.len()],
                action: if i + 1 == seg.rows { seg.last_action } else { Action::None },
            });
        }
    }
    out
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Run the CLI in-process and assert its exit code.
pub fn cli(args: &[&str], expect: i32) {
    let argv = std::iter::once("corpusforge").chain(args.iter().copied());
    assert_eq!(corpusforge::cli::run(argv), expect, "corpusforge {}", args.join(" "));
}

/// Every file the staged pipeline writes under `root`.
pub struct PipelineOutputs {
    pub deduped: std::path::PathBuf,
    pub dedup_report: std::path::PathBuf,
    pub tokenizer: std::path::PathBuf,
    pub shard_dir: std::path::PathBuf,
    pub manifest: std::path::PathBuf,
    pub stats_json: std::path::PathBuf,
}

/// split -> dedup -> train-tokenizer -> tokenize-shard -> merge -> stats on
/// the 100-document fixture, with small desk-scale sizes.
pub fn run_pipeline(root: &std::path::Path, workers: usize) -> PipelineOutputs {
    let p = |name: &str| root.join(name);
    let s = |path: &std::path::Path| path.to_str().unwrap().to_owned();
    let input = p("corpus.jsonl");
    std::fs::copy(fixture_path("corpus100.jsonl"), &input).unwrap();
    let workers = workers.to_string();
    let out = PipelineOutputs {
        deduped: p("deduped.jsonl"),
        dedup_report: p("dedup_report.json"),
        tokenizer: p("tokenizer.json"),
        shard_dir: p("shards"),
        manifest: p("manifest.json"),
        stats_json: p("stats.json"),
    };
    cli(&["--workers", &workers, "split", "--input", &s(&input), "--k", "4", "--outdir", &s(&p("splits"))], 0);
    cli(
        &["--workers", &workers, "dedup", "--input", &s(&input), "--output", &s(&out.deduped), "--report", &s(&out.dedup_report)],
        0,
    );
    cli(
        &["--workers", &workers, "train-tokenizer", "--input", &s(&out.deduped), "--vocab-size", "1000", "--output", &s(&out.tokenizer)],
        0,
    );
    cli(
        &[
            "--workers", &workers, "tokenize-shard", "--input", &s(&out.deduped), "--tokenizer", &s(&out.tokenizer),
            "--context-length", "128", "--splits", "3", "--outdir", &s(&out.shard_dir),
        ],
        0,
    );
    cli(&["merge", "--indir", &s(&out.shard_dir), "--manifest", &s(&out.manifest)], 0);
    cli(&["stats", "--manifest", &s(&out.manifest), "--json", &s(&out.stats_json)], 0);
    out
}

/// Textbook BPE: recount every pair from scratch each round and merge the
/// winner everywhere. Slow, but obviously correct.
pub fn reference_merges(corpus: &[Document], max_merges: usize) -> Vec<(u32, u32)> {
    let mut words: std::collections::BTreeMap<Vec<u8>, i64> = Default::default();
    for d in corpus {
        for p in corpusforge::tokenizer::pretokenize(&d.text) {
            *words.entry(p.as_bytes().to_vec()).or_default() += 1;
        }
    }
    let mut bytes: Vec<Vec<u8>> = (0..4).map(|_| Vec::new()).chain((0..=255u8).map(|b| vec![b])).collect();
    let mut segs: Vec<(Vec<u32>, i64)> =
        words.into_iter().map(|(w, c)| (w.iter().map(|&b| b as u32 + 4).collect(), c)).collect();
    let mut merges = Vec::new();
    while merges.len() < max_merges {
        let mut counts: std::collections::BTreeMap<(u32, u32), i64> = Default::default();
        for (s, c) in &segs {
            for w in s.windows(2) {
                *counts.entry((w[0], w[1])).or_default() += c;
            }
        }
        let best = counts
            .iter()
            .filter(|(_, &c)| c >= 2)
            .min_by(|(pa, ca), (pb, cb)| {
                cb.cmp(ca)
                    .then_with(|| bytes[pa.0 as usize].cmp(&bytes[pb.0 as usize]))
                    .then_with(|| bytes[pa.1 as usize].cmp(&bytes[pb.1 as usize]))
                    .then_with(|| pa.cmp(pb))
            })
            .map(|(p, _)| *p);
        let Some(pair) = best else { break };
        let id = corpusforge::tokenizer::FIRST_MERGE_ID + merges.len() as u32;
        let mut joined = bytes[pair.0 as usize].clone();
        joined.extend_from_slice(&bytes[pair.1 as usize]);
        bytes.push(joined);
        for (s, _) in segs.iter_mut() {
            let mut out = Vec::with_capacity(s.len());
            let mut i = 0;
            while i < s.len() {
                if i + 1 < s.len() && (s[i], s[i + 1]) == pair {
                    out.push(id);
                    i += 2;
                } else {
                    out.push(s[i]);
                    i += 1;
                }
            }
            *s = out;
        }
        merges.push(pair);
    }
    merges
}

/// A few short documents over a tiny alphabet, at most 1 KB in total.
pub fn small_bpe_corpus(seed: u64) -> Vec<Document> {
    let mut r = rng(seed);
    let alphabet = ["a", "b", "c", "ab", " ", "\n", "ش", "த"];
    (0..r.gen_range(1..6))
        .map(|i| {
            let mut s = String::new();
            while s.len() < r.gen_range(1..200) {
                s.push_str(alphabet[r.gen_range(0..alphabet.len())]);
            }
            Document::new(i, s)
        })
        .collect()
}

