use std::collections::BTreeMap;

use corpusforge::corpus_io::SourceManifest;
use corpusforge::shardstore::{ShardManifest, ShardMeta};
use corpusforge::stats::{token_stats, StatsError, TokenDistribution};

const TABLE: [(&str, f64); 5] = [
    ("deduped text", 31.7),
    ("filtered starcoder", 40.98),
    ("madlad 400", 14.98),
    ("instructions", 1.58),
    ("journals and papers", 1.14),
];

fn manifest(samples: u64, ctx: u32) -> ShardManifest {
    ShardManifest::from_metas(vec![ShardMeta {
        path: "s.mlsd".into(),
        num_samples: samples,
        payload_bytes: samples * ctx as u64 * 2,
        digest_hex: "00".into(),
        context_length: ctx,
        token_width: 2,
    }])
    .unwrap()
}

#[test]
fn table_counts_total_ninety_billion() {
    let d = TokenDistribution::from_counts(&TABLE).unwrap();
    assert!((d.total_tokens - 90.38).abs() < 1e-9);
    assert!((d.fraction_sum() - 1.0).abs() < 1e-9);
    assert_eq!(d.total_tokens.round(), 90.0);
    let code = d.rows.iter().find(|r| r.source == "filtered starcoder").unwrap();
    assert!((code.fraction - 40.98 / 90.38).abs() < 1e-12);
    assert!((code.fraction - 0.4534).abs() < 5e-5);
    let order: Vec<&str> = d.rows.iter().map(|r| r.source.as_str()).collect();
    assert_eq!(
        order,
        ["filtered starcoder", "deduped text", "madlad 400", "instructions", "journals and papers"]
    );
}

#[test]
fn manifests_scaled_to_desk_units() {
    // 1 unit = 1e-6 B tokens; two-token contexts keep the sample counts exact
    let samples = [15_850u64, 20_490, 7_490, 790, 570];
    let labelled: Vec<(String, ShardManifest)> = TABLE
        .iter()
        .zip(samples)
        .map(|((label, _), n)| (label.to_string(), manifest(n, 2)))
        .collect();
    let mut dropped = BTreeMap::new();
    dropped.insert("instructions".to_string(), 1u64);
    let d = token_stats(&labelled, &dropped).unwrap();
    assert_eq!(d.total_tokens, 90_380.0);
    for ((label, billions), row) in TABLE.iter().zip(samples).map(|(t, n)| (t, n * 2)) {
        let r = d.rows.iter().find(|r| &r.source == label).unwrap();
        assert_eq!(r.tokens, row as f64);
        assert!((r.tokens / 1000.0 - billions).abs() < 1e-9);
    }
    assert!((d.fraction_sum() - 1.0).abs() < 1e-9);
    assert_eq!(d.total_dropped(), 1);
    let table = d.render_table();
    assert!(table.contains("90380"));
    assert!(table.contains("1 tail tokens dropped"));
}

#[test]
fn source_manifest_route() {
    let m = SourceManifest::new(TABLE.iter().map(|(l, c)| (l.to_string(), *c)).collect());
    assert!(m.is_consistent());
    let d = TokenDistribution::from_source_manifest(&m).unwrap();
    assert!((d.total_tokens - 90.38).abs() < 1e-9);
}

#[test]
fn output_is_stable_and_validated() {
    let a = TokenDistribution::from_counts(&TABLE).unwrap();
    let b = TokenDistribution::from_counts(&TABLE).unwrap();
    assert_eq!(a.render_table(), b.render_table());
    assert_eq!(token_stats(&[], &BTreeMap::new()).unwrap_err(), StatsError::EmptyInput);
    assert!(TokenDistribution::from_counts(&[("x", f64::NAN)]).is_err());
    let single = token_stats(&[("only".into(), manifest(3, 4))], &BTreeMap::new()).unwrap();
    assert_eq!(single.rows[0].fraction, 1.0);
    assert_eq!(single.total_tokens, 12.0);
}
