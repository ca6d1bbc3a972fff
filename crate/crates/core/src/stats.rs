//! Per-source token distribution tables.
//!
//! Token counts come from manifests (`total_samples * context_length`), i.e.
//! what training would actually consume. Tokens lost to dropped tails are
//! reported alongside but never counted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::SourceManifest;
use crate::shardstore::ShardManifest;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no sources given")]
    EmptyInput,
    #[error("source {0} has a negative or non-finite token count")]
    BadCount(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub source: String,
    pub tokens: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenDistribution {
    pub rows: Vec<DistributionRow>,
    pub total_tokens: f64,
    /// Tail tokens dropped during packing, per source.
    pub dropped_tail: BTreeMap<String, u64>,
}

impl TokenDistribution {
    /// Build from raw per-source counts in any unit. Duplicate labels are summed.
    pub fn from_counts<S: AsRef<str>>(counts: &[(S, f64)]) -> Result<Self, StatsError> {
        if counts.is_empty() {
            return Err(StatsError::EmptyInput);
        }
        let mut by_source: BTreeMap<String, f64> = BTreeMap::new();
        for (label, c) in counts {
            if !c.is_finite() || *c < 0.0 {
                return Err(StatsError::BadCount(label.as_ref().to_owned()));
            }
            *by_source.entry(label.as_ref().to_owned()).or_default() += c;
        }
        let total: f64 = by_source.values().sum();
        let mut rows: Vec<DistributionRow> = by_source
            .into_iter()
            .map(|(source, tokens)| DistributionRow {
                fraction: if total > 0.0 { tokens / total } else { 0.0 },
                source,
                tokens,
            })
            .collect();
        rows.sort_by(|a, b| b.tokens.total_cmp(&a.tokens).then_with(|| a.source.cmp(&b.source)));
        Ok(Self {
            rows,
            total_tokens: total,
            dropped_tail: BTreeMap::new(),
        })
    }

    pub fn from_source_manifest(m: &SourceManifest) -> Result<Self, StatsError> {
        Self::from_counts(&m.entries)
    }

    pub fn fraction_sum(&self) -> f64 {
        self.rows.iter().map(|r| r.fraction).sum()
    }

    pub fn total_dropped(&self) -> u64 {
        self.dropped_tail.values().sum()
    }

    /// Aligned plain-text table with a dropped-tail footnote.
    pub fn render_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.source.chars().count())
            .chain(["source".len(), "total".len()])
            .max()
            .unwrap_or(6);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>16}  {:>9}", "source", "tokens", "fraction");
        let _ = writeln!(out, "{}", "-".repeat(width + 29));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>16}  {:>8.4}%",
                r.source,
                format_count(r.tokens),
                r.fraction * 100.0
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(width + 29));
        let _ = writeln!(
            out,
            "{:<width$}  {:>16}  {:>8.4}%",
            "total",
            format_count(self.total_tokens),
            self.fraction_sum() * 100.0
        );
        if !self.dropped_tail.is_empty() {
            let _ = writeln!(
                out,
                "* {} tail tokens dropped during packing (not counted above)",
                self.total_dropped()
            );
        }
        out
    }
}

fn format_count(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

/// Token distribution over labelled manifests.
pub fn token_stats(
    manifests: &[(String, ShardManifest)],
    dropped: &BTreeMap<String, u64>,
) -> Result<TokenDistribution, StatsError> {
    let counts: Vec<(&str, f64)> = manifests
        .iter()
        .map(|(label, m)| (label.as_str(), m.total_tokens() as f64))
        .collect();
    let mut dist = TokenDistribution::from_counts(&counts)?;
    dist.dropped_tail = dropped.clone();
    Ok(dist)
}
