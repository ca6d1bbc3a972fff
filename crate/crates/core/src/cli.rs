//! Subcommand front end. `run` is what the binary calls; it never exits the
//! process itself so it can be driven from tests.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
//! stderr; data goes to the declared output files or stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::corpus_io::{read_jsonl, read_jsonl_lenient, split_jsonl_into, write_jsonl, Document};
use crate::dedup::dedup_corpus_with_workers;
use crate::run_controller::{simulate_run, Action, ControllerConfig, LrSchedule};
use crate::shardstore::{convert_splits, merge_manifests, shard_meta_from_file, ShardManifest, SHARD_EXTENSION};
use crate::stats::token_stats;
use crate::tokenizer::{compare_tokenizers, train_bpe_with_workers, TokenizerModel};

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (shard format 1, manifest 1, tokenizer model 1)"
);

#[derive(Debug, Parser)]
#[command(name = "corpusforge", version = VERSION, about = "Pretraining corpus pipeline stages")]
struct Cli {
    /// Pipeline config JSON keyed by stage; explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split a JSONL file into k contiguous parts.
    Split(SplitArgs),
    /// Remove near-duplicate documents.
    Dedup(DedupArgs),
    /// Train a byte-level BPE tokenizer.
    TrainTokenizer(TrainArgs),
    /// Compare token counts of two tokenizers on a corpus.
    Compare(CompareArgs),
    /// Split, tokenize, pack, and write shards.
    TokenizeShard(TokenizeShardArgs),
    /// Build a manifest over the shards in a directory.
    Merge(MergeArgs),
    /// Token distribution table from manifests.
    Stats(StatsArgs),
    /// Emit the learning-rate schedule.
    Schedule(ScheduleArgs),
    /// Replay a loss stream through the spike-rollback controller.
    SimulateRun(SimulateArgs),
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, short = 'k', alias = "splits")]
    k: usize,
    /// Defaults to the input's directory.
    #[arg(long)]
    outdir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DedupArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    num_perm: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shingle_n: Option<usize>,
    #[arg(long)]
    hash_bits: Option<u32>,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    skip_bad: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    skip_bad: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    tokenizer_a: PathBuf,
    #[arg(long)]
    tokenizer_b: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Debug, Args)]
struct TokenizeShardArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    tokenizer: PathBuf,
    #[arg(long)]
    context_length: Option<usize>,
    #[arg(long)]
    splits: Option<usize>,
    #[arg(long)]
    outdir: PathBuf,
}

#[derive(Debug, Args)]
struct MergeArgs {
    #[arg(long)]
    indir: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long, conflicts_with = "per_source", required_unless_present = "per_source")]
    manifest: Option<PathBuf>,
    /// Label for --manifest.
    #[arg(long, default_value = "corpus")]
    label: String,
    /// Tail tokens dropped while packing --manifest.
    #[arg(long, default_value_t = 0)]
    dropped_tail: u64,
    /// JSON map of label to manifest path, or to {"manifest": path, "dropped_tail": n}.
    #[arg(long)]
    per_source: Option<PathBuf>,
    /// Also write the table as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Emit {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[arg(long)]
    peak: Option<f64>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    total: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Loss CSV: one loss per row (last column), optional header.
    #[arg(long)]
    losses: PathBuf,
    #[arg(long)]
    checkpoint_interval: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    stable: Option<usize>,
    #[arg(long)]
    peak: Option<f64>,
    #[arg(long)]
    warmup: Option<u64>,
    /// Defaults to the longer of the loss stream and warmup + 1.
    #[arg(long)]
    total: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse `argv` (including the program name) and run one subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(CliError::Usage)?,
        None => PipelineConfig::default(),
    };
    let workers = cli.workers;
    match cli.command {
        Command::Split(a) => cmd_split(a),
        Command::Dedup(a) => cmd_dedup(a, &config, workers),
        Command::TrainTokenizer(a) => cmd_train(a, &config, workers),
        Command::Compare(a) => cmd_compare(a),
        Command::TokenizeShard(a) => cmd_tokenize_shard(a, &config, workers),
        Command::Merge(a) => cmd_merge(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Schedule(a) => cmd_schedule(a, &config),
        Command::SimulateRun(a) => cmd_simulate(a, &config),
    }
}

fn read_corpus(path: &Path, skip_bad: bool) -> CliResult<Vec<Document>> {
    if skip_bad {
        let (docs, skipped) = read_jsonl_lenient(path).map_err(CliError::data)?;
        if skipped > 0 {
            eprintln!("warning: skipped {skipped} malformed line(s) in {}", path.display());
        }
        Ok(docs)
    } else {
        read_jsonl(path).map_err(CliError::data)
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut json = serde_json::to_string_pretty(value).map_err(CliError::data)?;
    json.push('\n');
    fs::write(path, json).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn emit_text(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(CliError::data),
    }
}

fn cmd_split(a: SplitArgs) -> CliResult<()> {
    if a.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let outdir = a
        .outdir
        .unwrap_or_else(|| a.input.parent().map(Path::to_path_buf).unwrap_or_default());
    let paths = split_jsonl_into(&a.input, a.k, &outdir).map_err(CliError::data)?;
    let listing: String = paths.iter().map(|p| format!("{}\n", p.display())).collect();
    emit_text(None, &listing)
}

fn cmd_dedup(a: DedupArgs, config: &PipelineConfig, workers: usize) -> CliResult<()> {
    let mut cfg = config.dedup.clone();
    if let Some(v) = a.num_perm {
        cfg.num_perm = v;
    }
    if let Some(v) = a.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.shingle_n {
        cfg.shingle_n = v;
    }
    if let Some(v) = a.hash_bits {
        cfg.hash_bits = v;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let docs = read_corpus(&a.input, a.skip_bad)?;
    let (kept, report) = dedup_corpus_with_workers(&docs, &cfg, workers).map_err(CliError::data)?;
    write_jsonl(&a.output, &kept).map_err(CliError::data)?;
    write_json(&a.report, &report)?;
    eprintln!(
        "dedup: {} in, {} kept, {} clusters, {} candidate pairs (b={}, r={})",
        report.docs_in,
        report.docs_kept,
        report.clusters.len(),
        report.pairs_candidates,
        report.bands,
        report.rows
    );
    Ok(())
}

fn cmd_train(a: TrainArgs, config: &PipelineConfig, workers: usize) -> CliResult<()> {
    let vocab_size = a.vocab_size.unwrap_or(config.tokenizer.vocab_size);
    let docs = read_corpus(&a.input, a.skip_bad)?;
    let model = train_bpe_with_workers(&docs, vocab_size, workers).map_err(|e| match e {
        crate::tokenizer::TokenizerError::VocabTooSmall(_) => CliError::Usage(e.to_string()),
        other => CliError::data(other),
    })?;
    model.save(&a.output).map_err(CliError::data)?;
    if model.vocab_size() < vocab_size {
        eprintln!(
            "train-tokenizer: stopped early at vocab size {} of {vocab_size} (no pair occurs twice)",
            model.vocab_size()
        );
    } else {
        eprintln!("train-tokenizer: vocab size {}", model.vocab_size());
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> CliResult<()> {
    let ta = TokenizerModel::load(&a.tokenizer_a).map_err(CliError::data)?;
    let tb = TokenizerModel::load(&a.tokenizer_b).map_err(CliError::data)?;
    let docs = read_jsonl(&a.corpus).map_err(CliError::data)?;
    let report = compare_tokenizers(&ta, &tb, &docs).map_err(CliError::data)?;
    let mut json = serde_json::to_string_pretty(&report).map_err(CliError::data)?;
    json.push('\n');
    emit_text(None, &json)
}

/// Summary written next to the shards by `tokenize-shard`.
pub const CONVERSION_FILE: &str = "conversion.json";

fn cmd_tokenize_shard(a: TokenizeShardArgs, config: &PipelineConfig, workers: usize) -> CliResult<()> {
    let context_length = a.context_length.unwrap_or(config.shard.context_length);
    let splits = a.splits.unwrap_or(config.shard.splits);
    if context_length < 2 {
        return Err(CliError::Usage("--context-length must be at least 2".into()));
    }
    if splits == 0 {
        return Err(CliError::Usage("--splits must be at least 1".into()));
    }
    let tokenizer = TokenizerModel::load(&a.tokenizer).map_err(CliError::data)?;
    let split_paths = split_jsonl_into(&a.input, splits, &a.outdir).map_err(CliError::data)?;
    let conversions =
        convert_splits(&split_paths, &tokenizer, context_length, &a.outdir, workers).map_err(CliError::data)?;
    write_json(&a.outdir.join(CONVERSION_FILE), &conversions)?;
    let samples: u64 = conversions.iter().map(|c| c.meta.num_samples).sum();
    let dropped: u64 = conversions.iter().map(|c| c.dropped_tail).sum();
    eprintln!(
        "tokenize-shard: {} shards, {samples} samples of {context_length}, {dropped} tail tokens dropped",
        conversions.len()
    );
    Ok(())
}

/// `target` relative to `base` when it lies below it, else absolute.
fn relative_path(base: &Path, target: &Path) -> String {
    let base = base.canonicalize().unwrap_or_else(|_| base.to_path_buf());
    let target = target.canonicalize().unwrap_or_else(|_| target.to_path_buf());
    match target.strip_prefix(&base) {
        Ok(rel) => rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/"),
        Err(_) => target.to_string_lossy().into_owned(),
    }
}

fn cmd_merge(a: MergeArgs) -> CliResult<()> {
    let mut shard_files: Vec<PathBuf> = fs::read_dir(&a.indir)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.indir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == SHARD_EXTENSION))
        .collect();
    shard_files.sort();
    if shard_files.is_empty() {
        return Err(CliError::Data(format!("no .{SHARD_EXTENSION} files in {}", a.indir.display())));
    }
    let manifest_dir = match a.manifest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&manifest_dir).map_err(CliError::data)?;
    let metas = shard_files
        .iter()
        .map(|p| {
            let mut meta = shard_meta_from_file(p)?;
            meta.path = relative_path(&manifest_dir, p);
            Ok(meta)
        })
        .collect::<Result<Vec<_>, crate::shardstore::ShardError>>()
        .map_err(CliError::data)?;
    let manifest = merge_manifests(metas, &a.manifest).map_err(CliError::data)?;
    eprintln!(
        "merge: {} shards, {} samples of {}",
        manifest.shards.len(),
        manifest.total_samples,
        manifest.context_length
    );
    Ok(())
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum SourceEntry {
    Path(PathBuf),
    Detailed {
        manifest: PathBuf,
        #[serde(default)]
        dropped_tail: u64,
    },
}

fn cmd_stats(a: StatsArgs) -> CliResult<()> {
    let mut inputs = Vec::new();
    let mut dropped = BTreeMap::new();
    if let Some(map_path) = &a.per_source {
        let raw = fs::read_to_string(map_path).map_err(|e| CliError::Data(format!("{}: {e}", map_path.display())))?;
        let map: BTreeMap<String, SourceEntry> =
            serde_json::from_str(&raw).map_err(|e| CliError::Data(format!("{}: {e}", map_path.display())))?;
        let base = map_path.parent().unwrap_or(Path::new("."));
        for (label, entry) in map {
            let (path, tail) = match entry {
                SourceEntry::Path(p) => (p, 0),
                SourceEntry::Detailed { manifest, dropped_tail } => (manifest, dropped_tail),
            };
            let path = if path.is_relative() { base.join(path) } else { path };
            inputs.push((label.clone(), ShardManifest::load(&path).map_err(CliError::data)?));
            if tail > 0 {
                dropped.insert(label, tail);
            }
        }
    } else if let Some(path) = &a.manifest {
        inputs.push((a.label.clone(), ShardManifest::load(path).map_err(CliError::data)?));
        if a.dropped_tail > 0 {
            dropped.insert(a.label.clone(), a.dropped_tail);
        }
    }
    let dist = token_stats(&inputs, &dropped).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(p) = &a.json {
        write_json(p, &dist)?;
    }
    emit_text(None, &dist.render_table())
}

fn resolve_schedule(
    config: &PipelineConfig,
    peak: Option<f64>,
    warmup: Option<u64>,
    total: Option<u64>,
) -> CliResult<LrSchedule> {
    let total = total
        .or(config.schedule.total_steps)
        .ok_or_else(|| CliError::Usage("--total is required (or schedule.total_steps in --config)".into()))?;
    LrSchedule::new(
        peak.unwrap_or(config.schedule.peak),
        warmup.unwrap_or(config.schedule.warmup_steps),
        total,
    )
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_schedule(a: ScheduleArgs, config: &PipelineConfig) -> CliResult<()> {
    let s = resolve_schedule(config, a.peak, a.warmup, a.total)?;
    let rows: Vec<(u64, f64)> = (0..=s.total_steps)
        .map(|step| s.lr_at(step).map(|lr| (step, lr)))
        .collect::<Result<_, _>>()
        .map_err(CliError::data)?;
    let text = match a.emit {
        Emit::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["step", "lr"]).map_err(CliError::data)?;
            for (step, lr) in rows {
                w.write_record([step.to_string(), format!("{lr:e}")]).map_err(CliError::data)?;
            }
            String::from_utf8(w.into_inner().map_err(CliError::data)?).map_err(CliError::data)?
        }
        Emit::Json => {
            let v: Vec<_> = rows.iter().map(|(s, lr)| serde_json::json!({"step": s, "lr": lr})).collect();
            serde_json::to_string_pretty(&v).map_err(CliError::data)? + "\n"
        }
    };
    emit_text(a.output.as_deref(), &text)
}

/// Losses from a CSV file: the last column of each row; a non-numeric first
/// row is treated as a header.
pub fn read_losses(path: &Path) -> Result<Vec<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut losses = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        let Some(field) = record.iter().last().filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) => losses.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(format!("{}: row {i}: {field:?} is not a number", path.display())),
        }
    }
    Ok(losses)
}

fn cmd_simulate(a: SimulateArgs, config: &PipelineConfig) -> CliResult<()> {
    let losses = read_losses(&a.losses).map_err(CliError::Data)?;
    if losses.is_empty() {
        return Err(CliError::Data(format!("{}: no losses", a.losses.display())));
    }
    let warmup = a.warmup.unwrap_or(config.schedule.warmup_steps);
    let default_total = (losses.len() as u64).max(warmup + 1);
    let total = a.total.or(config.schedule.total_steps).unwrap_or(default_total);
    let schedule = resolve_schedule(config, a.peak, Some(warmup), Some(total))?;
    let detector = ControllerConfig {
        window: a.window.unwrap_or(config.controller.detector.window),
        k: a.k.unwrap_or(config.controller.detector.k),
        stable_steps: a.stable.unwrap_or(config.controller.detector.stable_steps),
    };
    detector.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let interval = a.checkpoint_interval.unwrap_or(config.controller.checkpoint_interval);
    if interval == 0 {
        return Err(CliError::Usage("--checkpoint-interval must be positive".into()));
    }
    let trace = simulate_run(&schedule, &losses, interval, detector).map_err(CliError::data)?;
    let text = match a.emit {
        Emit::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["step", "lr", "loss", "action", "target"]).map_err(CliError::data)?;
            for row in &trace {
                let target = match row.action {
                    Action::Rollback { to, .. } => to.to_string(),
                    _ => String::new(),
                };
                w.write_record([
                    row.step.to_string(),
                    format!("{:e}", row.effective_lr),
                    row.loss.to_string(),
                    row.action.label().to_string(),
                    target,
                ])
                .map_err(CliError::data)?;
            }
            String::from_utf8(w.into_inner().map_err(CliError::data)?).map_err(CliError::data)?
        }
        Emit::Json => serde_json::to_string_pretty(&trace).map_err(CliError::data)? + "\n",
    };
    emit_text(a.output.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_mentions_format_versions() {
        assert!(VERSION.contains(&format!("shard format {}", crate::shardstore::SHARD_FORMAT_VERSION)));
        assert!(VERSION.contains(&format!("manifest {}", crate::shardstore::MANIFEST_VERSION)));
        assert!(VERSION.contains(&format!("tokenizer model {}", crate::tokenizer::model::MODEL_FORMAT_VERSION)));
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["corpusforge", "frobnicate"]), 1);
        assert_eq!(run(["corpusforge"]), 1);
    }

    #[test]
    fn help_and_version_succeed() {
        assert_eq!(run(["corpusforge", "--version"]), 0);
        assert_eq!(run(["corpusforge", "schedule", "--help"]), 0);
    }

    #[test]
    fn schedule_requires_total() {
        assert_eq!(run(["corpusforge", "schedule"]), 1);
    }

    #[test]
    fn missing_input_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.jsonl");
        let out = dir.path().join("o.jsonl");
        let rep = dir.path().join("r.json");
        let code = run([
            "corpusforge".as_ref(),
            "dedup".as_ref(),
            "--input".as_ref(),
            missing.as_os_str(),
            "--output".as_ref(),
            out.as_os_str(),
            "--report".as_ref(),
            rep.as_os_str(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn loss_csv_forms() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.csv");
        fs::write(&p, "step,loss\n0,2.5\n1,NaN\n2, inf\n").unwrap();
        let l = read_losses(&p).unwrap();
        assert_eq!(l[0], 2.5);
        assert!(l[1].is_nan());
        assert!(l[2].is_infinite());
        fs::write(&p, "1.0\n2.0\n").unwrap();
        assert_eq!(read_losses(&p).unwrap(), vec![1.0, 2.0]);
        fs::write(&p, "1.0\nbad\n").unwrap();
        assert!(read_losses(&p).is_err());
    }
}
