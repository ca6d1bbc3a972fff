//! JSONL document corpora: reading, writing, and contiguous splitting.
//!
//! Every pipeline stage consumes and emits one JSON object per line. The only
//! required field is `"text"`; `"id"` and `"source"` are optional and any
//! other fields are carried through untouched on write.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed JSONL at line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("duplicate document id {id} at line {line}")]
    DuplicateId { id: u64, line: usize },
    #[error("split count must be at least 1")]
    ZeroSplits,
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// One corpus record.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: u64,
    pub text: String,
    pub source: Option<String>,
    /// Fields this crate does not interpret, preserved for pass-through writes.
    pub extra: Map<String, Value>,
}

impl Document {
    pub fn new(id: u64, text: impl Into<String>) -> Self {
        Self {
            id,
            text: text.into(),
            source: None,
            extra: Map::new(),
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    fn to_json(&self) -> Value {
        let mut obj = self.extra.clone();
        obj.insert("id".into(), Value::from(self.id));
        obj.insert("text".into(), Value::from(self.text.as_str()));
        if let Some(src) = &self.source {
            obj.insert("source".into(), Value::from(src.as_str()));
        }
        Value::Object(obj)
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Document> {
    let malformed = |reason: String| CorpusError::MalformedLine {
        line: line_no,
        reason,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(malformed("not a JSON object".into()));
    };
    let text = match obj.remove("text") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(malformed("\"text\" is not a string".into())),
        None => return Err(malformed("missing \"text\"".into())),
    };
    let id = match obj.remove("id") {
        None | Some(Value::Null) => line_no as u64,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| malformed("\"id\" is not a non-negative integer".into()))?,
    };
    let source = match obj.remove("source") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(malformed("\"source\" is not a string".into())),
    };
    Ok(Document {
        id,
        text,
        source,
        extra: obj,
    })
}

/// Streaming JSONL reader.
///
/// Line numbers are 0-based physical lines, so an auto-assigned id always
/// equals the line the record came from. Blank lines are skipped but still
/// counted.
pub struct JsonlReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    skip_bad: bool,
    skipped: usize,
    seen: HashSet<u64>,
    path: PathBuf,
}

impl JsonlReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(Self::from_reader(BufReader::new(file), path))
    }
}

impl<R: BufRead> JsonlReader<R> {
    pub fn from_reader(reader: R, path: impl AsRef<Path>) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            skip_bad: false,
            skipped: 0,
            seen: HashSet::new(),
            path: path.as_ref().to_path_buf(),
        }
    }

    /// Downgrade malformed lines to a counted skip instead of an error.
    pub fn skip_bad(mut self, skip: bool) -> Self {
        self.skip_bad = skip;
        self
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for JsonlReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    // ill-formed UTF-8
                    let line = self.line_no;
                    self.line_no += 1;
                    if self.skip_bad {
                        self.skipped += 1;
                        continue;
                    }
                    return Some(Err(CorpusError::MalformedLine {
                        line,
                        reason: "invalid UTF-8".into(),
                    }));
                }
                Err(e) => return Some(Err(CorpusError::io(&self.path, e))),
            };
            let line_no = self.line_no;
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(&line, line_no) {
                Ok(doc) => {
                    if !self.seen.insert(doc.id) {
                        return Some(Err(CorpusError::DuplicateId {
                            id: doc.id,
                            line: line_no,
                        }));
                    }
                    return Some(Ok(doc));
                }
                Err(_) if self.skip_bad => {
                    self.skipped += 1;
                    continue;
                }
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    JsonlReader::open(path)?.collect()
}

/// Read with malformed lines skipped; returns the documents and the skip count.
pub fn read_jsonl_lenient(path: impl AsRef<Path>) -> Result<(Vec<Document>, usize)> {
    let mut reader = JsonlReader::open(path)?.skip_bad(true);
    let docs = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((docs, reader.skipped()))
}

pub fn write_jsonl<'a>(
    path: impl AsRef<Path>,
    docs: impl IntoIterator<Item = &'a Document>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        serde_json::to_writer(&mut out, &doc.to_json())
            .map_err(|e| CorpusError::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| CorpusError::io(path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))
}

/// Line counts for a contiguous `k`-way split of `n` lines.
///
/// The first `n mod k` parts get one extra line.
pub fn split_sizes(n: usize, k: usize) -> Vec<usize> {
    let (base, extra) = (n / k, n % k);
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

/// `<stem>.split-<i>.jsonl` for a given input path.
pub fn split_name(input: &Path, index: usize) -> String {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    format!("{stem}.split-{index}.jsonl")
}

/// Split next to the input file.
pub fn split_jsonl(path: impl AsRef<Path>, k: usize) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    split_jsonl_into(path, k, dir)
}

/// Split `path` into `k` contiguous blocks written to `out_dir`.
///
/// Lines are copied verbatim (no JSON parsing), so concatenating the parts in
/// index order reproduces the input up to a trailing newline. When `k`
/// exceeds the line count the surplus parts are empty files.
pub fn split_jsonl_into(
    path: impl AsRef<Path>,
    k: usize,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let out_dir = out_dir.as_ref();
    if k == 0 {
        return Err(CorpusError::ZeroSplits);
    }
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| CorpusError::io(path, e))?;
    let mut lines: Vec<&[u8]> = raw.split(|&b| b == b'\n').collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }

    std::fs::create_dir_all(out_dir).map_err(|e| CorpusError::io(out_dir, e))?;
    let mut outputs = Vec::with_capacity(k);
    let mut cursor = 0;
    for (i, size) in split_sizes(lines.len(), k).into_iter().enumerate() {
        let out_path = out_dir.join(split_name(path, i));
        let file = File::create(&out_path).map_err(|e| CorpusError::io(&out_path, e))?;
        let mut out = BufWriter::new(file);
        for line in &lines[cursor..cursor + size] {
            out.write_all(line)
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| CorpusError::io(&out_path, e))?;
        }
        out.flush().map_err(|e| CorpusError::io(&out_path, e))?;
        cursor += size;
        outputs.push(out_path);
    }
    Ok(outputs)
}

/// Per-source token counts, in billions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceManifest {
    pub entries: Vec<(String, f64)>,
    pub total: f64,
}

impl SourceManifest {
    pub fn new(entries: Vec<(String, f64)>) -> Self {
        let total = entries.iter().map(|(_, c)| c).sum();
        Self { entries, total }
    }

    pub fn is_consistent(&self) -> bool {
        let sum: f64 = self.entries.iter().map(|(_, c)| c).sum();
        (sum - self.total).abs() <= 1e-9 * self.total.abs().max(f64::MIN_POSITIVE)
    }
}
