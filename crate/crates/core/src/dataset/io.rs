//! On-disk corpus layout:
//!
//! ```text
//! <root>/manifest.json
//! <root>/config.toml
//! <root>/sequences/seq_00000.jsonl   one canonical record per line
//! <root>/anatomy/anat_00000.json     the pelvis each sequence was run on
//! ```

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::record::{FrameRecord, SCHEMA_VERSION};
use crate::error::DatasetError;
use crate::labels::ANNOTATION_CHANNELS;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const SEQUENCE_DIR: &str = "sequences";
pub const ANATOMY_DIR: &str = "anatomy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    /// SHA-256 of the simulation config.
    pub config_hash: String,
    pub master_seed: u64,
    pub config_file: String,
    pub annotation_channels: Vec<String>,
    pub sequences: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub sequence_id: u64,
    pub seed: u64,
    /// Paths relative to the corpus root.
    pub file: String,
    pub anatomy_file: String,
    pub frames: usize,
}

impl Manifest {
    pub fn new(config_hash: String, master_seed: u64) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            config_hash,
            master_seed,
            config_file: CONFIG_FILE.to_string(),
            annotation_channels: ANNOTATION_CHANNELS.iter().map(|s| s.to_string()).collect(),
            sequences: Vec::new(),
        }
    }

    pub fn total_frames(&self) -> usize {
        self.sequences.iter().map(|s| s.frames).sum()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

pub fn sequence_file_name(sequence_id: u64) -> String {
    format!("{SEQUENCE_DIR}/seq_{sequence_id:05}.jsonl")
}

pub fn anatomy_file_name(sequence_id: u64) -> String {
    format!("{ANATOMY_DIR}/anat_{sequence_id:05}.json")
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Canonical JSON-lines bytes for a sequence.
pub fn encode_sequence(records: &[FrameRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_canonical_json());
        out.push('\n');
    }
    out
}

pub fn write_sequence(records: &[FrameRecord], path: &Path) -> Result<(), DatasetError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    let file = fs::File::create(path).map_err(io_error(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(encode_sequence(records).as_bytes())
        .and_then(|_| w.flush())
        .map_err(io_error(path))
}

/// Parses one line; `line` is 1-based and only used for error positions.
pub fn parse_record(text: &str, path: &Path, line: usize) -> Result<FrameRecord, DatasetError> {
    let parse_error = |message: String| DatasetError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_error("missing schema_version".into()))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(DatasetError::SchemaVersion {
            path: path.to_path_buf(),
            found: found.min(u32::MAX as u64) as u32,
            expected: SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| parse_error(e.to_string()))
}

pub fn read_sequence(path: &Path) -> Result<Vec<FrameRecord>, DatasetError> {
    let file = fs::File::open(path).map_err(io_error(path))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_error(path))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_record(&line, path, i + 1)?);
    }
    Ok(records)
}

pub fn write_manifest(manifest: &Manifest, root: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(root).map_err(io_error(root))?;
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(io_error(&path))
}

pub fn read_manifest(root: &Path) -> Result<Manifest, DatasetError> {
    let path = root.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_error(&path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| DatasetError::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(DatasetError::SchemaVersion {
            path,
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    if manifest.annotation_channels.len() != ANNOTATION_CHANNELS.len() {
        return Err(DatasetError::Manifest(format!(
            "expected {} annotation channels, found {}",
            ANNOTATION_CHANNELS.len(),
            manifest.annotation_channels.len()
        )));
    }
    Ok(manifest)
}

/// A corpus loaded into memory, sequences in manifest order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub sequences: Vec<Vec<FrameRecord>>,
}

impl Corpus {
    pub fn frames(&self) -> impl Iterator<Item = &FrameRecord> {
        self.sequences.iter().flatten()
    }
}

/// Reads the manifest and every sequence it lists, checking frame counts.
pub fn read_corpus(root: &Path) -> Result<Corpus, DatasetError> {
    let manifest = read_manifest(root)?;
    let mut sequences = Vec::with_capacity(manifest.sequences.len());
    for entry in &manifest.sequences {
        let records = read_sequence(&root.join(&entry.file))?;
        if records.len() != entry.frames {
            return Err(DatasetError::Manifest(format!(
                "{} lists {} frames but holds {}",
                entry.file,
                entry.frames,
                records.len()
            )));
        }
        sequences.push(records);
    }
    Ok(Corpus {
        root: root.to_path_buf(),
        manifest,
        sequences,
    })
}
