//! Corpus summaries: label frequencies per group, sequence lengths and the
//! hunting-to-assessment ratio.

use std::fmt::Write as _;

use serde::Serialize;

use super::record::FrameRecord;
use crate::labels::{Activity, CorridorId, FrameValue, ViewName};

/// Width of the sequence-length histogram bins, in frames.
pub const LENGTH_BIN: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCount {
    pub label: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub group: String,
    pub labels: Vec<LabelCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthBin {
    /// Inclusive lower bound.
    pub from: usize,
    /// Exclusive upper bound.
    pub to: usize,
    pub sequences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sequences: usize,
    pub frames: usize,
    pub groups: Vec<GroupStats>,
    pub length_histogram: Vec<LengthBin>,
    pub min_length: usize,
    pub max_length: usize,
    pub mean_length: f64,
    pub hunting: usize,
    pub assessment: usize,
    /// Hunting frames per assessment frame; `None` without assessments.
    pub hunting_per_assessment: Option<f64>,
}

fn group<'a>(name: &str, names: impl Iterator<Item = &'a str>, counts: &[usize], total: usize) -> GroupStats {
    GroupStats {
        group: name.to_string(),
        labels: names
            .zip(counts)
            .map(|(label, &count)| LabelCount {
                label: label.to_string(),
                count,
                fraction: if total == 0 { 0.0 } else { count as f64 / total as f64 },
            })
            .collect(),
    }
}

pub fn corpus_stats<S: AsRef<[FrameRecord]>>(sequences: &[S]) -> CorpusStats {
    let mut corridor = [0usize; CorridorId::COUNT];
    let mut activity = [0usize; Activity::COUNT];
    let mut view = [0usize; ViewName::COUNT];
    let mut value = [0usize; FrameValue::COUNT];
    let mut lengths = Vec::with_capacity(sequences.len());
    for seq in sequences {
        let seq = seq.as_ref();
        lengths.push(seq.len());
        for r in seq {
            corridor[r.labels.corridor.index()] += 1;
            activity[r.labels.activity.index()] += 1;
            view[r.labels.view.index()] += 1;
            value[r.labels.frame_value.index()] += 1;
        }
    }
    let frames: usize = lengths.iter().sum();
    let max_length = lengths.iter().copied().max().unwrap_or(0);
    let min_length = lengths.iter().copied().min().unwrap_or(0);
    let length_histogram = if lengths.is_empty() {
        Vec::new()
    } else {
        (0..=max_length / LENGTH_BIN)
            .map(|b| LengthBin {
                from: b * LENGTH_BIN,
                to: (b + 1) * LENGTH_BIN,
                sequences: lengths.iter().filter(|&&l| l / LENGTH_BIN == b).count(),
            })
            .collect()
    };
    let hunting = value[FrameValue::Hunting.index()];
    let assessment = value[FrameValue::Assessment.index()];
    CorpusStats {
        sequences: sequences.len(),
        frames,
        groups: vec![
            group("corridor", CorridorId::ALL.iter().map(|l| l.name()), &corridor, frames),
            group("activity", Activity::ALL.iter().map(|l| l.name()), &activity, frames),
            group("view", ViewName::ALL.iter().map(|l| l.name()), &view, frames),
            group("frame_value", FrameValue::ALL.iter().map(|l| l.name()), &value, frames),
        ],
        length_histogram,
        min_length,
        max_length,
        mean_length: if lengths.is_empty() {
            0.0
        } else {
            frames as f64 / lengths.len() as f64
        },
        hunting,
        assessment,
        hunting_per_assessment: (assessment > 0).then(|| hunting as f64 / assessment as f64),
    }
}

impl CorpusStats {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sequences  {}", self.sequences);
        let _ = writeln!(out, "frames     {}", self.frames);
        let _ = writeln!(
            out,
            "length     min {}  mean {:.1}  max {}",
            self.min_length, self.mean_length, self.max_length
        );
        match self.hunting_per_assessment {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "hunting:assessment  {}:{}  ({r:.3})",
                    self.hunting, self.assessment
                );
            }
            None => {
                let _ = writeln!(out, "hunting:assessment  {}:0", self.hunting);
            }
        }
        for g in &self.groups {
            let _ = writeln!(out, "\n{} ({} labels)", g.group, g.labels.len());
            for l in &g.labels {
                let _ = writeln!(out, "  {:<16} {:>8}  {:>6.2}%", l.label, l.count, 100.0 * l.fraction);
            }
        }
        let _ = writeln!(out, "\nsequence length histogram");
        for b in &self.length_histogram {
            let _ = writeln!(out, "  [{:>4}, {:>4})  {}", b.from, b.to, b.sequences);
        }
        out
    }
}
