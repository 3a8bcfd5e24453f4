//! Per-level frame accuracy, its mean over the four levels, and confusion
//! matrices.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::RecognizeError;
use crate::labels::{Activity, CorridorId, FrameValue, PhaseLabels, ViewName};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMetrics {
    pub level: String,
    pub correct: usize,
    pub total: usize,
    /// Fraction in [0, 1]; zero for an empty evaluation.
    pub accuracy: f64,
    pub labels: Vec<String>,
    /// Rows are true labels, columns predictions.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub frames: usize,
    pub levels: Vec<LevelMetrics>,
    pub mean_accuracy: f64,
}

fn level(name: &str, labels: Vec<String>, pairs: impl Iterator<Item = (usize, usize)>) -> LevelMetrics {
    let k = labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (p, t) in pairs {
        confusion[t][p] += 1;
    }
    let total: usize = confusion.iter().flatten().sum();
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    LevelMetrics {
        level: name.to_string(),
        correct,
        total,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        labels,
        confusion,
    }
}

fn names<T: Copy>(all: &[T], name: impl Fn(T) -> &'static str) -> Vec<String> {
    all.iter().map(|&l| name(l).to_string()).collect()
}

pub fn evaluate(predictions: &[PhaseLabels], truth: &[PhaseLabels]) -> Result<Metrics, RecognizeError> {
    if predictions.len() != truth.len() {
        return Err(RecognizeError::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    let pairs = || predictions.iter().zip(truth);
    let levels = vec![
        level(
            "corridor",
            names(CorridorId::ALL, CorridorId::name),
            pairs().map(|(p, t)| (p.corridor.index(), t.corridor.index())),
        ),
        level(
            "activity",
            names(Activity::ALL, Activity::name),
            pairs().map(|(p, t)| (p.activity.index(), t.activity.index())),
        ),
        level(
            "view",
            names(ViewName::ALL, ViewName::name),
            pairs().map(|(p, t)| (p.view.index(), t.view.index())),
        ),
        level(
            "frame_value",
            names(FrameValue::ALL, FrameValue::name),
            pairs().map(|(p, t)| (p.frame_value.index(), t.frame_value.index())),
        ),
    ];
    let mean_accuracy = levels.iter().map(|l| l.accuracy).sum::<f64>() / levels.len() as f64;
    Ok(Metrics {
        frames: truth.len(),
        levels,
        mean_accuracy,
    })
}

impl Metrics {
    pub fn accuracy(&self, level: &str) -> Option<f64> {
        self.levels.iter().find(|l| l.level == level).map(|l| l.accuracy)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "frames {}", self.frames);
        let _ = writeln!(out, "{:<12} {:>9} {:>9} {:>9}", "level", "correct", "total", "accuracy");
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{:<12} {:>9} {:>9} {:>8.2}%",
                l.level,
                l.correct,
                l.total,
                100.0 * l.accuracy
            );
        }
        let _ = writeln!(out, "{:<12} {:>9} {:>9} {:>8.2}%", "mean", "", "", 100.0 * self.mean_accuracy);
        for l in &self.levels {
            let width = l.labels.iter().map(|s| s.len()).max().unwrap_or(0).max(6);
            let _ = writeln!(out, "\n{} confusion (rows: truth, columns: prediction)", l.level);
            let _ = write!(out, "{:<width$}", "");
            for i in 0..l.labels.len() {
                let _ = write!(out, " {i:>6}");
            }
            out.push('\n');
            for (i, row) in l.confusion.iter().enumerate() {
                let _ = write!(out, "{:<width$}", format!("{i} {}", l.labels[i]), width = width + 3);
                for c in row {
                    let _ = write!(out, " {c:>6}");
                }
                out.push('\n');
            }
        }
        out
    }
}
