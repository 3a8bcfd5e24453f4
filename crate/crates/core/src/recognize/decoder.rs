//! A per-level discrete hidden Markov model over quantized frame features.
//! Each of the four label levels is an independent chain whose transition
//! and emission tables are add-one smoothed counts from a labelled corpus.
//! A level may read several symbol channels, taken as independent given
//! its state. Transitions are kept separately for frames where the C-arm
//! moved and frames where it stayed put, since a new view is only ever
//! reached by moving. Decoding only ever looks at frames up to the current
//! one.

use serde::{Deserialize, Serialize};

use super::features::{featurize_sequence, FeatureSpace, FrameFeatures};
use crate::dataset::record::{FrameRecord, ToolKind};
use crate::error::RecognizeError;
use crate::labels::{Activity, CorridorId, FrameValue, PhaseLabels, ViewName};
use crate::rng::{sequence_seed, stream_rng, FEATURE_STREAM};

pub const DECODER_SCHEMA_VERSION: u32 = 1;

const LEVELS: [&str; 4] = ["corridor", "activity", "view", "frame_value"];
const STATES: [usize; 4] = [CorridorId::COUNT, Activity::COUNT, ViewName::COUNT, FrameValue::COUNT];
const VIEW_ANGLE_BINS: usize = 4;
/// Tool-to-corridor endpoint mismatch above which a corridor match is
/// marked as loose.
const MISMATCH_PX: f64 = 40.0;
/// Alphabet size of each symbol channel, in the order `symbols` returns.
const SYMBOLS: [usize; 5] = [
    2 * CorridorId::COUNT + 1,
    3,
    ViewName::COUNT * VIEW_ANGLE_BINS,
    6,
    ViewName::COUNT + 1,
];
/// Channels each level reads. Views also read the corridor channel since
/// every corridor draws from its own short list of views.
const CHANNELS: [&[usize]; 4] = [&[0], &[1], &[2, 0, 4], &[3]];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Most probable state given frames so far (normalized forward pass).
    #[default]
    Filter,
    /// End state of the most probable path so far.
    MaxProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelModel {
    pub level: String,
    pub states: Vec<String>,
    /// Symbol channels read by this level.
    pub channels: Vec<usize>,
    pub initial: Vec<f64>,
    /// `transition[m][i][j]` = P(next = j | current = i), where `m` is 1
    /// if the pose changed into the next frame.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `emission[c][i][s]` = P(channel c shows s | state = i).
    pub emission: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecoder {
    pub schema_version: u32,
    pub feature_space: FeatureSpace,
    /// Feature noise the training corpus was featurized with.
    pub training_noise_rad: f64,
    pub mode: DecodeMode,
    pub levels: Vec<LevelModel>,
}

/// Quantized observation per channel.
pub fn symbols(f: &FrameFeatures) -> [usize; 5] {
    let corridor = match (f.nearest_corridor, f.corridor_mismatch_px) {
        (Some(c), Some(px)) => 2 * c.index() + (px > MISMATCH_PX) as usize,
        _ => 2 * CorridorId::COUNT,
    };
    let activity = match f.active_tool {
        Some(ToolKind::Screw) => 2,
        Some(ToolKind::Wire) if f.depth_fraction > 0.0 => 1,
        _ => 0,
    };
    let ratio = f.view_angle_rad / f.view_tolerance_rad;
    let angle_bin = if ratio <= 1.0 {
        0
    } else if ratio <= 2.0 {
        1
    } else if ratio <= 4.0 {
        2
    } else {
        3
    };
    let view = f.nearest_view.index() * VIEW_ANGLE_BINS + angle_bin;
    let centered = f.center_offset.is_some_and(|c| c < 1.0) as usize;
    let frame_value = angle_bin.min(2) * 2 + centered;
    let approached = f.approached_view.map_or(ViewName::COUNT, |v| v.index());
    [corridor, activity, view, frame_value, approached]
}

fn states(labels: &PhaseLabels) -> [usize; 4] {
    [
        labels.corridor.index(),
        labels.activity.index(),
        labels.view.index(),
        labels.frame_value.index(),
    ]
}

fn normalize_rows(counts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    counts
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            row.into_iter().map(|c| c / total).collect()
        })
        .collect()
}

fn state_names(level: usize) -> Vec<String> {
    match level {
        0 => CorridorId::ALL.iter().map(|l| l.name().to_string()).collect(),
        1 => Activity::ALL.iter().map(|l| l.name().to_string()).collect(),
        2 => ViewName::ALL.iter().map(|l| l.name().to_string()).collect(),
        _ => FrameValue::ALL.iter().map(|l| l.name().to_string()).collect(),
    }
}

fn argmax(values: &[f64]) -> usize {
    // First maximum wins, so ties go to the earliest label.
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Fits from featurized sequences paired with their true labels.
pub fn fit_features(
    sequences: &[(Vec<FrameFeatures>, Vec<PhaseLabels>)],
    feature_space: FeatureSpace,
    training_noise_rad: f64,
) -> Result<PhaseDecoder, RecognizeError> {
    if sequences.iter().all(|(f, _)| f.is_empty()) {
        return Err(RecognizeError::EmptyCorpus);
    }
    let mut levels = Vec::with_capacity(4);
    for level in 0..4 {
        let k = STATES[level];
        let channels = CHANNELS[level];
        let mut initial = vec![1.0; k];
        let mut transition = vec![vec![vec![1.0; k]; k]; 2];
        let mut emission: Vec<Vec<Vec<f64>>> = channels.iter().map(|&c| vec![vec![1.0; SYMBOLS[c]]; k]).collect();
        for (features, labels) in sequences {
            if features.len() != labels.len() {
                return Err(RecognizeError::LengthMismatch {
                    predictions: features.len(),
                    truth: labels.len(),
                });
            }
            let mut previous: Option<usize> = None;
            for (f, l) in features.iter().zip(labels) {
                let s = states(l)[level];
                match previous {
                    None => initial[s] += 1.0,
                    Some(p) => transition[f.pose_changed as usize][p][s] += 1.0,
                }
                let observed = symbols(f);
                for (table, &c) in emission.iter_mut().zip(channels) {
                    table[s][observed[c]] += 1.0;
                }
                previous = Some(s);
            }
        }
        let total: f64 = initial.iter().sum();
        levels.push(LevelModel {
            level: LEVELS[level].to_string(),
            states: state_names(level),
            channels: channels.to_vec(),
            initial: initial.into_iter().map(|c| c / total).collect(),
            transition: transition.into_iter().map(normalize_rows).collect(),
            emission: emission.into_iter().map(normalize_rows).collect(),
        });
    }
    Ok(PhaseDecoder {
        schema_version: DECODER_SCHEMA_VERSION,
        feature_space,
        training_noise_rad,
        mode: DecodeMode::default(),
        levels,
    })
}

/// Features for sequence `index` of a corpus. Each sequence gets its own
/// noise stream so results do not depend on corpus order.
pub fn corpus_features(
    records: &[FrameRecord],
    index: usize,
    space: &FeatureSpace,
    noise_rad: f64,
    seed: u64,
) -> Vec<FrameFeatures> {
    let mut rng = stream_rng(sequence_seed(seed, index as u64), FEATURE_STREAM);
    featurize_sequence(records, space, &mut rng, noise_rad)
}

/// Featurizes and fits a labelled corpus.
pub fn fit<S: AsRef<[FrameRecord]>>(
    corpus: &[S],
    space: FeatureSpace,
    noise_rad: f64,
    seed: u64,
) -> Result<PhaseDecoder, RecognizeError> {
    let pairs: Vec<_> = corpus
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let s = s.as_ref();
            (
                corpus_features(s, i, &space, noise_rad, seed),
                s.iter().map(|r| r.labels).collect(),
            )
        })
        .collect();
    fit_features(&pairs, space, noise_rad)
}

/// What one frame shows the decoder.
#[derive(Debug, Clone, Copy)]
struct Observation {
    symbols: [usize; 5],
    moved: bool,
}

impl Observation {
    fn of(f: &FrameFeatures) -> Self {
        Observation {
            symbols: symbols(f),
            moved: f.pose_changed,
        }
    }
}

impl LevelModel {
    fn likelihood(&self, state: usize, o: &Observation) -> f64 {
        self.channels
            .iter()
            .zip(&self.emission)
            .map(|(&c, table)| table[state][o.symbols[c]])
            .product()
    }

    /// Causal state estimates, one per frame.
    fn decode(&self, observations: &[Observation], mode: DecodeMode) -> Vec<usize> {
        let k = self.states.len();
        let mut out = Vec::with_capacity(observations.len());
        let mut belief: Vec<f64> = Vec::new();
        for (t, o) in observations.iter().enumerate() {
            let transition = &self.transition[o.moved as usize];
            let mut next = vec![0.0; k];
            for (j, n) in next.iter_mut().enumerate() {
                let prior = if t == 0 {
                    self.initial[j]
                } else {
                    match mode {
                        DecodeMode::Filter => (0..k).map(|i| belief[i] * transition[i][j]).sum(),
                        DecodeMode::MaxProduct => (0..k)
                            .map(|i| belief[i] * transition[i][j])
                            .fold(0.0, f64::max),
                    }
                };
                *n = prior * self.likelihood(j, o);
            }
            let total: f64 = next.iter().sum();
            if total > 0.0 {
                next.iter_mut().for_each(|x| *x /= total);
            } else {
                next = vec![1.0 / k as f64; k];
            }
            out.push(argmax(&next));
            belief = next;
        }
        out
    }

    /// ln P(observations) under the forward algorithm.
    fn log_likelihood(&self, observations: &[Observation]) -> f64 {
        let k = self.states.len();
        let mut alpha: Vec<f64> = Vec::new();
        let mut total = 0.0;
        for (t, o) in observations.iter().enumerate() {
            let mut next: Vec<f64> = (0..k)
                .map(|j| {
                    let prior = if t == 0 {
                        self.initial[j]
                    } else {
                        (0..k).map(|i| alpha[i] * self.transition[o.moved as usize][i][j]).sum()
                    };
                    prior * self.likelihood(j, o)
                })
                .collect();
            let scale: f64 = next.iter().sum();
            total += libm::log(scale);
            next.iter_mut().for_each(|x| *x /= scale);
            alpha = next;
        }
        total
    }
}

impl PhaseDecoder {
    pub fn decode(&self, features: &[FrameFeatures]) -> Vec<PhaseLabels> {
        let obs: Vec<Observation> = features.iter().map(Observation::of).collect();
        let per_level: Vec<Vec<usize>> = self
            .levels
            .iter()
            .map(|m| m.decode(&obs, self.mode))
            .collect();
        (0..features.len())
            .map(|t| PhaseLabels {
                corridor: CorridorId::ALL[per_level[0][t]],
                activity: Activity::ALL[per_level[1][t]],
                view: ViewName::ALL[per_level[2][t]],
                frame_value: FrameValue::ALL[per_level[3][t]],
            })
            .collect()
    }

    /// Per-level ln-likelihood of a feature sequence.
    pub fn log_likelihood(&self, features: &[FrameFeatures]) -> [f64; 4] {
        let obs: Vec<Observation> = features.iter().map(Observation::of).collect();
        std::array::from_fn(|l| self.levels[l].log_likelihood(&obs))
    }

    /// ln-likelihood of the same sequence with every symbol equally likely.
    pub fn uniform_log_likelihood(frames: usize) -> [f64; 4] {
        std::array::from_fn(|l| {
            CHANNELS[l]
                .iter()
                .map(|&c| -(frames as f64) * libm::log(SYMBOLS[c] as f64))
                .sum()
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decoder serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
