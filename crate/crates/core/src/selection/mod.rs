//! Entropy-based split search, feature ranking, and tree / forest classifiers.
//!
//! Entropy is measured in bits. A candidate split of one feature column is
//! `x <= θ` versus `x > θ`, where `θ` is the midpoint of two consecutive
//! distinct sorted values; its information gain is
//!
//! ```text
//! gain(θ) = H(y) − (n_L / n)·H(y_L) − (n_R / n)·H(y_R)
//! ```
//!
//! With binary labels the gain lies in `[0, 1]`. Ties between candidate
//! thresholds go to the smaller `θ`; ties between features go to the lower
//! column index.

mod forest;
mod tree;

pub use forest::{derive_tree_seed, train_forest, ForestConfig, ForestModel, TreeEntry, MODEL_VERSION};
pub use tree::{train_tree, TreeConfig, TreeNode};

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

/// Features whose best gain exceeds this are worth keeping.
pub const KEEP_ABOVE: f64 = 0.5;
/// Features whose best gain falls below this are uninformative.
pub const DISCARD_BELOW: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectionError {
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {xs} values, {ys} labels")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("only one class present")]
    SingleClass,
    #[error("expected {expected} features, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("non-finite feature value in row {row}")]
    NonFinite { row: usize },
    #[error("model has no trees")]
    EmptyModel,
}

/// Class counts `[nanon, anon]`.
pub(crate) type Counts = [usize; 2];

pub(crate) fn count(labels: impl IntoIterator<Item = Label>) -> Counts {
    let mut c = [0usize; 2];
    for l in labels {
        c[l.index()] += 1;
    }
    c
}

/// Entropy in bits of a two-class count vector.
///
/// Terms are summed smaller count first so that `[a, b]` and `[b, a]` give
/// bit-identical results.
pub fn entropy_of_counts(counts: Counts) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    let mut h = 0.0;
    for c in [counts[0].min(counts[1]), counts[0].max(counts[1])] {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

pub fn entropy(labels: &[Label]) -> Result<f64, SelectionError> {
    if labels.is_empty() {
        return Err(SelectionError::EmptyInput);
    }
    Ok(entropy_of_counts(count(labels.iter().copied())))
}

/// Gain of splitting `total` into `left` and `total − left`.
pub(crate) fn split_gain(total: Counts, left: Counts) -> f64 {
    let right = [total[0] - left[0], total[1] - left[1]];
    let n = (total[0] + total[1]) as f64;
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    let gain = entropy_of_counts(total) - (nl / n) * entropy_of_counts(left) - (nr / n) * entropy_of_counts(right);
    gain.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub feature: usize,
    pub threshold: f64,
    pub gain_bits: f64,
    /// All values were equal, so no threshold separates anything.
    pub degenerate: bool,
}

/// Best threshold over `(value, label)` pairs already restricted to the rows of interest.
pub(crate) fn best_split_pairs(pairs: &mut [(f64, Label)]) -> SplitResult {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = count(pairs.iter().map(|p| p.1));
    let mut left = [0usize; 2];
    let mut best: Option<(f64, f64)> = None;
    for i in 0..pairs.len() - 1 {
        left[pairs[i].1.index()] += 1;
        let (a, b) = (pairs[i].0, pairs[i + 1].0);
        if a == b {
            continue;
        }
        let gain = split_gain(total, left);
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, (a + b) / 2.0));
        }
    }
    match best {
        Some((gain_bits, threshold)) => SplitResult {
            feature: 0,
            threshold,
            gain_bits,
            degenerate: false,
        },
        None => SplitResult {
            feature: 0,
            threshold: pairs[0].0,
            gain_bits: 0.0,
            degenerate: true,
        },
    }
}

pub fn best_split(xs: &[f64], ys: &[Label]) -> Result<SplitResult, SelectionError> {
    if xs.len() != ys.len() {
        return Err(SelectionError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(SelectionError::TooFewRows {
            needed: 2,
            got: xs.len(),
        });
    }
    if let Some(row) = xs.iter().position(|x| !x.is_finite()) {
        return Err(SelectionError::NonFinite { row });
    }
    let mut pairs: Vec<(f64, Label)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    Ok(best_split_pairs(&mut pairs))
}

/// Feature rows with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
}

impl LabeledMatrix {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self, SelectionError> {
        if rows.is_empty() {
            return Err(SelectionError::EmptyInput);
        }
        if rows.len() != labels.len() {
            return Err(SelectionError::LengthMismatch {
                xs: rows.len(),
                ys: labels.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(SelectionError::ArityMismatch {
                    expected: feature_names.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(SelectionError::NonFinite { row: i });
            }
        }
        Ok(LabeledMatrix {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[feature]).collect()
    }

    pub(crate) fn require_both_classes(&self) -> Result<(), SelectionError> {
        let c = count(self.labels.iter().copied());
        if c[0] == 0 || c[1] == 0 {
            Err(SelectionError::SingleClass)
        } else {
            Ok(())
        }
    }

    /// Rows selected by index, in the given order (duplicates allowed).
    pub fn subset(&self, indices: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Keep,
    Mid,
    Uninformative,
}

impl Verdict {
    pub fn for_gain(gain: f64) -> Self {
        if gain > KEEP_ABOVE {
            Verdict::Keep
        } else if gain < DISCARD_BELOW {
            Verdict::Uninformative
        } else {
            Verdict::Mid
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Keep => "KEEP",
            Verdict::Mid => "MID",
            Verdict::Uninformative => "UNINFORMATIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub feature: String,
    pub gain_bits: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Features sorted by best-split gain, highest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgRanking {
    pub entries: Vec<RankEntry>,
}

pub fn rank_features(m: &LabeledMatrix) -> Result<IgRanking, SelectionError> {
    if m.n_rows() < 2 {
        return Err(SelectionError::TooFewRows {
            needed: 2,
            got: m.n_rows(),
        });
    }
    m.require_both_classes()?;
    let mut entries = Vec::with_capacity(m.n_features());
    for (f, name) in m.feature_names().iter().enumerate() {
        let split = best_split(&m.column(f), m.labels())?;
        entries.push(RankEntry {
            feature: name.clone(),
            gain_bits: split.gain_bits,
            threshold: split.threshold,
            verdict: Verdict::for_gain(split.gain_bits),
        });
    }
    entries.sort_by(|a, b| b.gain_bits.total_cmp(&a.gain_bits));
    Ok(IgRanking { entries })
}

/// Ranking-independent prediction interface shared by trees and forests.
pub fn predict(model: &ForestModel, features: &[f64]) -> Result<Label, SelectionError> {
    model.predict(features)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The five feature readings of the first five source/anonymized pairs.
    pub const FIVE_PAIRS: [(&str, Label, [f64; 5]); 10] = [
        ("I-NANON", Label::Nanon, [0.5000, 0.6765, 0.5000, 0.5588, 0.9412]),
        ("I-ANON", Label::Anon, [0.1250, 0.2917, 0.1250, 0.2917, 0.4167]),
        ("II-NANON", Label::Nanon, [0.4250, 0.6000, 0.4000, 0.4250, 0.7750]),
        ("II-ANON", Label::Anon, [0.2593, 0.1852, 0.2593, 0.1852, 0.4444]),
        ("III-NANON", Label::Nanon, [0.3611, 0.6667, 0.3611, 0.4722, 0.7500]),
        ("III-ANON", Label::Anon, [0.1000, 0.0000, 0.1000, 0.0000, 0.1000]),
        ("IV-NANON", Label::Nanon, [0.4412, 0.6471, 0.3824, 0.5000, 0.7941]),
        ("IV-ANON", Label::Anon, [0.0526, 0.1579, 0.0526, 0.1579, 0.2105]),
        ("V-NANON", Label::Nanon, [0.3590, 0.6410, 0.3077, 0.5128, 0.7692]),
        ("V-ANON", Label::Anon, [0.0625, 0.0625, 0.0625, 0.0625, 0.1250]),
    ];

    pub fn five_pairs() -> LabeledMatrix {
        let names = ["l_cont_a", "l_func_a", "l_cont_t", "l_func_t", "ttr_lemmas"];
        LabeledMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            FIVE_PAIRS.iter().map(|r| r.2.to_vec()).collect(),
            FIVE_PAIRS.iter().map(|r| r.1).collect(),
        )
        .unwrap()
    }
}
