use std::hash::Hasher;

use fnv::FnvHasher;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, TreeConfig, TreeNode};
use super::{LabeledMatrix, SelectionError};
use crate::corpus::Label;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub trees: usize,
    /// Candidate features per split; `None` means ⌈√d⌉.
    pub features_per_split: Option<usize>,
    pub seed: u64,
    pub tree: TreeConfig,
    /// `false` trains every tree on the original rows instead of a bootstrap resample.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 32,
            features_per_split: None,
            seed: 0,
            tree: TreeConfig::default(),
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEntry {
    pub seed: u64,
    pub root: TreeNode,
}

/// Serialized classifier: a single tree is a one-entry forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub features_per_split: usize,
    pub forest: Vec<TreeEntry>,
    pub ties: String,
}

impl ForestModel {
    pub fn from_tree(feature_names: Vec<String>, root: TreeNode) -> Self {
        ForestModel {
            version: MODEL_VERSION,
            features_per_split: feature_names.len(),
            feature_names,
            forest: vec![TreeEntry { seed: 0, root }],
            ties: "zero".into(),
        }
    }

    /// Majority vote; a tied vote yields NANON.
    pub fn predict(&self, features: &[f64]) -> Result<Label, SelectionError> {
        if features.len() != self.feature_names.len() {
            return Err(SelectionError::ArityMismatch {
                expected: self.feature_names.len(),
                got: features.len(),
            });
        }
        if self.forest.is_empty() {
            return Err(SelectionError::EmptyModel);
        }
        let anon = self
            .forest
            .iter()
            .filter(|t| t.root.predict(features) == Label::Anon)
            .count();
        Ok(if 2 * anon > self.forest.len() {
            Label::Anon
        } else {
            Label::Nanon
        })
    }

    /// Checks that every tree only references known features.
    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.forest.is_empty() {
            return Err(SelectionError::EmptyModel);
        }
        for t in &self.forest {
            if let Some(f) = t.root.max_feature() {
                if f >= self.feature_names.len() {
                    return Err(SelectionError::ArityMismatch {
                        expected: self.feature_names.len(),
                        got: f + 1,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Seed of tree `index`: FNV-1a over the master seed and index, both little-endian.
pub fn derive_tree_seed(master: u64, index: usize) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&master.to_le_bytes());
    h.write(&(index as u64).to_le_bytes());
    h.finish()
}

fn fit_one(m: &LabeledMatrix, cfg: &ForestConfig, k: usize, seed: u64) -> TreeNode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.n_rows();
    let rows: Vec<usize> = if cfg.bootstrap {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let d = m.n_features();
    let mut pick = || -> Vec<usize> {
        let mut chosen = sample(&mut rng, d, k).into_vec();
        chosen.sort_unstable();
        chosen
    };
    grow(m, &rows, 0, &cfg.tree, &mut pick)
}

/// Bagged trees with per-split feature subsampling. Trees are fitted in
/// parallel; each draws from its own seeded generator, so the result does
/// not depend on scheduling.
pub fn train_forest(m: &LabeledMatrix, cfg: &ForestConfig) -> Result<ForestModel, SelectionError> {
    m.require_both_classes()?;
    if cfg.trees == 0 {
        return Err(SelectionError::EmptyModel);
    }
    let d = m.n_features();
    let default_k = (d as f64).sqrt().ceil() as usize;
    let k = cfg.features_per_split.unwrap_or(default_k).clamp(1, d.max(1));
    let forest: Vec<TreeEntry> = (0..cfg.trees)
        .into_par_iter()
        .map(|i| {
            let seed = derive_tree_seed(cfg.seed, i);
            TreeEntry {
                seed,
                root: fit_one(m, cfg, k, seed),
            }
        })
        .collect();
    Ok(ForestModel {
        version: MODEL_VERSION,
        feature_names: m.feature_names().to_vec(),
        features_per_split: k,
        forest,
        ties: "zero".into(),
    })
}
