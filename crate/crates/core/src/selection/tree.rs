use serde::{Deserialize, Serialize};

use super::{best_split_pairs, count, LabeledMatrix, SelectionError, SplitResult};
use crate::corpus::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_gain: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 16,
            min_gain: 1e-12,
        }
    }
}

/// Binary decision tree. Rows with `x[f] <= θ` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        f: usize,
        #[serde(rename = "θ")]
        threshold: f64,
        l: Box<TreeNode>,
        r: Box<TreeNode>,
    },
    Leaf {
        leaf: Label,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> Label {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return *leaf,
                TreeNode::Split { f, threshold, l, r } => {
                    node = if x[*f] <= *threshold { l } else { r };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { l, r, .. } => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    /// Largest feature index referenced, if any.
    pub(crate) fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { f, l, r, .. } => [Some(*f), l.max_feature(), r.max_feature()].into_iter().flatten().max(),
        }
    }
}

/// Majority label; ties go to NANON.
fn majority(rows: &[usize], m: &LabeledMatrix) -> Label {
    let c = count(rows.iter().map(|&i| m.labels()[i]));
    if c[1] > c[0] {
        Label::Anon
    } else {
        Label::Nanon
    }
}

/// Grows a tree over `rows` (indices into `m`). `features` picks the
/// candidate columns for each split.
pub(crate) fn grow(
    m: &LabeledMatrix,
    rows: &[usize],
    depth: usize,
    cfg: &TreeConfig,
    features: &mut dyn FnMut() -> Vec<usize>,
) -> TreeNode {
    let c = count(rows.iter().map(|&i| m.labels()[i]));
    if c[0] == 0 || c[1] == 0 || depth >= cfg.max_depth || rows.len() < 2 {
        return TreeNode::Leaf {
            leaf: majority(rows, m),
        };
    }
    let mut best: Option<SplitResult> = None;
    for f in features() {
        let mut pairs: Vec<(f64, Label)> = rows.iter().map(|&i| (m.rows()[i][f], m.labels()[i])).collect();
        let mut split = best_split_pairs(&mut pairs);
        if split.degenerate {
            continue;
        }
        split.feature = f;
        let better = match best {
            None => true,
            Some(b) => split.gain_bits > b.gain_bits || (split.gain_bits == b.gain_bits && f < b.feature),
        };
        if better {
            best = Some(split);
        }
    }
    let Some(split) = best.filter(|s| s.gain_bits >= cfg.min_gain) else {
        return TreeNode::Leaf {
            leaf: majority(rows, m),
        };
    };
    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| m.rows()[i][split.feature] <= split.threshold);
    TreeNode::Split {
        f: split.feature,
        threshold: split.threshold,
        l: Box::new(grow(m, &left, depth + 1, cfg, features)),
        r: Box::new(grow(m, &right, depth + 1, cfg, features)),
    }
}

/// Recursive best-split tree over every feature.
pub fn train_tree(m: &LabeledMatrix, cfg: &TreeConfig) -> Result<TreeNode, SelectionError> {
    m.require_both_classes()?;
    let rows: Vec<usize> = (0..m.n_rows()).collect();
    let all: Vec<usize> = (0..m.n_features()).collect();
    Ok(grow(m, &rows, 0, cfg, &mut || all.clone()))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::five_pairs;
    use super::*;
    use proptest::prelude::*;

    const N: Label = Label::Nanon;
    const A: Label = Label::Anon;

    fn accuracy(tree: &TreeNode, m: &LabeledMatrix) -> f64 {
        let hits = m
            .rows()
            .iter()
            .zip(m.labels())
            .filter(|(x, y)| tree.predict(x) == **y)
            .count();
        hits as f64 / m.n_rows() as f64
    }

    #[test]
    fn five_pairs_stump() {
        let m = five_pairs();
        let tree = train_tree(
            &m,
            &TreeConfig {
                max_depth: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(tree.depth(), 1);
        match &tree {
            TreeNode::Split { f, threshold, l, r } => {
                assert_eq!(*f, 0);
                assert!((threshold - 0.30915).abs() < 1e-12);
                // high content ratio = source text
                assert_eq!(**l, TreeNode::Leaf { leaf: A });
                assert_eq!(**r, TreeNode::Leaf { leaf: N });
            }
            leaf => panic!("expected split, got {leaf:?}"),
        }
        assert_eq!(accuracy(&tree, &m), 1.0);
        let probe = |v: f64| tree.predict(&[v, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(probe(0.5), N);
        assert_eq!(probe(0.1), A);
    }

    #[test]
    fn pure_training_set_is_leaf() {
        let m = LabeledMatrix::new(vec!["x".into()], vec![vec![1.0], vec![2.0]], vec![A, A]).unwrap();
        assert_eq!(train_tree(&m, &TreeConfig::default()), Err(SelectionError::SingleClass));
        let rows: Vec<usize> = vec![0, 1];
        let leaf = grow(&m, &rows, 0, &TreeConfig::default(), &mut || vec![0]);
        assert_eq!(leaf, TreeNode::Leaf { leaf: A });
    }

    #[test]
    fn majority_tie_is_nanon() {
        // identical vectors with conflicting labels cannot be split
        let m = LabeledMatrix::new(vec!["x".into()], vec![vec![1.0], vec![1.0]], vec![A, N]).unwrap();
        assert_eq!(
            train_tree(&m, &TreeConfig::default()).unwrap(),
            TreeNode::Leaf { leaf: N }
        );
    }

    #[test]
    fn xor_needs_zero_min_gain() {
        let m = LabeledMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![N, A, A, N],
        )
        .unwrap();
        let stopped = train_tree(&m, &TreeConfig::default()).unwrap();
        assert!(stopped.is_leaf());
        let full = train_tree(
            &m,
            &TreeConfig {
                max_depth: usize::MAX,
                min_gain: 0.0,
            },
        )
        .unwrap();
        assert_eq!(accuracy(&full, &m), 1.0);
    }

    #[test]
    fn json_shape() {
        let tree = train_tree(
            &five_pairs(),
            &TreeConfig {
                max_depth: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let json = serde_json::to_value(&tree).unwrap();
        assert_eq!(json["f"], 0);
        assert_eq!(json["l"], serde_json::json!({"leaf": 1}));
        assert_eq!(json["r"], serde_json::json!({"leaf": 0}));
        assert!(json["θ"].is_f64());
        let back: TreeNode = serde_json::from_value(json).unwrap();
        assert_eq!(back, tree);
    }

    proptest! {
        #[test]
        fn unbounded_tree_fits_consistent_data(
            rows in proptest::collection::vec((proptest::collection::vec(0u8..4, 3), any::<bool>()), 2..40)
        ) {
            // drop conflicting duplicates
            let mut seen = std::collections::HashMap::new();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (x, y) in rows {
                if *seen.entry(x.clone()).or_insert(y) == y {
                    xs.push(x.iter().map(|&v| v as f64).collect::<Vec<f64>>());
                    ys.push(if y { A } else { N });
                }
            }
            prop_assume!(ys.contains(&A) && ys.contains(&N));
            let m = LabeledMatrix::new(vec!["a".into(), "b".into(), "c".into()], xs, ys).unwrap();
            let tree = train_tree(&m, &TreeConfig { max_depth: usize::MAX, min_gain: 0.0 }).unwrap();
            prop_assert_eq!(accuracy(&tree, &m), 1.0);
        }

        #[test]
        fn depth_limit_respected(
            rows in proptest::collection::vec((proptest::collection::vec(0u8..10, 2), any::<bool>()), 4..40),
            max_depth in 0usize..4,
        ) {
            let xs: Vec<Vec<f64>> = rows.iter().map(|r| r.0.iter().map(|&v| v as f64).collect()).collect();
            let ys: Vec<Label> = rows.iter().map(|r| if r.1 { A } else { N }).collect();
            prop_assume!(ys.contains(&A) && ys.contains(&N));
            let m = LabeledMatrix::new(vec!["a".into(), "b".into()], xs, ys).unwrap();
            let tree = train_tree(&m, &TreeConfig { max_depth, ..Default::default() }).unwrap();
            prop_assert!(tree.depth() <= max_depth);
        }
    }
}
