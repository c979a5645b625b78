//! Burrows's Delta over the most frequent words, and UPGMA clustering of
//! the resulting distance matrix.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::textcore::{tokenize, Document, TokenMode};

pub const DEFAULT_MFW: usize = 150;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttributionError {
    #[error("need at least two documents")]
    EmptyCorpus,
    #[error("document `{0}` has no tokens")]
    EmptyDocument(String),
    #[error("every frequent word has the same frequency in all documents")]
    DegenerateCorpus,
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
}

fn counts(doc: &Document, mode: TokenMode) -> (HashMap<String, usize>, usize) {
    let tokens = tokenize(&doc.text, mode);
    let n = tokens.len();
    let mut c = HashMap::new();
    for t in tokens {
        *c.entry(t.surface).or_insert(0) += 1;
    }
    (c, n)
}

/// Top-`n` words by summed raw count, ties broken alphabetically.
pub fn mfw(corpus: &[Document], n: usize, mode: TokenMode) -> Result<Vec<String>, AttributionError> {
    if corpus.is_empty() {
        return Err(AttributionError::EmptyCorpus);
    }
    let mut total: HashMap<String, usize> = HashMap::new();
    for doc in corpus {
        for (w, c) in counts(doc, mode).0 {
            *total.entry(w).or_insert(0) += c;
        }
    }
    let mut ranked: Vec<(String, usize)> = total.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    Ok(ranked.into_iter().map(|(w, _)| w).collect())
}

/// Relative frequencies of a shared word list, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    pub words: Vec<String>,
    pub freqs: Vec<Vec<f64>>,
}

pub fn profiles(corpus: &[Document], n_mfw: usize, mode: TokenMode) -> Result<FrequencyProfile, AttributionError> {
    let words = mfw(corpus, n_mfw, mode)?;
    let mut freqs = Vec::with_capacity(corpus.len());
    for doc in corpus {
        let (c, n) = counts(doc, mode);
        if n == 0 {
            return Err(AttributionError::EmptyDocument(doc.id.clone()));
        }
        freqs.push(
            words
                .iter()
                .map(|w| *c.get(w).unwrap_or(&0) as f64 / n as f64)
                .collect(),
        );
    }
    Ok(FrequencyProfile { words, freqs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Frequent words that varied across documents and entered the distance.
    #[serde(default)]
    pub words: Vec<String>,
}

impl DeltaMatrix {
    pub fn new(ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, AttributionError> {
        let m = DeltaMatrix {
            ids,
            values,
            words: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn validate(&self) -> Result<(), AttributionError> {
        let n = self.ids.len();
        let bad = |msg: String| Err(AttributionError::InvalidMatrix(msg));
        if n < 2 {
            return bad(format!("need at least 2 documents, got {n}"));
        }
        if self.values.len() != n || self.values.iter().any(|r| r.len() != n) {
            return bad("matrix is not square".into());
        }
        let mut seen: Vec<&String> = self.ids.iter().collect();
        seen.sort();
        seen.dedup();
        if seen.len() != n {
            return bad("duplicate ids".into());
        }
        for i in 0..n {
            if self.values[i][i] != 0.0 {
                return bad(format!("non-zero diagonal at {i}"));
            }
            for j in 0..n {
                let v = self.values[i][j];
                if !v.is_finite() || v < 0.0 {
                    return bad(format!("entry ({i},{j}) = {v}"));
                }
                if (v - self.values[j][i]).abs() > 1e-12 {
                    return bad(format!("asymmetric at ({i},{j})"));
                }
            }
        }
        Ok(())
    }

    /// CSV with a header row and a leading id column.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (id, row) in self.ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

/// Mean absolute z-score difference over the frequent words whose
/// frequency varies across the corpus. Standard deviations are population
/// deviations, so two documents always sit exactly 2.0 apart.
pub fn delta_matrix(corpus: &[Document], n_mfw: usize, mode: TokenMode) -> Result<DeltaMatrix, AttributionError> {
    if corpus.len() < 2 {
        return Err(AttributionError::EmptyCorpus);
    }
    let profile = profiles(corpus, n_mfw, mode)?;
    let docs = corpus.len() as f64;
    let mut kept = Vec::new();
    let mut z: Vec<Vec<f64>> = vec![Vec::new(); corpus.len()];
    for (w, word) in profile.words.iter().enumerate() {
        let col: Vec<f64> = profile.freqs.iter().map(|r| r[w]).collect();
        let mu = col.iter().sum::<f64>() / docs;
        let sigma = (col.iter().map(|f| (f - mu).powi(2)).sum::<f64>() / docs).sqrt();
        if sigma == 0.0 || col.iter().all(|&f| f == col[0]) {
            continue;
        }
        kept.push(word.clone());
        for (d, f) in col.iter().enumerate() {
            z[d].push((f - mu) / sigma);
        }
    }
    if kept.is_empty() {
        return Err(AttributionError::DegenerateCorpus);
    }
    let k = kept.len() as f64;
    let n = corpus.len();
    let values: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a == b {
                        return 0.0;
                    }
                    // sum in a fixed orientation so (a,b) and (b,a) agree bit for bit
                    let (lo, hi) = (a.min(b), a.max(b));
                    z[lo].iter().zip(&z[hi]).map(|(x, y)| (x - y).abs()).sum::<f64>() / k
                })
                .collect()
        })
        .collect();
    Ok(DeltaMatrix {
        ids: corpus.iter().map(|d| d.id.clone()).collect(),
        values,
        words: kept,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DendrogramNode {
    Leaf {
        id: String,
        height: f64,
    },
    Internal {
        children: Box<[DendrogramNode; 2]>,
        height: f64,
    },
}

impl DendrogramNode {
    pub fn leaf(id: impl Into<String>) -> Self {
        DendrogramNode::Leaf {
            id: id.into(),
            height: 0.0,
        }
    }

    pub fn height(&self) -> f64 {
        match self {
            DendrogramNode::Leaf { height, .. } | DendrogramNode::Internal { height, .. } => *height,
        }
    }

    /// Leaf ids, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        match self {
            DendrogramNode::Leaf { id, .. } => vec![id.as_str()],
            DendrogramNode::Internal { children, .. } => {
                let mut v = children[0].leaves();
                v.extend(children[1].leaves());
                v
            }
        }
    }

    /// Smallest leaf id. Clusters are named after it when breaking ties.
    pub fn label(&self) -> &str {
        self.leaves().into_iter().min().expect("trees have at least one leaf")
    }

    /// True when no child sits higher than its parent.
    pub fn is_monotone(&self) -> bool {
        match self {
            DendrogramNode::Leaf { .. } => true,
            DendrogramNode::Internal { children, height } => {
                children.iter().all(|c| c.height() <= *height && c.is_monotone())
            }
        }
    }

    /// Splits the tree into `k` groups by undoing the highest merges first.
    pub fn cut(&self, k: usize) -> Vec<Vec<String>> {
        let mut parts: Vec<&DendrogramNode> = vec![self];
        while parts.len() < k {
            let Some((pos, _)) = parts
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n, DendrogramNode::Internal { .. }))
                .max_by(|a, b| a.1.height().total_cmp(&b.1.height()))
            else {
                break;
            };
            let DendrogramNode::Internal { children, .. } = parts.remove(pos) else {
                unreachable!()
            };
            parts.push(&children[0]);
            parts.push(&children[1]);
        }
        let mut groups: Vec<Vec<String>> = parts
            .iter()
            .map(|p| {
                let mut g: Vec<String> = p.leaves().into_iter().map(String::from).collect();
                g.sort();
                g
            })
            .collect();
        groups.sort();
        groups
    }
}

fn newick_name(id: &str) -> String {
    if id.chars().any(|c| c.is_whitespace() || "()[]':;,".contains(c)) {
        format!("'{}'", id.replace('\'', "''"))
    } else {
        id.to_string()
    }
}

fn write_newick(node: &DendrogramNode, out: &mut String) {
    match node {
        DendrogramNode::Leaf { id, .. } => out.push_str(&newick_name(id)),
        DendrogramNode::Internal { children, height } => {
            out.push('(');
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_newick(child, out);
                let _ = write!(out, ":{}", height - child.height());
            }
            out.push(')');
        }
    }
}

pub fn to_newick(tree: &DendrogramNode) -> String {
    let mut s = String::new();
    write_newick(tree, &mut s);
    s.push(';');
    s
}

/// One agglomeration step: clusters named by their smallest member id.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: String,
    pub right: String,
    pub height: f64,
}

struct Agglomeration {
    nodes: Vec<DendrogramNode>,
    merges: Vec<Merge>,
}

/// Average-linkage agglomeration, stopping once `until` clusters remain.
fn agglomerate(m: &DeltaMatrix, until: usize) -> Agglomeration {
    let mut nodes: Vec<DendrogramNode> = m.ids.iter().map(DendrogramNode::leaf).collect();
    let mut labels: Vec<String> = m.ids.clone();
    let mut sizes: Vec<usize> = vec![1; nodes.len()];
    let mut dist: Vec<Vec<f64>> = m.values.clone();
    let mut merges = Vec::new();

    while nodes.len() > until.max(1) {
        let mut best: Option<(usize, usize)> = None;
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let key = |a: usize, b: usize| {
                    let (x, y) = (&labels[a], &labels[b]);
                    if x <= y {
                        (x.clone(), y.clone())
                    } else {
                        (y.clone(), x.clone())
                    }
                };
                best = match best {
                    None => Some((i, j)),
                    Some((bi, bj)) => {
                        let (d, bd) = (dist[i][j], dist[bi][bj]);
                        if d < bd || (d == bd && key(i, j) < key(bi, bj)) {
                            Some((i, j))
                        } else {
                            Some((bi, bj))
                        }
                    }
                };
            }
        }
        let (i, j) = best.expect("at least two clusters");
        let (a, b) = if labels[i] <= labels[j] { (i, j) } else { (j, i) };
        // rounding in the averaged distances must not push a parent below its children
        let height = dist[i][j].max(nodes[i].height()).max(nodes[j].height());
        merges.push(Merge {
            left: labels[a].clone(),
            right: labels[b].clone(),
            height,
        });

        let (si, sj) = (sizes[i] as f64, sizes[j] as f64);
        let merged_row: Vec<f64> = (0..nodes.len())
            .map(|k| (si * dist[i][k] + sj * dist[j][k]) / (si + sj))
            .collect();

        // j > i: remove j first so index i stays valid
        let right = nodes.remove(j);
        let left = nodes.remove(i);
        let (first, second) = if a == i { (left, right) } else { (right, left) };
        let label = labels[a].clone();
        labels.remove(j);
        labels.remove(i);
        let size = sizes.remove(j) + sizes.remove(i);
        let mut row: Vec<f64> = merged_row
            .into_iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .map(|(_, v)| v)
            .collect();
        dist.remove(j);
        dist.remove(i);
        for (r, v) in dist.iter_mut().zip(&row) {
            r.remove(j);
            r.remove(i);
            r.push(*v);
        }
        row.push(0.0);
        dist.push(row);
        nodes.push(DendrogramNode::Internal {
            children: Box::new([first, second]),
            height,
        });
        labels.push(label);
        sizes.push(size);
    }
    Agglomeration { nodes, merges }
}

pub fn upgma(m: &DeltaMatrix) -> Result<DendrogramNode, AttributionError> {
    m.validate()?;
    Ok(agglomerate(m, 1).nodes.pop().expect("one root"))
}

/// The merge sequence of [`upgma`], for inspection and replay.
pub fn upgma_merges(m: &DeltaMatrix) -> Result<Vec<Merge>, AttributionError> {
    m.validate()?;
    Ok(agglomerate(m, 1).merges)
}

/// Membership after agglomerating until `k` clusters remain.
pub fn replay_clusters(m: &DeltaMatrix, k: usize) -> Result<Vec<Vec<String>>, AttributionError> {
    m.validate()?;
    let mut groups: Vec<Vec<String>> = agglomerate(m, k)
        .nodes
        .iter()
        .map(|n| {
            let mut g: Vec<String> = n.leaves().into_iter().map(String::from).collect();
            g.sort();
            g
        })
        .collect();
    groups.sort();
    Ok(groups)
}
