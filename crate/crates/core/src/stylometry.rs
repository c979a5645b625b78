//! Lexical stylometric features.
//!
//! All ratios share one denominator, the token count `n`:
//!
//! | feature      | numerator                                           |
//! |--------------|-----------------------------------------------------|
//! | `l_func_a`   | function-word tokens                                |
//! | `l_func_t`   | distinct function-word types                        |
//! | `l_cont_a`   | recognized content-word tokens                      |
//! | `l_cont_t`   | distinct recognized content-word types              |
//! | `ttr_lemmas` | distinct lemmas (unmapped tokens count as their own) |
//! | `word_ttr`   | distinct surfaces                                   |
//!
//! A token is a recognized content word when its lemma is in the content
//! lexicon and the token is not a function word. Fragments produced by
//! invisible-character splitting are usually neither, which is why all four
//! lexical ratios fall together on tampered text.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::textcore::{tokenize, Document, FunctionWordList, LemmaTable, TokenMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    ContentTokens,
    FunctionTokens,
    ContentTypes,
    FunctionTypes,
    LemmaTtr,
}

impl Feature {
    /// The retained features, in feature-CSV column order.
    pub const ALL: [Feature; 5] = [
        Feature::ContentTokens,
        Feature::FunctionTokens,
        Feature::ContentTypes,
        Feature::FunctionTypes,
        Feature::LemmaTtr,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Feature::ContentTokens => "l_cont_a",
            Feature::FunctionTokens => "l_func_a",
            Feature::ContentTypes => "l_cont_t",
            Feature::FunctionTypes => "l_func_t",
            Feature::LemmaTtr => "ttr_lemmas",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub l_func_a: f64,
    pub l_func_t: f64,
    pub l_cont_a: f64,
    pub l_cont_t: f64,
    pub ttr_lemmas: f64,
    pub word_ttr: f64,
    pub token_count: usize,
    pub type_count: usize,
    pub label: Option<Label>,
    pub mode: TokenMode,
    /// Set when the document had no tokens; every ratio is then 0.
    pub empty: bool,
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::ContentTokens => self.l_cont_a,
            Feature::FunctionTokens => self.l_func_a,
            Feature::ContentTypes => self.l_cont_t,
            Feature::FunctionTypes => self.l_func_t,
            Feature::LemmaTtr => self.ttr_lemmas,
        }
    }

    /// The five retained features in [`Feature::ALL`] order.
    pub fn retained(&self) -> Vec<f64> {
        Feature::ALL.iter().map(|&f| self.get(f)).collect()
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }
}

pub fn extract_features(doc: &Document, mode: TokenMode, fwl: &FunctionWordList, lt: &LemmaTable) -> FeatureVector {
    let tokens = tokenize(&doc.text, mode);
    let n = tokens.len();

    let mut func_tokens = 0usize;
    let mut cont_tokens = 0usize;
    let mut func_types: HashSet<&str> = HashSet::new();
    let mut cont_types: HashSet<&str> = HashSet::new();
    let mut lemmas: HashSet<&str> = HashSet::new();
    let mut surfaces: HashSet<&str> = HashSet::new();

    for token in &tokens {
        let surface = token.surface.as_str();
        let lemma = lt.lookup(surface);
        surfaces.insert(surface);
        lemmas.insert(lemma);
        if fwl.contains(surface) {
            func_tokens += 1;
            func_types.insert(surface);
        } else if lt.is_content(lemma) {
            cont_tokens += 1;
            cont_types.insert(surface);
        }
    }

    let ratio = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    FeatureVector {
        l_func_a: ratio(func_tokens),
        l_func_t: ratio(func_types.len()),
        l_cont_a: ratio(cont_tokens),
        l_cont_t: ratio(cont_types.len()),
        ttr_lemmas: ratio(lemmas.len()),
        word_ttr: ratio(surfaces.len()),
        token_count: n,
        type_count: surfaces.len(),
        label: None,
        mode,
        empty: n == 0,
    }
}

/// Distinct surfaces over total tokens; 0 for a text without tokens.
pub fn word_ttr(text: &str, mode: TokenMode) -> f64 {
    let tokens = tokenize(text, mode);
    if tokens.is_empty() {
        return 0.0;
    }
    let distinct: HashSet<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
    distinct.len() as f64 / tokens.len() as f64
}
