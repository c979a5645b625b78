//! Seeded synonym substitution.
//!
//! Which synonym replaces token `i` depends only on the seed and `i`, via
//! 64-bit FNV-1a over `seed.to_le_bytes()` followed by the ASCII decimal
//! digits of `i`. Substituting one token never shifts the choice made for
//! another.

use std::collections::HashMap;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;

use crate::textcore::{
    content_lines, is_alpha_word, read_text_file, token_spans, FunctionWordList, LemmaTable, LexiconError, TokenMode,
};

/// Minimum length (in code points) of a token eligible for substitution.
pub const MIN_WORD_LEN: usize = 3;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: HashMap<String, Vec<String>>,
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if `synonyms` is empty or contains `lemma`.
    pub fn insert<S: AsRef<str>>(&mut self, lemma: &str, synonyms: &[S]) {
        let lemma = lemma.to_lowercase();
        let list: Vec<String> = synonyms.iter().map(|s| s.as_ref().to_lowercase()).collect();
        assert!(!list.is_empty() && !list.contains(&lemma));
        self.entries.insert(lemma, list);
    }

    /// Parses `lemma<TAB>syn1,syn2,…` rows.
    pub fn parse(src: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut lex = SynonymLexicon::new();
        for (line_no, line) in content_lines(src) {
            let bad = |msg: String| LexiconError::parse(source_name, line_no, msg);
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [lemma, list] = cols.as_slice() else {
                return Err(bad(format!("expected 2 tab-separated columns, found {}", cols.len())));
            };
            let lemma = lemma.to_lowercase();
            if !is_alpha_word(&lemma) {
                return Err(bad(format!("lemma `{lemma}` is not alphabetic")));
            }
            let synonyms: Vec<String> = list
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect();
            if synonyms.is_empty() {
                return Err(bad(format!("`{lemma}` has no synonyms")));
            }
            if let Some(s) = synonyms.iter().find(|s| !is_alpha_word(s) || **s == lemma) {
                return Err(bad(format!("invalid synonym `{s}` for `{lemma}`")));
            }
            lex.entries.insert(lemma, synonyms);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let src = read_text_file(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn get(&self, lemma: &str) -> Option<&[String]> {
        self.entries.get(lemma).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// FNV-1a of the seed's little-endian bytes followed by the decimal position.
pub fn position_hash(seed: u64, position: usize) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&seed.to_le_bytes());
    h.write(position.to_string().as_bytes());
    h.finish()
}

fn transfer_capital(word: &str, original: &str) -> String {
    let upper = original.chars().next().is_some_and(char::is_uppercase);
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if upper => c.to_uppercase().chain(chars).collect(),
        _ => word.to_string(),
    }
}

/// Synonym substitution with an optional lemma table and substitution rate.
#[derive(Debug, Clone, Copy)]
pub struct Paraphraser<'a> {
    pub synonyms: &'a SynonymLexicon,
    pub function_words: &'a FunctionWordList,
    pub lemmas: Option<&'a LemmaTable>,
    /// Fraction of eligible tokens substituted; 1.0 substitutes all of them.
    pub rate: f64,
}

impl<'a> Paraphraser<'a> {
    pub fn new(synonyms: &'a SynonymLexicon, function_words: &'a FunctionWordList) -> Self {
        Paraphraser {
            synonyms,
            function_words,
            lemmas: None,
            rate: 1.0,
        }
    }

    pub fn with_lemmas(mut self, lemmas: &'a LemmaTable) -> Self {
        self.lemmas = Some(lemmas);
        self
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    fn choose(&self, surface: &str, position: usize, seed: u64) -> Option<&'a str> {
        if surface.chars().count() < MIN_WORD_LEN || self.function_words.contains(surface) {
            return None;
        }
        let lemma = self.lemmas.map_or(surface, |t| t.lookup(surface));
        let list = self.synonyms.get(lemma)?;
        let h = position_hash(seed, position);
        if self.rate < 1.0 {
            let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
            if unit >= self.rate {
                return None;
            }
        }
        Some(list[(h % list.len() as u64) as usize].as_str())
    }

    pub fn paraphrase(&self, text: &str, seed: u64) -> String {
        let mut out = String::with_capacity(text.len());
        let mut cursor = 0;
        for (position, span) in token_spans(text, TokenMode::Raw).into_iter().enumerate() {
            if let Some(synonym) = self.choose(&span.surface, position, seed) {
                out.push_str(&text[cursor..span.start]);
                out.push_str(&transfer_capital(synonym, &text[span.start..span.end]));
                cursor = span.end;
            }
        }
        out.push_str(&text[cursor..]);
        out
    }
}

pub fn paraphrase(text: &str, lex: &SynonymLexicon, fwl: &FunctionWordList, seed: u64) -> String {
    Paraphraser::new(lex, fwl).paraphrase(text, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textcore::{has_invisible, surfaces};

    /// Independent FNV-1a, written out from the published constants.
    fn fnv1a_reference(bytes: &[u8]) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    fn reference_hash(seed: u64, pos: usize) -> u64 {
        let mut bytes = seed.to_le_bytes().to_vec();
        bytes.extend(pos.to_string().bytes());
        fnv1a_reference(&bytes)
    }

    fn lex() -> (SynonymLexicon, FunctionWordList) {
        let mut lex = SynonymLexicon::new();
        lex.insert("happy", &["glad", "joyful"]);
        (lex, FunctionWordList::from_words(["i", "am", "the"]))
    }

    #[test]
    fn hash_matches_reference() {
        for seed in [0u64, 1, 42, u64::MAX] {
            for pos in [0usize, 7, 123] {
                assert_eq!(position_hash(seed, pos), reference_hash(seed, pos));
            }
        }
        assert_eq!(fnv1a_reference(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a_reference(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn picks_indexed_synonym() {
        let (lex, fwl) = lex();
        // "happy" is token 2 of "I am happy"
        let seed0 = (0u64..).find(|&s| reference_hash(s, 2).is_multiple_of(2)).unwrap();
        let seed1 = (0u64..).find(|&s| reference_hash(s, 2) % 2 == 1).unwrap();
        assert_eq!(paraphrase("I am happy", &lex, &fwl, seed0), "I am glad");
        assert_eq!(paraphrase("I am happy", &lex, &fwl, seed1), "I am joyful");
    }

    #[test]
    fn capital_transfer() {
        let (lex, fwl) = lex();
        let seed = (0u64..).find(|&s| reference_hash(s, 0).is_multiple_of(2)).unwrap();
        assert_eq!(paraphrase("Happy days", &lex, &fwl, seed), "Glad days");
    }

    #[test]
    fn unknown_words_untouched() {
        let (lex, fwl) = lex();
        let text = "  Sad,  lonely\tdays...  ";
        assert_eq!(paraphrase(text, &lex, &fwl, 9), text);
    }

    #[test]
    fn short_and_function_words_skipped() {
        let mut lex = SynonymLexicon::new();
        lex.insert("am", &["exist"]);
        lex.insert("go", &["travel"]);
        lex.insert("the", &["that"]);
        let fwl = FunctionWordList::from_words(["am", "the"]);
        assert_eq!(paraphrase("go the am", &lex, &fwl, 3), "go the am");
    }

    #[test]
    fn lemma_lookup_used() {
        let mut lex = SynonymLexicon::new();
        lex.insert("run", &["sprint"]);
        let fwl = FunctionWordList::from_words(["we"]);
        let mut lemmas = LemmaTable::new();
        lemmas.insert("running", "run");
        let p = Paraphraser::new(&lex, &fwl).with_lemmas(&lemmas);
        assert_eq!(p.paraphrase("We kept running.", 1), "We kept sprint.");
    }

    #[test]
    fn zero_rate_is_identity() {
        let (lex, fwl) = lex();
        let p = Paraphraser::new(&lex, &fwl).with_rate(0.0);
        assert_eq!(p.paraphrase("happy happy happy", 5), "happy happy happy");
    }

    #[test]
    fn parse_file() {
        let lex = SynonymLexicon::parse("# x\nhappy\tglad, joyful\n", "s").unwrap();
        assert_eq!(lex.get("happy").unwrap(), ["glad", "joyful"]);
        assert!(SynonymLexicon::parse("happy\thappy\n", "s").is_err());
        assert!(SynonymLexicon::parse("happy\t\n", "s").is_err());
        assert!(SynonymLexicon::parse("happy glad\n", "s").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn invariants(words in proptest::collection::vec("(happy|Happy|the|big|sad|[a-z]{1,6})[,.]?", 0..30), seed in any::<u64>()) {
                let mut lex = SynonymLexicon::new();
                lex.insert("happy", &["glad", "joyful", "content"]);
                lex.insert("big", &["large"]);
                lex.insert("the", &["that"]);
                let fwl = FunctionWordList::from_words(["the"]);
                let text = words.join(" ");
                let out = paraphrase(&text, &lex, &fwl, seed);
                prop_assert_eq!(&out, &paraphrase(&text, &lex, &fwl, seed));
                let before = surfaces(&text, TokenMode::Raw);
                let after = surfaces(&out, TokenMode::Raw);
                prop_assert_eq!(before.len(), after.len());
                for (b, a) in before.iter().zip(&after) {
                    if b == "the" { prop_assert_eq!(a, "the"); }
                }
                prop_assert!(!has_invisible(&out));
            }
        }
    }
}
