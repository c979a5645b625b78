//! Tokenization, lexicon loading and lemma lookup.
//!
//! Every other module sees text through [`tokenize`]. A token is a maximal
//! run of Unicode-alphabetic code points, lowercased. Everything else
//! (digits, punctuation, whitespace, emoji, apostrophes) separates tokens,
//! so `"don't"` yields `don` and `t`.
//!
//! The two [`TokenMode`]s differ only in how the invisible code points of
//! [`INVISIBLE_SET`] are treated:
//!
//! * [`TokenMode::Raw`] treats them exactly like whitespace. This is the
//!   behaviour of a naive parser, the one steganographic noise fools.
//! * [`TokenMode::Sanitized`] deletes them before segmentation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Zero-width code points shared by the tokenizer and the steganographic codec.
pub const INVISIBLE_SET: [char; 5] = ['\u{200B}', '\u{200C}', '\u{200D}', '\u{2060}', '\u{FEFF}'];

#[inline]
pub fn is_invisible(c: char) -> bool {
    INVISIBLE_SET.contains(&c)
}

/// True when `text` carries at least one code point of [`INVISIBLE_SET`].
pub fn has_invisible(text: &str) -> bool {
    text.chars().any(is_invisible)
}

/// A text with an identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    /// Panics if `id` is empty.
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let id = id.into();
        assert!(!id.is_empty(), "document id must be non-empty");
        Document { id, text: text.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    /// Invisible code points split words.
    #[default]
    Raw,
    /// Invisible code points are removed first.
    Sanitized,
}

impl TokenMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenMode::Raw => "raw",
            TokenMode::Sanitized => "sanitized",
        }
    }
}

impl fmt::Display for TokenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(TokenMode::Raw),
            "sanitized" => Ok(TokenMode::Sanitized),
            other => Err(format!("unknown token mode `{other}` (expected raw|sanitized)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

/// A token together with the byte range it occupies in the source text.
///
/// In sanitized mode the range may contain the invisible code points that
/// were deleted from the surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

fn push_lower(out: &mut String, c: char) {
    for l in c.to_lowercase() {
        if l.is_alphabetic() {
            out.push(l);
        }
    }
}

/// Segments `text` into alphabetic runs, keeping byte offsets.
pub fn token_spans(text: &str, mode: TokenMode) -> Vec<TokenSpan> {
    let mut spans = Vec::new();
    let mut current: Option<TokenSpan> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphabetic() {
            let span = current.get_or_insert_with(|| TokenSpan {
                start: i,
                end: i,
                surface: String::new(),
            });
            push_lower(&mut span.surface, c);
            span.end = i + c.len_utf8();
        } else if is_invisible(c) && mode == TokenMode::Sanitized {
            // deleted: neither a letter nor a separator
        } else if let Some(span) = current.take() {
            spans.push(span);
        }
    }
    spans.extend(current);
    spans.retain(|s| !s.surface.is_empty());
    spans
}

pub fn tokenize(text: &str, mode: TokenMode) -> Vec<Token> {
    token_spans(text, mode)
        .into_iter()
        .enumerate()
        .map(|(position, s)| Token {
            surface: s.surface,
            position,
        })
        .collect()
}

/// Convenience: just the surfaces.
pub fn surfaces(text: &str, mode: TokenMode) -> Vec<String> {
    token_spans(text, mode).into_iter().map(|s| s.surface).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{0} is empty")]
    Empty(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LexiconError {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        LexiconError::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn read_text_file(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            LexiconError::MissingFile(path.to_path_buf())
        } else {
            LexiconError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

/// Lines of a lexicon file with `#` comments and blank lines removed,
/// paired with their 1-based line numbers.
pub(crate) fn content_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim_end_matches('\r');
        if line.trim().is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

pub(crate) fn is_alpha_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(char::is_alphabetic)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionWordList {
    entries: HashSet<String>,
}

impl FunctionWordList {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        FunctionWordList {
            entries: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn parse(src: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut entries = HashSet::new();
        for (line_no, line) in content_lines(src) {
            let word = line.trim().to_lowercase();
            if !is_alpha_word(&word) {
                return Err(LexiconError::parse(
                    source_name,
                    line_no,
                    format!("function word `{word}` is not alphabetic"),
                ));
            }
            entries.insert(word);
        }
        if entries.is_empty() {
            return Err(LexiconError::Empty(source_name.to_string()));
        }
        Ok(FunctionWordList { entries })
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let src = read_text_file(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Surface-to-lemma lookup plus the set of lemmas counted as content words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaTable {
    lemmas: HashMap<String, String>,
    content: HashSet<String>,
}

impl LemmaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, surface: &str, lemma: &str) {
        self.lemmas.insert(surface.to_lowercase(), lemma.to_lowercase());
    }

    pub fn mark_content(&mut self, lemma: &str) {
        self.content.insert(lemma.to_lowercase());
    }

    /// Parses `surface<TAB>lemma[<TAB>C]` rows.
    pub fn parse(src: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut table = LemmaTable::new();
        for (line_no, line) in content_lines(src) {
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let (surface, lemma, flag) = match cols.as_slice() {
                [s, l] => (*s, *l, None),
                [s, l, f] => (*s, *l, Some(*f)),
                _ => {
                    return Err(LexiconError::parse(
                        source_name,
                        line_no,
                        format!("expected 2 or 3 tab-separated columns, found {}", cols.len()),
                    ))
                }
            };
            let surface = surface.to_lowercase();
            let lemma = lemma.to_lowercase();
            if !is_alpha_word(&surface) || !is_alpha_word(&lemma) {
                return Err(LexiconError::parse(
                    source_name,
                    line_no,
                    "surface and lemma must be alphabetic",
                ));
            }
            match flag {
                None | Some("") => {}
                Some(f) if f.eq_ignore_ascii_case("c") => table.mark_content(&lemma),
                Some(f) => {
                    return Err(LexiconError::parse(
                        source_name,
                        line_no,
                        format!("unknown flag `{f}` (only `C` is recognized)"),
                    ))
                }
            }
            table.lemmas.insert(surface, lemma);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let src = read_text_file(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Mapped lemma, or `word` itself when unmapped.
    pub fn lookup<'a>(&'a self, word: &'a str) -> &'a str {
        self.lemmas.get(word).map(String::as_str).unwrap_or(word)
    }

    pub fn is_content(&self, lemma: &str) -> bool {
        self.content.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

pub fn lemma_of(token: &Token, table: &LemmaTable) -> String {
    table.lookup(&token.surface).to_string()
}

pub fn load_lexicons(function_path: &Path, lemma_path: &Path) -> Result<(FunctionWordList, LemmaTable), LexiconError> {
    Ok((FunctionWordList::load(function_path)?, LemmaTable::load(lemma_path)?))
}
