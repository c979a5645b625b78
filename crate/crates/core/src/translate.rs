//! Round-trip translation through pivot languages.
//!
//! Two backends are available. The HTTP backend speaks a small JSON
//! contract (`{"q", "source", "target"}` in, `{"translatedText"}` out) that
//! LibreTranslate-style servers implement. The offline stub reproduces the
//! lexical damage a round trip through machine translation typically does:
//! articles vanish, proper nouns collapse into a function word, and a drift
//! table swaps some words for near-synonyms.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backend::{string_field, BackendError, HttpEndpoint};
use crate::textcore::{content_lines, is_alpha_word, read_text_file, FunctionWordList, LexiconError};

/// Two-letter lowercase language code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageCode(String);

impl LanguageCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for LanguageCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() == 2 && s.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(LanguageCode(s.to_string()))
        } else {
            Err(format!("invalid language code `{s}` (expected two lowercase letters)"))
        }
    }
}

impl TryFrom<String> for LanguageCode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<LanguageCode> for String {
    fn from(c: LanguageCode) -> String {
        c.0
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftLexicon {
    pub drift: HashMap<String, String>,
    pub articles: HashSet<String>,
    pub placeholder: String,
}

impl Default for DriftLexicon {
    fn default() -> Self {
        DriftLexicon {
            drift: HashMap::new(),
            articles: ["the", "a", "an"].into_iter().map(String::from).collect(),
            placeholder: "they".into(),
        }
    }
}

impl DriftLexicon {
    /// Parses `word<TAB>replacement` rows plus the `@articles` and
    /// `@placeholder` directives.
    pub fn parse(src: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut lex = DriftLexicon::default();
        for (line_no, line) in content_lines(src) {
            let bad = |msg: String| LexiconError::parse(source_name, line_no, msg);
            if let Some(rest) = line.trim().strip_prefix('@') {
                let (name, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let value = value.trim().to_lowercase();
                match name {
                    "articles" => {
                        lex.articles = value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(String::from)
                            .collect();
                        if let Some(a) = lex.articles.iter().find(|a| !is_alpha_word(a)) {
                            return Err(bad(format!("article `{a}` is not alphabetic")));
                        }
                    }
                    "placeholder" => {
                        if !is_alpha_word(&value) {
                            return Err(bad(format!("placeholder `{value}` is not alphabetic")));
                        }
                        lex.placeholder = value;
                    }
                    other => return Err(bad(format!("unknown directive `@{other}`"))),
                }
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [word, replacement] = cols.as_slice() else {
                return Err(bad(format!("expected 2 tab-separated columns, found {}", cols.len())));
            };
            let (word, replacement) = (word.to_lowercase(), replacement.to_lowercase());
            if !is_alpha_word(&word) || !is_alpha_word(&replacement) {
                return Err(bad("drift entries must be single alphabetic words".into()));
            }
            lex.drift.insert(word, replacement);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let src = read_text_file(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    /// The placeholder must be a function word.
    pub fn check_placeholder(&self, fwl: &FunctionWordList) -> Result<(), String> {
        if fwl.contains(&self.placeholder) {
            Ok(())
        } else {
            Err(format!("placeholder `{}` is not a function word", self.placeholder))
        }
    }
}

#[derive(Debug, Clone)]
pub enum TranslationBackend {
    Stub(DriftLexicon),
    Http(HttpEndpoint),
}

#[derive(Debug, Clone)]
pub struct RoundTripConfig {
    pub source: LanguageCode,
    pub pivots: Vec<LanguageCode>,
    pub backend: TranslationBackend,
}

/// Splits a whitespace chunk into (leading non-letters, letters-to-letters body, trailing non-letters).
fn split_chunk(chunk: &str) -> (&str, &str, &str) {
    let Some(first) = chunk.find(char::is_alphabetic) else {
        return (chunk, "", "");
    };
    let last = chunk
        .char_indices()
        .filter(|(_, c)| c.is_alphabetic())
        .map(|(i, c)| i + c.len_utf8())
        .next_back()
        .unwrap_or(first);
    (&chunk[..first], &chunk[first..last], &chunk[last..])
}

fn ends_sentence(s: &str) -> bool {
    s.contains(['.', '!', '?'])
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn is_first_person(body: &str) -> bool {
    body == "I" || body.starts_with("I'") || body.starts_with("I\u{2019}")
}

fn capitalize_like(word: &str, original: &str) -> String {
    if !starts_upper(original) {
        return word.to_string();
    }
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Offline translation hop.
///
/// Rules, applied per whitespace-separated word: articles are deleted; a
/// capitalized word that does not start a sentence is replaced by the
/// placeholder (the pronoun "I" excepted); the rest goes through the drift
/// table. Punctuation attached to a word stays attached.
pub fn stub_translate(text: &str, _from: &LanguageCode, _to: &LanguageCode, lex: &DriftLexicon) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut sentence_start = true;
    for chunk in text.split_whitespace() {
        let (prefix, body, suffix) = split_chunk(chunk);
        if body.is_empty() {
            if ends_sentence(chunk) {
                sentence_start = true;
            }
            out.push(chunk.to_string());
            continue;
        }
        let initial = sentence_start;
        sentence_start = ends_sentence(suffix);

        let lower = body.to_lowercase();
        if lex.articles.contains(&lower) {
            let rest = format!("{prefix}{suffix}");
            if !rest.is_empty() {
                out.push(rest);
            }
            continue;
        }
        let word = if starts_upper(body) && !initial && !is_first_person(body) {
            lex.placeholder.clone()
        } else {
            body.to_string()
        };
        let word = match lex.drift.get(&word.to_lowercase()) {
            Some(rep) => capitalize_like(rep, &word),
            None => word,
        };
        out.push(format!("{prefix}{word}{suffix}"));
    }
    out.join(" ")
}

fn http_translate(
    text: &str,
    from: &LanguageCode,
    to: &LanguageCode,
    endpoint: &HttpEndpoint,
) -> Result<String, BackendError> {
    let body = serde_json::json!({"q": text, "source": from.as_str(), "target": to.as_str()});
    let resp = endpoint.post_json(&body)?;
    string_field(&resp, "translatedText")
}

/// Translates `source → p1 → … → pk → source`.
pub fn round_trip(text: &str, cfg: &RoundTripConfig) -> Result<String, BackendError> {
    if cfg.pivots.is_empty() {
        return Ok(text.to_string());
    }
    let hops: Vec<&LanguageCode> = std::iter::once(&cfg.source)
        .chain(cfg.pivots.iter())
        .chain(std::iter::once(&cfg.source))
        .collect();
    let mut current = text.to_string();
    for pair in hops.windows(2) {
        current = match &cfg.backend {
            TranslationBackend::Stub(lex) => stub_translate(&current, pair[0], pair[1], lex),
            TranslationBackend::Http(ep) => http_translate(&current, pair[0], pair[1], ep)?,
        };
    }
    Ok(current)
}
