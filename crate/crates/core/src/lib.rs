//! Adversarial stylometry toolkit.
//!
//! The transform side rewrites text through round-trip translation,
//! synonym paraphrase, zero-width steganography and persona-conditioned
//! revision. The audit side measures what those stages leave behind:
//! lexical features, information-gain ranking, decision trees and forests,
//! and Burrows's Delta clustering.
//!
//! ```
//! use anonstyle::stego::{embed, extract, strip, Payload};
//! use anonstyle::textcore::{tokenize, TokenMode};
//!
//! let carrier = "hello there friend";
//! let hidden = embed(carrier, &Payload::new(vec![0x41]).unwrap()).unwrap();
//! assert_eq!(extract(&hidden).unwrap().to_hex(), "41");
//! assert_eq!(strip(&hidden), carrier);
//! // one extra token per marker and bit
//! assert_eq!(tokenize(&hidden, TokenMode::Raw).len(), 3 + 10);
//! assert_eq!(tokenize(&hidden, TokenMode::Sanitized).len(), 3);
//! ```

pub mod attribution;
pub mod backend;
pub mod cli;
pub mod corpus;
pub mod imitate;
pub mod obfuscate;
pub mod pipeline;
pub mod selection;
pub mod stego;
pub mod stylometry;
pub mod textcore;
pub mod translate;

use attribution::AttributionError;
use backend::BackendError;
use corpus::CorpusError;
use imitate::ImitateError;
use pipeline::PipelineError;
use selection::SelectionError;
use stego::StegoError;
use textcore::LexiconError;

/// Any error surfaced by the library, with a short stable code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Stego(#[from] StegoError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Imitate(#[from] ImitateError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Usage(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Lexicon(_) => "lexicon",
            Error::Stego(StegoError::Capacity { .. }) => "capacity",
            Error::Stego(StegoError::NoFrame) => "no_frame",
            Error::Stego(_) => "stego",
            Error::Backend(BackendError::Malformed(_)) => "backend_malformed",
            Error::Backend(_) => "backend_unavailable",
            Error::Imitate(ImitateError::PayloadLost { .. }) => "payload_lost",
            Error::Imitate(ImitateError::Backend(BackendError::Malformed(_))) => "backend_malformed",
            Error::Imitate(ImitateError::Backend(_)) => "backend_unavailable",
            Error::Imitate(_) => "imitate",
            Error::Selection(_) => "selection",
            Error::Attribution(_) => "attribution",
            Error::Corpus(CorpusError::MissingFile(_)) => "missing_file",
            Error::Corpus(CorpusError::BadHeader { .. }) => "bad_header",
            Error::Corpus(CorpusError::BadLabel { .. }) => "bad_label",
            Error::Corpus(CorpusError::DuplicateId(_)) => "duplicate_id",
            Error::Corpus(_) => "corpus",
            Error::Pipeline(PipelineError::Config(_)) => "config",
            Error::Pipeline(PipelineError::Lexicon(_)) => "lexicon",
            Error::Pipeline(PipelineError::DuplicateIds(_)) => "duplicate_id",
            Error::Pipeline(PipelineError::Stage { .. }) => "stage_failed",
            Error::Usage(_) => "usage",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit status: 2 for bad invocations, inputs or config, 1 for
    /// failures while doing the work.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Lexicon(_) => 2,
            Error::Corpus(
                CorpusError::MissingFile(_)
                | CorpusError::BadHeader { .. }
                | CorpusError::BadLabel { .. }
                | CorpusError::DuplicateId(_)
                | CorpusError::Csv(_)
                | CorpusError::BadValue { .. },
            ) => 2,
            Error::Pipeline(PipelineError::Config(_) | PipelineError::Lexicon(_) | PipelineError::DuplicateIds(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tokens.md")]
    mod tokens {}
    #[doc = include_str!("../../../book/src/hiding.md")]
    mod hiding {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/delta.md")]
    mod delta {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
