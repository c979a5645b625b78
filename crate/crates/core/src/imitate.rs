//! Persona-conditioned revision that keeps the hidden payload.
//!
//! The revision backend only ever sees the visible text. Any frame carried
//! by the input is extracted first and embedded again into whatever the
//! backend returns, so the payload survives a backend that normalizes or
//! drops invisible code points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{string_field, BackendError, HttpEndpoint};
use crate::stego::{self, StegoError};

pub const DEFAULT_PROMPT: &str = include_str!("../../../config/prompt.txt");
pub const PERSONA_FIELDS: [&str; 4] = ["{gender}", "{age}", "{education}", "{nationality}"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImitateError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("persona pool `{0}` is empty")]
    EmptyPool(&'static str),
    #[error("payload lost: revised text has {available} slots, frame needs {needed}")]
    PayloadLost { needed: usize, available: usize },
    #[error("corrupt frame in input: {0}")]
    Stego(StegoError),
    #[error("prompt template lacks placeholder {0}")]
    Template(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Persona {
    pub gender: String,
    pub age_band: String,
    pub education: String,
    pub nationality: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersonaPools {
    pub genders: Vec<String>,
    pub age_bands: Vec<String>,
    pub educations: Vec<String>,
    pub nationalities: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for PersonaPools {
    fn default() -> Self {
        PersonaPools {
            genders: strings(&["woman", "man", "non-binary person"]),
            age_bands: strings(&["18-24", "25-34", "35-44", "45-54", "55-64", "65+"]),
            educations: strings(&[
                "secondary school",
                "vocational training",
                "a bachelor's degree",
                "a master's degree",
                "a doctorate",
            ]),
            nationalities: strings(&[
                "Australia",
                "Canada",
                "India",
                "Ireland",
                "Nigeria",
                "South Africa",
                "the United Kingdom",
                "the United States",
            ]),
        }
    }
}

pub fn sample_persona(pools: &PersonaPools, seed: u64) -> Result<Persona, ImitateError> {
    let pick = |rng: &mut ChaCha8Rng, pool: &[String], name: &'static str| {
        if pool.is_empty() {
            Err(ImitateError::EmptyPool(name))
        } else {
            Ok(pool[rng.gen_range(0..pool.len())].clone())
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Persona {
        gender: pick(&mut rng, &pools.genders, "genders")?,
        age_band: pick(&mut rng, &pools.age_bands, "age_bands")?,
        education: pick(&mut rng, &pools.educations, "educations")?,
        nationality: pick(&mut rng, &pools.nationalities, "nationalities")?,
    })
}

pub fn render_prompt(template: &str, persona: &Persona) -> String {
    template
        .replace("{gender}", &persona.gender)
        .replace("{age}", &persona.age_band)
        .replace("{education}", &persona.education)
        .replace("{nationality}", &persona.nationality)
}

/// Body of a revision call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionRequest {
    pub prompt: String,
    pub text: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RevisionBackend {
    Stub,
    Http(HttpEndpoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImitationConfig {
    pub backend: RevisionBackend,
    pub prompt_template: String,
    pub pools: PersonaPools,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        ImitationConfig {
            backend: RevisionBackend::Stub,
            prompt_template: DEFAULT_PROMPT.trim_end().to_string(),
            pools: PersonaPools::default(),
        }
    }
}

impl ImitationConfig {
    pub fn validate(&self) -> Result<(), ImitateError> {
        for field in PERSONA_FIELDS {
            if !self.prompt_template.contains(field) {
                return Err(ImitateError::Template(field));
            }
        }
        let pools = &self.pools;
        for (pool, name) in [
            (&pools.genders, "genders"),
            (&pools.age_bands, "age_bands"),
            (&pools.educations, "educations"),
            (&pools.nationalities, "nationalities"),
        ] {
            if pool.is_empty() {
                return Err(ImitateError::EmptyPool(name));
            }
        }
        Ok(())
    }
}

/// Offline proofreading: trims, collapses whitespace, capitalizes each
/// sentence's first letter and ends the text with a period when it has no
/// terminal `.`, `!` or `?`.
pub fn stub_revise(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        return collapsed;
    }
    let mut out = String::with_capacity(collapsed.len() + 1);
    let mut capitalize = true;
    for c in collapsed.chars() {
        if capitalize && c.is_alphabetic() {
            out.extend(c.to_uppercase());
            capitalize = false;
        } else {
            out.push(c);
        }
        if matches!(c, '.' | '!' | '?') {
            capitalize = true;
        }
    }
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Imitation {
    pub text: String,
    pub persona: Persona,
}

fn http_revise(request: &RevisionRequest, endpoint: &HttpEndpoint) -> Result<String, BackendError> {
    let body = serde_json::to_value(request).expect("request serializes");
    let resp = endpoint.post_json(&body)?;
    string_field(&resp, "revised")
}

pub fn imitate(text: &str, cfg: &ImitationConfig, seed: u64) -> Result<Imitation, ImitateError> {
    cfg.validate()?;
    let payload = match stego::extract(text) {
        Ok(p) => Some(p),
        Err(StegoError::NoFrame) => None,
        Err(e) => return Err(ImitateError::Stego(e)),
    };
    let visible = stego::strip(text);
    let persona = sample_persona(&cfg.pools, seed)?;
    let revised = match &cfg.backend {
        RevisionBackend::Stub => stub_revise(&visible),
        RevisionBackend::Http(endpoint) => {
            let request = RevisionRequest {
                prompt: render_prompt(&cfg.prompt_template, &persona),
                text: visible,
                seed,
            };
            stego::strip(&http_revise(&request, endpoint)?)
        }
    };
    let text = match payload {
        None => revised,
        Some(p) => stego::embed(&revised, &p).map_err(|e| match e {
            StegoError::Capacity { needed, available } => ImitateError::PayloadLost { needed, available },
            other => ImitateError::Stego(other),
        })?,
    };
    Ok(Imitation { text, persona })
}
