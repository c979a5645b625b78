//! Ordered transform stages over single records and whole corpora.
//!
//! Every record gets its own seed, hashed from the master seed and the
//! record id, so a record's output never depends on its neighbours, on
//! corpus order, or on how many worker threads ran.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hasher;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fnv::FnvHasher;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::HttpEndpoint;
use crate::imitate::{imitate, ImitationConfig, Persona, PersonaPools, RevisionBackend, DEFAULT_PROMPT};
use crate::obfuscate::{Paraphraser, SynonymLexicon};
use crate::stego::{self, Payload, MAX_PAYLOAD_BYTES};
use crate::textcore::{read_text_file, Document, FunctionWordList, LemmaTable, LexiconError};
use crate::translate::{round_trip, DriftLexicon, LanguageCode, RoundTripConfig, TranslationBackend};

pub const BUNDLED_FUNCTION_WORDS: &str = include_str!("../../../lexicons/function_words.txt");
pub const BUNDLED_LEMMAS: &str = include_str!("../../../lexicons/lemmas.tsv");
pub const BUNDLED_SYNONYMS: &str = include_str!("../../../lexicons/synonyms.tsv");
pub const BUNDLED_DRIFT: &str = include_str!("../../../lexicons/drift.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepId {
    Translate,
    Obfuscate,
    Stego,
    Imitate,
}

impl StepId {
    pub fn as_str(self) -> &'static str {
        match self {
            StepId::Translate => "TRANSLATE",
            StepId::Obfuscate => "OBFUSCATE",
            StepId::Stego => "STEGO",
            StepId::Imitate => "IMITATE",
        }
    }
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "TRANSLATE" => Ok(StepId::Translate),
            "OBFUSCATE" => Ok(StepId::Obfuscate),
            "STEGO" => Ok(StepId::Stego),
            "IMITATE" => Ok(StepId::Imitate),
            _ => Err(format!("unknown step `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    V1,
    V2,
}

impl Preset {
    pub fn steps(self) -> Vec<StepId> {
        match self {
            Preset::V1 => vec![StepId::Translate, StepId::Obfuscate, StepId::Stego],
            Preset::V2 => vec![StepId::Translate, StepId::Obfuscate, StepId::Stego, StepId::Imitate],
        }
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "v1" => Ok(Preset::V1),
            "v2" => Ok(Preset::V2),
            _ => Err(format!("unknown preset `{s}` (expected v1 or v2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadPolicy {
    /// The same bytes for every record, hex-encoded.
    FixedHex(String),
    /// `k` bytes drawn from each record's seed.
    RandomBytes(usize),
}

impl Default for PayloadPolicy {
    fn default() -> Self {
        PayloadPolicy::RandomBytes(4)
    }
}

impl PayloadPolicy {
    fn payload_for(&self, seed: u64) -> Result<Payload, String> {
        match self {
            PayloadPolicy::FixedHex(h) => {
                let bytes = hex::decode(h).map_err(|e| format!("payload hex `{h}`: {e}"))?;
                Payload::new(bytes).map_err(|e| e.to_string())
            }
            PayloadPolicy::RandomBytes(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut bytes = vec![0u8; *k];
                rng.fill_bytes(&mut bytes);
                Payload::new(bytes).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendSetting {
    Stub,
    Http(HttpEndpoint),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranslateSettings {
    pub source: LanguageCode,
    pub pivots: Vec<LanguageCode>,
    pub backend: BackendSetting,
}

impl Default for TranslateSettings {
    fn default() -> Self {
        TranslateSettings {
            source: "en".parse().expect("valid code"),
            pivots: vec!["fr".parse().expect("valid code")],
            backend: BackendSetting::Stub,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObfuscateSettings {
    /// Fraction of eligible tokens that get a synonym.
    pub rate: f64,
}

impl Default for ObfuscateSettings {
    fn default() -> Self {
        ObfuscateSettings { rate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImitateSettings {
    pub backend: BackendSetting,
    /// Prompt template file; the bundled template when absent.
    pub prompt: Option<PathBuf>,
    pub pools: PersonaPools,
}

impl Default for ImitateSettings {
    fn default() -> Self {
        ImitateSettings {
            backend: BackendSetting::Stub,
            prompt: None,
            pools: PersonaPools::default(),
        }
    }
}

/// Lexicon files; the bundled copies are used for any that are left out.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub function_words: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub drift: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub steps: Vec<StepId>,
    pub seed: u64,
    pub payload: PayloadPolicy,
    pub parallelism: usize,
    pub fail_fast: bool,
    pub translate: TranslateSettings,
    pub obfuscate: ObfuscateSettings,
    pub imitate: ImitateSettings,
    pub lexicons: LexiconPaths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::preset(Preset::V2)
    }
}

impl PipelineConfig {
    pub fn preset(preset: Preset) -> Self {
        PipelineConfig {
            steps: preset.steps(),
            seed: 0,
            payload: PayloadPolicy::default(),
            parallelism: 1,
            fail_fast: false,
            translate: TranslateSettings::default(),
            obfuscate: ObfuscateSettings::default(),
            imitate: ImitateSettings::default(),
            lexicons: LexiconPaths::default(),
        }
    }

    pub fn from_json(src: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = serde_json::from_str(src).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let src = read_text_file(path)?;
        Self::from_json(&src)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        let mut seen = HashSet::new();
        for s in &self.steps {
            if !seen.insert(s) {
                return bad(format!("step {s} listed twice"));
            }
        }
        match &self.payload {
            PayloadPolicy::RandomBytes(k) if *k > MAX_PAYLOAD_BYTES => {
                return bad(format!("payload of {k} bytes exceeds {MAX_PAYLOAD_BYTES}"))
            }
            p @ PayloadPolicy::FixedHex(_) => {
                p.payload_for(0).map_err(PipelineError::Config)?;
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.obfuscate.rate) {
            return bad(format!(
                "obfuscate.rate must lie in [0, 1], got {}",
                self.obfuscate.rate
            ));
        }
        for b in [&self.translate.backend, &self.imitate.backend] {
            if let BackendSetting::Http(e) = b {
                e.validate().map_err(PipelineError::Config)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("duplicate record id `{0}`")]
    DuplicateIds(String),
    #[error("record `{id}` failed at {stage}: {error}")]
    Stage { id: String, stage: StepId, error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordStatus {
    Ok,
    Failed { stage: StepId, error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: StepId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordResult {
    pub id: String,
    pub seed: u64,
    pub input: String,
    pub snapshots: Vec<Snapshot>,
    /// Output of the last stage; `None` when a stage failed.
    pub final_text: Option<String>,
    pub persona: Option<Persona>,
    /// Hex of the embedded payload, when STEGO ran.
    pub payload: Option<String>,
    #[serde(flatten)]
    pub status: RecordStatus,
}

impl RecordResult {
    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }
}

/// FNV-1a over the master seed (little-endian) followed by the id's UTF-8 bytes.
pub fn record_seed(master: u64, id: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&master.to_le_bytes());
    h.write(id.as_bytes());
    h.finish()
}

fn load_or<T>(
    path: &Option<PathBuf>,
    bundled: &str,
    name: &str,
    parse: fn(&str, &str) -> Result<T, LexiconError>,
) -> Result<T, LexiconError> {
    match path {
        Some(p) => parse(&read_text_file(p)?, &p.display().to_string()),
        None => parse(bundled, name),
    }
}

/// Lexicons shared by every stage.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub function_words: FunctionWordList,
    pub lemmas: LemmaTable,
    pub synonyms: SynonymLexicon,
    pub drift: DriftLexicon,
}

impl Lexicons {
    pub fn bundled() -> Result<Self, LexiconError> {
        Self::load(&LexiconPaths::default())
    }

    pub fn load(paths: &LexiconPaths) -> Result<Self, LexiconError> {
        Ok(Lexicons {
            function_words: load_or(
                &paths.function_words,
                BUNDLED_FUNCTION_WORDS,
                "function_words.txt",
                FunctionWordList::parse,
            )?,
            lemmas: load_or(&paths.lemmas, BUNDLED_LEMMAS, "lemmas.tsv", LemmaTable::parse)?,
            synonyms: load_or(&paths.synonyms, BUNDLED_SYNONYMS, "synonyms.tsv", SynonymLexicon::parse)?,
            drift: load_or(&paths.drift, BUNDLED_DRIFT, "drift.tsv", DriftLexicon::parse)?,
        })
    }
}

/// A validated config with its lexicons and backends ready to run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    lex: Lexicons,
    translate: RoundTripConfig,
    imitation: ImitationConfig,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self, PipelineError> {
        let lex = Lexicons::load(&cfg.lexicons)?;
        Self::with_lexicons(cfg, lex)
    }

    pub fn with_lexicons(cfg: PipelineConfig, lex: Lexicons) -> Result<Self, PipelineError> {
        cfg.validate()?;
        lex.drift
            .check_placeholder(&lex.function_words)
            .map_err(PipelineError::Config)?;
        let translate = RoundTripConfig {
            source: cfg.translate.source.clone(),
            pivots: cfg.translate.pivots.clone(),
            backend: match &cfg.translate.backend {
                BackendSetting::Stub => TranslationBackend::Stub(lex.drift.clone()),
                BackendSetting::Http(e) => TranslationBackend::Http(e.clone()),
            },
        };
        let prompt_template = match &cfg.imitate.prompt {
            Some(p) => read_text_file(p)?.trim_end().to_string(),
            None => DEFAULT_PROMPT.trim_end().to_string(),
        };
        let imitation = ImitationConfig {
            backend: match &cfg.imitate.backend {
                BackendSetting::Stub => RevisionBackend::Stub,
                BackendSetting::Http(e) => RevisionBackend::Http(e.clone()),
            },
            prompt_template,
            pools: cfg.imitate.pools.clone(),
        };
        if cfg.steps.contains(&StepId::Imitate) {
            imitation.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        Ok(Pipeline {
            cfg,
            lex,
            translate,
            imitation,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lex
    }

    pub fn run_record(&self, doc: &Document) -> RecordResult {
        let seed = record_seed(self.cfg.seed, &doc.id);
        let mut result = RecordResult {
            id: doc.id.clone(),
            seed,
            input: doc.text.clone(),
            snapshots: Vec::with_capacity(self.cfg.steps.len()),
            final_text: None,
            persona: None,
            payload: None,
            status: RecordStatus::Ok,
        };
        let mut text = doc.text.clone();
        for &step in &self.cfg.steps {
            match self.apply(step, &text, seed, &mut result) {
                Ok(next) => {
                    result.snapshots.push(Snapshot {
                        step,
                        text: next.clone(),
                    });
                    text = next;
                }
                Err(error) => {
                    result.status = RecordStatus::Failed { stage: step, error };
                    return result;
                }
            }
        }
        result.final_text = Some(text);
        result
    }

    fn apply(&self, step: StepId, text: &str, seed: u64, result: &mut RecordResult) -> Result<String, String> {
        match step {
            StepId::Translate => round_trip(text, &self.translate).map_err(|e| e.to_string()),
            StepId::Obfuscate => Ok(Paraphraser::new(&self.lex.synonyms, &self.lex.function_words)
                .with_lemmas(&self.lex.lemmas)
                .with_rate(self.cfg.obfuscate.rate)
                .paraphrase(text, seed)),
            StepId::Stego => {
                let payload = self.cfg.payload.payload_for(seed)?;
                let out = stego::embed(text, &payload).map_err(|e| e.to_string())?;
                result.payload = Some(payload.to_hex());
                Ok(out)
            }
            StepId::Imitate => {
                let imitation = imitate(text, &self.imitation, seed).map_err(|e| e.to_string())?;
                result.persona = Some(imitation.persona);
                Ok(imitation.text)
            }
        }
    }

    /// Runs every record, at most `parallelism` at a time. Results come back
    /// in input order. With `fail_fast`, the first failure in input order is
    /// returned as an error instead.
    pub fn run_corpus(&self, docs: &[Document]) -> Result<Vec<RecordResult>, PipelineError> {
        let mut seen = HashSet::new();
        for d in docs {
            if !seen.insert(d.id.as_str()) {
                return Err(PipelineError::DuplicateIds(d.id.clone()));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.parallelism)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let results: Vec<RecordResult> = if self.cfg.fail_fast {
            let mut out = Vec::with_capacity(docs.len());
            for chunk in docs.chunks(self.cfg.parallelism) {
                let batch: Vec<RecordResult> = pool.install(|| chunk.par_iter().map(|d| self.run_record(d)).collect());
                for r in batch {
                    if let RecordStatus::Failed { stage, error } = &r.status {
                        return Err(PipelineError::Stage {
                            id: r.id.clone(),
                            stage: *stage,
                            error: error.clone(),
                        });
                    }
                    out.push(r);
                }
            }
            out
        } else {
            pool.install(|| docs.par_iter().map(|d| self.run_record(d)).collect())
        };
        Ok(results)
    }
}

pub fn run_record(doc: &Document, cfg: &PipelineConfig) -> Result<RecordResult, PipelineError> {
    Ok(Pipeline::new(cfg.clone())?.run_record(doc))
}

pub fn run_corpus(docs: &[Document], cfg: &PipelineConfig) -> Result<Vec<RecordResult>, PipelineError> {
    Pipeline::new(cfg.clone())?.run_corpus(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::testserver::dead_url;
    use crate::stego::{extract, strip};

    const SAMPLE: &str =
        "We drove from Denver to the coast in three days and the weather stayed perfect the whole trip.";

    fn pipeline(cfg: PipelineConfig) -> Pipeline {
        Pipeline::new(cfg).unwrap()
    }

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, text)
    }

    #[test]
    fn identity_pipeline() {
        let cfg = PipelineConfig {
            steps: vec![],
            ..Default::default()
        };
        let r = pipeline(cfg).run_record(&doc("a", SAMPLE));
        assert!(r.is_ok());
        assert_eq!(r.final_text.as_deref(), Some(SAMPLE));
        assert!(r.snapshots.is_empty());
    }

    #[test]
    fn v1_hides_payload_and_changes_text() {
        let r = pipeline(PipelineConfig::preset(Preset::V1)).run_record(&doc("a", SAMPLE));
        assert!(r.is_ok(), "{:?}", r.status);
        let out = r.final_text.unwrap();
        assert_eq!(extract(&out).unwrap().to_hex(), r.payload.unwrap());
        assert_ne!(strip(&out), SAMPLE);
        assert!(!strip(&out).contains("Denver"));
        let steps: Vec<StepId> = r.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(steps, Preset::V1.steps());
        assert!(r.persona.is_none());
    }

    #[test]
    fn v2_preserves_payload_and_records_persona() {
        let r = pipeline(PipelineConfig::default()).run_record(&doc("a", SAMPLE));
        let out = r.final_text.clone().unwrap();
        assert_eq!(extract(&out).unwrap().to_hex(), r.payload.clone().unwrap());
        assert!(r.persona.is_some());
        assert_eq!(r.payload.unwrap().len(), 8);
    }

    #[test]
    fn removing_imitate_keeps_earlier_snapshots() {
        let d = doc("x", SAMPLE);
        let v2 = pipeline(PipelineConfig::preset(Preset::V2)).run_record(&d);
        let v1 = pipeline(PipelineConfig::preset(Preset::V1)).run_record(&d);
        assert_eq!(v1.snapshots[..], v2.snapshots[..3]);
    }

    #[test]
    fn seeds_depend_on_id_not_position() {
        assert_ne!(record_seed(1, "a"), record_seed(1, "b"));
        assert_ne!(record_seed(1, "a"), record_seed(2, "a"));
        let p = pipeline(PipelineConfig::default());
        let a = doc("a", SAMPLE);
        let b = doc("b", "Another short text with several words in it for the carrier.");
        let forward = p.run_corpus(&[a.clone(), b.clone()]).unwrap();
        let backward = p.run_corpus(&[b, a]).unwrap();
        assert_eq!(forward[0], backward[1]);
        assert_eq!(forward[1], backward[0]);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let docs: Vec<Document> = (0..24)
            .map(|i| {
                doc(
                    &format!("r{i}"),
                    &format!("{SAMPLE} Record number {i} says hello to everyone."),
                )
            })
            .collect();
        let serial = pipeline(PipelineConfig::default()).run_corpus(&docs).unwrap();
        let parallel = pipeline(PipelineConfig {
            parallelism: 8,
            ..Default::default()
        })
        .run_corpus(&docs)
        .unwrap();
        assert_eq!(serial, parallel);
        assert!(serial.iter().all(RecordResult::is_ok));
        assert_eq!(
            serial.iter().map(|r| r.id.as_str()).collect::<Vec<_>>()[..3],
            ["r0", "r1", "r2"]
        );
    }

    #[test]
    fn failing_record_is_isolated() {
        let cfg = PipelineConfig {
            payload: PayloadPolicy::FixedHex("00112233".into()),
            ..PipelineConfig::preset(Preset::V1)
        };
        let docs = [doc("ok", SAMPLE), doc("tiny", "hi"), doc("ok2", SAMPLE)];
        let results = pipeline(cfg.clone()).run_corpus(&docs).unwrap();
        assert!(results[0].is_ok() && results[2].is_ok());
        match &results[1].status {
            RecordStatus::Failed { stage, error } => {
                assert_eq!(*stage, StepId::Stego);
                assert!(error.contains("too small"), "{error}");
            }
            other => panic!("{other:?}"),
        }
        assert!(results[1].final_text.is_none());

        let strict = PipelineConfig { fail_fast: true, ..cfg };
        match pipeline(strict).run_corpus(&docs) {
            Err(PipelineError::Stage { id, stage, .. }) => assert_eq!((id.as_str(), stage), ("tiny", StepId::Stego)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let p = pipeline(PipelineConfig::default());
        assert!(matches!(
            p.run_corpus(&[doc("a", SAMPLE), doc("a", SAMPLE)]),
            Err(PipelineError::DuplicateIds(id)) if id == "a"
        ));
    }

    #[test]
    fn backend_failure_is_recorded() {
        let mut endpoint = HttpEndpoint::new(dead_url());
        endpoint.retries = 0;
        endpoint.backoff_ms = 0;
        let cfg = PipelineConfig {
            translate: TranslateSettings {
                backend: BackendSetting::Http(endpoint),
                ..Default::default()
            },
            ..Default::default()
        };
        let r = pipeline(cfg).run_record(&doc("a", SAMPLE));
        assert!(matches!(
            r.status,
            RecordStatus::Failed {
                stage: StepId::Translate,
                ..
            }
        ));
    }

    #[test]
    fn config_json() {
        let cfg = PipelineConfig::from_json(
            r#"{"steps": ["TRANSLATE", "STEGO"], "seed": 7, "payload": {"fixed_hex": "41"},
                "parallelism": 4,
                "translate": {"pivots": ["de", "fr"], "backend": {"kind": "http", "url": "http://127.0.0.1:9/translate"}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.steps, [StepId::Translate, StepId::Stego]);
        assert_eq!(cfg.payload, PayloadPolicy::FixedHex("41".into()));
        assert_eq!(cfg.translate.pivots.len(), 2);
        assert!(matches!(cfg.translate.backend, BackendSetting::Http(ref e) if e.retries == 2));
        let round = serde_json::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_json(&round).unwrap(), cfg);

        for bad in [
            r#"{"parallelism": 0}"#,
            r#"{"steps": ["STEGO", "STEGO"]}"#,
            r#"{"payload": {"random_bytes": 9000}}"#,
            r#"{"payload": {"fixed_hex": "zz"}}"#,
            r#"{"unknown": 1}"#,
            r#"{"translate": {"backend": {"kind": "http", "url": "x", "bogus": 1}}}"#,
        ] {
            assert!(PipelineConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn result_json_shape() {
        let r = pipeline(PipelineConfig::preset(Preset::V1)).run_record(&doc("a", SAMPLE));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["status"], "OK");
        assert_eq!(v["snapshots"][2]["step"], "STEGO");
        let failed = RecordResult {
            status: RecordStatus::Failed {
                stage: StepId::Stego,
                error: "x".into(),
            },
            ..r
        };
        let v = serde_json::to_value(&failed).unwrap();
        assert_eq!(v["status"], "FAILED");
        assert_eq!(v["stage"], "STEGO");
    }

    #[test]
    fn bundled_lexicons_load() {
        let lex = Lexicons::bundled().unwrap();
        assert!(lex.function_words.contains("they"));
        assert!(lex.lemmas.len() > 10_000);
        assert!(lex.synonyms.len() >= 1_000);
        lex.drift.check_placeholder(&lex.function_words).unwrap();
    }
}
