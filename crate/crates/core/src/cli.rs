//! Command-line front end. [`run`] takes the argument list and output
//! streams explicitly so it can be driven in-process.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::attribution::{delta_matrix, to_newick, upgma, DEFAULT_MFW};
use crate::corpus::{
    self, feature_matrix, import_csv, import_pairs, pair_up, read_feature_csv, write_feature_csv, FeatureRow, Label,
    LabeledRecord, PairRecord,
};
use crate::pipeline::{Lexicons, Pipeline, PipelineConfig, Preset, RecordResult, RecordStatus};
use crate::selection::{rank_features, train_forest, train_tree, ForestConfig, ForestModel, TreeConfig};
use crate::stego::{self, Payload};
use crate::stylometry::extract_features;
use crate::textcore::{Document, TokenMode};
use crate::Error;

pub const SAMPLE_CORPUS: &str = include_str!("../../../data/sample_corpus.csv");

#[derive(Debug, Parser)]
#[command(
    name = "anonstyle",
    version,
    about = "Text anonymization pipeline and stylometric audit tools"
)]
pub struct Cli {
    /// Master seed for every seeded stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pipeline config file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Step preset: v1 (translate, obfuscate, stego) or v2 (adds imitate).
    #[arg(long, global = true)]
    pub preset: Option<Preset>,
    /// Tokenization mode: raw or sanitized.
    #[arg(long, global = true)]
    pub mode: Option<TokenMode>,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline over a dataset CSV or a single text.
    Run(RunArgs),
    /// Embed, extract or strip hidden payloads.
    #[command(subcommand)]
    Stego(StegoCommand),
    /// Write the feature CSV of a dataset or a single text.
    Features(FeaturesArgs),
    /// Rank features by information gain.
    Rank(RankArgs),
    /// Train a forest (or a single tree) on a feature CSV.
    Train(TrainArgs),
    /// Label the rows of a feature CSV with a trained model.
    Classify(ClassifyArgs),
    /// Burrows's Delta matrix and UPGMA tree over a directory of texts.
    Delta(DeltaArgs),
    /// Write pairs as numbered text files.
    ExportPairs(ExportArgs),
    /// Print the bundled sample corpus.
    SampleCorpus(OutArg),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset CSV (`label,text` or `text_id,label,text`).
    #[arg(long = "in", conflicts_with = "text", required_unless_present = "text")]
    pub input: Option<PathBuf>,
    /// A single text; the final text is printed.
    #[arg(long)]
    pub text: Option<String>,
    /// Results CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Paired CSV of inputs and outputs for successful records.
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
    /// Dataset CSV with each input (label 0) followed by its output (label 1).
    #[arg(long)]
    pub dataset_out: Option<PathBuf>,
    /// JSON lines with every stage snapshot.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Stop at the first failed record.
    #[arg(long)]
    pub fail_fast: bool,
    /// Fixed payload for every record, as hex.
    #[arg(long)]
    pub payload_hex: Option<String>,
}

#[derive(Debug, Args)]
pub struct TextSource {
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub text: Option<String>,
    /// Read the text from a file, byte for byte.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StegoCommand {
    Embed {
        #[command(flatten)]
        source: TextSource,
        #[arg(long, conflicts_with = "payload_file", required_unless_present = "payload_file")]
        payload_hex: Option<String>,
        /// Raw payload bytes from a file.
        #[arg(long)]
        payload_file: Option<PathBuf>,
    },
    /// Print the first hidden payload as hex.
    Extract {
        #[command(flatten)]
        source: TextSource,
    },
    /// Remove every invisible code point.
    Strip {
        #[command(flatten)]
        source: TextSource,
    },
    /// Print the number of frame characters the text can hold.
    Capacity {
        #[command(flatten)]
        source: TextSource,
    },
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long = "in", conflicts_with = "text", required_unless_present = "text")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub text: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Print JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub trees: usize,
    /// Train one tree on all rows and features instead of a forest.
    #[arg(long)]
    pub single_tree: bool,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub features_per_split: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// Directory of `*.txt` files, one document each.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MFW)]
    pub mfw: usize,
    /// Matrix CSV; stdout when neither this nor `--cut` is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub newick: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Print `text_id,cluster` for a cut into this many clusters.
    #[arg(long)]
    pub cut: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Paired CSV (`pair_id,nanon_text,anon_text`).
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub pairs: Option<PathBuf>,
    /// Dataset CSV; the i-th label-0 row is paired with the i-th label-1 row.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutArg {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn progress(&mut self, msg: &str) {
        if !self.cli.quiet {
            let _ = writeln!(self.err, "{msg}");
        }
    }

    fn mode(&self, default: TokenMode) -> TokenMode {
        self.cli.mode.unwrap_or(default)
    }

    fn config(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = match &self.cli.config {
            Some(p) => {
                if !p.is_file() {
                    return Err(Error::Usage(format!("config file not found: {}", p.display())));
                }
                PipelineConfig::load(p)?
            }
            None => PipelineConfig::preset(self.cli.preset.unwrap_or(Preset::V2)),
        };
        if let Some(p) = self.cli.preset {
            cfg.steps = p.steps();
        }
        if let Some(s) = self.cli.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn emit(&mut self, path: Option<&Path>, data: &[u8]) -> Result<(), Error> {
        match path {
            Some(p) => write_file(p, data),
            None => self.out.write_all(data).map_err(|e| io_error("<stdout>", e)),
        }
    }
}

fn io_error(path: impl Into<String>, source: std::io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source,
    }
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), Error> {
    fs::write(path, data).map_err(|e| io_error(path.display().to_string(), e))
}

fn read_file(path: &Path) -> Result<String, Error> {
    if !path.is_file() {
        return Err(Error::Corpus(corpus::CorpusError::MissingFile(path.to_path_buf())));
    }
    fs::read_to_string(path).map_err(|e| io_error(path.display().to_string(), e))
}

fn source_text(src: &TextSource) -> Result<String, Error> {
    match (&src.text, &src.input) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(p)) => read_file(p),
        (None, None) => Err(Error::Usage("one of --text or --in is required".into())),
    }
}

fn parse_hex(h: &str) -> Result<Payload, Error> {
    let bytes = hex::decode(h.trim()).map_err(|e| Error::Usage(format!("bad --payload-hex `{h}`: {e}")))?;
    Ok(Payload::new(bytes)?)
}

fn persona_field(r: &RecordResult) -> String {
    r.persona
        .as_ref()
        .map(|p| format!("{}; {}; {}; {}", p.gender, p.age_band, p.education, p.nationality))
        .unwrap_or_default()
}

fn results_csv(results: &[RecordResult]) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::Corpus(e.into());
    w.write_record([
        "text_id",
        "status",
        "failed_stage",
        "error",
        "payload_hex",
        "persona",
        "text",
    ])
    .map_err(map)?;
    for r in results {
        let (status, stage, error) = match &r.status {
            RecordStatus::Ok => ("OK", String::new(), String::new()),
            RecordStatus::Failed { stage, error } => ("FAILED", stage.to_string(), error.clone()),
        };
        w.write_record([
            r.id.as_str(),
            status,
            &stage,
            &error,
            r.payload.as_deref().unwrap_or(""),
            &persona_field(r),
            r.final_text.as_deref().unwrap_or(""),
        ])
        .map_err(map)?;
    }
    w.into_inner().map_err(|e| io_error("<buffer>", e.into_error()))
}

fn cmd_run(ctx: &mut Ctx, args: &RunArgs) -> Result<i32, Error> {
    let docs: Vec<Document> = match (&args.input, &args.text) {
        (Some(p), _) => import_csv(p)?
            .into_iter()
            .map(|r| Document::new(r.text_id, r.text))
            .collect(),
        (None, Some(t)) => vec![Document::new("text", t.clone())],
        (None, None) => return Err(Error::Usage("one of --in or --text is required".into())),
    };
    let mut cfg = ctx.config()?;
    if let Some(p) = args.parallelism {
        cfg.parallelism = p;
    }
    if args.fail_fast {
        cfg.fail_fast = true;
    }
    if let Some(h) = &args.payload_hex {
        parse_hex(h)?;
        cfg.payload = crate::pipeline::PayloadPolicy::FixedHex(h.trim().to_string());
    }
    let pipeline = Pipeline::new(cfg)?;
    ctx.progress(&format!("running {} record(s)", docs.len()));
    let results = pipeline.run_corpus(&docs)?;

    if args.text.is_some() && args.out.is_none() {
        if let Some(t) = &results[0].final_text {
            writeln!(ctx.out, "{t}").map_err(|e| io_error("<stdout>", e))?;
        }
    } else {
        let csv = results_csv(&results)?;
        ctx.emit(args.out.as_deref(), &csv)?;
    }

    let ok: Vec<(&Document, &RecordResult)> = docs.iter().zip(&results).filter(|(_, r)| r.is_ok()).collect();
    if let Some(p) = &args.pairs_out {
        let pairs: Vec<PairRecord> = ok
            .iter()
            .enumerate()
            .map(|(i, (d, r))| PairRecord {
                pair_index: i + 1,
                nanon: LabeledRecord {
                    text_id: d.id.clone(),
                    label: Label::Nanon,
                    text: d.text.clone(),
                },
                anon: LabeledRecord {
                    text_id: format!("{}_anon", d.id),
                    label: Label::Anon,
                    text: r.final_text.clone().unwrap_or_default(),
                },
            })
            .collect();
        corpus::write_pairs(&pairs, p)?;
    }
    if let Some(p) = &args.dataset_out {
        let records: Vec<LabeledRecord> = ok
            .iter()
            .flat_map(|(d, r)| {
                [
                    LabeledRecord {
                        text_id: d.id.clone(),
                        label: Label::Nanon,
                        text: d.text.clone(),
                    },
                    LabeledRecord {
                        text_id: format!("{}_anon", d.id),
                        label: Label::Anon,
                        text: r.final_text.clone().unwrap_or_default(),
                    },
                ]
            })
            .collect();
        corpus::write_records(&records, p)?;
    }
    if let Some(p) = &args.trace {
        let mut buf = Vec::new();
        for r in &results {
            serde_json::to_writer(&mut buf, r).expect("results serialize");
            buf.push(b'\n');
        }
        write_file(p, &buf)?;
    }

    let failed = results.len() - ok.len();
    if failed > 0 {
        let _ = writeln!(
            ctx.err,
            "error: stage_failed: {failed} of {} record(s) failed",
            results.len()
        );
        return Ok(1);
    }
    ctx.progress(&format!("{} record(s) ok", results.len()));
    Ok(0)
}

fn cmd_stego(ctx: &mut Ctx, cmd: &StegoCommand) -> Result<i32, Error> {
    match cmd {
        StegoCommand::Embed {
            source,
            payload_hex,
            payload_file,
        } => {
            let text = source_text(source)?;
            let payload = match (payload_hex, payload_file) {
                (Some(h), _) => parse_hex(h)?,
                (None, Some(p)) => {
                    if !p.is_file() {
                        return Err(Error::Corpus(corpus::CorpusError::MissingFile(p.clone())));
                    }
                    Payload::new(fs::read(p).map_err(|e| io_error(p.display().to_string(), e))?)?
                }
                (None, None) => {
                    return Err(Error::Usage(
                        "one of --payload-hex or --payload-file is required".into(),
                    ))
                }
            };
            let out = stego::embed(&text, &payload)?;
            writeln!(ctx.out, "{out}").map_err(|e| io_error("<stdout>", e))?;
        }
        StegoCommand::Extract { source } => {
            let p = stego::extract(&source_text(source)?)?;
            writeln!(ctx.out, "{}", p.to_hex()).map_err(|e| io_error("<stdout>", e))?;
        }
        StegoCommand::Strip { source } => {
            writeln!(ctx.out, "{}", stego::strip(&source_text(source)?)).map_err(|e| io_error("<stdout>", e))?;
        }
        StegoCommand::Capacity { source } => {
            let c = stego::capacity(&source_text(source)?)?;
            writeln!(ctx.out, "{c}").map_err(|e| io_error("<stdout>", e))?;
        }
    }
    Ok(0)
}

fn cmd_features(ctx: &mut Ctx, args: &FeaturesArgs) -> Result<i32, Error> {
    let records: Vec<(String, Option<Label>, String)> = match (&args.input, &args.text) {
        (Some(p), _) => import_csv(p)?
            .into_iter()
            .map(|r| (r.text_id, Some(r.label), r.text))
            .collect(),
        (None, Some(t)) => vec![("text".into(), None, t.clone())],
        (None, None) => return Err(Error::Usage("one of --in or --text is required".into())),
    };
    let lex = Lexicons::load(&ctx.config()?.lexicons)?;
    let mode = ctx.mode(TokenMode::Raw);
    let rows: Vec<FeatureRow> = records
        .into_iter()
        .map(|(id, label, text)| {
            let mut features =
                extract_features(&Document::new(id.clone(), text), mode, &lex.function_words, &lex.lemmas);
            features.label = label;
            FeatureRow { text_id: id, features }
        })
        .collect();
    let mut buf = Vec::new();
    write_feature_csv(&rows, &mut buf)?;
    ctx.emit(args.out.as_deref(), &buf)?;
    Ok(0)
}

fn cmd_rank(ctx: &mut Ctx, args: &RankArgs) -> Result<i32, Error> {
    let m = feature_matrix(&read_feature_csv(&args.features)?)?;
    let ranking = rank_features(&m)?;
    let text = if args.json {
        serde_json::to_string_pretty(&ranking).expect("ranking serializes") + "\n"
    } else {
        let mut s = String::from("feature,gain_bits,threshold,verdict\n");
        for e in &ranking.entries {
            s += &format!(
                "{},{:.4},{:.6},{}\n",
                e.feature,
                e.gain_bits,
                e.threshold,
                e.verdict.as_str()
            );
        }
        s
    };
    ctx.emit(None, text.as_bytes())?;
    Ok(0)
}

fn cmd_train(ctx: &mut Ctx, args: &TrainArgs) -> Result<i32, Error> {
    let m = feature_matrix(&read_feature_csv(&args.features)?)?;
    let mut tree = TreeConfig::default();
    if let Some(d) = args.max_depth {
        tree.max_depth = d;
    }
    let model = if args.single_tree {
        ForestModel::from_tree(m.feature_names().to_vec(), train_tree(&m, &tree)?)
    } else {
        train_forest(
            &m,
            &ForestConfig {
                trees: args.trees,
                features_per_split: args.features_per_split,
                seed: ctx.cli.seed.unwrap_or(0),
                tree,
                bootstrap: true,
            },
        )?
    };
    let json = serde_json::to_string_pretty(&model).expect("model serializes") + "\n";
    write_file(&args.out, json.as_bytes())?;
    ctx.progress(&format!(
        "trained {} tree(s) on {} rows",
        model.forest.len(),
        m.n_rows()
    ));
    Ok(0)
}

fn cmd_classify(ctx: &mut Ctx, args: &ClassifyArgs) -> Result<i32, Error> {
    let model: ForestModel = serde_json::from_str(&read_file(&args.model)?)
        .map_err(|e| Error::Usage(format!("bad model file {}: {e}", args.model.display())))?;
    model.validate()?;
    let rows = read_feature_csv(&args.features)?;
    let mut s = String::from("text_id,label,predicted\n");
    let mut hits = 0;
    let mut labeled = 0;
    for r in &rows {
        let predicted = model.predict(&r.features.retained())?;
        let label = r.features.label.map(|l| l.to_string()).unwrap_or_default();
        if let Some(l) = r.features.label {
            labeled += 1;
            hits += usize::from(l == predicted);
        }
        s += &format!("{},{},{}\n", r.text_id, label, predicted);
    }
    ctx.emit(args.out.as_deref(), s.as_bytes())?;
    if labeled > 0 {
        ctx.progress(&format!("accuracy {hits}/{labeled}"));
    }
    Ok(0)
}

fn read_dir_docs(dir: &Path) -> Result<Vec<Document>, Error> {
    if !dir.is_dir() {
        return Err(Error::Usage(format!("not a directory: {}", dir.display())));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let id = p.file_name().expect("file has a name").to_string_lossy().into_owned();
            Ok(Document::new(id, read_file(p)?))
        })
        .collect()
}

fn cmd_delta(ctx: &mut Ctx, args: &DeltaArgs) -> Result<i32, Error> {
    let docs = read_dir_docs(&args.dir)?;
    let m = delta_matrix(&docs, args.mfw, ctx.mode(TokenMode::Sanitized))?;
    let tree = upgma(&m)?;
    ctx.progress(&format!(
        "{} documents, {} varying frequent words",
        m.len(),
        m.words.len()
    ));
    if let Some(p) = &args.out {
        write_file(p, m.to_csv().as_bytes())?;
    }
    if let Some(p) = &args.newick {
        write_file(p, (to_newick(&tree) + "\n").as_bytes())?;
    }
    if let Some(p) = &args.json {
        write_file(
            p,
            (serde_json::to_string_pretty(&tree).expect("tree serializes") + "\n").as_bytes(),
        )?;
    }
    if let Some(k) = args.cut {
        let mut s = String::from("text_id,cluster\n");
        let mut assignments: Vec<(String, usize)> = tree
            .cut(k)
            .into_iter()
            .enumerate()
            .flat_map(|(c, ids)| ids.into_iter().map(move |id| (id, c + 1)))
            .collect();
        assignments.sort();
        for (id, c) in assignments {
            s += &format!("{id},{c}\n");
        }
        ctx.emit(None, s.as_bytes())?;
    } else if args.out.is_none() {
        ctx.emit(None, m.to_csv().as_bytes())?;
    }
    Ok(0)
}

fn cmd_export(ctx: &mut Ctx, args: &ExportArgs) -> Result<i32, Error> {
    let pairs = match (&args.pairs, &args.input) {
        (Some(p), _) => import_pairs(p)?,
        (None, Some(p)) => pair_up(&import_csv(p)?),
        (None, None) => return Err(Error::Usage("one of --pairs or --in is required".into())),
    };
    let written = corpus::export_pairs(&pairs, &args.dir)?;
    let mut s = String::new();
    for p in &written {
        s += &format!("{}\n", p.display());
    }
    ctx.emit(None, s.as_bytes())?;
    Ok(0)
}

fn dispatch(ctx: &mut Ctx) -> Result<i32, Error> {
    match &ctx.cli.command {
        Command::Run(a) => cmd_run(ctx, a),
        Command::Stego(c) => cmd_stego(ctx, c),
        Command::Features(a) => cmd_features(ctx, a),
        Command::Rank(a) => cmd_rank(ctx, a),
        Command::Train(a) => cmd_train(ctx, a),
        Command::Classify(a) => cmd_classify(ctx, a),
        Command::Delta(a) => cmd_delta(ctx, a),
        Command::ExportPairs(a) => cmd_export(ctx, a),
        Command::SampleCorpus(a) => {
            ctx.emit(a.out.as_deref(), SAMPLE_CORPUS.as_bytes())?;
            Ok(0)
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let rendered = e.render().to_string();
            let mut lines = rendered.lines();
            let first = lines.next().unwrap_or_default().trim_start_matches("error: ");
            let _ = writeln!(err, "error: usage: {first}");
            for line in lines {
                let _ = writeln!(err, "{line}");
            }
            return 2;
        }
    };
    let mut ctx = Ctx { cli: &cli, out, err };
    match dispatch(&mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(ctx.err, "error: {}: {msg}", e.code());
            e.exit_code()
        }
    }
}
