//! Command-line front end: `build-index`, `augment`, `correct`,
//! `gen-corpus`, and `eval`.
//!
//! Exit status is 0 on success, 2 for bad input (missing or malformed
//! files, invalid flags), and 1 for anything else.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::augment::{
    build_augmented_catalog, resume_augmented_catalog, AugmentCheckpoint, AugmentConfig, AugmentError, HttpGenerator,
    TableGenerator, TemplateGenerator, VariationGenerator,
};
use crate::dialogue::{DialogueSnapshot, DialogueState, Intent, IntentClassifier, IntentLabel, RuleIntentClassifier};
use crate::eval::{evaluate, generate_corpus, load_corpus, write_corpus, CorpusConfig, EvalConfig, EvalError, FprConvention};
use crate::g2p::Lexicon;
use crate::phonetics::PhoneticThresholds;
use crate::pipeline::{write_trace, Endpoints, Pipeline, PipelineConfig, TraceRecord};
use crate::rerank::{NBestList, RerankThresholds, MAX_HYPOTHESES};
use crate::retrieval::{build_index, Embedder, HttpEmbedder, SearchIndex, TaskCatalog, TrigramEmbedder, DEFAULT_DIMENSION, DEFAULT_TOP_K};

pub const EMBED_URL_ENV: &str = "CONTEXT_ASR_EMBED_URL";
pub const GENERATOR_URL_ENV: &str = "CONTEXT_ASR_GENERATOR_URL";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Everything a run can be configured with, defaults included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub lexicon: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub fuzzy_min: u8,
    pub cosine_min: f64,
    pub alpha: f64,
    pub range_ratio: f64,
    pub min_coverage: f64,
    pub broad_search_k: usize,
    pub strip_stress: bool,
    pub embed_url: Option<String>,
    pub generator_url: Option<String>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rerank = RerankThresholds::default();
        let phonetic = PhoneticThresholds::default();
        Self {
            lexicon: None,
            catalog: None,
            index: None,
            corpus: None,
            report: None,
            fuzzy_min: rerank.fuzzy_min,
            cosine_min: rerank.cosine_min,
            alpha: phonetic.alpha,
            range_ratio: phonetic.range_ratio,
            min_coverage: phonetic.min_coverage,
            broad_search_k: DEFAULT_TOP_K,
            strip_stress: false,
            embed_url: None,
            generator_url: None,
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            rerank: RerankThresholds { fuzzy_min: self.fuzzy_min, cosine_min: self.cosine_min },
            phonetic: PhoneticThresholds { alpha: self.alpha, range_ratio: self.range_ratio, min_coverage: self.min_coverage },
            broad_search_k: self.broad_search_k,
            strip_stress: self.strip_stress,
            endpoints: Endpoints { embedder: self.embed_url.clone(), generator: self.generator_url.clone() },
        }
    }

    /// Thresholds in range and every configured input path present.
    pub fn validate(&self) -> Result<(), CliError> {
        self.pipeline_config().validate().map_err(input)?;
        for p in [&self.lexicon, &self.catalog, &self.index, &self.corpus].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Input(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "context-asr", version, about = "Context-aware ASR error correction for task-oriented dialogue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a task catalog and persist the search index.
    BuildIndex(BuildIndexArgs),
    /// Enrich a catalog with mapped public titles and generated variations.
    Augment(AugmentArgs),
    /// Correct one turn's n-best list and print the outcome as JSON.
    Correct(CorrectArgs),
    /// Write a seeded synthetic corpus of annotated turns.
    GenCorpus(GenCorpusArgs),
    /// Score the engine on an annotated corpus.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Thresholds {
    #[arg(long, default_value_t = 96)]
    pub fuzzy_min: u8,
    #[arg(long, default_value_t = 0.8)]
    pub cosine_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.5)]
    pub range_ratio: f64,
    #[arg(long, default_value_t = 0.8)]
    pub min_coverage: f64,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub broad_k: usize,
    /// Compare phonemes without stress.
    #[arg(long)]
    pub strip_stress: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedFlags {
    /// Embedding service; the built-in trigram embedder is used when unset.
    #[arg(long, env = EMBED_URL_ENV)]
    pub embed_url: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    pub dimension: usize,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Checked for readability; the bundled lexicon is used otherwise.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[command(flatten)]
    pub embed: EmbedFlags,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    /// Public task titles, one per line.
    #[arg(long)]
    pub public: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Tab-separated (original, variation) table used as the generator.
    #[arg(long, conflicts_with = "generator_url")]
    pub variations: Option<PathBuf>,
    #[arg(long, env = GENERATOR_URL_ENV)]
    pub generator_url: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub sim_threshold: f64,
    #[arg(long, default_value_t = 8)]
    pub n_clusters: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Where to save progress if the generator fails.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Continue from a saved checkpoint instead of starting over.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[command(flatten)]
    pub embed: EmbedFlags,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Dialogue state: start, searching, selecting, executing, or ended.
    #[arg(long, default_value = "searching")]
    pub state: DialogueState,
    /// Presented option (selecting); repeat for each.
    #[arg(long = "option")]
    pub options: Vec<String>,
    /// System suggestion (start); repeat for each.
    #[arg(long = "suggestion")]
    pub suggestions: Vec<String>,
    /// Replace the default voice commands (executing); repeat for each.
    #[arg(long = "command")]
    pub commands: Vec<String>,
    #[arg(long)]
    pub active_task: Option<String>,
    #[arg(long)]
    pub pending_question: bool,
    /// Intent label; predicted by the rule classifier when omitted.
    #[arg(long)]
    pub intent: Option<String>,
    /// Hypothesis, best first; read from standard input (one per line) when omitted.
    #[arg(long = "hyp")]
    pub hypotheses: Vec<String>,
    /// Append a trace line here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub embed: EmbedFlags,
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    /// Task catalog; the bundled one when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub turns: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.6)]
    pub error_rate: f64,
    #[arg(long, default_value_t = 0.4)]
    pub select_share: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where wrong corrections on error turns count: standard (FP) or alternate (FN).
    #[arg(long, default_value = "standard")]
    pub fpr_convention: FprConvention,
    /// Predict intents with the rule classifier instead of using labels.
    #[arg(long)]
    pub use_classifier: bool,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub embed: EmbedFlags,
}

fn run_config(thresholds: &Thresholds, embed: &EmbedFlags) -> RunConfig {
    RunConfig {
        fuzzy_min: thresholds.fuzzy_min,
        cosine_min: thresholds.cosine_min,
        alpha: thresholds.alpha,
        range_ratio: thresholds.range_ratio,
        min_coverage: thresholds.min_coverage,
        broad_search_k: thresholds.broad_k,
        strip_stress: thresholds.strip_stress,
        embed_url: embed.embed_url.clone(),
        ..RunConfig::default()
    }
}

impl CorrectArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            index: Some(self.index.clone()),
            lexicon: self.lexicon.clone(),
            ..run_config(&self.thresholds, &self.embed)
        }
    }
}

impl EvalArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            index: Some(self.index.clone()),
            corpus: Some(self.corpus.clone()),
            lexicon: self.lexicon.clone(),
            report: self.report.clone(),
            ..run_config(&self.thresholds, &self.embed)
        }
    }
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{}: no such file", path.display())))
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, CliError> {
    match path {
        Some(p) => {
            require(p)?;
            Lexicon::from_path(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => Ok(Lexicon::bundled()),
    }
}

fn load_catalog(path: &Path) -> Result<TaskCatalog, CliError> {
    require(path)?;
    let catalog = TaskCatalog::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    catalog.validate().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(catalog)
}

fn load_index(path: &Path) -> Result<SearchIndex, CliError> {
    require(path)?;
    SearchIndex::load(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn make_embedder(flags: &EmbedFlags) -> Box<dyn Embedder> {
    match &flags.embed_url {
        Some(url) => Box::new(HttpEmbedder::new(url.clone(), flags.dimension, Duration::from_secs(flags.timeout_secs))),
        None => Box::new(TrigramEmbedder::new(flags.dimension)),
    }
}

/// The embedder an index was built with.
fn embedder_for(index: &SearchIndex, flags: &EmbedFlags) -> Result<Box<dyn Embedder>, CliError> {
    let trigram = TrigramEmbedder::new(index.dimension());
    if trigram.id() == index.embedder_id() {
        return Ok(Box::new(trigram));
    }
    match &flags.embed_url {
        Some(url) => Ok(Box::new(HttpEmbedder::new(url.clone(), index.dimension(), Duration::from_secs(flags.timeout_secs)))),
        None => Err(CliError::Input(format!(
            "index was built with embedder {:?}; pass --embed-url or set {EMBED_URL_ENV}",
            index.embedder_id()
        ))),
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value).map_err(internal)?;
    writeln!(out, "{s}").map_err(internal)
}

#[derive(Serialize)]
struct IndexSummary<'a> {
    index: String,
    entries: usize,
    surface_forms: usize,
    dimension: usize,
    embedder: &'a str,
    sha256: String,
}

fn build_index_cmd(a: &BuildIndexArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let catalog = load_catalog(&a.catalog)?;
    load_lexicon(a.lexicon.as_deref())?;
    if a.embed.dimension == 0 {
        return Err(CliError::Input("--dimension must be positive".into()));
    }
    let embedder = make_embedder(&a.embed);
    let index = build_index(&catalog, embedder.as_ref()).map_err(internal)?;
    let bytes = index.to_bytes();
    fs::write(&a.out, &bytes).map_err(|e| CliError::Internal(format!("{}: {e}", a.out.display())))?;
    print_json(
        out,
        &IndexSummary {
            index: a.out.display().to_string(),
            entries: index.entries().len(),
            surface_forms: index.surface_form_count(),
            dimension: index.dimension(),
            embedder: index.embedder_id(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        },
    )
}

fn augment_cmd(a: &AugmentArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let catalog = load_catalog(&a.catalog)?;
    require(&a.public)?;
    let public: Vec<String> = fs::read_to_string(&a.public)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.public.display())))?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect();
    let generator: Box<dyn VariationGenerator> = match (&a.variations, &a.generator_url) {
        (Some(p), _) => {
            require(p)?;
            Box::new(TableGenerator::from_path(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?)
        }
        (None, Some(url)) => Box::new(HttpGenerator::new(url.clone(), Duration::from_secs(a.embed.timeout_secs))),
        (None, None) => Box::new(TemplateGenerator),
    };
    let config = AugmentConfig { sim_threshold: a.sim_threshold, n_clusters: a.n_clusters, k_variations: a.k, seed: a.seed };
    config.validate().map_err(input)?;
    let embedder = make_embedder(&a.embed);

    let result = match &a.resume {
        Some(p) => {
            require(p)?;
            let ckpt = AugmentCheckpoint::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            resume_augmented_catalog(ckpt, &catalog, generator.as_ref())
        }
        None => build_augmented_catalog(&public, &catalog, &config, embedder.as_ref(), generator.as_ref()),
    };
    let output = match result {
        Ok(o) => o,
        Err(AugmentError::Interrupted { checkpoint, completed, total, reason }) => {
            let mut msg = format!("generator failed after {completed} of {total} centroids: {reason}");
            if let Some(p) = &a.checkpoint {
                checkpoint.save(p).map_err(internal)?;
                msg.push_str(&format!("; progress saved to {}", p.display()));
            }
            return Err(CliError::Internal(msg));
        }
        Err(e) => return Err(internal(e)),
    };

    let file = File::create(&a.out).map_err(|e| CliError::Internal(format!("{}: {e}", a.out.display())))?;
    output.catalog.write_jsonl(BufWriter::new(file)).map_err(internal)?;
    print_json(out, &output.stats)
}

fn read_hypotheses(a: &CorrectArgs, stdin: &mut dyn BufRead) -> Result<NBestList, CliError> {
    let hyps: Vec<String> = if a.hypotheses.is_empty() {
        let mut v = Vec::new();
        for line in stdin.lines() {
            let line = line.map_err(input)?;
            if !line.trim().is_empty() {
                v.push(line.trim().to_owned());
            }
        }
        v
    } else {
        a.hypotheses.clone()
    };
    if hyps.len() > MAX_HYPOTHESES {
        return Err(CliError::Input(format!("at most {MAX_HYPOTHESES} hypotheses, got {}", hyps.len())));
    }
    NBestList::new(hyps).map_err(input)
}

fn parse_intent(label: &str) -> Result<IntentLabel, CliError> {
    serde_json::from_value(serde_json::Value::String(label.to_ascii_lowercase()))
        .map_err(|_| CliError::Input(format!("unknown intent {label:?}")))
}

fn correct_cmd(a: &CorrectArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let config = a.run_config();
    config.validate()?;
    let index = load_index(&a.index)?;
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    let nbest = read_hypotheses(a, stdin)?;

    let misplaced = [
        ("--option", !a.options.is_empty(), DialogueState::Selecting),
        ("--suggestion", !a.suggestions.is_empty(), DialogueState::Start),
        ("--active-task", a.active_task.is_some(), DialogueState::Executing),
    ];
    for (flag, given, state) in misplaced {
        if given && a.state != state {
            return Err(CliError::Input(format!("{flag} only applies in state {state}")));
        }
    }
    let mut snapshot = match a.state {
        DialogueState::Start => DialogueSnapshot::start(a.suggestions.clone()),
        DialogueState::Searching => DialogueSnapshot::searching(),
        DialogueState::Selecting => DialogueSnapshot::selecting(a.options.clone()),
        DialogueState::Executing => {
            DialogueSnapshot::executing(a.active_task.clone().unwrap_or_else(|| "current task".into()))
        }
        DialogueState::Ended => DialogueSnapshot::ended(),
    };
    if !a.commands.is_empty() {
        snapshot = snapshot.with_commands(a.commands.clone());
    }
    snapshot = snapshot.with_pending_question(a.pending_question);
    snapshot.validate().map_err(input)?;

    let intent = match &a.intent {
        Some(l) => Intent::certain(parse_intent(l)?),
        None => RuleIntentClassifier.classify(nbest.best(), &snapshot),
    };
    let embedder = embedder_for(&index, &a.embed)?;
    let pipeline = Pipeline::new(lexicon, index, embedder, config.pipeline_config()).map_err(input)?;
    let outcome = pipeline.correct(&nbest, &snapshot, &intent).map_err(internal)?;

    if let Some(p) = &a.trace {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(p)
            .map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
        write_trace(file, &[TraceRecord::new(0, &nbest, &snapshot, &intent, &outcome)]).map_err(internal)?;
    }
    print_json(out, &outcome)
}

fn gen_corpus_cmd(a: &GenCorpusArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let catalog = match &a.catalog {
        Some(p) => load_catalog(p)?,
        None => TaskCatalog::bundled(),
    };
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    let config = CorpusConfig {
        turns: a.turns,
        seed: a.seed,
        error_rate: a.error_rate,
        select_share: a.select_share,
        ..CorpusConfig::default()
    };
    for (name, v) in [("error-rate", a.error_rate), ("select-share", a.select_share)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Input(format!("--{name} {v} outside [0, 1]")));
        }
    }
    let turns = generate_corpus(&catalog, &lexicon, &config).map_err(input)?;
    let file = File::create(&a.out).map_err(|e| CliError::Internal(format!("{}: {e}", a.out.display())))?;
    let mut w = BufWriter::new(file);
    write_corpus(&mut w, &turns).map_err(internal)?;
    w.flush().map_err(internal)?;
    let errors = turns.iter().filter(|t| t.has_error).count();
    writeln!(out, "wrote {} turns ({errors} with errors) to {}", turns.len(), a.out.display()).map_err(internal)
}

fn eval_cmd(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = a.run_config();
    config.validate()?;
    let corpus = load_corpus(&a.corpus).map_err(|e| CliError::Input(format!("{}: {e}", a.corpus.display())))?;
    if corpus.is_empty() {
        return Err(CliError::Input(format!("{}: corpus is empty", a.corpus.display())));
    }
    let index = load_index(&a.index)?;
    let lexicon = load_lexicon(a.lexicon.as_deref())?;
    let embedder = embedder_for(&index, &a.embed)?;
    let pipeline = Pipeline::new(lexicon, index, embedder, config.pipeline_config()).map_err(input)?;
    let classifier = RuleIntentClassifier;
    let eval_config = EvalConfig {
        convention: a.fpr_convention,
        classifier: a.use_classifier.then_some(&classifier as &dyn IntentClassifier),
    };
    let evaluation = evaluate(&corpus, &pipeline, &eval_config).map_err(|e| match e {
        EvalError::EmptyCorpus | EvalError::EmptyReference | EvalError::Format { .. } => input(e),
        other => internal(other),
    })?;
    if let Some(p) = &a.report {
        fs::write(p, evaluation.report.to_json()).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
    }
    write!(out, "{}", evaluation.report.table()).map_err(internal)
}

/// Run the command line `args` (program name first) and return the exit
/// status.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::BuildIndex(a) => build_index_cmd(a, out),
        Command::Augment(a) => augment_cmd(a, out),
        Command::Correct(a) => correct_cmd(a, stdin, out),
        Command::GenCorpus(a) => gen_corpus_cmd(a, out),
        Command::Eval(a) => eval_cmd(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run`] wired to the process's standard streams.
pub fn main_with_std() -> i32 {
    let stdin = std::io::stdin();
    let mut stdin = BufReader::new(stdin.lock());
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    run(std::env::args_os(), &mut stdin, &mut out, &mut err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_flags() {
        let cli = Cli::try_parse_from(["context-asr", "eval", "--corpus", "c", "--index", "i"]).unwrap();
        let Command::Eval(a) = cli.command else { panic!() };
        let cfg = a.run_config();
        let d = RunConfig::default();
        assert_eq!(
            (cfg.fuzzy_min, cfg.cosine_min, cfg.alpha, cfg.range_ratio, cfg.min_coverage),
            (d.fuzzy_min, d.cosine_min, d.alpha, d.range_ratio, d.min_coverage)
        );
        assert_eq!(a.fpr_convention, FprConvention::Standard);
    }

    #[test]
    fn run_config_defaults() {
        let d = RunConfig::default();
        assert_eq!((d.fuzzy_min, d.cosine_min, d.alpha, d.range_ratio, d.min_coverage), (96, 0.8, 0.5, 1.5, 0.8));
        d.validate().unwrap();
    }

    #[test]
    fn validate_flags_missing_paths() {
        let cfg = RunConfig { corpus: Some("/definitely/not/here.jsonl".into()), ..Default::default() };
        let e = cfg.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("/definitely/not/here.jsonl"));
        let cfg = RunConfig { alpha: 1.5, ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn intent_labels_parse() {
        assert_eq!(parse_intent("Search").unwrap(), IntentLabel::Search);
        assert!(parse_intent("dance").is_err());
    }
}
