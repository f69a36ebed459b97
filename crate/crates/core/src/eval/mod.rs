//! Scoring the engine against annotated turns, plus synthetic corpora.

mod corpus;
mod noise;
mod wer;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use corpus::{generate_corpus, load_corpus, read_corpus, write_corpus, AnnotatedTurn, CorpusConfig};
pub use noise::{inject_errors, InjectedNBest, NoiseConfig, DEFAULT_CONFUSIONS};
pub use wer::wer;

use crate::dialogue::{Intent, IntentClassifier, IntentLabel};
use crate::pipeline::{CorrectionOutcome, OutcomeKind, Pipeline, PipelineError};
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("reference is empty")]
    EmptyReference,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("noise: {0}")]
    Noise(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Judgment {
    TP,
    FP,
    FN,
    TN,
}

/// Where a wrong correction on a turn that really had an error is counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FprConvention {
    /// As a false positive.
    #[default]
    Standard,
    /// As a false negative: the error stays uncorrected.
    Alternate,
}

impl FromStr for FprConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(Self::Standard),
            "alternate" => Ok(Self::Alternate),
            _ => Err(format!("unknown FPR convention {s:?} (expected standard or alternate)")),
        }
    }
}

/// Classify one turn's outcome.
pub fn judge(outcome: &CorrectionOutcome, turn: &AnnotatedTurn, convention: FprConvention) -> Judgment {
    if outcome.kind != OutcomeKind::Corrected {
        return if turn.has_error { Judgment::FN } else { Judgment::TN };
    }
    let text_ok = outcome.corrected_text.as_deref().is_some_and(|c| text::same_text(c, &turn.gold_transcript));
    let target_ok = turn.gold_target.is_some() && outcome.target == turn.gold_target;
    match (text_ok || target_ok, turn.has_error, convention) {
        (true, _, _) => Judgment::TP,
        (false, true, FprConvention::Alternate) => Judgment::FN,
        (false, _, _) => Judgment::FP,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Counts {
    pub fn add(&mut self, j: Judgment) {
        match j {
            Judgment::TP => self.tp += 1,
            Judgment::FP => self.fp += 1,
            Judgment::FN => self.fn_ += 1,
            Judgment::TN => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision, recall, F1, and FPR at rank 1. `None` marks a metric whose
/// denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub counts: Counts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
}

impl Scores {
    pub fn from_counts(c: Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        Self { counts: c, precision, recall, f1, fpr: ratio(c.fp, c.fp + c.tn) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; undefined for a single turn.
    pub stdev: Option<f64>,
}

impl Summary {
    /// Order-independent: values are summed in sorted order.
    fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        sq.sort_by(f64::total_cmp);
        let stdev = (v.len() > 1).then(|| (sq.iter().sum::<f64>() / (n - 1.0)).sqrt());
        Self { mean, stdev }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerReport {
    /// Best hypothesis as recognized.
    pub none: Summary,
    /// Engine output: the correction, or the best hypothesis.
    pub engine: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub turns: usize,
    pub convention: FprConvention,
    pub search: Scores,
    pub selection: Scores,
    pub combined: Scores,
    pub wer: WerReport,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned text table: precision, recall, F1, and FPR for search,
    /// selection, and all turns, then counts and WER.
    pub fn table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.2}"));
        let groups = [("Search", &self.search), ("Selection", &self.selection), ("Combined", &self.combined)];
        let mut s = String::new();
        let _ = write!(s, "{:<8}", "");
        for (name, _) in &groups {
            let _ = write!(s, " | {name:^23}");
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "");
        for _ in &groups {
            let _ = write!(s, " | {:>5} {:>5} {:>5} {:>5}", "Prec", "Rec", "F1", "FPR");
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "engine");
        for (_, g) in &groups {
            let _ = write!(s, " | {:>5} {:>5} {:>5} {:>5}", cell(g.precision), cell(g.recall), cell(g.f1), cell(g.fpr));
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "counts");
        for (_, g) in &groups {
            let c = g.counts;
            let _ = write!(s, " | {:>23}", format!("TP {} FP {} FN {} TN {}", c.tp, c.fp, c.fn_, c.tn));
        }
        s.push('\n');
        let w = |x: &Summary| format!("{:.3} ± {}", x.mean, x.stdev.map_or("-".to_owned(), |d| format!("{d:.3}")));
        let _ = writeln!(s, "WER none {}  engine {}  ({} turns)", w(&self.wer.none), w(&self.wer.engine), self.turns);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResult {
    pub id: Option<String>,
    pub judgment: Judgment,
    pub outcome: CorrectionOutcome,
    pub wer_none: f64,
    pub wer_engine: f64,
}

#[derive(Clone, Copy, Default)]
pub struct EvalConfig<'a> {
    pub convention: FprConvention,
    /// Predict intents instead of using the annotated label.
    pub classifier: Option<&'a dyn IntentClassifier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub turns: Vec<TurnResult>,
}

/// Run the pipeline over every turn and aggregate.
pub fn evaluate(corpus: &[AnnotatedTurn], pipeline: &Pipeline, config: &EvalConfig<'_>) -> Result<Evaluation, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut results = Vec::with_capacity(corpus.len());
    for turn in corpus {
        let intent = match config.classifier {
            Some(c) => c.classify(turn.nbest.best(), &turn.snapshot),
            None => Intent::certain(turn.intent_label),
        };
        let outcome = pipeline.correct(&turn.nbest, &turn.snapshot, &intent)?;
        results.push(TurnResult {
            id: turn.id.clone(),
            judgment: judge(&outcome, turn, config.convention),
            wer_none: wer(turn.nbest.best(), &turn.gold_transcript)?,
            wer_engine: wer(outcome.output_text(&turn.nbest), &turn.gold_transcript)?,
            outcome,
        });
    }
    let report = aggregate(corpus, &results, config.convention);
    Ok(Evaluation { report, turns: results })
}

/// Metrics from per-turn results; `corpus` and `results` are parallel.
pub fn aggregate(corpus: &[AnnotatedTurn], results: &[TurnResult], convention: FprConvention) -> MetricsReport {
    let (mut search, mut selection, mut combined) = (Counts::default(), Counts::default(), Counts::default());
    for (t, r) in corpus.iter().zip(results) {
        combined.add(r.judgment);
        match t.intent_label {
            IntentLabel::Search => search.add(r.judgment),
            IntentLabel::Select => selection.add(r.judgment),
            _ => {}
        }
    }
    let none: Vec<f64> = results.iter().map(|r| r.wer_none).collect();
    let engine: Vec<f64> = results.iter().map(|r| r.wer_engine).collect();
    MetricsReport {
        turns: results.len(),
        convention,
        search: Scores::from_counts(search),
        selection: Scores::from_counts(selection),
        combined: Scores::from_counts(combined),
        wer: WerReport { none: Summary::of(&none), engine: Summary::of(&engine) },
    }
}
