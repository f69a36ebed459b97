//! Dialogue state, narrow context, and the trigger policy.
//!
//! The conversation moves Start → Searching → Selecting → Executing, with
//! Executing able to return to Searching and every state able to end.
//! Snapshots are values; [`update_state`] returns a new one.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::augment::expand_partial_matches;
use crate::g2p::number_words;
use crate::text;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DialogueError {
    #[error("illegal transition: {from} --{event}--> ?")]
    IllegalTransition { from: DialogueState, event: String },
    #[error("option {index} out of range for {count} presented options")]
    NoSuchOption { index: usize, count: usize },
    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),
    #[error("intent confidence {0} outside [0, 1]")]
    Confidence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DialogueState {
    Start,
    Searching,
    Selecting,
    Executing,
    Ended,
}

impl DialogueState {
    pub const ALL: [DialogueState; 5] = [
        DialogueState::Start,
        DialogueState::Searching,
        DialogueState::Selecting,
        DialogueState::Executing,
        DialogueState::Ended,
    ];
}

impl fmt::Display for DialogueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DialogueState::Start => "start",
            DialogueState::Searching => "searching",
            DialogueState::Selecting => "selecting",
            DialogueState::Executing => "executing",
            DialogueState::Ended => "ended",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for DialogueState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        DialogueState::ALL
            .into_iter()
            .find(|st| st.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown dialogue state {s:?}"))
    }
}

/// Every `(from, to)` pair [`update_state`] can produce. The only self-loop
/// is a voice command while executing.
pub const EDGES: [(DialogueState, DialogueState); 9] = [
    (DialogueState::Start, DialogueState::Searching),
    (DialogueState::Searching, DialogueState::Selecting),
    (DialogueState::Selecting, DialogueState::Executing),
    (DialogueState::Executing, DialogueState::Searching),
    (DialogueState::Start, DialogueState::Ended),
    (DialogueState::Searching, DialogueState::Ended),
    (DialogueState::Selecting, DialogueState::Ended),
    (DialogueState::Executing, DialogueState::Ended),
    (DialogueState::Executing, DialogueState::Executing),
];

/// Voice commands understood while a task is running.
pub const DEFAULT_COMMANDS: [&str; 9] = [
    "next",
    "go back",
    "repeat",
    "previous step",
    "start cooking",
    "show ingredients",
    "start another task",
    "pause",
    "resume",
];

/// Commands that leave the running task and start a new search.
const NEW_TASK_COMMANDS: [&str; 2] = ["start another task", "new search"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueSnapshot {
    pub state: DialogueState,
    #[serde(default)]
    pub presented_options: Vec<String>,
    #[serde(default)]
    pub system_suggestions: Vec<String>,
    #[serde(default)]
    pub active_task: Option<String>,
    #[serde(default)]
    pub pending_system_question: bool,
    #[serde(default = "default_commands")]
    pub command_vocabulary: Vec<String>,
}

fn default_commands() -> Vec<String> {
    DEFAULT_COMMANDS.iter().map(|s| s.to_string()).collect()
}

impl DialogueSnapshot {
    fn bare(state: DialogueState) -> Self {
        Self {
            state,
            presented_options: Vec::new(),
            system_suggestions: Vec::new(),
            active_task: None,
            pending_system_question: false,
            command_vocabulary: default_commands(),
        }
    }

    pub fn start<I, S>(suggestions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { system_suggestions: suggestions.into_iter().map(Into::into).collect(), ..Self::bare(DialogueState::Start) }
    }

    pub fn searching() -> Self {
        Self::bare(DialogueState::Searching)
    }

    pub fn selecting<I, S>(options: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { presented_options: options.into_iter().map(Into::into).collect(), ..Self::bare(DialogueState::Selecting) }
    }

    pub fn executing(task: impl Into<String>) -> Self {
        Self { active_task: Some(task.into()), ..Self::bare(DialogueState::Executing) }
    }

    pub fn ended() -> Self {
        Self::bare(DialogueState::Ended)
    }

    pub fn with_commands<I, S>(mut self, commands: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.command_vocabulary = commands.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_pending_question(mut self, pending: bool) -> Self {
        self.pending_system_question = pending;
        self
    }

    pub fn validate(&self) -> Result<(), DialogueError> {
        if !self.presented_options.is_empty() && self.state != DialogueState::Selecting {
            return Err(DialogueError::InvalidSnapshot(format!("presented options in state {}", self.state)));
        }
        if self.state == DialogueState::Selecting && self.presented_options.is_empty() {
            return Err(DialogueError::InvalidSnapshot("selecting without presented options".into()));
        }
        if self.active_task.is_some() && self.state != DialogueState::Executing {
            return Err(DialogueError::InvalidSnapshot(format!("active task in state {}", self.state)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentLabel {
    Search,
    Select,
    Command,
    Question,
    Exit,
    Chitchat,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub label: IntentLabel,
    pub confidence: f64,
}

impl Intent {
    pub fn new(label: IntentLabel, confidence: f64) -> Result<Self, DialogueError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(DialogueError::Confidence(confidence));
        }
        Ok(Self { label, confidence })
    }

    /// A label taken as given, e.g. from annotation.
    pub fn certain(label: IntentLabel) -> Self {
        Self { label, confidence: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Suggestion,
    Option,
    Partial,
    Ordinal,
    Command,
    Catalog,
}

/// One likely user response and what it resolves to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarrowEntry {
    pub text: String,
    pub target: String,
    pub kind: EntryKind,
}

impl NarrowEntry {
    pub fn new(text: impl Into<String>, target: impl Into<String>, kind: EntryKind) -> Self {
        Self { text: text.into(), target: target.into(), kind }
    }

    /// An entry that resolves to itself.
    pub fn option(text: impl Into<String>) -> Self {
        let text = text.into();
        Self { target: text.clone(), text, kind: EntryKind::Option }
    }
}

/// Likely responses in the snapshot's state, deduplicated by normalized
/// text (first occurrence wins).
pub fn derive_narrow_context(snapshot: &DialogueSnapshot) -> Vec<NarrowEntry> {
    let mut out = Vec::new();
    match snapshot.state {
        DialogueState::Start => {
            out.extend(snapshot.system_suggestions.iter().map(|s| NarrowEntry::new(s, s, EntryKind::Suggestion)));
        }
        DialogueState::Selecting => {
            let opts = &snapshot.presented_options;
            out.extend(opts.iter().map(|o| NarrowEntry::new(o, o, EntryKind::Option)));
            out.extend(
                expand_partial_matches(opts)
                    .into_iter()
                    .map(|p| NarrowEntry::new(p.partial, p.option, EntryKind::Partial)),
            );
            for (i, o) in opts.iter().enumerate() {
                let n = number_words(&(i + 1).to_string()).join(" ");
                out.push(NarrowEntry::new(format!("option {n}"), o, EntryKind::Ordinal));
            }
        }
        DialogueState::Executing => {
            out.extend(snapshot.command_vocabulary.iter().map(|c| NarrowEntry::new(c, c, EntryKind::Command)));
        }
        DialogueState::Searching | DialogueState::Ended => {}
    }
    let mut seen = HashSet::new();
    out.retain(|e| {
        let key = text::normalize(&e.text);
        !key.is_empty() && seen.insert(key)
    });
    out
}

/// Whether correction should run for this turn.
pub fn should_trigger(snapshot: &DialogueSnapshot, intent: &Intent) -> bool {
    use DialogueState::*;
    use IntentLabel::*;
    match (snapshot.state, intent.label) {
        (Ended, _) => false,
        (_, Question) if snapshot.pending_system_question => false,
        (Executing, l) if l != Command => false,
        _ if !derive_narrow_context(snapshot).is_empty() => true,
        (Searching | Selecting, Search | Select) => true,
        _ => false,
    }
}

/// Something that moves the dialogue along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum DialogueEvent {
    /// The user asks for a task.
    Search { query: String },
    /// The system shows search results.
    PresentResults { options: Vec<String> },
    /// The user picks a presented option (0-based).
    Select { option: usize },
    /// The user issues a voice command while executing.
    Command { command: String },
    Exit,
}

impl DialogueEvent {
    fn name(&self) -> &'static str {
        match self {
            DialogueEvent::Search { .. } => "search",
            DialogueEvent::PresentResults { .. } => "present-results",
            DialogueEvent::Select { .. } => "select",
            DialogueEvent::Command { .. } => "command",
            DialogueEvent::Exit => "exit",
        }
    }
}

/// Apply `event` and return the next snapshot.
pub fn update_state(snapshot: &DialogueSnapshot, event: &DialogueEvent) -> Result<DialogueSnapshot, DialogueError> {
    use DialogueState::*;
    let illegal = || DialogueError::IllegalTransition { from: snapshot.state, event: event.name().to_owned() };
    let carry = |state: DialogueState| DialogueSnapshot {
        command_vocabulary: snapshot.command_vocabulary.clone(),
        ..DialogueSnapshot::bare(state)
    };
    match (snapshot.state, event) {
        (Ended, _) => Err(illegal()),
        (_, DialogueEvent::Exit) => Ok(carry(Ended)),
        (Start | Executing, DialogueEvent::Search { .. }) => Ok(carry(Searching)),
        (Searching, DialogueEvent::PresentResults { options }) if !options.is_empty() => {
            Ok(DialogueSnapshot { presented_options: options.clone(), ..carry(Selecting) })
        }
        (Selecting, DialogueEvent::Select { option }) => {
            let count = snapshot.presented_options.len();
            let task = snapshot
                .presented_options
                .get(*option)
                .ok_or(DialogueError::NoSuchOption { index: *option, count })?;
            Ok(DialogueSnapshot { active_task: Some(task.clone()), ..carry(Executing) })
        }
        (Executing, DialogueEvent::Command { command }) => {
            let c = text::normalize(command);
            if NEW_TASK_COMMANDS.contains(&c.as_str()) {
                Ok(carry(Searching))
            } else {
                Ok(snapshot.clone())
            }
        }
        _ => Err(illegal()),
    }
}

/// Predicts the user's intent for a turn.
pub trait IntentClassifier: Send + Sync {
    fn classify(&self, utterance: &str, snapshot: &DialogueSnapshot) -> Intent;
}

const EXIT_PHRASES: [&str; 6] = ["cancel", "stop", "exit", "quit", "goodbye", "open"];
const QUESTION_WORDS: [&str; 11] = ["what", "why", "when", "where", "who", "which", "is", "are", "does", "do", "can"];
const CHITCHAT: [&str; 7] = ["hello", "hi", "hey", "thanks", "thank you", "good morning", "how are you"];
const SEARCH_CUES: [&str; 6] = ["how", "recipe", "recipes", "ways", "tips", "make"];
const ORDINAL_CUES: [&str; 10] = ["first", "second", "third", "fourth", "fifth", "option", "number", "one", "two", "three"];

/// Keyword rules standing in for a trained classifier.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleIntentClassifier;

impl IntentClassifier for RuleIntentClassifier {
    fn classify(&self, utterance: &str, snapshot: &DialogueSnapshot) -> Intent {
        let mut n = text::normalize(utterance);
        if let Some(rest) = n.strip_prefix("alexa ") {
            n = rest.to_owned();
        }
        let toks: Vec<&str> = n.split(' ').filter(|t| !t.is_empty()).collect();
        let Some(&first) = toks.first() else {
            return Intent { label: IntentLabel::Other, confidence: 0.5 };
        };
        let sure = |label| Intent { label, confidence: 0.9 };

        if EXIT_PHRASES.contains(&first) {
            return sure(IntentLabel::Exit);
        }
        if snapshot.command_vocabulary.iter().any(|c| text::normalize(c) == n) {
            return sure(IntentLabel::Command);
        }
        if CHITCHAT.iter().any(|c| n == *c || n.starts_with(&format!("{c} "))) {
            return sure(IntentLabel::Chitchat);
        }
        if snapshot.state == DialogueState::Selecting {
            let names_option = snapshot.presented_options.iter().any(|o| text::same_text(o, &n))
                || expand_partial_matches(&snapshot.presented_options).iter().any(|p| p.partial == n);
            if names_option || toks.iter().any(|t| ORDINAL_CUES.contains(t)) {
                return sure(IntentLabel::Select);
            }
        }
        if SEARCH_CUES.contains(&first) || toks.iter().any(|t| *t == "recipe" || *t == "recipes") {
            return sure(IntentLabel::Search);
        }
        if QUESTION_WORDS.contains(&first) {
            return sure(IntentLabel::Question);
        }
        match snapshot.state {
            DialogueState::Start | DialogueState::Searching => Intent { label: IntentLabel::Search, confidence: 0.6 },
            DialogueState::Selecting => Intent { label: IntentLabel::Select, confidence: 0.6 },
            _ => Intent { label: IntentLabel::Other, confidence: 0.5 },
        }
    }
}
