use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RetrievalError;
use crate::text;

/// One supported task and every text known to refer to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub id: String,
    pub canonical_text: String,
    pub surface_forms: Vec<String>,
}

impl TaskEntry {
    pub fn new(id: impl Into<String>, canonical_text: impl Into<String>) -> Self {
        let canonical_text = canonical_text.into();
        Self { id: id.into(), surface_forms: vec![canonical_text.clone()], canonical_text }
    }

    pub fn with_forms<I, S>(mut self, forms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for f in forms {
            self.add_form(f);
        }
        self
    }

    /// Add a surface form unless an equal one (after normalization) exists.
    pub fn add_form(&mut self, form: impl Into<String>) -> bool {
        let form = form.into();
        let key = text::normalize(&form);
        if key.is_empty() || self.surface_forms.iter().any(|f| text::normalize(f) == key) {
            return false;
        }
        self.surface_forms.push(form);
        true
    }
}

/// Task catalog stored as line-delimited JSON, one [`TaskEntry`] per line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCatalog {
    pub entries: Vec<TaskEntry>,
}

impl TaskCatalog {
    pub fn new(entries: Vec<TaskEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TaskEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut TaskEntry> {
        self.entries.iter_mut().find(|e| e.id == id)
    }

    pub fn surface_form_count(&self) -> usize {
        self.entries.iter().map(|e| e.surface_forms.len()).sum()
    }

    /// Checks ids are unique, forms non-empty, and each canonical text is
    /// listed among its own surface forms.
    pub fn validate(&self) -> Result<(), RetrievalError> {
        if self.entries.is_empty() {
            return Err(RetrievalError::EmptyCatalog);
        }
        let mut ids = HashSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(RetrievalError::DuplicateId(e.id.clone()));
            }
            if e.surface_forms.is_empty() || e.surface_forms.iter().any(|f| text::normalize(f).is_empty()) {
                return Err(RetrievalError::EmptySurfaceForm(e.id.clone()));
            }
            if !e.surface_forms.contains(&e.canonical_text) {
                return Err(RetrievalError::Format(format!(
                    "entry {:?}: canonical text missing from surface forms",
                    e.id
                )));
            }
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, RetrievalError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TaskEntry = serde_json::from_str(&line)
                .map_err(|e| RetrievalError::Format(format!("catalog line {}: {e}", i + 1)))?;
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        Self::read_jsonl(BufReader::new(File::open(path)?))
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<(), RetrievalError> {
        for e in &self.entries {
            serde_json::to_writer(&mut writer, e)
                .map_err(|err| RetrievalError::Format(err.to_string()))?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// The bundled 50-task home-improvement and cooking catalog.
    pub fn bundled() -> Self {
        Self::read_jsonl(include_str!("../../data/catalog.jsonl").as_bytes())
            .expect("bundled catalog parses")
    }
}
