use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::text;

/// Tokens that never identify an option on their own.
pub const STOP_TOKENS: [&str; 6] = ["how", "to", "a", "the", "of", "for"];

/// Maximum length of a retrieval list after injection.
pub const MAX_RESULTS: usize = 10;

/// 1-based slot where the engine's top result is injected.
pub const INJECT_POSITION: usize = 3;

/// A partial text that uniquely identifies one presented option.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialMatch {
    pub partial: String,
    pub option: String,
}

/// Every contiguous token n-gram found in exactly one option becomes an
/// entry resolving to that option, unless it consists of stop tokens only.
pub fn expand_partial_matches(options: &[String]) -> Vec<PartialMatch> {
    let grams: Vec<Vec<String>> = options
        .iter()
        .map(|o| {
            let toks = text::tokenize(o);
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for start in 0..toks.len() {
                for end in start + 1..=toks.len() {
                    let g = toks[start..end].join(" ");
                    if seen.insert(g.clone()) {
                        out.push(g);
                    }
                }
            }
            out
        })
        .collect();

    let mut owners: HashMap<&str, usize> = HashMap::new();
    for gs in &grams {
        for g in gs {
            *owners.entry(g.as_str()).or_default() += 1;
        }
    }

    let mut entries = Vec::new();
    for (option, gs) in options.iter().zip(&grams) {
        for g in gs {
            if owners[g.as_str()] != 1 || g.split(' ').all(|t| STOP_TOKENS.contains(&t)) {
                continue;
            }
            entries.push(PartialMatch { partial: g.clone(), option: option.clone() });
        }
    }
    entries
}

/// Inject the engine's top result into a default retrieval list at
/// [`INJECT_POSITION`].
pub fn inject_result(defaults: &[String], engine_top: &str) -> Vec<String> {
    inject_result_at(defaults, engine_top, INJECT_POSITION)
}

/// Place `engine_top` at 1-based `position` (at the end when the list is
/// shorter), removing later duplicates of it, and cap at [`MAX_RESULTS`].
/// A list that already holds `engine_top` at or above `position` is only
/// capped.
pub fn inject_result_at(defaults: &[String], engine_top: &str, position: usize) -> Vec<String> {
    let key = text::normalize(engine_top);
    let slot = position.max(1) - 1;
    if defaults.iter().take(slot + 1).any(|d| text::normalize(d) == key) {
        return defaults.iter().take(MAX_RESULTS).cloned().collect();
    }
    let mut out: Vec<String> = defaults.iter().filter(|d| text::normalize(d) != key).cloned().collect();
    out.insert(slot.min(out.len()), engine_top.to_owned());
    out.truncate(MAX_RESULTS);
    out
}
