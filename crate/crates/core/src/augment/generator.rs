use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::text;

/// Produces paraphrases of a task title.
pub trait VariationGenerator: Send + Sync {
    fn generate(&self, text: &str, k: usize) -> Result<Vec<String>, AugmentError>;
}

/// Ask `generator` for `k` variations of `text`, dropping empty texts,
/// duplicates, and copies of the input. One follow-up request for `2k`
/// candidates fills any gap; whatever is still missing is skipped.
pub fn generate_variations(
    text: &str,
    k: usize,
    generator: &dyn VariationGenerator,
) -> Result<Vec<String>, AugmentError> {
    let input = text::normalize(text);
    let mut seen = vec![input];
    let mut out = Vec::with_capacity(k);
    let mut accept = |candidates: Vec<String>, out: &mut Vec<String>| {
        for c in candidates {
            let key = text::normalize(&c);
            if out.len() == k || key.is_empty() || seen.contains(&key) {
                continue;
            }
            seen.push(key);
            out.push(c.trim().to_owned());
        }
    };
    accept(generator.generate(text, k)?, &mut out);
    if out.len() < k {
        accept(generator.generate(text, 2 * k)?, &mut out);
    }
    Ok(out)
}

const LEADING_FRAMES: [&str; 6] = ["how to ", "how do i ", "how can i ", "ways to ", "best way to ", "how do you "];

const VERB_SYNONYMS: [(&str, &str); 16] = [
    ("start", "boot up"),
    ("kill", "exterminate"),
    ("make", "create"),
    ("fix", "repair"),
    ("clean", "wash"),
    ("build", "construct"),
    ("learn", "study"),
    ("get", "obtain"),
    ("care", "look after"),
    ("take", "handle"),
    ("cook", "prepare"),
    ("remove", "get rid of"),
    ("replace", "swap out"),
    ("grow", "raise"),
    ("change", "swap"),
    ("tune", "adjust"),
];

/// Offline paraphrase frames plus a small verb synonym table.
///
/// For a core phrase X (the input without a leading "how to"-style frame)
/// it emits, in order: the frame-swapped form ("how to X" or "X"), X with
/// its verb replaced by a synonym, "how to" + that, "ways to X",
/// "best way to X", "how do i X", "how can i X", "tips to X".
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateGenerator;

impl TemplateGenerator {
    fn core(text: &str) -> (String, bool) {
        let n = text::normalize(text);
        for frame in LEADING_FRAMES {
            if let Some(rest) = n.strip_prefix(frame) {
                if !rest.is_empty() {
                    return (rest.to_owned(), true);
                }
            }
        }
        (n, false)
    }
}

impl VariationGenerator for TemplateGenerator {
    fn generate(&self, text: &str, k: usize) -> Result<Vec<String>, AugmentError> {
        let (core, framed) = Self::core(text);
        let mut out = Vec::new();
        out.push(if framed { core.clone() } else { format!("how to {core}") });
        let mut words = core.splitn(2, ' ');
        let verb = words.next().unwrap_or_default();
        let rest = words.next();
        if let Some((_, syn)) = VERB_SYNONYMS.iter().find(|(v, _)| *v == verb) {
            let swapped = match rest {
                Some(r) => format!("{syn} {r}"),
                None => (*syn).to_owned(),
            };
            out.push(format!("how to {swapped}"));
            out.push(swapped);
        }
        for frame in ["ways to", "best way to", "how do i", "how can i", "tips to"] {
            out.push(format!("{frame} {core}"));
        }
        out.truncate(k.max(1) * 2);
        Ok(out)
    }
}

/// Variations read from a two-column, tab-separated `(original, variation)`
/// table. Originals match after normalization; rows keep file order.
#[derive(Debug, Clone, Default)]
pub struct TableGenerator {
    rows: HashMap<String, Vec<String>>,
}

impl TableGenerator {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, AugmentError> {
        let mut rows: HashMap<String, Vec<String>> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (orig, var) = line
                .split_once('\t')
                .ok_or_else(|| AugmentError::Format(format!("variation table line {}: expected two columns", i + 1)))?;
            rows.entry(text::normalize(orig)).or_default().push(var.trim().to_owned());
        }
        Ok(Self { rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, AugmentError> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_reader(include_str!("../../data/variations.tsv").as_bytes())
            .expect("bundled variation table parses")
    }
}

impl VariationGenerator for TableGenerator {
    fn generate(&self, text: &str, k: usize) -> Result<Vec<String>, AugmentError> {
        Ok(self
            .rows
            .get(&text::normalize(text))
            .map(|v| v.iter().take(k).cloned().collect())
            .unwrap_or_default())
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    text: &'a str,
    k: usize,
}

#[derive(Deserialize)]
struct GenerateResponse {
    variations: Vec<String>,
}

/// Client for an external variation service: `{"text": ..., "k": n}` in,
/// `{"variations": [...]}` out.
pub struct HttpGenerator {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpGenerator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(true)
            .build()
            .into();
        Self { endpoint: endpoint.into(), agent }
    }
}

impl VariationGenerator for HttpGenerator {
    fn generate(&self, text: &str, k: usize) -> Result<Vec<String>, AugmentError> {
        let fail = |e: ureq::Error| AugmentError::Generator(format!("{}: {e}", self.endpoint));
        let resp: GenerateResponse = self
            .agent
            .post(&self.endpoint)
            .send_json(GenerateRequest { text, k })
            .map_err(fail)?
            .body_mut()
            .read_json()
            .map_err(fail)?;
        Ok(resp.variations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo;
    impl VariationGenerator for Echo {
        fn generate(&self, text: &str, k: usize) -> Result<Vec<String>, AugmentError> {
            let mut v = vec![text.to_owned(), text.to_uppercase()];
            v.extend((0..k).map(|i| format!("{text} {i}")));
            Ok(v)
        }
    }

    #[test]
    fn template_single_variation_is_deterministic() {
        let a = generate_variations("kill mosquitoes", 1, &TemplateGenerator).unwrap();
        assert_eq!(a, vec!["how to kill mosquitoes"]);
        assert_eq!(a, generate_variations("kill mosquitoes", 1, &TemplateGenerator).unwrap());
    }

    #[test]
    fn template_frames_and_synonyms() {
        let v = generate_variations("how to start a computer", 4, &TemplateGenerator).unwrap();
        assert_eq!(
            v,
            vec!["start a computer", "how to boot up a computer", "boot up a computer", "ways to start a computer"]
        );
    }

    #[test]
    fn copies_of_input_are_dropped() {
        let v = generate_variations("fix sink", 2, &Echo).unwrap();
        assert_eq!(v, vec!["fix sink 0", "fix sink 1"]);
    }

    #[test]
    fn table_generator_uses_rows() {
        let table = TableGenerator::from_reader("start a computer\tboot up computer\n".as_bytes()).unwrap();
        let v = generate_variations("Start a computer", 3, &table).unwrap();
        assert_eq!(v, vec!["boot up computer"]);
        assert!(generate_variations("unknown", 3, &table).unwrap().is_empty());
        assert!(TableGenerator::from_reader("no tab here\n".as_bytes()).is_err());
    }

    #[test]
    fn bundled_table_lists_computer_variations() {
        let v = generate_variations("start a computer", 8, &TableGenerator::bundled()).unwrap();
        assert!(v.iter().any(|s| s == "boot up computer"));
    }
}
