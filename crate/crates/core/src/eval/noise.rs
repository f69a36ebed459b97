use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::g2p::{phonemize_token, Lexicon, Phoneme};
use crate::rerank::{NBestList, MAX_HYPOTHESES};
use crate::text;

/// Phoneme pairs that are easy to mishear, compared without stress.
pub const DEFAULT_CONFUSIONS: [(&str, &str); 16] = [
    ("P", "B"),
    ("T", "D"),
    ("K", "G"),
    ("F", "V"),
    ("S", "Z"),
    ("SH", "S"),
    ("TH", "F"),
    ("CH", "SH"),
    ("M", "N"),
    ("L", "R"),
    ("IH", "IY"),
    ("EH", "AE"),
    ("AA", "AO"),
    ("UH", "UW"),
    ("AH", "IH"),
    ("EY", "EH"),
];

/// Tokens never picked for corruption while another token is available.
const PROTECTED: [&str; 8] = ["how", "to", "a", "an", "the", "of", "for", "i"];

/// How many nearest lexicon neighbours a substitution draws from.
const NEIGHBOURS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Chance that each eligible token is replaced.
    pub corruption_prob: f64,
    /// Symmetric phoneme pairs substituted at half cost.
    pub confusions: Vec<(String, String)>,
    pub nbest_size: usize,
    /// Put the gold transcript among the alternates.
    pub gold_in_nbest: bool,
    /// Replace at least this many tokens per corrupted hypothesis.
    pub min_corruptions: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            corruption_prob: 0.2,
            confusions: DEFAULT_CONFUSIONS.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            nbest_size: 5,
            gold_in_nbest: false,
            min_corruptions: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(0.0..=1.0).contains(&self.corruption_prob) {
            return Err(EvalError::Noise(format!("corruption_prob {} outside [0, 1]", self.corruption_prob)));
        }
        if self.nbest_size == 0 || self.nbest_size > MAX_HYPOTHESES {
            return Err(EvalError::Noise(format!("nbest_size {} outside 1..={MAX_HYPOTHESES}", self.nbest_size)));
        }
        if self.gold_in_nbest && self.nbest_size < 2 && (self.corruption_prob > 0.0 || self.min_corruptions > 0) {
            return Err(EvalError::Noise("gold_in_nbest needs room for an alternate".into()));
        }
        for (a, b) in &self.confusions {
            for s in [a, b] {
                if s.parse::<Phoneme>().is_err() && format!("{s}1").parse::<Phoneme>().is_err() {
                    return Err(EvalError::Noise(format!("unknown phoneme {s:?} in confusion table")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedNBest {
    pub nbest: NBestList,
    pub gold_present: bool,
    /// Tokens replaced in the best hypothesis.
    pub corrupted_tokens: usize,
}

struct Corrupter<'a> {
    lexicon: &'a Lexicon,
    confusions: Vec<(&'a str, &'a str)>,
}

impl Corrupter<'_> {
    fn confusable(&self, a: &str, b: &str) -> bool {
        self.confusions.iter().any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    fn distance(&self, a: &[Phoneme], b: &[Phoneme]) -> f64 {
        let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
        let mut cur = vec![0.0; b.len() + 1];
        for (i, x) in a.iter().enumerate() {
            cur[0] = (i + 1) as f64;
            for (j, y) in b.iter().enumerate() {
                let sub = if x.base_symbol() == y.base_symbol() {
                    0.0
                } else if self.confusable(x.base_symbol(), y.base_symbol()) {
                    0.5
                } else {
                    1.0
                };
                cur[j + 1] = (prev[j] + sub).min(prev[j + 1] + 1.0).min(cur[j] + 1.0);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        prev[b.len()]
    }

    /// A same-initial-phoneme lexicon neighbour, or a respelling.
    fn substitute(&self, token: &str, rng: &mut ChaCha8Rng) -> String {
        if let Ok(pron) = phonemize_token(self.lexicon, token) {
            if let Some(first) = pron.first() {
                let budget = (pron.len() as f64 / 3.0).max(1.0);
                let mut near: Vec<(f64, &str)> = self
                    .lexicon
                    .iter()
                    .filter(|(w, p)| {
                        !w.eq_ignore_ascii_case(token)
                            && w.chars().all(|c| c.is_ascii_alphabetic())
                            && p.first().is_some_and(|f| f.base_symbol() == first.base_symbol())
                    })
                    .map(|(w, p)| (self.distance(&pron, p), w))
                    .filter(|(d, _)| *d > 0.0 && *d <= budget)
                    .collect();
                near.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
                near.truncate(NEIGHBOURS);
                if let Some((_, w)) = near.choose(rng) {
                    return w.to_lowercase();
                }
            }
        }
        respell(token, rng)
    }

    fn corrupt(&self, tokens: &[String], p: f64, min: usize, rng: &mut ChaCha8Rng) -> (Vec<String>, usize) {
        let mut eligible: Vec<usize> =
            (0..tokens.len()).filter(|&i| !PROTECTED.contains(&tokens[i].as_str())).collect();
        if eligible.is_empty() {
            eligible = (0..tokens.len()).collect();
        }
        let mut chosen: Vec<usize> = eligible.iter().copied().filter(|_| rng.gen_bool(p)).collect();
        if chosen.len() < min {
            let mut rest: Vec<usize> = eligible.iter().copied().filter(|i| !chosen.contains(i)).collect();
            rest.shuffle(rng);
            chosen.extend(rest.into_iter().take(min - chosen.len()));
        }
        chosen.sort_unstable();
        let mut out = tokens.to_vec();
        for &i in &chosen {
            out[i] = self.substitute(&tokens[i], rng);
        }
        (out, chosen.len())
    }
}

const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

/// Swap one vowel letter, or double the last letter when there is none.
fn respell(token: &str, rng: &mut ChaCha8Rng) -> String {
    let chars: Vec<char> = token.chars().collect();
    let vowels: Vec<usize> = (0..chars.len()).filter(|&i| VOWELS.contains(&chars[i])).collect();
    if let Some(&i) = vowels.choose(rng) {
        let others: Vec<char> = VOWELS.iter().copied().filter(|&v| v != chars[i]).collect();
        let mut out = chars.clone();
        out[i] = *others.choose(rng).expect("four other vowels");
        return out.into_iter().collect();
    }
    let mut out = token.to_owned();
    if let Some(c) = chars.last() {
        out.push(*c);
    }
    out
}

/// Build a noisy n-best list for `gold`. The same inputs and seed always
/// give the same list.
pub fn inject_errors(gold: &str, lexicon: &Lexicon, noise: &NoiseConfig, seed: u64) -> Result<InjectedNBest, EvalError> {
    noise.validate()?;
    let tokens = text::tokenize(gold);
    if tokens.is_empty() {
        return Err(EvalError::Noise("gold transcript is empty".into()));
    }
    let gold_text = tokens.join(" ");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Corrupter { lexicon, confusions: noise.confusions.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect() };

    let (best, corrupted_tokens) = c.corrupt(&tokens, noise.corruption_prob, noise.min_corruptions, &mut rng);
    let best = best.join(" ");
    let mut hyps = vec![best.clone()];
    let add_gold = noise.gold_in_nbest && best != gold_text;
    let wanted = noise.nbest_size - usize::from(add_gold);
    let mut attempts = 0;
    while hyps.len() < wanted && attempts < 8 * MAX_HYPOTHESES {
        attempts += 1;
        let (alt, _) = c.corrupt(&tokens, noise.corruption_prob, noise.min_corruptions.max(1), &mut rng);
        let alt = alt.join(" ");
        if alt != gold_text && !hyps.contains(&alt) {
            hyps.push(alt);
        }
    }
    if add_gold {
        let at = rng.gen_range(1..=hyps.len());
        hyps.insert(at, gold_text.clone());
    }
    let gold_present = hyps.iter().any(|h| *h == gold_text);
    let nbest = NBestList::new(hyps).map_err(|e| EvalError::Noise(e.to_string()))?;
    Ok(InjectedNBest { nbest, gold_present, corrupted_tokens })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64, gold: bool) -> NoiseConfig {
        NoiseConfig { corruption_prob: p, gold_in_nbest: gold, min_corruptions: 1, ..Default::default() }
    }

    #[test]
    fn zero_probability_keeps_gold_best() {
        let noise = NoiseConfig { corruption_prob: 0.0, ..Default::default() };
        let out = inject_errors("How to bake bread", &Lexicon::bundled(), &noise, 3).unwrap();
        assert_eq!(out.nbest.best(), "how to bake bread");
        assert_eq!(out.corrupted_tokens, 0);
        assert!(out.gold_present);
    }

    #[test]
    fn seeded_runs_repeat() {
        let lex = Lexicon::bundled();
        let a = inject_errors("how to fix a bathroom faucet", &lex, &cfg(0.3, true), 42).unwrap();
        let b = inject_errors("how to fix a bathroom faucet", &lex, &cfg(0.3, true), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gold_appears_exactly_once() {
        let lex = Lexicon::bundled();
        for seed in 0..30 {
            let out = inject_errors("how to water indoor plants", &lex, &cfg(0.3, true), seed).unwrap();
            let n = out.nbest.hypotheses().iter().filter(|h| *h == "how to water indoor plants").count();
            assert_eq!(n, 1, "seed {seed}: {:?}", out.nbest);
            assert_ne!(out.nbest.best(), "how to water indoor plants");
            assert!(out.nbest.len() <= 5);
        }
    }

    #[test]
    fn gold_absent_when_disabled() {
        let lex = Lexicon::bundled();
        for seed in 0..30 {
            let out = inject_errors("tune an electric guitar", &lex, &cfg(0.3, false), seed).unwrap();
            assert!(!out.gold_present);
            assert!(out.corrupted_tokens >= 1);
        }
    }

    #[test]
    fn substitutes_share_first_phoneme() {
        let lex = Lexicon::bundled();
        let c = Corrupter { lexicon: &lex, confusions: vec![("T", "D")] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let w = c.substitute("faucet", &mut rng);
            assert_ne!(w, "faucet");
            let first = phonemize_token(&lex, &w).unwrap()[0];
            assert_eq!(first.base_symbol(), "F", "{w}");
        }
    }

    #[test]
    fn respelling_changes_token() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in ["paper", "tsk", "x"] {
            assert_ne!(respell(t, &mut rng), t);
        }
    }

    #[test]
    fn config_validation() {
        assert!(NoiseConfig { nbest_size: 6, ..Default::default() }.validate().is_err());
        assert!(NoiseConfig { corruption_prob: -0.1, ..Default::default() }.validate().is_err());
        let bad = NoiseConfig { confusions: vec![("QQ".into(), "T".into())], ..Default::default() };
        assert!(bad.validate().is_err());
        NoiseConfig::default().validate().unwrap();
    }
}
