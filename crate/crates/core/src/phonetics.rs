//! Phonetic context ranking.
//!
//! Each context candidate is compared with the best ASR hypothesis through
//! the longest common subsequence of their phoneme sequences. The winner's
//! matched tokens are spliced into the hypothesis, so words the candidate
//! does not cover (like "leaky" in "fix a leaky bathroom for sit") survive.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::g2p::{Phoneme, PhonemePhrase};

/// A longest common subsequence between hypothesis and candidate phonemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcsMatch {
    /// `(hypothesis index, candidate index)`, strictly increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub length: usize,
    /// `length / candidate phoneme count`.
    pub coverage: f64,
    /// Span of matched hypothesis phonemes, `last - first + 1`; 0 when empty.
    pub range_in_hyp: usize,
}

/// Longest common subsequence of `hyp` and `cand`.
///
/// Reconstruction walks back from the end of both sequences, taking the
/// diagonal on equal symbols and otherwise preferring to step back in the
/// hypothesis when both moves keep the optimum.
pub fn lcs(hyp: &[Phoneme], cand: &[Phoneme]) -> LcsMatch {
    let (n, m) = (hyp.len(), cand.len());
    let width = m + 1;
    let mut dp = vec![0u32; (n + 1) * width];
    for i in 1..=n {
        for j in 1..=m {
            dp[i * width + j] = if hyp[i - 1] == cand[j - 1] {
                dp[(i - 1) * width + j - 1] + 1
            } else {
                dp[(i - 1) * width + j].max(dp[i * width + j - 1])
            };
        }
    }

    let mut pairs = Vec::with_capacity(dp[n * width + m] as usize);
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        if hyp[i - 1] == cand[j - 1] {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if dp[(i - 1) * width + j] >= dp[i * width + j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();

    let length = pairs.len();
    let coverage = if m == 0 { 0.0 } else { length as f64 / m as f64 };
    let range_in_hyp = match (pairs.first(), pairs.last()) {
        (Some(first), Some(last)) => last.0 - first.0 + 1,
        _ => 0,
    };
    LcsMatch { pairs, length, coverage, range_in_hyp }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhoneticThresholds {
    /// Similarity cutoff for the index search that supplies candidates.
    pub alpha: f64,
    /// Maximum `range_in_hyp / candidate length`.
    pub range_ratio: f64,
    /// Minimum coverage of the candidate.
    pub min_coverage: f64,
}

impl Default for PhoneticThresholds {
    fn default() -> Self {
        Self { alpha: 0.5, range_ratio: 1.5, min_coverage: 0.8 }
    }
}

impl PhoneticThresholds {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(self.range_ratio >= 1.0) {
            return Err(format!("range_ratio must be >= 1, got {}", self.range_ratio));
        }
        if !(self.min_coverage > 0.0 && self.min_coverage <= 1.0) {
            return Err(format!("min_coverage must be in (0, 1], got {}", self.min_coverage));
        }
        Ok(())
    }

    fn accepts(&self, m: &LcsMatch, cand_len: usize) -> bool {
        cand_len > 0
            && m.coverage >= self.min_coverage
            && (m.range_in_hyp as f64 / cand_len as f64) <= self.range_ratio
    }
}

/// A context entry ready for phonetic ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextCandidate {
    pub text: String,
    pub phrase: PhonemePhrase,
    /// Canonical task id or full option text this candidate resolves to.
    pub target: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedContext {
    /// Index of the chosen candidate in the input slice.
    pub index: usize,
    pub lcs: LcsMatch,
    pub rewritten: String,
}

/// Pick the context candidate that best explains the hypothesis phonetically.
///
/// The candidate with the longest LCS is tried first; if it fails the
/// coverage or range test, the candidate with the highest coverage is
/// tried. Ties go to the earlier candidate.
pub fn rank_context(
    best_hyp: &PhonemePhrase,
    candidates: &[ContextCandidate],
    thresholds: &PhoneticThresholds,
) -> Option<RankedContext> {
    if candidates.is_empty() {
        return None;
    }
    let matches: Vec<LcsMatch> =
        candidates.iter().map(|c| lcs(&best_hyp.phonemes, &c.phrase.phonemes)).collect();

    let by_length = first_argmax(matches.iter().map(|m| m.length as f64));
    let chosen = if thresholds.accepts(&matches[by_length], candidates[by_length].phrase.phonemes.len()) {
        Some(by_length)
    } else {
        let by_coverage = first_argmax(matches.iter().map(|m| m.coverage));
        thresholds
            .accepts(&matches[by_coverage], candidates[by_coverage].phrase.phonemes.len())
            .then_some(by_coverage)
    }?;

    let m = matches.into_iter().nth(chosen)?;
    let rewritten = rewrite(best_hyp, &candidates[chosen].phrase, &m.pairs);
    Some(RankedContext { index: chosen, lcs: m, rewritten })
}

fn first_argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Splice candidate tokens into the hypothesis along an LCS alignment.
///
/// A hypothesis token with at least one matched phoneme is covered. Each
/// maximal run of covered tokens is replaced by the candidate tokens whose
/// phonemes were matched inside that run, in candidate order; a candidate
/// token claimed by an earlier run is not repeated. Uncovered hypothesis
/// tokens stay where they are.
pub fn rewrite(hyp: &PhonemePhrase, cand: &PhonemePhrase, pairs: &[(usize, usize)]) -> String {
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); hyp.tokens.len()];
    for &(i, j) in pairs {
        let h = hyp.token_of(i);
        let c = cand.token_of(j);
        if owners[h].last() != Some(&c) {
            owners[h].push(c);
        }
    }

    let mut claimed = HashSet::new();
    let mut out: Vec<&str> = Vec::with_capacity(hyp.tokens.len());
    let mut t = 0;
    while t < hyp.tokens.len() {
        if owners[t].is_empty() {
            out.push(&hyp.tokens[t]);
            t += 1;
            continue;
        }
        let mut run_tokens: Vec<usize> = Vec::new();
        while t < hyp.tokens.len() && !owners[t].is_empty() {
            for &c in &owners[t] {
                if run_tokens.last() != Some(&c) && claimed.insert(c) {
                    run_tokens.push(c);
                }
            }
            t += 1;
        }
        out.extend(run_tokens.iter().map(|&c| cand.tokens[c].as_str()));
    }
    out.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2p::{parse_phonemes, phonemize_phrase, Lexicon};

    fn ph(s: &str) -> Vec<Phoneme> {
        parse_phonemes(s).unwrap()
    }

    fn candidate(lex: &Lexicon, text: &str) -> ContextCandidate {
        ContextCandidate {
            text: text.to_owned(),
            phrase: phonemize_phrase(lex, text).unwrap(),
            target: text.to_owned(),
        }
    }

    #[test]
    fn identity_lcs() {
        let x = ph("HH AW1 S AH0 Z");
        let m = lcs(&x, &x);
        assert_eq!(m.length, x.len());
        assert_eq!(m.coverage, 1.0);
        assert_eq!(m.range_in_hyp, x.len());
    }

    #[test]
    fn empty_inputs() {
        let x = ph("HH AW1 S");
        for m in [lcs(&[], &x), lcs(&x, &[]), lcs(&[], &[])] {
            assert_eq!(m.length, 0);
            assert_eq!(m.range_in_hyp, 0);
            assert!(m.pairs.is_empty());
        }
    }

    #[test]
    fn house_and_hence_tie_against_horse() {
        let horse = ph("HH AO1 R S");
        let house = lcs(&ph("HH AW1 S"), &horse);
        let hence = lcs(&ph("HH EH1 N S"), &horse);
        assert_eq!(house.length, 2);
        assert_eq!(house.length, hence.length);
    }

    #[test]
    fn range_is_measured_in_hypothesis() {
        let m = lcs(&ph("HH AA1 AA1 AA1 S"), &ph("HH S"));
        assert_eq!(m.pairs, vec![(0, 0), (4, 1)]);
        assert_eq!(m.range_in_hyp, 5);
        assert_eq!(m.coverage, 1.0);
    }

    #[test]
    fn faucet_insertion_direction() {
        let lex = Lexicon::bundled();
        let hyp = phonemize_phrase(&lex, "how can i fix a leaky bathroom for sit").unwrap();
        let cand = phonemize_phrase(&lex, "how to fix a bathroom faucet").unwrap();
        let m = lcs(&hyp.phonemes, &cand.phonemes);
        assert_eq!(m.length, 17);
        assert_eq!(cand.phonemes.len(), 20);
        assert_eq!(rewrite(&hyp, &cand, &m.pairs), "how can i fix a leaky bathroom faucet");
    }

    #[test]
    fn faucet_omission_direction() {
        let lex = Lexicon::bundled();
        let hyp = phonemize_phrase(&lex, "how can i fix a bathroom for sit").unwrap();
        let cand = phonemize_phrase(&lex, "how to fix a leaky bathroom faucet").unwrap();
        let m = lcs(&hyp.phonemes, &cand.phonemes);
        assert_eq!(rewrite(&hyp, &cand, &m.pairs), "how can i fix a bathroom faucet");
        // 17 of 24 candidate phonemes: below the default 0.8 coverage.
        assert_eq!((m.length, cand.phonemes.len()), (17, 24));
    }

    #[test]
    fn zero_pairs_keep_hypothesis() {
        let lex = Lexicon::bundled();
        let hyp = phonemize_phrase(&lex, "tell me a joke").unwrap();
        let cand = phonemize_phrase(&lex, "bake bread").unwrap();
        assert_eq!(rewrite(&hyp, &cand, &[]), "tell me a joke");
    }

    #[test]
    fn rank_context_picks_faucet() {
        let lex = Lexicon::bundled();
        let hyp = phonemize_phrase(&lex, "how can i fix a leaky bathroom for sit").unwrap();
        let cands = vec![
            candidate(&lex, "how to clean carpets"),
            candidate(&lex, "how to fix a bathroom faucet"),
            candidate(&lex, "how to bake bread"),
        ];
        let ranked = rank_context(&hyp, &cands, &PhoneticThresholds::default()).unwrap();
        assert_eq!(ranked.index, 1);
        assert_eq!(ranked.rewritten, "how can i fix a leaky bathroom faucet");
    }

    #[test]
    fn rank_context_disjoint_is_none() {
        let hyp = PhonemePhrase { tokens: vec!["x".into()], phonemes: ph("B"), spans: vec![0..1] };
        let cand = ContextCandidate {
            text: "y".into(),
            phrase: PhonemePhrase { tokens: vec!["y".into()], phonemes: ph("K AE1"), spans: vec![0..2] },
            target: "y".into(),
        };
        assert!(rank_context(&hyp, &[cand], &PhoneticThresholds::default()).is_none());
        assert!(rank_context(&hyp, &[], &PhoneticThresholds::default()).is_none());
    }

    #[test]
    fn rank_context_identity() {
        let lex = Lexicon::bundled();
        let text = "how to water indoor plants";
        let hyp = phonemize_phrase(&lex, text).unwrap();
        let ranked = rank_context(&hyp, &[candidate(&lex, text)], &PhoneticThresholds::default()).unwrap();
        assert_eq!(ranked.lcs.coverage, 1.0);
        assert_eq!(ranked.rewritten, text);
    }

    #[test]
    fn falls_back_to_best_coverage() {
        // longest LCS is too scattered; the shorter candidate is fully covered
        let hyp = PhonemePhrase {
            tokens: vec!["a".into(), "b".into()],
            phonemes: ph("K AE1 T S AA1 K"),
            spans: vec![0..3, 3..6],
        };
        let long = ContextCandidate {
            text: "long".into(),
            phrase: PhonemePhrase {
                tokens: vec!["long".into()],
                phonemes: ph("K T AA1 Z Z Z Z Z"),
                spans: vec![0..8],
            },
            target: "long".into(),
        };
        let short = ContextCandidate {
            text: "short".into(),
            phrase: PhonemePhrase { tokens: vec!["short".into()], phonemes: ph("K AE1"), spans: vec![0..2] },
            target: "short".into(),
        };
        let ranked = rank_context(&hyp, &[long, short], &PhoneticThresholds::default()).unwrap();
        assert_eq!(ranked.index, 1);
        assert_eq!(ranked.rewritten, "short b");
    }

    #[test]
    fn threshold_validation() {
        assert!(PhoneticThresholds::default().validate().is_ok());
        assert!(PhoneticThresholds { range_ratio: 0.9, ..Default::default() }.validate().is_err());
        assert!(PhoneticThresholds { min_coverage: 0.0, ..Default::default() }.validate().is_err());
        assert!(PhoneticThresholds { alpha: 1.1, ..Default::default() }.validate().is_err());
    }
}
