//! Grapheme-to-phoneme conversion.
//!
//! Pronunciations come from a CMUdict-format lexicon (first listed variant
//! wins). Words missing from the lexicon go through a small deterministic
//! letter-to-sound rule table, and digits are spelled out as number words
//! before lookup.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text;

const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.dict");

#[derive(Debug, thiserror::Error)]
pub enum G2pError {
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid token {0:?}: no alphanumeric characters")]
    InvalidToken(String),
    #[error("phrase has no tokens after normalization")]
    EmptyPhrase,
}

const BASES: [&str; 39] = [
    // vowels
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
    // consonants
    "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M", "N", "NG", "P", "R", "S", "SH",
    "T", "TH", "V", "W", "Y", "Z", "ZH",
];
const VOWEL_COUNT: u8 = 15;
const UNSTRESSED: u8 = u8::MAX;

/// One ARPAbet phoneme. Vowels carry a stress digit (0, 1 or 2) unless it
/// was explicitly stripped; consonants never do.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phoneme {
    base: u8,
    stress: u8,
}

impl Phoneme {
    pub fn is_vowel(self) -> bool {
        self.base < VOWEL_COUNT
    }

    pub fn base_symbol(self) -> &'static str {
        BASES[self.base as usize]
    }

    pub fn stress(self) -> Option<u8> {
        (self.stress != UNSTRESSED).then_some(self.stress)
    }

    /// The same phoneme with its stress digit removed.
    pub fn without_stress(self) -> Phoneme {
        Phoneme { base: self.base, stress: UNSTRESSED }
    }

    /// Every phoneme of the inventory, vowels with primary stress.
    pub fn inventory() -> impl Iterator<Item = Phoneme> {
        (0..BASES.len() as u8).map(|base| Phoneme {
            base,
            stress: if base < VOWEL_COUNT { 1 } else { UNSTRESSED },
        })
    }

    fn sym(symbol: &str) -> Phoneme {
        symbol.parse().expect("rule table uses valid symbols")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not an ARPAbet symbol: {0:?}")]
pub struct PhonemeParseError(pub String);

impl FromStr for Phoneme {
    type Err = PhonemeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PhonemeParseError(s.to_owned());
        let (base, stress) = match s.as_bytes().last() {
            Some(d @ b'0'..=b'2') => (&s[..s.len() - 1], Some(d - b'0')),
            _ => (s, None),
        };
        let idx = BASES.iter().position(|b| *b == base).ok_or_else(err)? as u8;
        let vowel = idx < VOWEL_COUNT;
        match (vowel, stress) {
            (true, Some(st)) => Ok(Phoneme { base: idx, stress: st }),
            (false, None) => Ok(Phoneme { base: idx, stress: UNSTRESSED }),
            _ => Err(err()),
        }
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base_symbol())?;
        if let Some(s) = self.stress() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Phoneme {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Phoneme {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parse a space-separated symbol list such as `"HH AW1 S"`.
pub fn parse_phonemes(symbols: &str) -> Result<Vec<Phoneme>, PhonemeParseError> {
    symbols.split_whitespace().map(str::parse).collect()
}

/// Uppercased word → first-listed pronunciation.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<Phoneme>>,
}

/// Read a CMUdict-format lexicon. Comment lines start with `;;;`, trailing
/// `# ...` annotations are ignored, and `WORD(n)` variants are skipped so
/// the first pronunciation of each word wins.
pub fn load_lexicon<R: BufRead>(source: R) -> Result<Lexicon, G2pError> {
    let mut entries = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let body = line.split('#').next().unwrap_or_default().trim();
        if body.is_empty() || body.starts_with(";;;") {
            continue;
        }
        let mut parts = body.split_whitespace();
        let word = parts.next().unwrap_or_default();
        let phones: Vec<&str> = parts.collect();
        if phones.is_empty() {
            return Err(G2pError::Parse {
                line: line_no,
                message: format!("entry {word:?} has no phonemes"),
            });
        }
        if word.ends_with(')') && word.contains('(') {
            continue;
        }
        let pron = phones
            .iter()
            .map(|p| p.parse::<Phoneme>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| G2pError::Parse { line: line_no, message: e.to_string() })?;
        entries.entry(word.to_uppercase()).or_insert(pron);
    }
    Ok(Lexicon { entries })
}

impl Lexicon {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, G2pError> {
        load_lexicon(BufReader::new(File::open(path)?))
    }

    /// The CMUdict subset shipped with the crate.
    pub fn bundled() -> Self {
        load_lexicon(BUNDLED_LEXICON.as_bytes()).expect("bundled lexicon parses")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-insensitive lookup.
    pub fn get(&self, word: &str) -> Option<&[Phoneme]> {
        self.entries.get(&word.to_uppercase()).map(Vec::as_slice)
    }

    /// Entries in lexicographic order (words uppercased).
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Phoneme])> {
        self.entries.iter().map(|(w, p)| (w.as_str(), p.as_slice()))
    }
}

/// Pronunciation of a single token: lexicon first, rule fallback otherwise.
pub fn phonemize_token(lexicon: &Lexicon, token: &str) -> Result<Vec<Phoneme>, G2pError> {
    let normalized = text::normalize(token);
    if normalized.is_empty() {
        return Err(G2pError::InvalidToken(token.to_owned()));
    }
    let mut out = Vec::new();
    for part in normalized.split(' ') {
        for word in expand_digits(part) {
            match lexicon.get(&word) {
                Some(pron) => out.extend_from_slice(pron),
                None => out.extend(letter_to_sound(&word)),
            }
        }
    }
    if out.is_empty() {
        return Err(G2pError::InvalidToken(token.to_owned()));
    }
    Ok(out)
}

/// Tokens and phonemes of a phrase, with each token's span into the phonemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonemePhrase {
    pub tokens: Vec<String>,
    pub phonemes: Vec<Phoneme>,
    pub spans: Vec<Range<usize>>,
}

impl PhonemePhrase {
    /// Index of the token owning phoneme `idx`.
    pub fn token_of(&self, idx: usize) -> usize {
        self.spans.partition_point(|s| s.end <= idx)
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn strip_stress(&self) -> PhonemePhrase {
        PhonemePhrase {
            tokens: self.tokens.clone(),
            phonemes: self.phonemes.iter().map(|p| p.without_stress()).collect(),
            spans: self.spans.clone(),
        }
    }
}

pub fn phonemize_phrase(lexicon: &Lexicon, text: &str) -> Result<PhonemePhrase, G2pError> {
    let tokens = text::tokenize(text);
    if tokens.is_empty() {
        return Err(G2pError::EmptyPhrase);
    }
    let mut phonemes = Vec::new();
    let mut spans = Vec::with_capacity(tokens.len());
    for token in &tokens {
        let start = phonemes.len();
        phonemes.extend(phonemize_token(lexicon, token)?);
        spans.push(start..phonemes.len());
    }
    Ok(PhonemePhrase { tokens, phonemes, spans })
}

const SMALL_NUMBERS: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];
const TENS: [&str; 8] = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];

/// Split a normalized token into lookup words, spelling out digit runs.
fn expand_digits(token: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut run = String::new();
    let mut run_is_digit = false;
    let flush = |run: &mut String, is_digit: bool, words: &mut Vec<String>| {
        if run.is_empty() {
            return;
        }
        if is_digit {
            words.extend(number_words(run));
        } else {
            words.push(std::mem::take(run));
        }
        run.clear();
    };
    for c in token.chars() {
        let d = c.is_ascii_digit();
        if !run.is_empty() && d != run_is_digit {
            flush(&mut run, run_is_digit, &mut words);
        }
        run_is_digit = d;
        run.push(c);
    }
    flush(&mut run, run_is_digit, &mut words);
    words
}

pub(crate) fn number_words(digits: &str) -> Vec<String> {
    let trimmed = digits.trim_start_matches('0');
    let value: Option<usize> = if trimmed.is_empty() { Some(0) } else { trimmed.parse().ok() };
    match value {
        Some(n) if n < 20 && digits.len() <= 2 => vec![SMALL_NUMBERS[n].to_owned()],
        Some(n) if (20..100).contains(&n) && digits.len() == 2 => {
            let mut w = vec![TENS[n / 10 - 2].to_owned()];
            if n % 10 != 0 {
                w.push(SMALL_NUMBERS[n % 10].to_owned());
            }
            w
        }
        _ => digits
            .bytes()
            .map(|b| SMALL_NUMBERS[(b - b'0') as usize].to_owned())
            .collect(),
    }
}

fn is_vowel_letter(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

const MULTI_LETTER_RULES: [(&str, &[&str]); 22] = [
    ("tch", &["CH"]),
    ("sh", &["SH"]),
    ("ch", &["CH"]),
    ("ph", &["F"]),
    ("ck", &["K"]),
    ("th", &["TH"]),
    ("ng", &["NG"]),
    ("wh", &["W"]),
    ("qu", &["K", "W"]),
    ("ee", &["IY1"]),
    ("ea", &["IY1"]),
    ("oo", &["UW1"]),
    ("ai", &["EY1"]),
    ("ay", &["EY1"]),
    ("oa", &["OW1"]),
    ("ow", &["OW1"]),
    ("ou", &["AW1"]),
    ("oi", &["OY1"]),
    ("oy", &["OY1"]),
    ("au", &["AO1"]),
    ("aw", &["AO1"]),
    ("igh", &["AY1"]),
];

/// Deterministic letter-to-sound rules for out-of-lexicon words.
fn letter_to_sound(word: &str) -> Vec<Phoneme> {
    let mut letters: Vec<char> = word.chars().filter(|c| c.is_ascii_alphabetic()).collect();
    if letters.len() > 2
        && letters.last() == Some(&'e')
        && !is_vowel_letter(letters[letters.len() - 2])
        && letters[..letters.len() - 2].iter().any(|&c| is_vowel_letter(c) || c == 'y')
    {
        letters.pop();
    }
    let s: String = letters.iter().collect();
    let mut out: Vec<Phoneme> = Vec::new();
    let mut i = 0;
    'outer: while i < letters.len() {
        for (pattern, phones) in MULTI_LETTER_RULES.iter() {
            if s[i..].starts_with(pattern) {
                out.extend(phones.iter().map(|p| Phoneme::sym(p)));
                i += pattern.len();
                continue 'outer;
            }
        }
        let c = letters[i];
        let next = letters.get(i + 1).copied();
        if next == Some(c) && !is_vowel_letter(c) {
            i += 1;
            continue;
        }
        let phones: &[&str] = match c {
            'a' => &["AE1"],
            'e' => &["EH1"],
            'i' => &["IH1"],
            'o' => &["AA1"],
            'u' => &["AH1"],
            'y' if i == 0 => &["Y"],
            'y' if i + 1 == letters.len() => &["IY0"],
            'y' => &["IH1"],
            'b' => &["B"],
            'c' if matches!(next, Some('e' | 'i' | 'y')) => &["S"],
            'c' | 'k' | 'q' => &["K"],
            'd' => &["D"],
            'f' => &["F"],
            'g' => &["G"],
            'h' => &["HH"],
            'j' => &["JH"],
            'l' => &["L"],
            'm' => &["M"],
            'n' => &["N"],
            'p' => &["P"],
            'r' => &["R"],
            's' => &["S"],
            't' => &["T"],
            'v' => &["V"],
            'w' => &["W"],
            'x' => &["K", "S"],
            'z' => &["Z"],
            _ => &[],
        };
        out.extend(phones.iter().map(|p| Phoneme::sym(p)));
        i += 1;
    }
    out
}
