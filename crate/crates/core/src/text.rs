//! Text normalization shared by every stage.
//!
//! Lowercases, turns every character that is not alphanumeric into a word
//! break (apostrophes survive only between two alphanumerics, so "don't"
//! stays one token), and collapses whitespace.

/// Normalize `text` into a single-spaced, lowercase string.
pub fn normalize(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for (i, &c) in chars.iter().enumerate() {
        let keep = if c.is_alphanumeric() {
            true
        } else if c == '\'' || c == '\u{2019}' {
            let prev = i > 0 && chars[i - 1].is_alphanumeric();
            let next = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            prev && next
        } else {
            false
        };
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            if c == '\u{2019}' {
                out.push('\'');
            } else {
                out.extend(c.to_lowercase());
            }
        } else {
            pending_space = true;
        }
    }
    out
}

/// Normalized tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text).split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

/// True when both texts are equal after normalization.
pub fn same_text(a: &str, b: &str) -> bool {
    normalize(a) == normalize(b)
}
