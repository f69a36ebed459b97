//! Phoneme sequences with per-token spans.
//!
//!     cargo run --example phonemize -- "how to fix a bathroom faucet"

use context_asr::g2p::{phonemize_phrase, Lexicon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "house horse hence zzkrx 3".into());
    let lexicon = Lexicon::bundled();
    let phrase = phonemize_phrase(&lexicon, &text)?;
    println!("{} lexicon entries", lexicon.len());
    for (token, span) in phrase.tokens.iter().zip(&phrase.spans) {
        let source = match (lexicon.get(token), token.chars().all(|c| c.is_ascii_digit())) {
            (Some(_), _) => "lexicon",
            (None, true) => "number",
            (None, false) => "rules",
        };
        let symbols: Vec<String> = phrase.phonemes[span.clone()].iter().map(ToString::to_string).collect();
        println!("{token:>12}  [{}..{})  {:<8} {}", span.start, span.end, source, symbols.join(" "));
    }
    Ok(())
}
