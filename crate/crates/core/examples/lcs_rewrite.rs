//! Align a hypothesis with a context phrase by phoneme LCS and splice the
//! phrase's words in.
//!
//!     cargo run --example lcs_rewrite -- "cartoon electric guitar" "tune an electric guitar"

use context_asr::g2p::{phonemize_phrase, Lexicon};
use context_asr::phonetics::{lcs, rewrite, PhoneticThresholds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let hyp = args.next().unwrap_or_else(|| "how can i fix a leaky bathroom for sit".into());
    let cand = args.next().unwrap_or_else(|| "how to fix a bathroom faucet".into());

    let lexicon = Lexicon::bundled();
    let h = phonemize_phrase(&lexicon, &hyp)?;
    let c = phonemize_phrase(&lexicon, &cand)?;
    let m = lcs(&h.phonemes, &c.phonemes);
    let t = PhoneticThresholds::default();
    let ratio = m.range_in_hyp as f64 / c.phonemes.len() as f64;

    println!("hypothesis  {hyp:?} ({} phonemes)", h.phonemes.len());
    println!("candidate   {cand:?} ({} phonemes)", c.phonemes.len());
    println!("lcs length  {}", m.length);
    println!("coverage    {:.3} (min {})", m.coverage, t.min_coverage);
    println!("range ratio {ratio:.3} (max {})", t.range_ratio);
    println!("accepted    {}", m.coverage >= t.min_coverage && ratio <= t.range_ratio);
    println!("rewrite     {:?}", rewrite(&h, &c, &m.pairs));
    Ok(())
}
