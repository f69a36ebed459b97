//! Corrupt a clean utterance into a synthetic n-best list.
//!
//!     cargo run --example inject_errors -- "how to tune an electric guitar" 3

use context_asr::eval::{inject_errors, wer, NoiseConfig};
use context_asr::g2p::Lexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let gold = args.next().unwrap_or_else(|| "how to fix a bathroom faucet".into());
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let lexicon = Lexicon::bundled();
    for seed in 0..seeds {
        let noise = NoiseConfig { corruption_prob: 0.3, min_corruptions: 1, gold_in_nbest: seed % 2 == 0, ..Default::default() };
        let out = inject_errors(&gold, &lexicon, &noise, seed)?;
        println!(
            "seed {seed}: {} token(s) corrupted, gold listed: {}, WER of best {:.2}",
            out.corrupted_tokens,
            out.gold_present,
            wer(out.nbest.best(), &gold)?
        );
        for h in out.nbest.hypotheses() {
            println!("    {h}");
        }
    }
    Ok(())
}
