//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use context_asr::augment::{
    build_augmented_catalog, expand_partial_matches, inject_result, map_public_to_private, AugmentConfig,
    TemplateGenerator, MAX_RESULTS,
};
use context_asr::cli::RunConfig;
use context_asr::dialogue::{derive_narrow_context, DialogueSnapshot, Intent, IntentLabel};
use context_asr::eval::{aggregate, evaluate, generate_corpus, wer, CorpusConfig, EvalConfig, FprConvention, TurnResult};
use context_asr::g2p::{parse_phonemes, phonemize_phrase, Lexicon, Phoneme};
use context_asr::phonetics::{lcs, rewrite};
use context_asr::pipeline::{OutcomeKind, Pipeline, PipelineConfig};
use context_asr::rerank::{rerank_nbest, Method, NBestList, RerankDecision, RerankThresholds};
use context_asr::retrieval::{build_index, Embedder, TaskCatalog, TaskEntry, TrigramEmbedder};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_faucet() -> Check {
    let start = Instant::now();
    let embedder = TrigramEmbedder::default();
    let catalog = TaskCatalog::new(vec![TaskEntry::new("faucet", "how to fix a bathroom faucet")]);
    let index = build_index(&catalog, &embedder).map_err(|e| e.to_string())?;
    let lexicon = Lexicon::bundled();
    let pipeline = Pipeline::new(lexicon.clone(), index, Box::new(embedder), PipelineConfig::default())
        .map_err(|e| e.to_string())?;
    let nbest = NBestList::new(["how can i fix a leaky bathroom for sit"]).map_err(|e| e.to_string())?;
    let out = pipeline
        .correct(&nbest, &DialogueSnapshot::searching(), &Intent::certain(IntentLabel::Search))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.kind == OutcomeKind::Corrected, format!("kind {:?}", out.kind))?;
    let got = out.corrected_text.unwrap_or_default();
    ensure(got == "how can i fix a leaky bathroom faucet", format!("pipeline gave {got:?}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;

    // Omission direction: the catalog phrase carries a word the hypothesis lacks.
    let hyp = phonemize_phrase(&lexicon, "how can i fix a bathroom for sit").map_err(|e| e.to_string())?;
    let cand = phonemize_phrase(&lexicon, "how to fix a leaky bathroom faucet").map_err(|e| e.to_string())?;
    let m = lcs(&hyp.phonemes, &cand.phonemes);
    let omitted = rewrite(&hyp, &cand, &m.pairs);
    ensure(omitted == "how can i fix a bathroom faucet", format!("omission rewrite gave {omitted:?}"))?;
    Ok(format!("pipeline {got:?} in {elapsed:.2?}; omission rewrite {omitted:?} (coverage {:.3})", m.coverage))
}

fn c2_camper() -> Check {
    let embedder = TrigramEmbedder::default();
    let catalog = TaskCatalog::bundled();
    ensure(
        catalog.entries.iter().any(|e| e.canonical_text == "take care plant"),
        "bundled catalog lacks \"take care plant\"",
    )?;
    let index = build_index(&catalog, &embedder).map_err(|e| e.to_string())?;
    let nbest = NBestList::new(["how to camper for outdoor plants", "how to care for outdoor plants"])
        .map_err(|e| e.to_string())?;
    let narrow = derive_narrow_context(&DialogueSnapshot::searching());
    let out = rerank_nbest(&nbest, &narrow, &index, &embedder, &RerankThresholds::default()).map_err(|e| e.to_string())?;
    match out.decision {
        RerankDecision::Corrected(h) if h.rank == 1 && h.method == Method::Semantic => {
            Ok(format!("hypothesis 2 chosen, cosine {:.3} via {:?}", h.score, h.matched))
        }
        other => Err(format!("decision {other:?}")),
    }
}

fn c3_house_hence() -> Check {
    let p = |s: &str| parse_phonemes(s).map_err(|e| e.to_string());
    let (house, hence, horse) = (p("HH AW1 S")?, p("HH EH1 N S")?, p("HH AO1 R S")?);
    let a = lcs(&house, &horse).length;
    let b = lcs(&hence, &horse).length;
    ensure(a == b, format!("house {a} vs hence {b}"))?;
    let lex = Lexicon::bundled();
    for (w, expect) in [("house", &house), ("hence", &hence), ("horse", &horse)] {
        let got = phonemize_phrase(&lex, w).map_err(|e| e.to_string())?.phonemes;
        ensure(&got == expect, format!("{w} phonemized as {got:?}"))?;
    }
    Ok(format!("both LCS lengths are {a}"))
}

/// Longest common subsequence length by enumerating every subsequence of
/// `a` and testing it against `b`.
fn brute_lcs(a: &[Phoneme], b: &[Phoneme]) -> usize {
    let is_subseq = |s: &[Phoneme]| {
        let mut it = b.iter();
        s.iter().all(|x| it.any(|y| y == x))
    };
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let sub: Vec<Phoneme> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
        if sub.len() > best && is_subseq(&sub) {
            best = sub.len();
        }
    }
    best
}

/// Word edit distance by the plain recursive definition.
fn brute_edit(a: &[&str], b: &[&str]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                brute_edit(ra, rb)
            } else {
                1 + brute_edit(ra, b).min(brute_edit(a, rb)).min(brute_edit(ra, rb))
            }
        }
    }
}

fn c4_oracles() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alphabet = parse_phonemes("HH AW1 S R N K").map_err(|e| e.to_string())?;
    let seq = |rng: &mut ChaCha8Rng| -> Vec<Phoneme> {
        let n = rng.gen_range(0..=8);
        (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
    };
    for case in 0..1000 {
        let (a, b) = (seq(&mut rng), seq(&mut rng));
        let (got, want) = (lcs(&a, &b).length, brute_lcs(&a, &b));
        ensure(got == want, format!("LCS case {case}: {got} vs oracle {want} for {a:?} / {b:?}"))?;
    }
    let words = ["a", "bake", "bread", "fix", "the", "sink", "plant", "water"];
    for case in 0..500 {
        let sentence = |rng: &mut ChaCha8Rng, min: usize| -> Vec<&str> {
            let n = rng.gen_range(min..=6);
            (0..n).map(|_| words[rng.gen_range(0..words.len())]).collect()
        };
        let reference = sentence(&mut rng, 1);
        let hyp = sentence(&mut rng, 0);
        let got = wer(&hyp.join(" "), &reference.join(" ")).map_err(|e| e.to_string())?;
        let want = brute_edit(&hyp, &reference) as f64 / reference.len() as f64;
        ensure(got == want, format!("WER case {case}: {got} vs oracle {want}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("1000 LCS and 500 WER cases exact in {elapsed:.2?}"))
}

fn c5_defaults() -> Check {
    let c = RunConfig::default();
    let got = (c.fuzzy_min, c.cosine_min, c.alpha, c.range_ratio, c.min_coverage);
    ensure(got == (96, 0.8, 0.5, 1.5, 0.8), format!("{got:?}"))?;
    Ok(format!("fuzzy_min={} cosine_min={} alpha={} range_ratio={} min_coverage={}", got.0, got.1, got.2, got.3, got.4))
}

fn bundled_pipeline() -> Result<Pipeline, String> {
    let embedder = TrigramEmbedder::default();
    let index = build_index(&TaskCatalog::bundled(), &embedder).map_err(|e| e.to_string())?;
    Pipeline::new(Lexicon::bundled(), index, Box::new(embedder), PipelineConfig::default()).map_err(|e| e.to_string())
}

fn corpus() -> Result<Vec<context_asr::eval::AnnotatedTurn>, String> {
    generate_corpus(&TaskCatalog::bundled(), &Lexicon::bundled(), &CorpusConfig::default()).map_err(|e| e.to_string())
}

fn c6_no_false_fire() -> Check {
    let pipeline = bundled_pipeline()?;
    let mut checked = 0;
    let mut violations = Vec::new();
    for turn in corpus()? {
        let narrow = derive_narrow_context(&turn.snapshot);
        let best = turn.nbest.best();
        if !narrow.iter().any(|e| e.text == best) {
            continue;
        }
        checked += 1;
        let out = pipeline
            .correct(&turn.nbest, &turn.snapshot, &Intent::certain(turn.intent_label))
            .map_err(|e| e.to_string())?;
        if out.kind == OutcomeKind::Corrected {
            violations.push(turn.id.clone().unwrap_or_default());
        }
    }
    ensure(checked > 0, "no turn's best hypothesis equals a narrow-context entry")?;
    ensure(violations.is_empty(), format!("corrected exact inputs: {violations:?}"))?;
    Ok(format!("{checked} exact-match turns, 0 violations"))
}

fn c7_end_to_end() -> Check {
    let turns = corpus()?;
    ensure(turns.len() == 200, format!("{} turns", turns.len()))?;
    ensure(TaskCatalog::bundled().len() == 50, "catalog is not 50 tasks")?;
    let errors: Vec<_> = turns.iter().filter(|t| t.has_error).collect();
    let with_gold = errors
        .iter()
        .filter(|t| t.nbest.hypotheses().iter().any(|h| h == &t.gold_transcript))
        .count();
    ensure(with_gold == errors.len().div_ceil(2), format!("{with_gold} of {} error turns hold gold", errors.len()))?;

    let cfg = EvalConfig::default();
    let first = evaluate(&turns, &bundled_pipeline()?, &cfg).map_err(|e| e.to_string())?;
    let second = evaluate(&corpus()?, &bundled_pipeline()?, &cfg).map_err(|e| e.to_string())?;
    let json = first.report.to_json();
    ensure(json == second.report.to_json(), "report JSON differs between runs")?;

    // The baseline leaves every turn untouched.
    let untouched: Vec<TurnResult> = first
        .turns
        .iter()
        .zip(&turns)
        .map(|(r, t)| {
            let outcome = context_asr::pipeline::CorrectionOutcome {
                kind: OutcomeKind::NoCorrectionNeeded,
                corrected_text: None,
                target: None,
                method: None,
                score: None,
                matched: None,
                context: None,
                prompt: None,
                diagnostics: Vec::new(),
            };
            TurnResult {
                judgment: context_asr::eval::judge(&outcome, t, FprConvention::Standard),
                outcome,
                ..r.clone()
            }
        })
        .collect();
    let baseline = aggregate(&turns, &untouched, FprConvention::Standard);
    let base_recall = baseline.combined.recall.unwrap_or(0.0);
    ensure(base_recall == 0.0, format!("baseline recall {base_recall}"))?;

    let r = &first.report;
    let combined = r.combined.recall.ok_or("combined recall undefined")?;
    let search = r.search.recall.ok_or("search recall undefined")?;
    let selection = r.selection.recall.ok_or("selection recall undefined")?;
    ensure(combined > base_recall, format!("combined recall {combined}"))?;
    ensure(selection >= search, format!("selection recall {selection:.3} < search recall {search:.3}"))?;
    Ok(format!(
        "recall combined {combined:.3} > baseline 0; selection {selection:.3} >= search {search:.3}; JSON identical across runs"
    ))
}

/// Membership and targets by comparing every public text with every title.
fn mapping_oracle(public: &[String], titles: &[(String, String)], alpha: f64) -> BTreeMap<String, String> {
    let e = TrigramEmbedder::default();
    let cos = |a: &[f32], b: &[f32]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
        let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
        let c = dot / (na * nb);
        if (c - 1.0).abs() < 1e-6 {
            1.0
        } else {
            c
        }
    };
    let mut out = BTreeMap::new();
    for p in public {
        let pv = e.embed(p).unwrap();
        let scores: Vec<f64> = titles.iter().map(|(_, t)| cos(&e.embed(t).unwrap(), &pv)).collect();
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let at = scores.iter().position(|s| *s == best).unwrap();
        if best > alpha || best == 1.0 {
            out.insert(p.to_lowercase(), titles[at].0.clone());
        }
    }
    out
}

fn c8_augmentation() -> Check {
    let catalog = TaskCatalog::new(vec![
        TaskEntry::new("mosquitoes", "kill mosquitoes"),
        TaskEntry::new("computer", "start a computer"),
        TaskEntry::new("bread", "bake bread"),
    ]);
    let embedder = TrigramEmbedder::default();
    let config = AugmentConfig { n_clusters: 1, k_variations: 2, ..Default::default() };
    let out = build_augmented_catalog(&["Kill mosquitoes!".to_string()], &catalog, &config, &embedder, &TemplateGenerator)
        .map_err(|e| e.to_string())?;
    let before = catalog.surface_form_count();
    let added = out.catalog.surface_form_count() - before;
    ensure(added == 2, format!("{added} surface forms added"))?;
    let new_forms: Vec<&String> = out.catalog.get("mosquitoes").ok_or("task missing")?.surface_forms.iter().skip(1).collect();
    ensure(new_forms.len() == 2, format!("mosquito task gained {new_forms:?}"))?;
    for f in &new_forms {
        let target = out.map.get(f).map(|r| r.target.as_str());
        ensure(target == Some("mosquitoes"), format!("{f:?} resolves to {target:?}"))?;
    }

    let public: Vec<String> = ["kill mosquitoes", "kill the wasps", "start the computer", "bake a loaf", "go fishing"]
        .map(String::from)
        .to_vec();
    let titles: Vec<(String, String)> =
        catalog.entries.iter().map(|e| (e.id.clone(), e.canonical_text.clone())).collect();
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let map = map_public_to_private(&public, &catalog, &embedder, alpha).map_err(|e| e.to_string())?;
        let got: BTreeMap<String, String> = map.records().iter().map(|r| (r.text.clone(), r.target.clone())).collect();
        let want = mapping_oracle(&public, &titles, alpha);
        ensure(got == want, format!("alpha {alpha}: {got:?} vs oracle {want:?}"))?;
    }
    Ok(format!("added {new_forms:?} -> mosquitoes; 5x3 mapping matches oracle at 5 thresholds"))
}

fn c9_partial() -> Check {
    let options: Vec<String> = ["how to care for indoor plants", "how to water indoor plants", "how to fertilize indoor plants"]
        .map(String::from)
        .to_vec();
    let partials = expand_partial_matches(&options);
    let water = partials.iter().find(|p| p.partial == "water").ok_or("no \"water\" entry")?;
    ensure(water.option == options[1], format!("\"water\" resolves to {:?}", water.option))?;
    for shared in ["indoor", "plants", "indoor plants", "how to", "how"] {
        ensure(!partials.iter().any(|p| p.partial == shared), format!("entry for shared {shared:?}"))?;
    }
    Ok(format!("\"water\" -> {:?}; {} entries, none shared", water.option, partials.len()))
}

fn c10_inject() -> Check {
    let defaults: Vec<String> = (1..=12).map(|i| format!("result {i}")).collect();
    let fresh = inject_result(&defaults, "engine pick");
    ensure(fresh.len() == MAX_RESULTS, format!("length {}", fresh.len()))?;
    ensure(fresh[2] == "engine pick", format!("slot 3 holds {:?}", fresh[2]))?;
    ensure(fresh[..2] == defaults[..2] && fresh[3..] == defaults[2..9], "order of defaults disturbed")?;

    let moved = inject_result(&defaults, "result 8");
    ensure(moved[2] == "result 8", format!("slot 3 holds {:?}", moved[2]))?;
    ensure(moved.iter().filter(|r| *r == "result 8").count() == 1, "duplicate kept")?;
    ensure(moved.len() == MAX_RESULTS, format!("length {}", moved.len()))?;

    let short = inject_result(&defaults[..1], "engine pick");
    ensure(short == vec!["result 1".to_string(), "engine pick".to_string()], format!("short list {short:?}"))?;
    Ok("slot 3, deduplicated, capped at 10".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("faucet correction, both directions, under 1s", c1_faucet),
        ("camper n-best re-ranking picks hypothesis 2", c2_camper),
        ("house and hence tie against horse", c3_house_hence),
        ("LCS and WER match brute-force oracles", c4_oracles),
        ("threshold defaults", c5_defaults),
        ("no correction of exact narrow-context input", c6_no_false_fire),
        ("synthetic end-to-end recall ordering and determinism", c7_end_to_end),
        ("augmentation trace and mapping oracle", c8_augmentation),
        ("partial match for indoor plants", c9_partial),
        ("engine result injection", c10_inject),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
