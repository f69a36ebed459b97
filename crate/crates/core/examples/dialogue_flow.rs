//! Walk a session through the dialogue states and show the narrow context
//! and trigger decision at each step.

use context_asr::dialogue::{
    derive_narrow_context, should_trigger, update_state, DialogueEvent, DialogueSnapshot, IntentClassifier,
    RuleIntentClassifier,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let classifier = RuleIntentClassifier;
    let steps = [
        ("how do i water my plants", DialogueEvent::Search { query: "how do i water my plants".into() }),
        (
            "",
            DialogueEvent::PresentResults {
                options: vec![
                    "how to care for indoor plants".into(),
                    "how to water indoor plants".into(),
                    "how to fertilize indoor plants".into(),
                ],
            },
        ),
        ("the second one", DialogueEvent::Select { option: 1 }),
        ("next", DialogueEvent::Command { command: "next".into() }),
        ("start another task", DialogueEvent::Command { command: "start another task".into() }),
        ("stop", DialogueEvent::Exit),
    ];
    let mut snapshot = DialogueSnapshot::start(["how to bake bread", "how to brew coffee"]);
    for (utterance, event) in steps {
        if !utterance.is_empty() {
            let intent = classifier.classify(utterance, &snapshot);
            println!(
                "[{}] {utterance:?}: intent {:?}, {} context entries, trigger {}",
                snapshot.state,
                intent.label,
                derive_narrow_context(&snapshot).len(),
                should_trigger(&snapshot, &intent)
            );
        }
        snapshot = update_state(&snapshot, &event)?;
        println!("  -> {}", snapshot.state);
    }
    match update_state(&snapshot, &DialogueEvent::Exit) {
        Err(e) => println!("after the session ends: {e}"),
        Ok(s) => println!("unexpected transition to {}", s.state),
    }
    Ok(())
}
