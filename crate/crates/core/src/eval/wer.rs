use super::EvalError;
use crate::rerank::edit_distance;
use crate::text;

/// Word error rate of `hypothesis` against `reference`: word-level edit
/// distance divided by the reference length, both normalized first.
pub fn wer(hypothesis: &str, reference: &str) -> Result<f64, EvalError> {
    let r = text::tokenize(reference);
    if r.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    let h = text::tokenize(hypothesis);
    Ok(edit_distance(&h, &r) as f64 / r.len() as f64)
}
