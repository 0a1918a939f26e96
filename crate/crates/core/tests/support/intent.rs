//! Exhaustive intent-matching oracle over exact fractions, and the random
//! case generator used against it.

use std::collections::BTreeSet;

use forge_core::model::IntentDef;
use rand::seq::SliceRandom;
use rand::Rng;

/// Exact fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Frac(pub usize, pub usize);

impl Frac {
    pub fn cmp(self, other: Frac) -> std::cmp::Ordering {
        (self.0 * other.1).cmp(&(other.0 * self.1))
    }
}

pub fn tokens(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut word = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
        } else if !word.is_empty() {
            out.insert(std::mem::take(&mut word));
        }
    }
    out
}

/// Scores every intent, keeps the first maximum, applies the threshold.
pub fn oracle(text: &str, intents: &[IntentDef], threshold: Frac) -> Option<(String, Frac)> {
    let message = tokens(text);
    if message.is_empty() {
        return None;
    }
    let mut scored = Vec::new();
    for intent in intents {
        let mut best = Frac(0, 1);
        for sentence in &intent.sentences {
            let s = tokens(sentence);
            if s.is_empty() {
                continue;
            }
            let score = Frac(s.intersection(&message).count(), s.len());
            if score.cmp(best).is_gt() {
                best = score;
            }
        }
        scored.push((intent.name.clone(), best));
    }
    let max = scored.iter().map(|(_, s)| *s).max_by(|a, b| a.cmp(*b))?;
    let (name, score) = scored.into_iter().find(|(_, s)| s.cmp(max).is_eq())?;
    score.cmp(threshold).is_ge().then_some((name, score))
}

const VOCAB: &[&str] = &["open", "Hours", "when", "price", "hello", "bye", "ticket", "today"];
const NOISE: &[&str] = &[" ", "  ", "?", "!", ", ", "... "];

fn phrase(rng: &mut impl Rng, vocab: &[&str], max: usize) -> String {
    let len = rng.gen_range(0..=max);
    let mut out = String::new();
    for _ in 0..len {
        out.push_str(vocab.choose(rng).unwrap());
        out.push_str(NOISE.choose(rng).unwrap());
    }
    out
}

pub const THRESHOLDS: &[Frac] = &[Frac(0, 1), Frac(1, 4), Frac(1, 3), Frac(1, 2), Frac(3, 5), Frac(2, 3), Frac(3, 4), Frac(1, 1)];

/// One random case: (message, intents, threshold).
pub fn random_case(rng: &mut impl Rng) -> (String, Vec<IntentDef>, Frac) {
    let vocab_size = rng.gen_range(1..=VOCAB.len());
    let vocab: Vec<&str> = VOCAB.choose_multiple(rng, vocab_size).copied().collect();
    let mut intents: Vec<IntentDef> = (0..rng.gen_range(1..5))
        .map(|i| {
            let sentences: Vec<String> = (0..rng.gen_range(1..4)).map(|_| phrase(rng, &vocab, 4)).collect();
            IntentDef::new(format!("i{i}"), sentences)
        })
        .collect();
    // Occasionally copy the first intent's sentences to force exact ties.
    if intents.len() > 1 && rng.gen_bool(0.2) {
        let copy = intents[0].sentences.clone();
        let last = intents.len() - 1;
        intents[last].sentences = copy;
    }
    let text = phrase(rng, &vocab, 6);
    let threshold = *THRESHOLDS.choose(rng).unwrap();
    (text, intents, threshold)
}

/// Compares `match_intent` with the oracle on one case. `Ok(Some(tied))`
/// reports a match and whether several intents shared the top score.
pub fn check_case(text: &str, intents: &[IntentDef], threshold: Frac) -> Result<Option<bool>, String> {
    let expected = oracle(text, intents, threshold);
    let got = forge_core::agent::match_intent(text, intents, threshold.0 as f64 / threshold.1 as f64);
    match (&expected, &got) {
        (None, None) => Ok(None),
        (Some((name, score)), Some(m)) if *name == m.intent && m.score == score.0 as f64 / score.1 as f64 => {
            let top = intents
                .iter()
                .filter(|i| oracle(text, std::slice::from_ref(*i), Frac(0, 1)).is_some_and(|(_, s)| s.cmp(*score).is_eq()))
                .count();
            Ok(Some(top > 1))
        }
        _ => Err(format!("oracle {expected:?} vs {got:?} for {text:?} over {intents:?}")),
    }
}
