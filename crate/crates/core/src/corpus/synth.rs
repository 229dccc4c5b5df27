use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AnnotatedSentence, Corpus, Role, Tag, TagSchema};
use crate::error::{Error, Result};

const FILLER: usize = 24;
const TYPE_WORDS: usize = 5;
const SHARED_NAMES: usize = 6;
const TRIGGER_WORDS: usize = 3;
const SHARED_TRIGGERS: usize = 3;
const MODIFIERS: [&str; 4] = ["the", "a", "new", "old"];

/// Sampling weights over entity types for each trigger type.
#[derive(Clone, Debug, PartialEq)]
pub struct CooccurrenceProfile {
    // rows: trigger types, columns: entity types
    weights: Vec<Vec<f64>>,
}

impl CooccurrenceProfile {
    /// `weights[trigger][entity]`, both in schema order.
    pub fn new(schema: &TagSchema, weights: Vec<Vec<f64>>) -> Result<Self> {
        let n_ent = schema.entity_types().len();
        if weights.len() != schema.trigger_types().len() {
            return Err(Error::Config(format!(
                "profile has {} rows for {} trigger types",
                weights.len(),
                schema.trigger_types().len()
            )));
        }
        for (trigger, row) in schema.trigger_types().iter().zip(&weights) {
            if row.len() != n_ent {
                return Err(Error::Config(format!(
                    "profile row for {trigger} has {} weights for {n_ent} entity types",
                    row.len()
                )));
            }
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::Config(format!("profile row for {trigger} has a negative weight")));
            }
            if !row.iter().any(|&w| w > 0.0) {
                return Err(Error::Config(format!("profile row for {trigger} has no positive weight")));
            }
        }
        Ok(CooccurrenceProfile { weights })
    }

    /// Builds from `(trigger type, weights over entity types)` pairs covering every trigger type.
    pub fn from_pairs<'a, I>(schema: &TagSchema, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Vec<f64>)>,
    {
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; schema.trigger_types().len()];
        for (name, w) in pairs {
            let t = schema
                .type_index(Role::Trigger, name)
                .ok_or_else(|| Error::Config(format!("unknown trigger type {name:?}")))?;
            rows[t] = Some(w);
        }
        let weights = rows
            .into_iter()
            .zip(schema.trigger_types())
            .map(|(r, name)| r.ok_or_else(|| Error::Config(format!("no profile for trigger type {name}"))))
            .collect::<Result<Vec<_>>>()?;
        CooccurrenceProfile::new(schema, weights)
    }

    /// Trigger `j` co-occurs only with entity types `i ≡ j (mod |A_t|)`.
    pub fn structured(schema: &TagSchema) -> Self {
        let n_trg = schema.trigger_types().len();
        let weights = (0..n_trg)
            .map(|j| {
                (0..schema.entity_types().len())
                    .map(|i| if i % n_trg == j { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        CooccurrenceProfile { weights }
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn type_word(name: &str, k: usize) -> String {
    format!("{}_{k}", name.to_lowercase())
}

/// Seeded synthetic corpus: one trigger span and one to three entity spans per
/// sentence, entity types drawn from the trigger's row of `profile`, with
/// filler tokens in between.
///
/// Some entity heads and trigger words come from pools shared across types, so
/// their tags are only recoverable from context.
pub fn generate_synthetic(
    schema: &TagSchema,
    n_sentences: usize,
    seed: u64,
    profile: &CooccurrenceProfile,
) -> Result<Corpus> {
    if schema.entity_types().is_empty() || schema.trigger_types().is_empty() {
        return Err(Error::Schema("empty schema".into()));
    }
    if profile.weights.len() != schema.trigger_types().len()
        || profile.weights.iter().any(|r| r.len() != schema.entity_types().len())
    {
        return Err(Error::Config("profile does not match schema".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::with_capacity(n_sentences);

    for _ in 0..n_sentences {
        let trigger = rng.random_range(0..schema.trigger_types().len());
        let n_entities = rng.random_range(1..=3);

        // (tokens, tags) per span, trigger inserted at a random slot
        let mut spans: Vec<Vec<(String, Tag)>> = Vec::with_capacity(n_entities + 1);
        for _ in 0..n_entities {
            let e = sample_weighted(&mut rng, &profile.weights[trigger]);
            let head = if rng.random::<f64>() < 0.4 {
                format!("name{}", rng.random_range(0..SHARED_NAMES))
            } else {
                type_word(&schema.entity_types()[e], rng.random_range(0..TYPE_WORDS))
            };
            let mut span = Vec::new();
            if rng.random::<f64>() < 0.3 {
                let m = MODIFIERS[rng.random_range(0..MODIFIERS.len())].to_string();
                span.push((m, Tag::Begin(Role::Entity, e)));
                span.push((head, Tag::Inside(Role::Entity, e)));
            } else {
                span.push((head, Tag::Begin(Role::Entity, e)));
            }
            spans.push(span);
        }
        let word = if rng.random::<f64>() < 0.3 {
            format!("act{}", rng.random_range(0..SHARED_TRIGGERS))
        } else {
            type_word(&schema.trigger_types()[trigger], rng.random_range(0..TRIGGER_WORDS))
        };
        let slot = rng.random_range(0..=spans.len());
        spans.insert(slot, vec![(word, Tag::Begin(Role::Trigger, trigger))]);

        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        let filler = |rng: &mut ChaCha8Rng, tokens: &mut Vec<String>, tags: &mut Vec<usize>| {
            for _ in 0..rng.random_range(0..=2) {
                let k = rng.random_range(0..FILLER + 2);
                let w = match k {
                    FILLER => "the".to_string(),
                    k if k > FILLER => "a".to_string(),
                    k => format!("w{k}"),
                };
                tokens.push(w);
                tags.push(0);
            }
        };
        for span in spans {
            filler(&mut rng, &mut tokens, &mut tags);
            for (tok, tag) in span {
                tokens.push(tok);
                tags.push(schema.tag_index(tag));
            }
        }
        filler(&mut rng, &mut tokens, &mut tags);
        sentences.push(AnnotatedSentence::new(schema, tokens, tags)?);
    }
    Ok(Corpus::new(schema.clone(), sentences))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, serialize_corpus};

    fn schema() -> TagSchema {
        TagSchema::new(["PER", "GPE", "WEA", "ORG", "LOC"], ["Movement", "Conflict", "Contact"]).unwrap()
    }

    #[test]
    fn zero_sentences() {
        let s = schema();
        let c = generate_synthetic(&s, 0, 1, &CooccurrenceProfile::structured(&s)).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn forced_profile() {
        let s = schema();
        let profile = CooccurrenceProfile::from_pairs(
            &s,
            [
                ("Movement", vec![0.0, 1.0, 0.0, 0.0, 0.0]),
                ("Conflict", vec![1.0; 5]),
                ("Contact", vec![1.0; 5]),
            ],
        )
        .unwrap();
        let c = generate_synthetic(&s, 300, 4, &profile).unwrap();
        let mut movement = 0;
        for sentence in &c.sentences {
            if sentence.gold_triggers(&s)[0].1 == "Movement" {
                movement += 1;
                assert!(sentence.gold_entities(&s).iter().all(|(_, t)| t == "GPE"));
            }
        }
        assert!(movement > 0);
    }

    #[test]
    fn sentence_shape() {
        let s = schema();
        let c = generate_synthetic(&s, 200, 11, &CooccurrenceProfile::structured(&s)).unwrap();
        for sentence in &c.sentences {
            assert_eq!(sentence.gold_triggers(&s).len(), 1);
            let n = sentence.gold_entities(&s).len();
            assert!((1..=3).contains(&n), "{n} entities");
        }
    }

    #[test]
    fn deterministic_and_parseable() {
        let s = schema();
        let p = CooccurrenceProfile::structured(&s);
        let a = serialize_corpus(&generate_synthetic(&s, 500, 7, &p).unwrap());
        let b = serialize_corpus(&generate_synthetic(&s, 500, 7, &p).unwrap());
        assert_eq!(a, b);
        let reparsed = parse_corpus(a.as_bytes(), &s).unwrap();
        assert_eq!(serialize_corpus(&reparsed), a);
    }

    #[test]
    fn bad_profiles() {
        let s = schema();
        assert!(CooccurrenceProfile::new(&s, vec![vec![1.0; 5]; 2]).is_err());
        assert!(CooccurrenceProfile::new(&s, vec![vec![0.0; 5]; 3]).is_err());
        assert!(CooccurrenceProfile::new(&s, vec![vec![-1.0, 2.0, 0.0, 0.0, 0.0]; 3]).is_err());
        assert!(CooccurrenceProfile::from_pairs(&s, [("Movement", vec![1.0; 5])]).is_err());
    }
}
