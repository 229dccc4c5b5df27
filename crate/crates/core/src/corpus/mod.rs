//! Annotated corpora over a combined entity + trigger tag set.
//!
//! Every token carries exactly one surface tag: `O`, `B-ENT:<type>`,
//! `I-ENT:<type>`, `B-TRG:<type>` or `I-TRG:<type>`. Tag indices are fixed
//! by the schema: `O` is 0, then a B/I pair per entity type, then a B/I pair
//! per trigger type, each in schema order.

mod format;
mod split;
mod synth;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use format::{parse_corpus, read_corpus, serialize_corpus};
pub use split::{fold_assignment, kfold_split};
pub use synth::{generate_synthetic, CooccurrenceProfile};

/// Reserved spelling of the unknown token, always at vocabulary index 0.
pub const UNKNOWN_TOKEN: &str = "<unk>";

/// Which half of the combined tag set a tag or type belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Entity,
    Trigger,
}

impl Role {
    pub fn prefix(self) -> &'static str {
        match self {
            Role::Entity => "ENT",
            Role::Trigger => "TRG",
        }
    }

    pub fn other(self) -> Role {
        match self {
            Role::Entity => Role::Trigger,
            Role::Trigger => Role::Entity,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Entity => f.write_str("entity"),
            Role::Trigger => f.write_str("trigger"),
        }
    }
}

/// Decoded surface tag. Type indices refer to the schema's entity or trigger list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(Role, usize),
    Inside(Role, usize),
}

impl Tag {
    pub fn role(self) -> Option<Role> {
        match self {
            Tag::Outside => None,
            Tag::Begin(r, _) | Tag::Inside(r, _) => Some(r),
        }
    }

    pub fn type_index(self) -> Option<usize> {
        match self {
            Tag::Outside => None,
            Tag::Begin(_, t) | Tag::Inside(_, t) => Some(t),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    entity_types: Vec<String>,
    trigger_types: Vec<String>,
}

/// The combined tag set: entity types, trigger types, and the outside tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct TagSchema {
    entity_types: Vec<String>,
    trigger_types: Vec<String>,
}

impl TryFrom<RawSchema> for TagSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        TagSchema::new(raw.entity_types, raw.trigger_types)
    }
}

impl TagSchema {
    pub fn new<E, T>(entity_types: E, trigger_types: T) -> Result<Self>
    where
        E: IntoIterator,
        E::Item: Into<String>,
        T: IntoIterator,
        T::Item: Into<String>,
    {
        let entity_types: Vec<String> = entity_types.into_iter().map(Into::into).collect();
        let trigger_types: Vec<String> = trigger_types.into_iter().map(Into::into).collect();
        if entity_types.is_empty() || trigger_types.is_empty() {
            return Err(Error::Schema(
                "entity_types and trigger_types must both be non-empty".into(),
            ));
        }
        let mut seen = HashSet::new();
        for name in entity_types.iter().chain(&trigger_types) {
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(Error::Schema(format!("invalid type name {name:?}")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate type name {name:?}")));
            }
        }
        Ok(TagSchema {
            entity_types,
            trigger_types,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schema serializes")
    }

    pub fn entity_types(&self) -> &[String] {
        &self.entity_types
    }

    pub fn trigger_types(&self) -> &[String] {
        &self.trigger_types
    }

    pub fn types(&self, role: Role) -> &[String] {
        match role {
            Role::Entity => &self.entity_types,
            Role::Trigger => &self.trigger_types,
        }
    }

    pub fn type_index(&self, role: Role, name: &str) -> Option<usize> {
        self.types(role).iter().position(|t| t == name)
    }

    /// Role of a type name, if the schema knows it.
    pub fn role_of(&self, name: &str) -> Option<(Role, usize)> {
        self.type_index(Role::Entity, name)
            .map(|i| (Role::Entity, i))
            .or_else(|| self.type_index(Role::Trigger, name).map(|i| (Role::Trigger, i)))
    }

    /// `1 + 2|A_e| + 2|A_t|`.
    pub fn num_tags(&self) -> usize {
        1 + 2 * self.entity_types.len() + 2 * self.trigger_types.len()
    }

    pub fn tag_index(&self, tag: Tag) -> usize {
        let base = |role: Role, t: usize| match role {
            Role::Entity => 1 + 2 * t,
            Role::Trigger => 1 + 2 * self.entity_types.len() + 2 * t,
        };
        match tag {
            Tag::Outside => 0,
            Tag::Begin(r, t) => base(r, t),
            Tag::Inside(r, t) => base(r, t) + 1,
        }
    }

    /// Panics if `index >= num_tags()`.
    pub fn tag(&self, index: usize) -> Tag {
        assert!(index < self.num_tags(), "tag index {index} out of range");
        if index == 0 {
            return Tag::Outside;
        }
        let k = index - 1;
        let n_ent = 2 * self.entity_types.len();
        let (role, k) = if k < n_ent {
            (Role::Entity, k)
        } else {
            (Role::Trigger, k - n_ent)
        };
        if k % 2 == 0 {
            Tag::Begin(role, k / 2)
        } else {
            Tag::Inside(role, k / 2)
        }
    }

    pub fn tag_name(&self, index: usize) -> String {
        match self.tag(index) {
            Tag::Outside => "O".to_string(),
            Tag::Begin(r, t) => format!("B-{}:{}", r.prefix(), self.types(r)[t]),
            Tag::Inside(r, t) => format!("I-{}:{}", r.prefix(), self.types(r)[t]),
        }
    }

    /// Surface spellings of every tag, in index order.
    pub fn combined(&self) -> Vec<String> {
        (0..self.num_tags()).map(|i| self.tag_name(i)).collect()
    }

    pub fn parse_tag(&self, name: &str) -> Option<usize> {
        if name == "O" {
            return Some(0);
        }
        let (bio, rest) = name.split_once('-')?;
        let (prefix, type_name) = rest.split_once(':')?;
        let role = match prefix {
            "ENT" => Role::Entity,
            "TRG" => Role::Trigger,
            _ => return None,
        };
        let t = self.type_index(role, type_name)?;
        let tag = match bio {
            "B" => Tag::Begin(role, t),
            "I" => Tag::Inside(role, t),
            _ => return None,
        };
        Some(self.tag_index(tag))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A contiguous B/I run: tokens `start..end` of one type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub role: Role,
    pub type_index: usize,
    pub start: usize,
    pub end: usize,
}

/// Position of the first BIO violation in `tags`, if any.
pub fn bio_violation(schema: &TagSchema, tags: &[usize]) -> Option<usize> {
    let mut prev = Tag::Outside;
    for (i, &idx) in tags.iter().enumerate() {
        let tag = schema.tag(idx);
        if let Tag::Inside(r, t) = tag {
            match prev {
                Tag::Begin(pr, pt) | Tag::Inside(pr, pt) if pr == r && pt == t => {}
                _ => return Some(i),
            }
        }
        prev = tag;
    }
    None
}

/// Maximal B/I runs. Tolerates BIO-invalid input by treating a stray I as a B.
pub fn spans(schema: &TagSchema, tags: &[usize]) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::new();
    let mut open: Option<Span> = None;
    for (i, &idx) in tags.iter().enumerate() {
        let tag = schema.tag(idx);
        match tag {
            Tag::Outside => {
                out.extend(open.take());
            }
            Tag::Begin(role, t) => {
                out.extend(open.take());
                open = Some(Span { role, type_index: t, start: i, end: i + 1 });
            }
            Tag::Inside(role, t) => match open.as_mut() {
                Some(s) if s.role == role && s.type_index == t => s.end = i + 1,
                _ => {
                    out.extend(open.take());
                    open = Some(Span { role, type_index: t, start: i, end: i + 1 });
                }
            },
        }
    }
    out.extend(open);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedSentence {
    tokens: Vec<String>,
    tags: Vec<usize>,
}

impl AnnotatedSentence {
    /// Validates length agreement, tag range, and BIO order.
    pub fn new(schema: &TagSchema, tokens: Vec<String>, tags: Vec<usize>) -> Result<Self> {
        if tokens.is_empty() || tokens.len() != tags.len() {
            return Err(Error::Shape(format!(
                "sentence needs |tokens| = |tags| >= 1, got {} tokens and {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        if let Some(&bad) = tags.iter().find(|&&t| t >= schema.num_tags()) {
            return Err(Error::Index(format!("tag index {bad} >= {}", schema.num_tags())));
        }
        if let Some(pos) = bio_violation(schema, &tags) {
            return Err(Error::Bio {
                line: pos + 1,
                message: format!("{} does not continue a span", schema.tag_name(tags[pos])),
            });
        }
        Ok(AnnotatedSentence { tokens, tags })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn spans(&self, schema: &TagSchema) -> Vec<Span> {
        spans(schema, &self.tags)
    }

    pub fn span_text(&self, span: &Span) -> String {
        self.tokens[span.start..span.end].join(" ")
    }

    fn gold(&self, schema: &TagSchema, role: Role) -> Vec<(String, String)> {
        self.spans(schema)
            .into_iter()
            .filter(|s| s.role == role)
            .map(|s| (self.span_text(&s), schema.types(role)[s.type_index].clone()))
            .collect()
    }

    /// `(span text, entity type)` for every gold entity span.
    pub fn gold_entities(&self, schema: &TagSchema) -> Vec<(String, String)> {
        self.gold(schema, Role::Entity)
    }

    pub fn gold_triggers(&self, schema: &TagSchema) -> Vec<(String, String)> {
        self.gold(schema, Role::Trigger)
    }
}

/// Token-to-index map. Index 0 is the unknown token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::from_tokens(std::iter::empty::<String>())
    }
}

impl Vocab {
    /// Builds from tokens in first-seen order. Case is preserved.
    pub fn from_tokens<I>(tokens: I) -> Self
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let mut vocab = Vocab {
            tokens: vec![UNKNOWN_TOKEN.to_string()],
            index: HashMap::from([(UNKNOWN_TOKEN.to_string(), 0)]),
        };
        for tok in tokens {
            let tok = tok.as_ref();
            if !vocab.index.contains_key(tok) {
                vocab.index.insert(tok.to_string(), vocab.tokens.len());
                vocab.tokens.push(tok.to_string());
            }
        }
        vocab
    }

    pub fn from_sentences(sentences: &[AnnotatedSentence]) -> Self {
        Vocab::from_tokens(sentences.iter().flat_map(|s| s.tokens.iter()))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.get(t)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub schema: TagSchema,
    pub sentences: Vec<AnnotatedSentence>,
    pub vocab: Vocab,
}

impl Corpus {
    /// Vocabulary is built from `sentences`.
    pub fn new(schema: TagSchema, sentences: Vec<AnnotatedSentence>) -> Self {
        let vocab = Vocab::from_sentences(&sentences);
        Corpus {
            schema,
            sentences,
            vocab,
        }
    }

    pub fn with_vocab(schema: TagSchema, sentences: Vec<AnnotatedSentence>, vocab: Vocab) -> Self {
        Corpus {
            schema,
            sentences,
            vocab,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(AnnotatedSentence::len).sum()
    }

    /// The same sentences repeated `times` times.
    pub fn repeated(&self, times: usize) -> Corpus {
        let mut sentences = Vec::with_capacity(self.len() * times);
        for _ in 0..times {
            sentences.extend(self.sentences.iter().cloned());
        }
        Corpus::with_vocab(self.schema.clone(), sentences, self.vocab.clone())
    }
}
