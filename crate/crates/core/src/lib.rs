//! Joint entity and trigger extraction with a cross-supervised loss.
//!
//! A BiLSTM tagger labels every token with one tag from a combined entity +
//! trigger tag set. During training, the predicted entity-type distribution
//! is pushed through an entity-trigger co-occurrence matrix to predict the
//! trigger-type distribution (and the reverse), and the KL divergence to the
//! gold distributions is added to the cross-entropy loss.
//!
//! * [`corpus`] reads, writes, splits and synthesizes annotated corpora.
//! * [`hin`] builds the entity-trigger co-occurrence network and its direct
//!   and meta-path adjacency matrices.
//! * [`tagger`] is the BiLSTM tagger with hand-written backprop and Adam.
//! * [`ncsl`] holds the type distributions, converters and KL losses.
//! * [`eval`] computes token-level precision/recall/F1 and runs cross-validation.
//! * [`cli`] wires everything to the `csm` binary.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod hin;
pub mod ncsl;
pub mod tagger;

pub use error::{Error, Result};
