//! BiLSTM sequence tagger over the combined tag set.
//!
//! Embedding → stacked bidirectional LSTM → per-token softmax. Gradients
//! are written out by hand and optimized with Adam.

mod adam;
mod checkpoint;
mod config;
mod model;
mod params;
mod train;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, MAGIC};
pub use config::TrainConfig;
pub use model::{argmax_rows, backward_trace, forward, forward_trace, Mode, SentenceTrace};
pub use params::{Array, Dims, LstmDirection, TaggerParams};
pub use train::{
    backward, batch_loss, encode, predict_tags, seq_loss, train, BatchLoss, Example, LossRecord, Objective,
};
