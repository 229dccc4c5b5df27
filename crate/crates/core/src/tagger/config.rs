use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ncsl::MatrixMode;

/// Training and evaluation settings. Serialized as flat JSON; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Weight of the cross-supervision loss; 0 trains the plain tagger.
    pub alpha: f64,
    pub d_emb: usize,
    pub d_hid: usize,
    pub n_layers: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub meta_path_length: usize,
    pub folds: usize,
    pub seed: u64,
    pub matrix_mode: MatrixMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.5,
            d_emb: 300,
            d_hid: 128,
            n_layers: 2,
            dropout: 0.5,
            learning_rate: 0.02,
            epochs: 30,
            batch_size: 256,
            meta_path_length: 3,
            folds: 10,
            seed: 0,
            matrix_mode: MatrixMode::Metapath,
        }
    }
}

impl TrainConfig {
    /// Small dimensions for laptop-scale runs on the synthetic corpus.
    pub fn desk() -> Self {
        TrainConfig {
            d_emb: 32,
            d_hid: 16,
            n_layers: 1,
            epochs: 10,
            batch_size: 16,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, v) in [
            ("d_emb", self.d_emb),
            ("d_hid", self.d_hid),
            ("n_layers", self.n_layers),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("meta_path_length", self.meta_path_length),
            ("folds", self.folds),
        ] {
            if v < 1 {
                return fail(format!("{name} must be >= 1"));
            }
        }
        if self.meta_path_length.is_multiple_of(2) {
            return fail(format!("meta_path_length must be odd, got {}", self.meta_path_length));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: TrainConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
