use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::config::TrainConfig;
use super::model::{argmax_rows, backward_trace, forward, forward_trace, Mode};
use super::params::{Dims, TaggerParams};
use crate::corpus::{Corpus, TagSchema};
use crate::error::{Error, Result};
use crate::ncsl::{aggregate_gold, predicted_backward, predicted_mass, CrossSupervision, TypeDistribution};
use crate::corpus::Role;

/// A sentence as vocabulary indices with its gold tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub tokens: Vec<usize>,
    pub tags: Vec<usize>,
}

/// Encodes every sentence of `corpus` with the corpus vocabulary.
pub fn encode(corpus: &Corpus) -> Vec<Example> {
    corpus
        .sentences
        .iter()
        .map(|s| Example {
            tokens: corpus.vocab.encode(s.tokens()),
            tags: s.tags().to_vec(),
        })
        .collect()
}

/// What a batch is scored against.
#[derive(Clone, Copy, Debug)]
pub struct Objective<'a> {
    pub schema: &'a TagSchema,
    pub alpha: f64,
    /// `None` trains the tagger alone.
    pub cross: Option<&'a CrossSupervision>,
    pub dropout: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchLoss {
    pub seq: f64,
    pub hin: f64,
    pub combined: f64,
}

/// Mean over tokens of `−ln p(gold)`.
pub fn seq_loss(probs: &[Vec<f64>], gold: &[usize]) -> Result<f64> {
    if probs.len() != gold.len() || probs.is_empty() {
        return Err(Error::Shape(format!("{} probability rows for {} gold tags", probs.len(), gold.len())));
    }
    let mut total = 0.0;
    for (row, &g) in probs.iter().zip(gold) {
        let p = *row
            .get(g)
            .ok_or_else(|| Error::Index(format!("gold tag {g} >= {}", row.len())))?;
        total -= p.ln();
    }
    Ok(total / gold.len() as f64)
}

/// Loss of a batch, and the gradient of the combined loss with respect to
/// every parameter.
///
/// The sequence loss is the per-token mean within a sentence, averaged over
/// sentences. The cross-supervision loss is computed once per batch from the
/// batch-level predicted and gold type distributions.
pub fn backward<R: Rng>(
    params: &TaggerParams,
    batch: &[&Example],
    objective: &Objective<'_>,
    mode: Mode,
    rng: &mut R,
) -> Result<(BatchLoss, TaggerParams)> {
    let (loss, traces, d_logits) = evaluate(params, batch, objective, mode, rng)?;
    let mut grads = TaggerParams::zeros(params.dims);
    for (trace, dl) in traces.iter().zip(&d_logits) {
        backward_trace(params, trace, dl, &mut grads);
    }
    grads.check_finite()?;
    Ok((loss, grads))
}

/// The same loss as [`backward`], without the gradient.
pub fn batch_loss<R: Rng>(
    params: &TaggerParams,
    batch: &[&Example],
    objective: &Objective<'_>,
    mode: Mode,
    rng: &mut R,
) -> Result<BatchLoss> {
    Ok(evaluate(params, batch, objective, mode, rng)?.0)
}

type Evaluated = (BatchLoss, Vec<super::model::SentenceTrace>, Vec<Vec<Vec<f64>>>);

fn evaluate<R: Rng>(
    params: &TaggerParams,
    batch: &[&Example],
    objective: &Objective<'_>,
    mode: Mode,
    rng: &mut R,
) -> Result<Evaluated> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let alpha = objective.alpha;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let schema = objective.schema;
    let traces = batch
        .iter()
        .map(|ex| forward_trace(params, &ex.tokens, mode, objective.dropout, rng))
        .collect::<Result<Vec<_>>>()?;

    let b = batch.len() as f64;
    let mut seq = 0.0;
    for (trace, ex) in traces.iter().zip(batch) {
        seq += seq_loss(&trace.probs, &ex.tags)? / b;
    }

    let (hin, tag_grad) = match objective.cross {
        Some(cross) => {
            let rows = traces.iter().flat_map(|t| t.probs.iter().map(Vec::as_slice));
            let (entity_mass, trigger_mass) = predicted_mass(rows, schema);
            let pred_e = TypeDistribution::from_mass(Role::Entity, &entity_mass);
            let pred_t = TypeDistribution::from_mass(Role::Trigger, &trigger_mass);
            let (gold_e, gold_t) = aggregate_gold(batch.iter().map(|e| e.tags.as_slice()), schema);
            let lg = cross.loss_and_grad(&pred_e, &pred_t, &gold_e, &gold_t)?;
            let g = predicted_backward(schema, &entity_mass, &trigger_mass, &lg.grad_entity, &lg.grad_trigger);
            (lg.value, g)
        }
        None => (0.0, vec![0.0; schema.num_tags()]),
    };

    let mut d_logits = Vec::with_capacity(batch.len());
    for (trace, ex) in traces.iter().zip(batch) {
        let n = ex.tags.len() as f64;
        let rows = trace
            .probs
            .iter()
            .zip(&ex.tags)
            .map(|(p, &gold)| {
                // softmax backward of the cross term: p_j (g_j − Σ_k p_k g_k)
                let dot: f64 = p.iter().zip(&tag_grad).map(|(a, b)| a * b).sum();
                p.iter()
                    .enumerate()
                    .map(|(j, &pj)| {
                        let ce = (pj - f64::from(u8::from(j == gold))) / (b * n);
                        (1.0 - alpha) * ce + alpha * pj * (tag_grad[j] - dot)
                    })
                    .collect()
            })
            .collect();
        d_logits.push(rows);
    }

    let combined = (1.0 - alpha) * seq + alpha * hin;
    if !combined.is_finite() {
        return Err(Error::NonFinite {
            array: "loss".into(),
            detail: format!("L_seq = {seq}, L_hin = {hin}"),
        });
    }
    Ok((BatchLoss { seq, hin, combined }, traces, d_logits))
}

/// One row of the per-batch loss log.
#[derive(Clone, Debug, PartialEq)]
pub struct LossRecord {
    pub epoch: usize,
    pub batch: usize,
    pub loss: BatchLoss,
    pub alpha: f64,
    pub mode: String,
}

impl LossRecord {
    pub const CSV_HEADER: &'static str = "epoch,batch,L_seq,L_hin,L_c,alpha,mode";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.epoch, self.batch, self.loss.seq, self.loss.hin, self.loss.combined, self.alpha, self.mode
        )
    }
}

/// Trains a tagger on `corpus` from the seed in `config`.
///
/// Initialization, batch order and dropout masks all come from one ChaCha
/// stream, so equal inputs give bit-identical parameters.
pub fn train<F>(
    corpus: &Corpus,
    config: &TrainConfig,
    cross: Option<&CrossSupervision>,
    mut on_batch: F,
) -> Result<TaggerParams>
where
    F: FnMut(&LossRecord),
{
    config.validate()?;
    let dims = Dims {
        vocab: corpus.vocab.len(),
        d_emb: config.d_emb,
        d_hid: config.d_hid,
        n_layers: config.n_layers,
        n_tags: corpus.schema.num_tags(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = TaggerParams::init(dims, &mut rng);
    let mut state = AdamState::new(&params);
    let examples = encode(corpus);
    let objective = Objective {
        schema: &corpus.schema,
        alpha: config.alpha,
        cross,
        dropout: config.dropout,
    };
    let mode_name = cross.map_or("none", |c| c.mode().as_str()).to_string();

    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
            let (loss, grads) = backward(&params, &batch, &objective, Mode::Train, &mut rng)?;
            adam_step(&mut params, &grads, &mut state, config.learning_rate)?;
            params.check_finite()?;
            on_batch(&LossRecord {
                epoch,
                batch: b,
                loss,
                alpha: config.alpha,
                mode: mode_name.clone(),
            });
        }
    }
    Ok(params)
}

/// Greedy per-token decoding in eval mode.
pub fn predict_tags(params: &TaggerParams, tokens: &[usize]) -> Result<Vec<usize>> {
    // eval mode never draws from the rng
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let probs = forward(params, tokens, Mode::Eval, 0.0, &mut rng)?;
    Ok(argmax_rows(&probs))
}
