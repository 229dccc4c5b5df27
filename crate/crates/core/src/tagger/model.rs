//! BiLSTM forward and backward passes for a single sentence.

use rand::Rng;

use super::params::{Array, LstmDirection, TaggerParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active, masks drawn from the supplied rng.
    Train,
    Eval,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// out[r] += Σ_c w[r, c] · x[c]
fn matvec_add(w: &Array, x: &[f64], out: &mut [f64]) {
    let cols = w.cols();
    debug_assert_eq!(cols, x.len());
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w.data[r * cols..(r + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

// out[c] += Σ_r w[r, c] · y[r]
fn matvec_t_add(w: &Array, y: &[f64], out: &mut [f64]) {
    let cols = w.cols();
    for (r, &yr) in y.iter().enumerate() {
        if yr == 0.0 {
            continue;
        }
        let row = &w.data[r * cols..(r + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yr;
        }
    }
}

// g[r, c] += y[r] · x[c]
fn outer_add(g: &mut Array, y: &[f64], x: &[f64]) {
    let cols = g.cols();
    for (r, &yr) in y.iter().enumerate() {
        if yr == 0.0 {
            continue;
        }
        for (gv, xv) in g.data[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *gv += yr * xv;
        }
    }
}

struct Step {
    // activated gates [i, f, g, o], each d_hid long
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

struct DirectionTrace {
    steps: Vec<Step>,
    // hidden states in processing order
    h: Vec<Vec<f64>>,
}

fn run_direction(dir: &LstmDirection, inputs: &[&[f64]], hid: usize) -> DirectionTrace {
    let mut steps = Vec::with_capacity(inputs.len());
    let mut hs = Vec::with_capacity(inputs.len());
    let mut h_prev = vec![0.0; hid];
    let mut c_prev = vec![0.0; hid];
    for x in inputs {
        let mut z = dir.bias.data.clone();
        matvec_add(&dir.w_x, x, &mut z);
        matvec_add(&dir.w_h, &h_prev, &mut z);
        let mut gates = z;
        for (k, v) in gates.iter_mut().enumerate() {
            *v = if k / hid == 2 { v.tanh() } else { sigmoid(*v) };
        }
        let (i, rest) = gates.split_at(hid);
        let (f, rest) = rest.split_at(hid);
        let (g, o) = rest.split_at(hid);
        let c: Vec<f64> = (0..hid).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..hid).map(|k| o[k] * tanh_c[k]).collect();
        c_prev.clone_from(&c);
        h_prev.clone_from(&h);
        hs.push(h);
        steps.push(Step { gates, c, tanh_c });
    }
    DirectionTrace { steps, h: hs }
}

/// Accumulates gradients for one direction; returns the gradient on each input
/// (processing order).
fn backprop_direction(
    dir: &LstmDirection,
    grad: &mut LstmDirection,
    inputs: &[&[f64]],
    trace: &DirectionTrace,
    d_h_out: &[Vec<f64>],
    hid: usize,
) -> Vec<Vec<f64>> {
    let n = inputs.len();
    let mut d_inputs = vec![Vec::new(); n];
    let mut dh_next = vec![0.0; hid];
    let mut dc_next = vec![0.0; hid];
    let zeros = vec![0.0; hid];
    for t in (0..n).rev() {
        let step = &trace.steps[t];
        let (i, rest) = step.gates.split_at(hid);
        let (f, rest) = rest.split_at(hid);
        let (g, o) = rest.split_at(hid);
        let c_prev = if t > 0 { &trace.steps[t - 1].c } else { &zeros };
        let h_prev = if t > 0 { &trace.h[t - 1] } else { &zeros };

        let mut dz = vec![0.0; 4 * hid];
        let mut dc_prev = vec![0.0; hid];
        for k in 0..hid {
            let dh = d_h_out[t][k] + dh_next[k];
            let d_o = dh * step.tanh_c[k];
            let dc = dh * o[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]) + dc_next[k];
            let d_i = dc * g[k];
            let d_g = dc * i[k];
            let d_f = dc * c_prev[k];
            dc_prev[k] = dc * f[k];
            dz[k] = d_i * i[k] * (1.0 - i[k]);
            dz[hid + k] = d_f * f[k] * (1.0 - f[k]);
            dz[2 * hid + k] = d_g * (1.0 - g[k] * g[k]);
            dz[3 * hid + k] = d_o * o[k] * (1.0 - o[k]);
        }
        outer_add(&mut grad.w_x, &dz, inputs[t]);
        outer_add(&mut grad.w_h, &dz, h_prev);
        for (b, d) in grad.bias.data.iter_mut().zip(&dz) {
            *b += d;
        }
        let mut dx = vec![0.0; inputs[t].len()];
        matvec_t_add(&dir.w_x, &dz, &mut dx);
        d_inputs[t] = dx;
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        matvec_t_add(&dir.w_h, &dz, &mut dh_next);
        dc_next = dc_prev;
    }
    d_inputs
}

struct LayerTrace {
    // post-dropout input to this layer, one row per token
    input: Vec<Vec<f64>>,
    // inverted-dropout multipliers for `input`; None when no dropout was applied
    mask: Option<Vec<Vec<f64>>>,
    fwd: DirectionTrace,
    bwd: DirectionTrace,
}

/// Everything the backward pass needs from one forward pass.
pub struct SentenceTrace {
    tokens: Vec<usize>,
    layers: Vec<LayerTrace>,
    proj_input: Vec<Vec<f64>>,
    proj_mask: Option<Vec<Vec<f64>>>,
    /// Per-token tag probabilities.
    pub probs: Vec<Vec<f64>>,
}

fn dropout<R: Rng>(rows: &mut [Vec<f64>], rate: f64, rng: &mut R) -> Vec<Vec<f64>> {
    let keep = 1.0 - rate;
    rows.iter_mut()
        .map(|row| {
            row.iter_mut()
                .map(|v| {
                    let m = if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 };
                    *v *= m;
                    m
                })
                .collect()
        })
        .collect()
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Runs the tagger over one sentence and keeps the activations.
///
/// In [`Mode::Train`] with a positive rate, inverted dropout is applied to the
/// embeddings, between LSTM layers, and before the output projection.
pub fn forward_trace<R: Rng>(
    params: &TaggerParams,
    tokens: &[usize],
    mode: Mode,
    dropout_rate: f64,
    rng: &mut R,
) -> Result<SentenceTrace> {
    let dims = params.dims;
    if let Some(&bad) = tokens.iter().find(|&&t| t >= dims.vocab) {
        return Err(Error::Index(format!("token index {bad} >= vocabulary size {}", dims.vocab)));
    }
    let use_dropout = mode == Mode::Train && dropout_rate > 0.0;
    let hid = dims.d_hid;
    let mut current: Vec<Vec<f64>> = tokens.iter().map(|&t| params.embedding.row(t).to_vec()).collect();
    let mut layers = Vec::with_capacity(dims.n_layers);
    for layer in 0..dims.n_layers {
        let mask = use_dropout.then(|| dropout(&mut current, dropout_rate, rng));
        let (fwd, bwd) = {
            let refs: Vec<&[f64]> = current.iter().map(Vec::as_slice).collect();
            let rev: Vec<&[f64]> = refs.iter().rev().copied().collect();
            (
                run_direction(&params.lstm[2 * layer], &refs, hid),
                run_direction(&params.lstm[2 * layer + 1], &rev, hid),
            )
        };
        let n = tokens.len();
        let output: Vec<Vec<f64>> = (0..n)
            .map(|t| {
                let mut row = fwd.h[t].clone();
                row.extend_from_slice(&bwd.h[n - 1 - t]);
                row
            })
            .collect();
        layers.push(LayerTrace { input: std::mem::replace(&mut current, output), mask, fwd, bwd });
    }
    let proj_mask = use_dropout.then(|| dropout(&mut current, dropout_rate, rng));
    let probs = current
        .iter()
        .map(|x| {
            let mut logits = params.proj_b.data.clone();
            matvec_t_add(&params.proj_w, x, &mut logits);
            softmax_in_place(&mut logits);
            logits
        })
        .collect();
    Ok(SentenceTrace {
        tokens: tokens.to_vec(),
        layers,
        proj_input: current,
        proj_mask,
        probs,
    })
}

/// Per-token tag probabilities (rows sum to 1).
pub fn forward<R: Rng>(
    params: &TaggerParams,
    tokens: &[usize],
    mode: Mode,
    dropout_rate: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    Ok(forward_trace(params, tokens, mode, dropout_rate, rng)?.probs)
}

/// Accumulates into `grad` the parameter gradients given the gradient of the
/// loss with respect to each token's logits.
pub fn backward_trace(params: &TaggerParams, trace: &SentenceTrace, d_logits: &[Vec<f64>], grad: &mut TaggerParams) {
    let hid = params.dims.d_hid;
    let n = trace.tokens.len();

    let mut d_x: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (x, dl) in trace.proj_input.iter().zip(d_logits) {
        // proj_w is (2h × tags): logits = xᵀ W + b
        outer_add(&mut grad.proj_w, x, dl);
        for (b, d) in grad.proj_b.data.iter_mut().zip(dl) {
            *b += d;
        }
        let mut dx = vec![0.0; x.len()];
        matvec_add(&params.proj_w, dl, &mut dx);
        d_x.push(dx);
    }
    apply_mask(&mut d_x, trace.proj_mask.as_ref());

    for (layer, lt) in trace.layers.iter().enumerate().rev() {
        let d_fwd: Vec<Vec<f64>> = d_x.iter().map(|r| r[..hid].to_vec()).collect();
        let d_bwd: Vec<Vec<f64>> = d_x.iter().rev().map(|r| r[hid..].to_vec()).collect();
        let refs: Vec<&[f64]> = lt.input.iter().map(Vec::as_slice).collect();
        let rev: Vec<&[f64]> = refs.iter().rev().copied().collect();
        let (g_fwd, g_bwd) = {
            let (a, b) = grad.lstm.split_at_mut(2 * layer + 1);
            (&mut a[2 * layer], &mut b[0])
        };
        let dx_f = backprop_direction(&params.lstm[2 * layer], g_fwd, &refs, &lt.fwd, &d_fwd, hid);
        let dx_b = backprop_direction(&params.lstm[2 * layer + 1], g_bwd, &rev, &lt.bwd, &d_bwd, hid);
        d_x = (0..n)
            .map(|t| dx_f[t].iter().zip(&dx_b[n - 1 - t]).map(|(a, b)| a + b).collect())
            .collect();
        apply_mask(&mut d_x, lt.mask.as_ref());
    }

    for (&tok, dx) in trace.tokens.iter().zip(&d_x) {
        for (g, d) in grad.embedding.row_mut(tok).iter_mut().zip(dx) {
            *g += d;
        }
    }
}

fn apply_mask(rows: &mut [Vec<f64>], mask: Option<&Vec<Vec<f64>>>) {
    if let Some(mask) = mask {
        for (row, m) in rows.iter_mut().zip(mask) {
            for (v, k) in row.iter_mut().zip(m) {
                *v *= k;
            }
        }
    }
}

/// Per-token argmax; ties go to the lowest tag index.
pub fn argmax_rows(probs: &[Vec<f64>]) -> Vec<usize> {
    probs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                .0
        })
        .collect()
}
