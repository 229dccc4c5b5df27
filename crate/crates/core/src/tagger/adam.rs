use super::params::TaggerParams;
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates plus the step count.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: TaggerParams,
    pub v: TaggerParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &TaggerParams) -> Self {
        AdamState {
            m: TaggerParams::zeros(params.dims),
            v: TaggerParams::zeros(params.dims),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut TaggerParams, grads: &TaggerParams, state: &mut AdamState, lr: f64) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) {
        return Err(Error::Shape("parameters, gradients and optimizer state disagree".into()));
    }
    state.step += 1;
    let c1 = 1.0 - BETA1.powi(state.step as i32);
    let c2 = 1.0 - BETA2.powi(state.step as i32);
    let m_arrays = state.m.arrays_mut();
    let v_arrays = state.v.arrays_mut();
    for (((p, g), m), v) in params.arrays_mut().into_iter().zip(grads.arrays()).zip(m_arrays).zip(v_arrays) {
        for i in 0..p.data.len() {
            let gi = g.data[i];
            m.data[i] = BETA1 * m.data[i] + (1.0 - BETA1) * gi;
            v.data[i] = BETA2 * v.data[i] + (1.0 - BETA2) * gi * gi;
            let m_hat = m.data[i] / c1;
            let v_hat = v.data[i] / c2;
            p.data[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
    Ok(())
}
