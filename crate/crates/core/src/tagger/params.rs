use rand::Rng;

use crate::error::{Error, Result};

/// A named dense parameter array, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Array {
    pub fn zeros(name: impl Into<String>, shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Array {
            name: name.into(),
            shape,
            data: vec![0.0; len],
        }
    }

    fn uniform<R: Rng>(name: impl Into<String>, shape: Vec<usize>, fan_in: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut a = Array::zeros(name, shape);
        for v in &mut a.data {
            *v = rng.random_range(-bound..bound);
        }
        a
    }

    pub fn cols(&self) -> usize {
        *self.shape.last().unwrap_or(&1)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[r * c..(r + 1) * c]
    }
}

/// Layer sizes of a tagger.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub vocab: usize,
    pub d_emb: usize,
    pub d_hid: usize,
    pub n_layers: usize,
    pub n_tags: usize,
}

impl Dims {
    pub fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.d_emb
        } else {
            2 * self.d_hid
        }
    }
}

/// Gate weights of one LSTM direction. Gate rows are ordered input, forget, cell, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmDirection {
    /// `4·d_hid × input`
    pub w_x: Array,
    /// `4·d_hid × d_hid`
    pub w_h: Array,
    /// `4·d_hid`
    pub bias: Array,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaggerParams {
    pub dims: Dims,
    /// `vocab × d_emb`
    pub embedding: Array,
    /// Two entries per layer: forward then backward direction.
    pub lstm: Vec<LstmDirection>,
    /// `2·d_hid × n_tags`
    pub proj_w: Array,
    pub proj_b: Array,
}

fn direction_name(layer: usize, dir: usize) -> String {
    format!("lstm.{layer}.{}", if dir == 0 { "fwd" } else { "bwd" })
}

impl TaggerParams {
    pub fn zeros(dims: Dims) -> Self {
        let h = dims.d_hid;
        let lstm = (0..dims.n_layers)
            .flat_map(|layer| (0..2).map(move |dir| (layer, dir)))
            .map(|(layer, dir)| {
                let name = direction_name(layer, dir);
                LstmDirection {
                    w_x: Array::zeros(format!("{name}.w_x"), vec![4 * h, dims.layer_input(layer)]),
                    w_h: Array::zeros(format!("{name}.w_h"), vec![4 * h, h]),
                    bias: Array::zeros(format!("{name}.bias"), vec![4 * h]),
                }
            })
            .collect();
        TaggerParams {
            dims,
            embedding: Array::zeros("embedding", vec![dims.vocab, dims.d_emb]),
            lstm,
            proj_w: Array::zeros("projection.w", vec![2 * h, dims.n_tags]),
            proj_b: Array::zeros("projection.b", vec![dims.n_tags]),
        }
    }

    /// Uniform in `±1/√fan_in` per array. Embedding rows are looked up by a
    /// one-hot input, so their fan-in is 1.
    pub fn init<R: Rng>(dims: Dims, rng: &mut R) -> Self {
        let mut p = TaggerParams::zeros(dims);
        let h = dims.d_hid;
        p.embedding = Array::uniform("embedding", vec![dims.vocab, dims.d_emb], 1, rng);
        for (i, dir) in p.lstm.iter_mut().enumerate() {
            let input = dims.layer_input(i / 2);
            dir.w_x = Array::uniform(dir.w_x.name.clone(), vec![4 * h, input], input, rng);
            dir.w_h = Array::uniform(dir.w_h.name.clone(), vec![4 * h, h], h, rng);
            dir.bias = Array::uniform(dir.bias.name.clone(), vec![4 * h], h, rng);
        }
        p.proj_w = Array::uniform("projection.w", vec![2 * h, dims.n_tags], 2 * h, rng);
        p.proj_b = Array::uniform("projection.b", vec![dims.n_tags], 2 * h, rng);
        p
    }

    /// Every array in a fixed order: embedding, LSTM directions, projection.
    pub fn arrays(&self) -> Vec<&Array> {
        let mut out = vec![&self.embedding];
        for d in &self.lstm {
            out.extend([&d.w_x, &d.w_h, &d.bias]);
        }
        out.extend([&self.proj_w, &self.proj_b]);
        out
    }

    pub fn arrays_mut(&mut self) -> Vec<&mut Array> {
        let mut out = vec![&mut self.embedding];
        for d in &mut self.lstm {
            out.extend([&mut d.w_x, &mut d.w_h, &mut d.bias]);
        }
        out.extend([&mut self.proj_w, &mut self.proj_b]);
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.arrays().iter().map(|a| a.len()).sum()
    }

    /// Errors naming the first array holding a NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        for a in self.arrays() {
            if let Some(pos) = a.data.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    array: a.name.clone(),
                    detail: format!("entry {pos} is {}", a.data[pos]),
                });
            }
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &TaggerParams) -> bool {
        self.arrays()
            .iter()
            .zip(other.arrays())
            .all(|(a, b)| a.shape == b.shape && a.name == b.name)
            && self.arrays().len() == other.arrays().len()
    }

    /// `self += factor · other`, array by array.
    pub fn add_scaled(&mut self, other: &TaggerParams, factor: f64) {
        for (a, b) in self.arrays_mut().into_iter().zip(other.arrays()) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += factor * y;
            }
        }
    }
}
