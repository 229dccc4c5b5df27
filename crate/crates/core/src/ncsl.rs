//! Cross-supervision: type distributions, matrix conversions, and the dual KL loss.
//!
//! The predicted entity-type distribution is converted into a trigger-type
//! distribution through the entity-trigger matrix (and the predicted trigger
//! distribution into an entity distribution through its transpose). Each
//! converted distribution is compared with the gold one by KL divergence.
//!
//! Every distribution is floored: `f = (q + ε) / (1 + kε)` with `ε = 1e-8`,
//! so all entries are strictly positive and the map stays differentiable.

use serde::{Deserialize, Serialize};

use crate::corpus::{spans, Role, Tag, TagSchema};
use crate::error::{Error, Result};
use crate::hin::{MetaPathMatrix, TypeMatrix};

pub const FLOOR: f64 = 1e-8;
/// Below this total mass a side is treated as empty.
pub const MIN_MASS: f64 = 1e-12;

/// Which adjacency matrix drives the conversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixMode {
    /// Direct co-occurrence counts `M`, L1-normalized after conversion.
    Direct,
    /// Meta-path log scores `M′`, softmax-normalized after conversion.
    #[default]
    Metapath,
}

impl MatrixMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixMode::Direct => "direct",
            MatrixMode::Metapath => "metapath",
        }
    }
}

impl std::str::FromStr for MatrixMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(MatrixMode::Direct),
            "metapath" => Ok(MatrixMode::Metapath),
            other => Err(Error::Config(format!("unknown matrix mode {other:?}"))),
        }
    }
}

/// A probability vector over the entity types or the trigger types.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeDistribution {
    over: Role,
    values: Vec<f64>,
    /// Set when the distribution fell back to uniform for lack of mass.
    degenerate: bool,
}

impl TypeDistribution {
    pub fn new(over: Role, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("empty distribution".into()));
        }
        let sum: f64 = values.iter().sum();
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Shape(format!("not a distribution: {values:?}")));
        }
        Ok(TypeDistribution {
            over,
            values,
            degenerate: false,
        })
    }

    pub fn uniform(over: Role, len: usize) -> Self {
        TypeDistribution {
            over,
            values: vec![1.0 / len as f64; len],
            degenerate: true,
        }
    }

    /// Floors and normalizes non-negative raw mass.
    pub fn from_mass(over: Role, mass: &[f64]) -> Self {
        let (values, degenerate) = floor_normalize(mass);
        TypeDistribution {
            over,
            values,
            degenerate,
        }
    }

    pub fn over(&self) -> Role {
        self.over
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

fn floor_normalize(raw: &[f64]) -> (Vec<f64>, bool) {
    let k = raw.len() as f64;
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total < MIN_MASS {
        return (vec![1.0 / k; raw.len()], true);
    }
    let scale = 1.0 + k * FLOOR;
    (raw.iter().map(|r| (r / total + FLOOR) / scale).collect(), false)
}

// d/d raw of floor_normalize, given upstream gradient `g` on the output.
fn floor_normalize_backward(raw: &[f64], g: &[f64]) -> Vec<f64> {
    let k = raw.len() as f64;
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total < MIN_MASS {
        return vec![0.0; raw.len()];
    }
    let denom = total * (1.0 + k * FLOOR);
    let dot: f64 = g.iter().zip(raw).map(|(gi, r)| gi * r / total).sum();
    g.iter().map(|gi| (gi - dot) / denom).collect()
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Soft tag mass per entity type and per trigger type, summed over rows.
/// `O` mass is dropped.
pub fn predicted_mass<'a, I>(rows: I, schema: &TagSchema) -> (Vec<f64>, Vec<f64>)
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut entity = vec![0.0; schema.entity_types().len()];
    let mut trigger = vec![0.0; schema.trigger_types().len()];
    for row in rows {
        for (tag, &p) in row.iter().enumerate().skip(1) {
            match schema.tag(tag) {
                Tag::Begin(Role::Entity, t) | Tag::Inside(Role::Entity, t) => entity[t] += p,
                Tag::Begin(Role::Trigger, t) | Tag::Inside(Role::Trigger, t) => trigger[t] += p,
                Tag::Outside => {}
            }
        }
    }
    (entity, trigger)
}

/// `(F̂_e, F̂_t)` from per-token tag probabilities of a batch.
pub fn aggregate_predicted<'a, I>(rows: I, schema: &TagSchema) -> (TypeDistribution, TypeDistribution)
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let (entity, trigger) = predicted_mass(rows, schema);
    (
        TypeDistribution::from_mass(Role::Entity, &entity),
        TypeDistribution::from_mass(Role::Trigger, &trigger),
    )
}

/// Maps gradients on `(F̂_e, F̂_t)` back to a gradient on each tag
/// probability. Every token row receives the same vector.
pub fn predicted_backward(
    schema: &TagSchema,
    entity_mass: &[f64],
    trigger_mass: &[f64],
    grad_entity: &[f64],
    grad_trigger: &[f64],
) -> Vec<f64> {
    let ge = floor_normalize_backward(entity_mass, grad_entity);
    let gt = floor_normalize_backward(trigger_mass, grad_trigger);
    (0..schema.num_tags())
        .map(|tag| match schema.tag(tag) {
            Tag::Begin(Role::Entity, t) | Tag::Inside(Role::Entity, t) => ge[t],
            Tag::Begin(Role::Trigger, t) | Tag::Inside(Role::Trigger, t) => gt[t],
            _ => 0.0,
        })
        .collect()
}

/// `(F_e, F_t)`: span-level type frequencies of the gold tags in a batch.
pub fn aggregate_gold<'a, I>(batch: I, schema: &TagSchema) -> (TypeDistribution, TypeDistribution)
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut entity = vec![0.0; schema.entity_types().len()];
    let mut trigger = vec![0.0; schema.trigger_types().len()];
    for tags in batch {
        for span in spans(schema, tags) {
            match span.role {
                Role::Entity => entity[span.type_index] += 1.0,
                Role::Trigger => trigger[span.type_index] += 1.0,
            }
        }
    }
    (
        TypeDistribution::from_mass(Role::Entity, &entity),
        TypeDistribution::from_mass(Role::Trigger, &trigger),
    )
}

// raw = dist · M for entity input, dist · Mᵀ for trigger input
fn project(dist: &[f64], over: Role, m: &TypeMatrix) -> Vec<f64> {
    match over {
        Role::Entity => (0..m.cols())
            .map(|v| (0..m.rows()).map(|u| dist[u] * m.get(u, v)).sum())
            .collect(),
        Role::Trigger => (0..m.rows())
            .map(|u| (0..m.cols()).map(|v| dist[v] * m.get(u, v)).sum())
            .collect(),
    }
}

fn project_backward(g_raw: &[f64], over: Role, m: &TypeMatrix) -> Vec<f64> {
    // transpose of `project`
    project(g_raw, over.other(), m)
}

fn check_shape(dist: &TypeDistribution, m: &TypeMatrix) -> Result<()> {
    let expected = match dist.over {
        Role::Entity => m.rows(),
        Role::Trigger => m.cols(),
    };
    if dist.len() != expected {
        return Err(Error::Shape(format!(
            "{} distribution of length {} against a {}x{} matrix",
            dist.over,
            dist.len(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Converts through the direct matrix, then floors and L1-normalizes.
/// An all-zero projection yields a uniform, flagged distribution.
pub fn convert_direct(dist: &TypeDistribution, m: &TypeMatrix) -> Result<TypeDistribution> {
    check_shape(dist, m)?;
    if m.to_rows().iter().flatten().any(|v| *v < 0.0) {
        return Err(Error::Shape("direct matrix has negative entries".into()));
    }
    let raw = project(&dist.values, dist.over, m);
    Ok(TypeDistribution::from_mass(dist.over.other(), &raw))
}

/// `M′` with each unreached cell replaced by (smallest finite entry − 1), or
/// `None` when every cell is unreached.
pub fn fill_unreached(meta: &[Vec<Option<f64>>]) -> Option<TypeMatrix> {
    let min = meta.iter().flatten().flatten().copied().reduce(f64::min)?;
    let rows = meta
        .iter()
        .map(|r| r.iter().map(|c| c.unwrap_or(min - 1.0)).collect())
        .collect();
    Some(TypeMatrix::from_rows(rows).expect("rectangular"))
}

/// Converts through the meta-path matrix and softmax-normalizes.
pub fn convert_metapath(dist: &TypeDistribution, meta: &[Vec<Option<f64>>]) -> Result<TypeDistribution> {
    let cols = meta.first().map_or(0, Vec::len);
    let other_len = match dist.over {
        Role::Entity => cols,
        Role::Trigger => meta.len(),
    };
    match fill_unreached(meta) {
        Some(filled) => Ok(softmax_convert(dist, &filled)?.0),
        None => {
            check_shape(dist, &TypeMatrix::zeros(meta.len(), cols))?;
            Ok(TypeDistribution::uniform(dist.over.other(), other_len))
        }
    }
}

fn softmax_convert(dist: &TypeDistribution, filled: &TypeMatrix) -> Result<(TypeDistribution, Vec<f64>)> {
    check_shape(dist, filled)?;
    let scores = project(&dist.values, dist.over, filled);
    let out = softmax(&scores);
    Ok((
        TypeDistribution {
            over: dist.over.other(),
            values: out,
            degenerate: false,
        },
        scores,
    ))
}

/// `Σ p_i log(p_i / q_i)`; terms with `p_i = 0` contribute nothing.
pub fn kl(p: &TypeDistribution, q: &TypeDistribution) -> Result<f64> {
    if p.len() != q.len() || p.over != q.over {
        return Err(Error::Shape(format!(
            "kl between {} [{}] and {} [{}]",
            p.over,
            p.len(),
            q.over,
            q.len()
        )));
    }
    Ok(p.values
        .iter()
        .zip(&q.values)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).ln())
        .sum())
}

/// A prepared converter for one matrix mode.
#[derive(Clone, Debug)]
pub struct CrossSupervision {
    mode: MatrixMode,
    // M for direct mode, the filled M′ for meta-path mode; None if M′ is all unreached
    matrix: Option<TypeMatrix>,
    n_entity: usize,
    n_trigger: usize,
}

/// Loss value plus gradients on the two predicted distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct HinLossGrad {
    pub value: f64,
    pub grad_entity: Vec<f64>,
    pub grad_trigger: Vec<f64>,
}

type OutputGrad<'a> = dyn Fn(&[f64]) -> Vec<f64> + 'a;

impl CrossSupervision {
    pub fn new(matrix: &MetaPathMatrix, mode: MatrixMode) -> Self {
        let (n_entity, n_trigger) = (matrix.direct.rows(), matrix.direct.cols());
        let matrix = match mode {
            MatrixMode::Direct => Some(matrix.direct.clone()),
            MatrixMode::Metapath => fill_unreached(&matrix.meta),
        };
        CrossSupervision {
            mode,
            matrix,
            n_entity,
            n_trigger,
        }
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    fn other_len(&self, over: Role) -> usize {
        match over {
            Role::Entity => self.n_trigger,
            Role::Trigger => self.n_entity,
        }
    }

    pub fn convert(&self, dist: &TypeDistribution) -> Result<TypeDistribution> {
        Ok(self.convert_with_grad(dist, None)?.0)
    }

    // Converted distribution and, when `g_out` is given, the gradient on `dist`.
    fn convert_with_grad(
        &self,
        dist: &TypeDistribution,
        g_out: Option<&OutputGrad<'_>>,
    ) -> Result<(TypeDistribution, Vec<f64>)> {
        let zero = vec![0.0; dist.len()];
        let Some(m) = &self.matrix else {
            check_shape(dist, &TypeMatrix::zeros(self.n_entity, self.n_trigger))?;
            return Ok((TypeDistribution::uniform(dist.over.other(), self.other_len(dist.over)), zero));
        };
        match self.mode {
            MatrixMode::Direct => {
                let out = convert_direct(dist, m)?;
                let Some(g_out) = g_out else { return Ok((out, zero)) };
                let raw = project(&dist.values, dist.over, m);
                let g_raw = floor_normalize_backward(&raw, &g_out(&out.values));
                Ok((out, project_backward(&g_raw, dist.over, m)))
            }
            MatrixMode::Metapath => {
                let (out, _) = softmax_convert(dist, m)?;
                let Some(g_out) = g_out else { return Ok((out, zero)) };
                let g = g_out(&out.values);
                let dot: f64 = g.iter().zip(&out.values).map(|(a, b)| a * b).sum();
                let g_scores: Vec<f64> = out.values.iter().zip(&g).map(|(o, gi)| o * (gi - dot)).collect();
                Ok((out, project_backward(&g_scores, dist.over, m)))
            }
        }
    }

    /// `kl(F_t, convert(F̂_e)) + kl(F_e, convert(F̂_t))`.
    pub fn loss(
        &self,
        pred_entity: &TypeDistribution,
        pred_trigger: &TypeDistribution,
        gold_entity: &TypeDistribution,
        gold_trigger: &TypeDistribution,
    ) -> Result<f64> {
        let to_trigger = self.convert(pred_entity)?;
        let to_entity = self.convert(pred_trigger)?;
        Ok(kl(gold_trigger, &to_trigger)? + kl(gold_entity, &to_entity)?)
    }

    pub fn loss_and_grad(
        &self,
        pred_entity: &TypeDistribution,
        pred_trigger: &TypeDistribution,
        gold_entity: &TypeDistribution,
        gold_trigger: &TypeDistribution,
    ) -> Result<HinLossGrad> {
        check_role(pred_entity, Role::Entity)?;
        check_role(pred_trigger, Role::Trigger)?;
        // d kl(p, q) / d q = -p / q
        let kl_grad = |p: &TypeDistribution| {
            let p = p.values.clone();
            move |q: &[f64]| p.iter().zip(q).map(|(pi, qi)| -pi / qi).collect::<Vec<f64>>()
        };
        let g_trig = kl_grad(gold_trigger);
        let g_ent = kl_grad(gold_entity);
        let (to_trigger, grad_entity) = self.convert_with_grad(pred_entity, Some(&g_trig))?;
        let (to_entity, grad_trigger) = self.convert_with_grad(pred_trigger, Some(&g_ent))?;
        Ok(HinLossGrad {
            value: kl(gold_trigger, &to_trigger)? + kl(gold_entity, &to_entity)?,
            grad_entity,
            grad_trigger,
        })
    }
}

fn check_role(d: &TypeDistribution, role: Role) -> Result<()> {
    if d.over != role {
        return Err(Error::Shape(format!("expected a {role} distribution, got {}", d.over)));
    }
    Ok(())
}

/// The cross-supervision loss for one matrix mode.
pub fn hin_loss(
    pred_entity: &TypeDistribution,
    pred_trigger: &TypeDistribution,
    gold_entity: &TypeDistribution,
    gold_trigger: &TypeDistribution,
    matrix: &MetaPathMatrix,
    mode: MatrixMode,
) -> Result<f64> {
    check_role(pred_entity, Role::Entity)?;
    check_role(pred_trigger, Role::Trigger)?;
    CrossSupervision::new(matrix, mode).loss(pred_entity, pred_trigger, gold_entity, gold_trigger)
}

/// `(1 − α)·L_seq + α·L_hin`.
pub fn combined_loss(seq: f64, hin: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok((1.0 - alpha) * seq + alpha * hin)
}
