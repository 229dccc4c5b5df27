//! Token-level precision, recall and F1 with the outside tag excluded,
//! plus cross-validation and the sensitivity sweep.
//!
//! Span-level counts (exact role, type and boundaries) are reported next to
//! the token-level ones under the `*_span` sides. They are an auxiliary
//! metric; the token-level sides are the primary result.

mod crossval;

use std::fmt::Write as _;
use std::io::Write;

use crate::corpus::{spans, Corpus, Role, TagSchema};
use crate::error::{Error, Result};
use crate::tagger::{predict_tags, TaggerParams};

pub use crossval::{crossval, fold_seed, sensitivity_sweep, Supervision, SweepRow, SWEEP_HEADER};

pub const REPORT_HEADER: &str = "fold,side,tp,fp,fn,precision,recall,f1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    pub fn add(&mut self, other: &Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Entity side, trigger side and their union.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub entity: Counts,
    pub trigger: Counts,
    pub joint: Counts,
}

impl MatchCounts {
    pub fn add(&mut self, other: &MatchCounts) {
        self.entity.add(&other.entity);
        self.trigger.add(&other.trigger);
        self.joint.add(&other.joint);
    }

    fn side_mut(&mut self, role: Role) -> &mut Counts {
        match role {
            Role::Entity => &mut self.entity,
            Role::Trigger => &mut self.trigger,
        }
    }
}

fn check_lengths(pred: &[usize], gold: &[usize]) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::Shape(format!(
            "predicted {} tags for {} gold tags",
            pred.len(),
            gold.len()
        )));
    }
    Ok(())
}

/// Token-level counts. A token with `pred == gold != O` is a true positive for
/// its side; otherwise a non-O prediction is a false positive for the
/// predicted side and a non-O gold tag is a false negative for the gold side.
pub fn count_matches(pred: &[usize], gold: &[usize], schema: &TagSchema) -> Result<MatchCounts> {
    check_lengths(pred, gold)?;
    let mut counts = MatchCounts::default();
    for (&p, &g) in pred.iter().zip(gold) {
        let (pt, gt) = (schema.tag(p), schema.tag(g));
        if p == g {
            if let Some(role) = gt.role() {
                counts.side_mut(role).tp += 1;
                counts.joint.tp += 1;
            }
            continue;
        }
        if let Some(role) = pt.role() {
            counts.side_mut(role).fp += 1;
            counts.joint.fp += 1;
        }
        if let Some(role) = gt.role() {
            counts.side_mut(role).fn_ += 1;
            counts.joint.fn_ += 1;
        }
    }
    Ok(counts)
}

/// Exact-match span counts. Stray `I-` tags in `pred` open a new span.
pub fn count_span_matches(pred: &[usize], gold: &[usize], schema: &TagSchema) -> Result<MatchCounts> {
    check_lengths(pred, gold)?;
    let predicted = spans(schema, pred);
    let expected = spans(schema, gold);
    let mut counts = MatchCounts::default();
    for s in &predicted {
        let side = if expected.contains(s) { &mut counts.side_mut(s.role).tp } else { &mut counts.side_mut(s.role).fp };
        *side += 1;
    }
    for s in &expected {
        if !predicted.contains(s) {
            counts.side_mut(s.role).fn_ += 1;
        }
    }
    counts.joint.add(&counts.entity);
    counts.joint.add(&counts.trigger);
    Ok(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Entity,
    Trigger,
    Joint,
    EntitySpan,
    TriggerSpan,
    JointSpan,
}

impl Side {
    pub const ALL: [Side; 6] = [
        Side::Entity,
        Side::Trigger,
        Side::Joint,
        Side::EntitySpan,
        Side::TriggerSpan,
        Side::JointSpan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Entity => "entity",
            Side::Trigger => "trigger",
            Side::Joint => "joint",
            Side::EntitySpan => "entity_span",
            Side::TriggerSpan => "trigger_span",
            Side::JointSpan => "joint_span",
        }
    }
}

/// Token and span counts for one evaluated split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FoldCounts {
    pub token: MatchCounts,
    pub span: MatchCounts,
}

impl FoldCounts {
    pub fn side(&self, side: Side) -> Counts {
        match side {
            Side::Entity => self.token.entity,
            Side::Trigger => self.token.trigger,
            Side::Joint => self.token.joint,
            Side::EntitySpan => self.span.entity,
            Side::TriggerSpan => self.span.trigger,
            Side::JointSpan => self.span.joint,
        }
    }

    pub fn add_sentence(&mut self, pred: &[usize], gold: &[usize], schema: &TagSchema) -> Result<()> {
        self.token.add(&count_matches(pred, gold, schema)?);
        self.span.add(&count_span_matches(pred, gold, schema)?);
        Ok(())
    }
}

/// Tag every sentence of `corpus` with `params` and count against gold.
/// Tokens are encoded with the corpus vocabulary, which must be the one the
/// model was trained with.
pub fn evaluate(params: &TaggerParams, corpus: &Corpus) -> Result<FoldCounts> {
    let mut counts = FoldCounts::default();
    for sentence in &corpus.sentences {
        let tokens = corpus.vocab.encode(sentence.tokens());
        let pred = predict_tags(params, &tokens)?;
        counts.add_sentence(&pred, sentence.tags(), &corpus.schema)?;
    }
    Ok(counts)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-fold counts with mean and sample standard deviation across folds.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub folds: Vec<FoldCounts>,
}

impl EvalReport {
    pub fn new(folds: Vec<FoldCounts>) -> Self {
        EvalReport { folds }
    }

    fn column(&self, side: Side) -> Vec<Summary> {
        self.folds
            .iter()
            .map(|f| {
                let c = f.side(side);
                Summary {
                    tp: c.tp as f64,
                    fp: c.fp as f64,
                    fn_: c.fn_ as f64,
                    precision: c.precision(),
                    recall: c.recall(),
                    f1: c.f1(),
                }
            })
            .collect()
    }

    pub fn mean(&self, side: Side) -> Summary {
        let rows = self.column(side);
        let n = rows.len().max(1) as f64;
        let mean = |get: fn(&Summary) -> f64| rows.iter().map(get).sum::<f64>() / n;
        Summary {
            tp: mean(|s| s.tp),
            fp: mean(|s| s.fp),
            fn_: mean(|s| s.fn_),
            precision: mean(|s| s.precision),
            recall: mean(|s| s.recall),
            f1: mean(|s| s.f1),
        }
    }

    /// Sample standard deviation (n − 1); 0 for a single fold.
    pub fn std(&self, side: Side) -> Summary {
        let rows = self.column(side);
        if rows.len() < 2 {
            return Summary::default();
        }
        let m = self.mean(side);
        let n = rows.len() as f64 - 1.0;
        let std = |get: fn(&Summary) -> f64, mu: f64| {
            (rows.iter().map(|s| (get(s) - mu).powi(2)).sum::<f64>() / n).sqrt()
        };
        Summary {
            tp: std(|s| s.tp, m.tp),
            fp: std(|s| s.fp, m.fp),
            fn_: std(|s| s.fn_, m.fn_),
            precision: std(|s| s.precision, m.precision),
            recall: std(|s| s.recall, m.recall),
            f1: std(|s| s.f1, m.f1),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{REPORT_HEADER}").unwrap();
        for (i, fold) in self.folds.iter().enumerate() {
            for side in Side::ALL {
                let c = fold.side(side);
                writeln!(
                    out,
                    "{i},{},{},{},{},{},{},{}",
                    side.as_str(),
                    c.tp,
                    c.fp,
                    c.fn_,
                    c.precision(),
                    c.recall(),
                    c.f1()
                )
                .unwrap();
            }
        }
        for (label, stat) in [("mean", Self::mean as fn(&Self, Side) -> Summary), ("std", Self::std)] {
            for side in Side::ALL {
                let s = stat(self, side);
                writeln!(
                    out,
                    "{label},{},{},{},{},{},{},{}",
                    side.as_str(),
                    s.tp,
                    s.fp,
                    s.fn_,
                    s.precision,
                    s.recall,
                    s.f1
                )
                .unwrap();
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io("report", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> TagSchema {
        TagSchema::new(["PER", "GPE"], ["Movement"]).unwrap()
    }

    fn tags(schema: &TagSchema, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| schema.parse_tag(n).unwrap()).collect()
    }

    #[test]
    fn perfect_prediction() {
        let s = schema();
        let gold = tags(&s, &["B-ENT:PER", "I-ENT:PER", "O", "B-TRG:Movement"]);
        let c = count_matches(&gold, &gold, &s).unwrap();
        assert_eq!(c.joint, Counts { tp: 3, fp: 0, fn_: 0 });
        assert_eq!(c.joint.precision(), 1.0);
        assert_eq!(c.joint.recall(), 1.0);
    }

    #[test]
    fn outside_gold_is_only_a_false_positive() {
        let s = schema();
        let c = count_matches(&tags(&s, &["B-ENT:PER"]), &tags(&s, &["O"]), &s).unwrap();
        assert_eq!(c.entity, Counts { tp: 0, fp: 1, fn_: 0 });
        assert_eq!(c.trigger, Counts::default());
    }

    #[test]
    fn wrong_role_counts_on_both_sides() {
        let s = schema();
        let c = count_matches(&tags(&s, &["B-TRG:Movement"]), &tags(&s, &["B-ENT:GPE"]), &s).unwrap();
        assert_eq!(c.trigger.fp, 1);
        assert_eq!(c.entity.fn_, 1);
        assert_eq!(c.joint, Counts { tp: 0, fp: 1, fn_: 1 });
    }

    #[test]
    fn two_thirds() {
        let c = Counts { tp: 1, fp: 1, fn_: 0 };
        assert_eq!(c.precision(), 0.5);
        assert_eq!(c.recall(), 1.0);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_denominators() {
        let c = Counts::default();
        assert_eq!((c.precision(), c.recall(), c.f1()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn length_mismatch() {
        let s = schema();
        assert!(count_matches(&[0, 0], &[0], &s).is_err());
    }

    #[test]
    fn span_boundaries_must_match() {
        let s = schema();
        let gold = tags(&s, &["B-ENT:PER", "I-ENT:PER", "B-TRG:Movement"]);
        let pred = tags(&s, &["B-ENT:PER", "O", "B-TRG:Movement"]);
        let c = count_span_matches(&pred, &gold, &s).unwrap();
        assert_eq!(c.entity, Counts { tp: 0, fp: 1, fn_: 1 });
        assert_eq!(c.trigger, Counts { tp: 1, fp: 0, fn_: 0 });
        assert_eq!(c.joint, Counts { tp: 1, fp: 1, fn_: 1 });
    }

    #[test]
    fn report_rows_and_stats() {
        let s = schema();
        let mut a = FoldCounts::default();
        a.add_sentence(&tags(&s, &["B-ENT:PER"]), &tags(&s, &["B-ENT:PER"]), &s).unwrap();
        let mut b = FoldCounts::default();
        b.add_sentence(&tags(&s, &["O"]), &tags(&s, &["B-ENT:PER"]), &s).unwrap();
        let report = EvalReport::new(vec![a, b]);
        assert_eq!(report.mean(Side::Entity).f1, 0.5);
        assert!((report.std(Side::Entity).f1 - 0.5f64.sqrt()).abs() < 1e-15);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * 6 + 2 * 6);
        assert!(csv.contains("\n0,entity,1,0,0,1,1,1\n"));
        assert!(csv.contains("\nmean,entity,0.5,0,0.5,0.5,0.5,0.5\n"));
    }
}
