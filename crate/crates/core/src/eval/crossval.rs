use std::fmt::Write as _;

use rayon::prelude::*;

use super::{evaluate, EvalReport, FoldCounts, Side};
use crate::corpus::{kfold_split, Corpus};
use crate::error::{Error, Result};
use crate::hin::{build_hin, MetaPathMatrix};
use crate::ncsl::{CrossSupervision, MatrixMode};
use crate::tagger::{train, TrainConfig};

/// What the tagger is trained against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Supervision {
    /// Sequence loss only; no network is built.
    TaggerOnly,
    /// Combined loss with the network of each training split.
    Hin(MatrixMode),
}

/// Training seed for fold `fold` of a run seeded with `seed`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add(1 + fold as u64)
}

fn run_fold(train_split: &Corpus, test_split: &Corpus, config: &TrainConfig, supervision: Supervision, fold: usize) -> Result<FoldCounts> {
    let config = TrainConfig { seed: fold_seed(config.seed, fold), ..config.clone() };
    let cross = match supervision {
        Supervision::TaggerOnly => None,
        Supervision::Hin(mode) => {
            let hin = build_hin(train_split);
            let matrix = MetaPathMatrix::build(&hin, &train_split.schema, config.meta_path_length)?;
            Some(CrossSupervision::new(&matrix, mode))
        }
    };
    let params = train(train_split, &config, cross.as_ref(), |_| {})?;
    evaluate(&params, test_split)
}

/// `config.folds`-fold cross-validation. Splits are drawn from `config.seed`;
/// each fold trains with its own seed, so results do not depend on `jobs`.
pub fn crossval(corpus: &Corpus, config: &TrainConfig, supervision: Supervision, jobs: usize) -> Result<EvalReport> {
    config.validate()?;
    let splits = kfold_split(corpus, config.folds, config.seed)?;
    let run = |(fold, (tr, te)): (usize, &(Corpus, Corpus))| run_fold(tr, te, config, supervision, fold);
    let folds = if jobs <= 1 {
        splits.iter().enumerate().map(run).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| splits.par_iter().enumerate().map(run).collect::<Result<Vec<_>>>())?
    };
    Ok(EvalReport::new(folds))
}

pub const SWEEP_HEADER: &str = "meta_path_length,folds,entity_f1,trigger_f1,joint_f1,joint_f1_std";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub meta_path_length: usize,
    pub folds: usize,
    pub entity_f1: f64,
    pub trigger_f1: f64,
    pub joint_f1: f64,
    pub joint_f1_std: f64,
}

impl SweepRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.meta_path_length, self.folds, self.entity_f1, self.trigger_f1, self.joint_f1, self.joint_f1_std
        )
    }

    pub fn to_csv(rows: &[SweepRow]) -> String {
        let mut out = String::new();
        writeln!(out, "{SWEEP_HEADER}").unwrap();
        for row in rows {
            writeln!(out, "{}", row.csv_row()).unwrap();
        }
        out
    }
}

/// Mean token-level F1 for every (meta-path length, fold count) pair, in
/// row-major order over `l_values` then `fold_values`.
pub fn sensitivity_sweep(
    corpus: &Corpus,
    config: &TrainConfig,
    l_values: &[usize],
    fold_values: &[usize],
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    if let Some(&l) = l_values.iter().find(|&&l| l % 2 == 0) {
        return Err(Error::Config(format!("meta-path length {l} is not odd")));
    }
    let mut rows = Vec::with_capacity(l_values.len() * fold_values.len());
    for &l in l_values {
        for &k in fold_values {
            let config = TrainConfig { meta_path_length: l, folds: k, ..config.clone() };
            let report = crossval(corpus, &config, Supervision::Hin(config.matrix_mode), jobs)?;
            rows.push(SweepRow {
                meta_path_length: l,
                folds: k,
                entity_f1: report.mean(Side::Entity).f1,
                trigger_f1: report.mean(Side::Trigger).f1,
                joint_f1: report.mean(Side::Joint).f1,
                joint_f1_std: report.std(Side::Joint).f1,
            });
        }
    }
    Ok(rows)
}
