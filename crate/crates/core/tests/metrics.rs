mod common;

use common::*;
use csm::corpus::{generate_synthetic, AnnotatedSentence, CooccurrenceProfile, Corpus};
use csm::eval::{count_matches, crossval, sensitivity_sweep, Counts, EvalReport, FoldCounts, MatchCounts, Side, Supervision};
use csm::ncsl::MatrixMode;
use csm::tagger::TrainConfig;

fn fixture_totals() -> MatchCounts {
    let schema = metric_schema();
    let mut total = MatchCounts::default();
    for (pred, gold) in metric_fixture(&schema) {
        total.add(&count_matches(&pred, &gold, &schema).unwrap());
    }
    total
}

#[test]
fn ten_sentence_fixture() {
    let c = fixture_totals();
    assert_eq!(c.entity, Counts { tp: 6, fp: 3, fn_: 2 });
    assert_eq!(c.trigger, Counts { tp: 3, fp: 2, fn_: 2 });
    assert_eq!(c.joint, Counts { tp: 9, fp: 5, fn_: 4 });
    assert!((c.entity.precision() - 2.0 / 3.0).abs() < 1e-15);
    assert!((c.entity.recall() - 0.75).abs() < 1e-15);
    assert!((c.entity.f1() - 12.0 / 17.0).abs() < 1e-15);
    assert!((c.trigger.f1() - 0.6).abs() < 1e-15);
    assert!((c.joint.f1() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn single_false_positive_gives_two_thirds() {
    let schema = metric_schema();
    let (pred, gold) = metric_fixture(&schema).pop().unwrap();
    let c = count_matches(&pred, &gold, &schema).unwrap();
    assert_eq!(c.trigger, Counts { tp: 1, fp: 1, fn_: 0 });
    assert_eq!(c.trigger.precision(), 0.5);
    assert_eq!(c.trigger.recall(), 1.0);
    assert!((c.trigger.f1() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn all_outside_gold() {
    let schema = metric_schema();
    let gold = vec![0; 5];
    let c = count_matches(&gold, &gold, &schema).unwrap();
    assert_eq!(c, MatchCounts::default());
    assert_eq!((c.joint.precision(), c.joint.recall(), c.joint.f1()), (0.0, 0.0, 0.0));
    let pred = vec![0, 1, 0, 0, 0];
    let c = count_matches(&pred, &gold, &schema).unwrap();
    assert_eq!(c.entity, Counts { tp: 0, fp: 1, fn_: 0 });
    assert_eq!((c.entity.precision(), c.entity.recall(), c.entity.f1()), (0.0, 0.0, 0.0));
}

fn tiny_corpus() -> Corpus {
    let schema = metric_schema();
    let s = |toks: &[&str], tags: &[&str]| {
        AnnotatedSentence::new(
            &schema,
            toks.iter().map(|t| t.to_string()).collect(),
            tags.iter().map(|t| schema.parse_tag(t).unwrap()).collect(),
        )
        .unwrap()
    };
    Corpus::new(
        schema.clone(),
        vec![
            s(&["troops", "go", "home"], &["B-ENT:PER", "B-TRG:Movement", "B-ENT:GPE"]),
            s(&["rebels", "attack", "Iraq"], &["B-ENT:PER", "B-TRG:Conflict", "B-ENT:GPE"]),
            s(&["they", "go", "to", "Iraq"], &["B-ENT:PER", "B-TRG:Movement", "O", "B-ENT:GPE"]),
            s(&["troops", "attack"], &["B-ENT:PER", "B-TRG:Conflict"]),
        ],
    )
}

fn quick() -> TrainConfig {
    TrainConfig { epochs: 2, batch_size: 4, ..TrainConfig::desk() }
}

#[test]
fn two_folds_on_four_sentences() {
    let config = TrainConfig { folds: 2, ..quick() };
    let report = crossval(&tiny_corpus(), &config, Supervision::Hin(MatrixMode::Metapath), 1).unwrap();
    assert_eq!(report.folds.len(), 2);
    let csv = report.to_csv();
    let first: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(first.iter().filter(|&&f| f == "0").count(), Side::ALL.len());
    assert_eq!(first.iter().filter(|&&f| f == "1").count(), Side::ALL.len());
    assert_eq!(first.iter().filter(|&&f| f == "mean").count(), Side::ALL.len());
    assert_eq!(first.iter().filter(|&&f| f == "std").count(), Side::ALL.len());
}

fn synthetic(n: usize) -> Corpus {
    let schema = five_by_three();
    generate_synthetic(&schema, n, 3, &CooccurrenceProfile::structured(&schema)).unwrap()
}

#[test]
fn crossval_is_deterministic_and_job_independent() {
    let corpus = synthetic(60);
    let config = TrainConfig { folds: 3, ..quick() };
    let sup = Supervision::Hin(MatrixMode::Metapath);
    let a = crossval(&corpus, &config, sup, 1).unwrap().to_csv();
    let b = crossval(&corpus, &config, sup, 1).unwrap().to_csv();
    let c = crossval(&corpus, &config, sup, 3).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn alpha_zero_matches_tagger_only() {
    let corpus = synthetic(60);
    let config = TrainConfig { folds: 3, alpha: 0.0, ..quick() };
    let tagger = crossval(&corpus, &config, Supervision::TaggerOnly, 1).unwrap().to_csv();
    for mode in [MatrixMode::Direct, MatrixMode::Metapath] {
        assert_eq!(crossval(&corpus, &config, Supervision::Hin(mode), 1).unwrap().to_csv(), tagger);
    }
}

#[test]
fn sweep_shapes() {
    let corpus = synthetic(40);
    let config = quick();
    let rows = sensitivity_sweep(&corpus, &config, &[1, 3], &[2, 3], 1).unwrap();
    assert_eq!(rows.len(), 4);
    let keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.meta_path_length, r.folds)).collect();
    assert_eq!(keys, vec![(1, 2), (1, 3), (3, 2), (3, 3)]);
    assert!(sensitivity_sweep(&corpus, &config, &[2], &[2], 1).is_err());
}

#[test]
fn single_cell_sweep_is_a_crossval() {
    let corpus = synthetic(40);
    let config = TrainConfig { folds: 4, meta_path_length: 3, ..quick() };
    let rows = sensitivity_sweep(&corpus, &config, &[3], &[4], 1).unwrap();
    let report = crossval(&corpus, &config, Supervision::Hin(config.matrix_mode), 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].joint_f1, report.mean(Side::Joint).f1);
    assert_eq!(rows[0].joint_f1_std, report.std(Side::Joint).f1);
}

#[test]
fn report_mean_and_std() {
    let schema = metric_schema();
    let folds: Vec<FoldCounts> = metric_fixture(&schema)
        .iter()
        .map(|(p, g)| {
            let mut f = FoldCounts::default();
            f.add_sentence(p, g, &schema).unwrap();
            f
        })
        .collect();
    let report = EvalReport::new(folds);
    let f1s: Vec<f64> = report.folds.iter().map(|f| f.side(Side::Joint).f1()).collect();
    let mean = f1s.iter().sum::<f64>() / 10.0;
    let var = f1s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9.0;
    assert!((report.mean(Side::Joint).f1 - mean).abs() < 1e-15);
    assert!((report.std(Side::Joint).f1 - var.sqrt()).abs() < 1e-15);
    for side in Side::ALL {
        let m = report.mean(side);
        assert!((0.0..=1.0).contains(&m.precision) && (0.0..=1.0).contains(&m.recall) && (0.0..=1.0).contains(&m.f1));
    }
}
