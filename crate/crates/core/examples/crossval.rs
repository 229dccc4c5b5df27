//! Ten-fold cross-validation on a synthetic corpus, with and without the
//! cross-supervised loss.
//!
//! ```text
//! cargo run --release --example crossval -- [sentences] [folds] [seed]
//! ```

use std::time::Instant;

use csm::corpus::{generate_synthetic, CooccurrenceProfile, TagSchema};
use csm::eval::{crossval, Side, Supervision};
use csm::ncsl::MatrixMode;
use csm::tagger::TrainConfig;

fn main() -> csm::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let sentences = args.first().copied().unwrap_or(500);
    let folds = args.get(1).copied().unwrap_or(10);
    let seed = args.get(2).copied().unwrap_or(0) as u64;

    let schema = TagSchema::new(["PER", "GPE", "ORG", "WEA", "VEH"], ["Movement", "Conflict", "Transaction"])?;
    let corpus = generate_synthetic(&schema, sentences, seed, &CooccurrenceProfile::structured(&schema))?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    for (name, alpha, supervision) in [
        ("tagger only", 0.0, Supervision::TaggerOnly),
        ("cross-supervised", 0.5, Supervision::Hin(MatrixMode::Metapath)),
    ] {
        let config = TrainConfig { alpha, folds, seed, ..TrainConfig::desk() };
        let start = Instant::now();
        let report = crossval(&corpus, &config, supervision, jobs)?;
        let (mean, std) = (report.mean(Side::Joint), report.std(Side::Joint));
        println!(
            "{name:>16}: joint F1 {:.4} ± {:.4}  (entity {:.4}, trigger {:.4})  {:.1?}",
            mean.f1,
            std.f1,
            report.mean(Side::Entity).f1,
            report.mean(Side::Trigger).f1,
            start.elapsed()
        );
    }
    Ok(())
}
