//! Mean F1 over meta-path lengths and fold counts.
//!
//! ```text
//! cargo run --release --example sensitivity -- [sentences]
//! ```

use csm::corpus::{generate_synthetic, CooccurrenceProfile, TagSchema};
use csm::eval::{sensitivity_sweep, SweepRow};
use csm::tagger::TrainConfig;

fn main() -> csm::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(200, |a| a.parse().expect("sentence count"));
    let schema = TagSchema::new(["PER", "GPE", "ORG", "WEA", "VEH"], ["Movement", "Conflict", "Transaction"])?;
    let corpus = generate_synthetic(&schema, n, 0, &CooccurrenceProfile::structured(&schema))?;
    let config = TrainConfig { epochs: 5, ..TrainConfig::desk() };
    let jobs = std::thread::available_parallelism().map_or(1, |j| j.get());

    let rows = sensitivity_sweep(&corpus, &config, &[1, 3, 5], &[5, 7, 10], jobs)?;
    print!("{}", SweepRow::to_csv(&rows));
    Ok(())
}
