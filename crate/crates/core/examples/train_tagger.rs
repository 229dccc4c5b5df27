//! Train the tagger with cross-supervision on a synthetic corpus, save a
//! checkpoint, reload it and tag held-out sentences.
//!
//! ```text
//! cargo run --release --example train_tagger -- [epochs] [alpha]
//! ```

use csm::corpus::{generate_synthetic, kfold_split, CooccurrenceProfile, TagSchema};
use csm::eval::{evaluate, Side, EvalReport};
use csm::hin::{build_hin, MetaPathMatrix};
use csm::ncsl::{CrossSupervision, MatrixMode};
use csm::tagger::{predict_tags, read_checkpoint, train, write_checkpoint, Checkpoint, LossRecord, TrainConfig};

fn main() -> csm::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map_or(10, |a| a.parse().expect("epochs"));
    let alpha: f64 = args.next().map_or(0.5, |a| a.parse().expect("alpha"));

    let schema = TagSchema::new(["PER", "GPE", "ORG", "WEA", "VEH"], ["Movement", "Conflict", "Transaction"])?;
    let corpus = generate_synthetic(&schema, 500, 0, &CooccurrenceProfile::structured(&schema))?;
    let (train_split, test_split) = kfold_split(&corpus, 10, 0)?.swap_remove(0);

    let config = TrainConfig { epochs, alpha, ..TrainConfig::desk() };
    let matrix = MetaPathMatrix::build(&build_hin(&train_split), &schema, config.meta_path_length)?;
    let cross = CrossSupervision::new(&matrix, MatrixMode::Metapath);

    println!("{}", LossRecord::CSV_HEADER);
    let params = train(&train_split, &config, Some(&cross), |r| {
        if r.batch == 0 {
            println!("{}", r.csv_row());
        }
    })?;

    let ckpt = Checkpoint { schema: schema.clone(), vocab: train_split.vocab.clone(), config, params };
    let mut bytes = Vec::new();
    write_checkpoint(&ckpt, &mut bytes)?;
    let ckpt = read_checkpoint(bytes.as_slice())?;
    println!("\ncheckpoint: {} bytes, {} parameters", bytes.len(), ckpt.params.num_parameters());

    for sentence in test_split.sentences.iter().take(3) {
        let pred = predict_tags(&ckpt.params, &ckpt.vocab.encode(sentence.tokens()))?;
        let line: Vec<String> = sentence
            .tokens()
            .iter()
            .zip(&pred)
            .map(|(t, &p)| if p == 0 { t.clone() } else { format!("{t}/{}", schema.tag_name(p)) })
            .collect();
        println!("  {}", line.join(" "));
    }

    let report = EvalReport::new(vec![evaluate(&ckpt.params, &test_split)?]);
    for side in [Side::Entity, Side::Trigger, Side::Joint] {
        let m = report.mean(side);
        println!("{:<8} P {:.3}  R {:.3}  F1 {:.3}", side.as_str(), m.precision, m.recall, m.f1);
    }
    Ok(())
}
