//! Convert predicted type distributions through the co-occurrence matrices
//! and score them against gold with the dual KL loss.

use csm::corpus::{generate_synthetic, CooccurrenceProfile, Role, TagSchema};
use csm::hin::{build_hin, MetaPathMatrix};
use csm::ncsl::{aggregate_gold, combined_loss, CrossSupervision, MatrixMode, TypeDistribution};

fn show(label: &str, d: &TypeDistribution, names: &[String]) {
    let parts: Vec<String> = names.iter().zip(d.values()).map(|(n, v)| format!("{n} {v:.3}")).collect();
    println!("{label:<28} {}", parts.join("  "));
}

fn main() -> csm::Result<()> {
    let schema = TagSchema::new(["PER", "GPE", "WEA"], ["Movement", "Conflict"])?;
    let profile = CooccurrenceProfile::from_pairs(&schema, [("Movement", vec![1.0, 1.0, 0.0]), ("Conflict", vec![0.0, 1.0, 1.0])])?;
    let corpus = generate_synthetic(&schema, 200, 3, &profile)?;
    let matrix = MetaPathMatrix::build(&build_hin(&corpus), &schema, 3)?;
    let (entities, triggers) = (schema.entity_types(), schema.trigger_types());

    let batch = &corpus.sentences[..16];
    let (gold_e, gold_t) = aggregate_gold(batch.iter().map(|s| s.tags()), &schema);
    show("gold entities", &gold_e, entities);
    show("gold triggers", &gold_t, triggers);

    // a tagger that sees only people and movements
    let pred_e = TypeDistribution::from_mass(Role::Entity, &[0.9, 0.1, 0.0]);
    let pred_t = TypeDistribution::from_mass(Role::Trigger, &[0.95, 0.05]);

    for mode in [MatrixMode::Direct, MatrixMode::Metapath] {
        let cross = CrossSupervision::new(&matrix, mode);
        println!("\n{} matrix", mode.as_str());
        show("  triggers from predicted", &cross.convert(&pred_e)?, triggers);
        show("  entities from predicted", &cross.convert(&pred_t)?, entities);
        let g = cross.loss_and_grad(&pred_e, &pred_t, &gold_e, &gold_t)?;
        println!("  cross loss {:.4}, dL/dF_e {:.3?}, dL/dF_t {:.3?}", g.value, g.grad_entity, g.grad_trigger);
        for alpha in [0.0, 0.5, 1.0] {
            println!("  alpha {alpha}: combined loss with L_seq = 1.2 -> {:.4}", combined_loss(1.2, g.value, alpha)?);
        }
    }
    Ok(())
}
