//! Token-level and span-level scores for hand-written predictions.

use csm::corpus::TagSchema;
use csm::eval::{EvalReport, FoldCounts};

fn main() -> csm::Result<()> {
    let schema = TagSchema::new(["PER", "GPE"], ["Movement"])?;
    let tags = |names: &[&str]| -> Vec<usize> { names.iter().map(|n| schema.parse_tag(n).expect("tag")).collect() };

    let cases = [
        // exact
        (tags(&["B-ENT:PER", "I-ENT:PER", "B-TRG:Movement", "O", "B-ENT:GPE"]), tags(&["B-ENT:PER", "I-ENT:PER", "B-TRG:Movement", "O", "B-ENT:GPE"])),
        // truncated entity, spurious trigger
        (tags(&["B-ENT:PER", "O", "B-TRG:Movement", "B-TRG:Movement"]), tags(&["B-ENT:PER", "I-ENT:PER", "B-TRG:Movement", "O"])),
        // wrong type
        (tags(&["B-ENT:GPE", "O"]), tags(&["B-ENT:PER", "O"])),
    ];

    let mut folds = Vec::new();
    for (pred, gold) in &cases {
        let mut fold = FoldCounts::default();
        fold.add_sentence(pred, gold, &schema)?;
        folds.push(fold);
    }
    print!("{}", EvalReport::new(folds).to_csv());
    Ok(())
}
