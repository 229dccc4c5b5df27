//! Build the entity-trigger co-occurrence network of a small corpus and take
//! a few typed random-walk steps on it.

use std::fs;

use csm::corpus::{read_corpus, TagSchema};
use csm::hin::{build_hin, walk_prob};

fn main() -> csm::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let schema = TagSchema::from_json(&fs::read_to_string(format!("{dir}/schema.json")).unwrap())?;
    let corpus = read_corpus(format!("{dir}/news.tsv").as_ref(), &schema)?;
    let hin = build_hin(&corpus);

    println!("{} nodes, {} edges", hin.nodes().len(), hin.num_edges());
    for (id, node) in hin.nodes().iter().enumerate() {
        println!("  {id:>2} {:<8} {:<9} {}", node.role, node.node_type, node.key);
    }

    let go = hin.node_id("go", "Movement").expect("go is a trigger");
    for next in ["PER", "GPE"] {
        let step = walk_prob(&hin, go, next)?;
        let parts: Vec<String> = step.iter().map(|(n, p)| format!("{} {p:.3}", hin.nodes()[*n].key)).collect();
        println!("go -> {next}: {}", parts.join(", "));
    }

    println!();
    hin.write_edge_csv(std::io::stdout())?;
    Ok(())
}
