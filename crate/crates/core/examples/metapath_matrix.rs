//! Enumerate realized meta-paths and print the direct and meta-path
//! entity-trigger matrices.
//!
//! ```text
//! cargo run --example metapath_matrix -- [length]
//! ```

use std::fs;
use std::io::stdout;

use csm::corpus::{read_corpus, TagSchema};
use csm::hin::{build_hin, enumerate_metapaths, type_path_score, MetaPathMatrix};

fn main() -> csm::Result<()> {
    let length: usize = std::env::args().nth(1).map_or(3, |a| a.parse().expect("odd length"));
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let schema = TagSchema::from_json(&fs::read_to_string(format!("{dir}/schema.json")).unwrap())?;
    let corpus = read_corpus(format!("{dir}/news.tsv").as_ref(), &schema)?;
    let hin = build_hin(&corpus);

    let paths = enumerate_metapaths(&hin, &schema, length)?;
    println!("{} meta-paths of length {length}", paths.len());
    for p in &paths {
        println!("  {p:<32} score {:.4}  (read backwards: {})", type_path_score(&hin, p), p.reversed());
    }

    let matrix = MetaPathMatrix::build(&hin, &schema, length)?;
    println!("\ndirect co-occurrence:");
    matrix.write_direct_csv(&schema, stdout())?;
    println!("\nmeta-path log scores:");
    matrix.write_meta_csv(&schema, stdout())?;
    Ok(())
}
