//! Generate a seeded synthetic corpus from a trigger → entity profile.
//!
//! ```text
//! cargo run --example synthesize_corpus -- [sentences] [seed]
//! ```

use csm::corpus::{generate_synthetic, CooccurrenceProfile, TagSchema};

fn main() -> csm::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(5, |a| a.parse().expect("sentence count"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed"));

    let schema = TagSchema::new(["PER", "GPE", "WEA"], ["Movement", "Conflict"])?;
    // Movement sentences carry people and places, Conflict sentences weapons and places.
    let profile = CooccurrenceProfile::from_pairs(&schema, [("Movement", vec![1.0, 1.0, 0.0]), ("Conflict", vec![0.0, 1.0, 1.0])])?;
    let corpus = generate_synthetic(&schema, n, seed, &profile)?;

    for sentence in &corpus.sentences {
        let line: Vec<String> = sentence
            .tokens()
            .iter()
            .zip(sentence.tags())
            .map(|(tok, &tag)| if tag == 0 { tok.clone() } else { format!("{tok}/{}", schema.tag_name(tag)) })
            .collect();
        println!("{}", line.join(" "));
    }
    Ok(())
}
