//! Read an annotated corpus, list its spans and write it back out.
//!
//! ```text
//! cargo run --example parse_corpus -- [corpus.tsv] [schema.json]
//! ```

use std::env;
use std::fs;

use csm::corpus::{read_corpus, serialize_corpus, TagSchema};

fn main() -> csm::Result<()> {
    let corpus_path = env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/news.tsv").into());
    let schema_path = env::args().nth(2).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/schema.json").into());

    let schema = TagSchema::from_json(&fs::read_to_string(&schema_path).map_err(|e| csm::Error::io(&schema_path, e))?)?;
    println!("tags: {}", schema.combined().join(" "));

    let corpus = read_corpus(corpus_path.as_ref(), &schema)?;
    println!("{} sentences, {} tokens, {} word types", corpus.len(), corpus.num_tokens(), corpus.vocab.len());
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        let spans: Vec<String> = sentence
            .spans(&schema)
            .iter()
            .map(|s| format!("[{}] {}", schema.types(s.role)[s.type_index], sentence.span_text(s)))
            .collect();
        println!("  {i}: {}", spans.join(", "));
    }

    print!("\n{}", serialize_corpus(&corpus));
    Ok(())
}
