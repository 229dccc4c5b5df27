use std::path::Path;

use super::{bio_violation, AnnotatedSentence, Corpus, TagSchema};
use crate::error::{Error, Result};

/// Parses the `token<TAB>tag` format. Sentences are separated by an empty line.
///
/// Errors carry 1-based line numbers. The vocabulary is built from the parsed
/// tokens in first-seen order.
pub fn parse_corpus(input: &[u8], schema: &TagSchema) -> Result<Corpus> {
    let text = std::str::from_utf8(input).map_err(|e| {
        let line = input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::Parse {
            line,
            message: "invalid UTF-8".into(),
        }
    })?;

    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<usize> = Vec::new();
    let mut first_line = 0;

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<usize>, first_line: usize| -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        if let Some(pos) = bio_violation(schema, tags) {
            return Err(Error::Bio {
                line: first_line + pos,
                message: format!(
                    "{} is not preceded by a B or I tag of the same type",
                    schema.tag_name(tags[pos])
                ),
            });
        }
        let sentence = AnnotatedSentence::new(schema, std::mem::take(tokens), std::mem::take(tags))?;
        sentences.push(sentence);
        Ok(())
    };

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            flush(&mut tokens, &mut tags, first_line)?;
            continue;
        }
        let (token, tag) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected token<TAB>tag".into(),
        })?;
        if token.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty token".into(),
            });
        }
        let tag_index = schema.parse_tag(tag).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("unknown tag {tag:?}"),
        })?;
        if tokens.is_empty() {
            first_line = line_no;
        }
        tokens.push(token.to_string());
        tags.push(tag_index);
    }
    flush(&mut tokens, &mut tags, first_line)?;

    Ok(Corpus::new(schema.clone(), sentences))
}

pub fn read_corpus(path: &Path, schema: &TagSchema) -> Result<Corpus> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&bytes, schema)
}

/// Canonical form: each sentence's lines followed by one empty line.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for sentence in &corpus.sentences {
        for (token, &tag) in sentence.tokens().iter().zip(sentence.tags()) {
            out.push_str(token);
            out.push('\t');
            out.push_str(&corpus.schema.tag_name(tag));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Role;

    fn schema() -> TagSchema {
        TagSchema::new(["PER", "GPE"], ["Movement"]).unwrap()
    }

    #[test]
    fn one_sentence() {
        let c = parse_corpus(b"troops\tB-ENT:PER\ngo\tB-TRG:Movement\n\n", &schema()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences[0].len(), 2);
        let spans = c.sentences[0].spans(&c.schema);
        assert_eq!(spans.iter().filter(|s| s.role == Role::Entity).count(), 1);
        assert_eq!(spans.iter().filter(|s| s.role == Role::Trigger).count(), 1);
        assert_eq!(c.sentences[0].gold_entities(&c.schema)[0].1, "PER");
        assert_eq!(c.sentences[0].gold_triggers(&c.schema)[0].1, "Movement");
    }

    #[test]
    fn leading_inside_is_bio_error_on_line_one() {
        let err = parse_corpus(b"Iraq\tI-ENT:GPE\n\n", &schema()).unwrap_err();
        match err {
            Error::Bio { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bio_error_line_in_later_sentence() {
        let text = b"a\tO\n\nb\tO\nc\tI-ENT:PER\n";
        match parse_corpus(text, &schema()).unwrap_err() {
            Error::Bio { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_stream() {
        let c = parse_corpus(b"", &schema()).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.vocab.tokens(), ["<unk>"]);
    }

    #[test]
    fn malformed_lines() {
        match parse_corpus(b"a\tO\nnotab\n", &schema()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_corpus(b"\tO\n", &schema()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_corpus(b"a\tO\nb\tB-ENT:WEA\n", &schema()).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("B-ENT:WEA"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn final_sentence_without_trailing_blank() {
        let c = parse_corpus(b"a\tO\n\nb\tO", &schema()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(serialize_corpus(&c), "a\tO\n\nb\tO\n\n");
    }

    #[test]
    fn vocab_first_seen_case_sensitive() {
        let c = parse_corpus(b"Go\tO\ngo\tO\nGo\tO\n", &schema()).unwrap();
        assert_eq!(c.vocab.tokens(), ["<unk>", "Go", "go"]);
    }
}
