//! Checkpoint container.
//!
//! Layout: the 4 bytes `CSM1`, a little-endian `u64` header length, a JSON
//! header, then every parameter array as little-endian `f64` in row-major
//! order, in the order the header lists them.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::params::{Dims, TaggerParams};
use crate::corpus::{TagSchema, Vocab};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CSM1";

#[derive(Serialize, Deserialize)]
struct ArrayHeader {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: TagSchema,
    schema_hash: String,
    vocab: Vec<String>,
    config: TrainConfig,
    arrays: Vec<ArrayHeader>,
}

/// A trained tagger with everything needed to run it on new text.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub schema: TagSchema,
    pub vocab: Vocab,
    pub config: TrainConfig,
    pub params: TaggerParams,
}

pub fn write_checkpoint<W: Write>(ckpt: &Checkpoint, mut out: W) -> Result<()> {
    let header = Header {
        schema: ckpt.schema.clone(),
        schema_hash: ckpt.schema.hash(),
        vocab: ckpt.vocab.tokens().to_vec(),
        config: ckpt.config.clone(),
        arrays: ckpt
            .params
            .arrays()
            .iter()
            .map(|a| ArrayHeader { name: a.name.clone(), shape: a.shape.clone() })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let io = |e| Error::Checkpoint(format!("write failed: {e}"));
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&(json.len() as u64).to_le_bytes()).map_err(io)?;
    out.write_all(&json).map_err(io)?;
    for array in ckpt.params.arrays() {
        for v in &array.data {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Checkpoint> {
    let io = |e| Error::Checkpoint(format!("read failed: {e}"));
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic, not a CSM1 checkpoint".into()));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len).map_err(io)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json).map_err(io)?;
    let header: Header = serde_json::from_slice(&json)?;
    if header.schema.hash() != header.schema_hash {
        return Err(Error::Checkpoint("schema hash mismatch".into()));
    }
    if header.vocab.first().map(String::as_str) != Some(crate::corpus::UNKNOWN_TOKEN) {
        return Err(Error::Checkpoint("vocabulary does not start with the unknown token".into()));
    }
    let vocab = Vocab::from_tokens(header.vocab.iter().skip(1));
    if vocab.len() != header.vocab.len() {
        return Err(Error::Checkpoint("vocabulary has duplicates".into()));
    }
    let dims = Dims {
        vocab: vocab.len(),
        d_emb: header.config.d_emb,
        d_hid: header.config.d_hid,
        n_layers: header.config.n_layers,
        n_tags: header.schema.num_tags(),
    };
    let mut params = TaggerParams::zeros(dims);
    if params.arrays().len() != header.arrays.len() {
        return Err(Error::Checkpoint("array count does not match the config".into()));
    }
    for (array, expected) in params.arrays_mut().into_iter().zip(&header.arrays) {
        if array.name != expected.name || array.shape != expected.shape {
            return Err(Error::Checkpoint(format!(
                "array {} {:?} does not match expected {} {:?}",
                expected.name, expected.shape, array.name, array.shape
            )));
        }
        let mut buf = [0u8; 8];
        for v in &mut array.data {
            input.read_exact(&mut buf).map_err(io)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest).map_err(io)?;
    if !rest.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", rest.len())));
    }
    params.check_finite()?;
    Ok(Checkpoint {
        schema: header.schema,
        vocab,
        config: header.config,
        params,
    })
}
