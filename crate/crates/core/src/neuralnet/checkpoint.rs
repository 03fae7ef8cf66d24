//! Binary model checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | content                                              |
//! |-------|------------------------------------------------------|
//! | 8     | magic `TORSNET\0`                                    |
//! | 4     | format version (`u32`, currently 1)                  |
//! | 4     | header length `n` (`u32`)                            |
//! | n     | UTF-8 JSON header: `spec`, `tensors` (shapes), `meta` |
//! | 8·k   | every parameter as `f64`, tensors in header order     |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Model, ModelSpec};
use super::tensor::Tensor;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"TORSNET\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    spec: ModelSpec,
    tensors: Vec<Vec<usize>>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

pub fn write_checkpoint<W: Write>(mut out: W, model: &Model, meta: &BTreeMap<String, String>) -> Result<()> {
    let params = model.parameters();
    let header = Header {
        spec: model.spec().clone(),
        tensors: params.iter().map(|p| p.shape().to_vec()).collect(),
        meta: meta.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    let len = u32::try_from(json.len()).map_err(|_| Error::Checkpoint("header too large".into()))?;
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(&json)?;
    for p in params {
        for v in p.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<(Model, BTreeMap<String, String>)> {
    let mut magic = [0u8; 8];
    read_exact(&mut input, &mut magic, "magic")?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("not a model checkpoint (bad magic)".into()));
    }
    let mut word = [0u8; 4];
    read_exact(&mut input, &mut word, "version")?;
    let version = u32::from_le_bytes(word);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    read_exact(&mut input, &mut word, "header length")?;
    let mut json = vec![0u8; u32::from_le_bytes(word) as usize];
    read_exact(&mut input, &mut json, "header")?;
    let header: Header = serde_json::from_slice(&json)?;

    let mut tensors = Vec::with_capacity(header.tensors.len());
    let mut buf = [0u8; 8];
    for shape in header.tensors {
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            read_exact(&mut input, &mut buf, "parameters")?;
            data.push(f64::from_le_bytes(buf));
        }
        tensors.push(Tensor::new(shape, data)?);
    }
    if input.read(&mut buf)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after parameters".into()));
    }
    Ok((Model::from_parameters(header.spec, tensors)?, header.meta))
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Checkpoint(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &Model, meta: &BTreeMap<String, String>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::from(e).in_file(path))?;
    write_checkpoint(BufWriter::new(file), model, meta).map_err(|e| e.in_file(path))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, BTreeMap<String, String>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_checkpoint(BufReader::new(file)).map_err(|e| e.in_file(path))
}
