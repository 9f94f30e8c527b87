//! Parameter checkpoints.
//!
//! ```text
//! b"ATSFPV\0\x01"            8-byte magic
//! header length              u64, little-endian
//! header                     UTF-8 JSON (CheckpointHeader)
//! values                     `len` scalars, little-endian, width per `dtype`
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ParameterVector;
use super::spec::{LearnerSpec, Segment};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"ATSFPV\0\x01";
pub const LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub layout_version: u32,
    pub dtype: String,
    pub spec: LearnerSpec,
    pub len: usize,
    pub layout: Vec<Segment>,
}

pub fn encode<T: Scalar>(spec: &LearnerSpec, theta: &ParameterVector<T>) -> Result<Vec<u8>> {
    theta.check_len(spec)?;
    let header = CheckpointHeader {
        layout_version: LAYOUT_VERSION,
        dtype: T::DTYPE.to_string(),
        spec: *spec,
        len: theta.len(),
        layout: spec.layout(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(16 + json.len() + theta.len() * T::BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for &v in theta.iter() {
        v.write_le(&mut out);
    }
    Ok(out)
}

pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<(LearnerSpec, ParameterVector<T>)> {
    let corrupt = |m: &str| Error::Version(format!("not a parameter checkpoint: {m}"));
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let mut len_buf = [0u8; 8];
    len_buf.copy_from_slice(&bytes[8..16]);
    let header_len = usize::try_from(u64::from_le_bytes(len_buf)).map_err(|_| corrupt("header length"))?;
    let body_start = 16usize
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| corrupt("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[16..body_start])?;
    if header.layout_version != LAYOUT_VERSION {
        return Err(Error::Version(format!(
            "layout version {} is not supported (expected {LAYOUT_VERSION})",
            header.layout_version
        )));
    }
    if header.dtype != T::DTYPE {
        return Err(Error::Version(format!(
            "checkpoint holds {} values, reader expects {}",
            header.dtype,
            T::DTYPE
        )));
    }
    if header.len != header.spec.param_count() || header.layout != header.spec.layout() {
        return Err(Error::Version(
            "checkpoint layout does not match its learner spec".into(),
        ));
    }
    let body = &bytes[body_start..];
    if body.len() != header.len * T::BYTES {
        return Err(corrupt("body length"));
    }
    let values = body.chunks_exact(T::BYTES).map(T::read_le).collect();
    Ok((header.spec, ParameterVector::from_vec(values)))
}

pub fn save<T: Scalar>(path: impl AsRef<Path>, spec: &LearnerSpec, theta: &ParameterVector<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(spec, theta)?).map_err(|e| Error::io(path, e))
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<(LearnerSpec, ParameterVector<T>)> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
