//! Binary model file.
//!
//! Layout:
//!
//! ```text
//! factcheck-model <version>\n
//! {"k":K,"d":D,"class_names":[...],"feature_space":"..."}\n
//! K little-endian f64 bias values
//! K*D little-endian f64 weights, row-major
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ModelParams;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "factcheck-model";

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("unsupported model format version {0}")]
    Version(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    k: usize,
    d: usize,
    class_names: Vec<String>,
    feature_space: String,
}

impl ModelParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            k: self.num_classes(),
            d: self.dim(),
            class_names: self.class_names().to_vec(),
            feature_space: self.feature_space().to_string(),
        };
        let mut out = format!("{MAGIC} {MODEL_FORMAT_VERSION}\n").into_bytes();
        out.extend(serde_json::to_vec(&header).expect("header serializes"));
        out.push(b'\n');
        out.reserve(8 * (self.bias().len() + self.weights().len()));
        for v in self.bias().iter().chain(self.weights()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelFileError> {
        let malformed = |m: &str| ModelFileError::Malformed(m.to_string());
        let (magic_line, rest) = split_line(bytes).ok_or_else(|| malformed("missing header line"))?;
        let magic_line = std::str::from_utf8(magic_line).map_err(|_| malformed("header is not UTF-8"))?;
        match magic_line.split_once(' ') {
            Some((MAGIC, v)) if v == MODEL_FORMAT_VERSION.to_string() => {}
            Some((MAGIC, v)) => return Err(ModelFileError::Version(v.to_string())),
            _ => return Err(malformed("not a model file")),
        }
        let (header_line, payload) = split_line(rest).ok_or_else(|| malformed("missing metadata line"))?;
        let header: Header =
            serde_json::from_slice(header_line).map_err(|e| ModelFileError::Malformed(e.to_string()))?;
        if header.class_names.len() != header.k {
            return Err(malformed("class_names length differs from k"));
        }
        let expected = header
            .k
            .checked_mul(header.d + 1)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| malformed("dimensions overflow"))?;
        if payload.len() != expected {
            return Err(ModelFileError::Malformed(format!(
                "expected {expected} payload bytes, found {}",
                payload.len()
            )));
        }
        let mut values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let bias: Vec<f64> = values.by_ref().take(header.k).collect();
        let weights: Vec<f64> = values.collect();
        ModelParams::from_parts(header.class_names, header.d, header.feature_space, bias, weights)
            .map_err(|e| ModelFileError::Malformed(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn split_line(bytes: &[u8]) -> Option<(&[u8], &[u8])> {
    let pos = bytes.iter().position(|&b| b == b'\n')?;
    Some((&bytes[..pos], &bytes[pos + 1..]))
}
