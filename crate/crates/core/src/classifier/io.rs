//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `TAXF` |
//! | 4 | format version (u32) |
//! | 4 | feature_dim (u32) |
//! | 4 | node_count (u32) |
//! | 32 | taxonomy fingerprint |
//! | 8·n·d | weights, row-major f64 |
//! | 8·n | bias, f64 |

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{ClassifierModel, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::taxonomy::Fingerprint;

pub const MODEL_MAGIC: &[u8; 4] = b"TAXF";
pub const MODEL_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 32;

impl ClassifierModel {
    fn header(&self) -> Vec<u8> {
        let mut h = Vec::with_capacity(HEADER_LEN);
        h.extend_from_slice(MODEL_MAGIC);
        h.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        h.extend_from_slice(&(self.feature_dim as u32).to_le_bytes());
        h.extend_from_slice(&(self.node_count as u32).to_le_bytes());
        h.extend_from_slice(&self.fingerprint.0);
        h
    }

    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        out.write_all(&self.header())?;
        for w in self.weights.iter().chain(&self.bias) {
            out.write_all(&w.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 8 * (self.weights.len() + self.bias.len()));
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Decodes a model, insisting on `expected_dim` features.
    pub fn from_bytes(bytes: &[u8], expected_dim: usize) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != MODEL_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let version = u32_at(4);
        if version != MODEL_VERSION {
            return Err(Error::Version(version));
        }
        let feature_dim = u32_at(8) as usize;
        let node_count = u32_at(12) as usize;
        if feature_dim != expected_dim {
            return Err(Error::Format(format!("feature_dim {feature_dim}, expected {expected_dim}")));
        }
        let fingerprint = Fingerprint(bytes[16..48].try_into().expect("32 bytes"));
        let n_floats = node_count * feature_dim + node_count;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 8 * n_floats {
            return Err(Error::Format(format!(
                "body holds {} bytes, expected {} (truncated or padded)",
                body.len(),
                8 * n_floats
            )));
        }
        let mut floats = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let weights: Vec<f64> = floats.by_ref().take(node_count * feature_dim).collect();
        let bias: Vec<f64> = floats.collect();
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(Error::Format("non-finite parameter".into()));
        }
        Ok(ClassifierModel { weights, bias, feature_dim, node_count, fingerprint })
    }
}

pub fn save_model(m: &ClassifierModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    m.write_to(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Loads a model with the standard [`FEATURE_DIM`].
pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    load_model_with_dim(path, FEATURE_DIM)
}

pub fn load_model_with_dim(path: &Path, expected_dim: usize) -> Result<ClassifierModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ClassifierModel::from_bytes(&bytes, expected_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Taxonomy;

    fn small() -> ClassifierModel {
        let t = Taxonomy::parse("No-hate\nHate\n  A\n").unwrap();
        let mut m = ClassifierModel::zeros_with_dim(t.len(), 8, t.fingerprint());
        m.set_weight(2, 5, -1.25);
        m.set_bias(1, 0.5);
        m
    }

    #[test]
    fn bytes_round_trip() {
        let m = small();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"TAXF");
        assert_eq!(bytes.len(), 48 + 8 * (3 * 8 + 3));
        assert_eq!(ClassifierModel::from_bytes(&bytes, 8).unwrap(), m);
    }

    #[test]
    fn corrupt_inputs() {
        let bytes = small().to_bytes();
        assert!(matches!(ClassifierModel::from_bytes(&bytes[..bytes.len() - 3], 8), Err(Error::Format(_))));
        assert!(matches!(ClassifierModel::from_bytes(&bytes[..10], 8), Err(Error::Format(_))));
        assert!(matches!(ClassifierModel::from_bytes(&bytes, 16), Err(Error::Format(_))));
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(matches!(ClassifierModel::from_bytes(&v, 8), Err(Error::Version(9))));
        let mut v = bytes;
        v[0] = b'X';
        assert!(matches!(ClassifierModel::from_bytes(&v, 8), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        let m = small();
        save_model(&m, &p).unwrap();
        assert_eq!(load_model_with_dim(&p, 8).unwrap(), m);
        assert!(matches!(load_model(&p), Err(Error::Format(_))));
        assert!(matches!(load_model(&dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
