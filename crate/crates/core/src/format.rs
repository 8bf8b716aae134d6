//! JSON interchange document for tensors:
//!
//! ```json
//! {"shape": [2, 2], "kind": "sign", "entries": [1, 1, 1, -1]}
//! {"shape": [2], "kind": "unimodular", "entries": [0.0, 3.141592653589793]}
//! ```
//!
//! Entries are flat and row-major: ±1 integers for `sign`, radians for
//! `unimodular` (canonicalized into `[0, 2π)` on read). Unknown fields are
//! ignored so larger documents, such as game snapshots, can be read as
//! tensors directly.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tensor::{AxisAssignment, Coefficients, Shape, SignTensor, Tensor, UnimodularTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorKind {
    Sign,
    Unimodular,
}

#[derive(Serialize)]
struct Document<'a, E> {
    shape: &'a Shape,
    kind: TensorKind,
    entries: E,
}

#[derive(Deserialize)]
struct RawDocument {
    shape: Shape,
    kind: TensorKind,
    entries: Vec<f64>,
}

impl TryFrom<RawDocument> for Tensor {
    type Error = Error;

    fn try_from(raw: RawDocument) -> Result<Self> {
        match raw.kind {
            TensorKind::Sign => {
                let entries = raw
                    .entries
                    .iter()
                    .map(|&e| {
                        if e == 1.0 {
                            Ok(1)
                        } else if e == -1.0 {
                            Ok(-1)
                        } else {
                            Err(Error::InvalidValue(format!("sign entry {e} is not ±1")))
                        }
                    })
                    .collect::<Result<Vec<i8>>>()?;
                Ok(Tensor::Sign(SignTensor::new(raw.shape, entries)?))
            }
            TensorKind::Unimodular => Ok(Tensor::Unimodular(UnimodularTensor::new(raw.shape, raw.entries)?)),
        }
    }
}

impl Serialize for SignTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Document { shape: self.shape(), kind: TensorKind::Sign, entries: self.entries() }.serialize(s)
    }
}

impl Serialize for UnimodularTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Document { shape: self.shape(), kind: TensorKind::Unimodular, entries: self.angles() }.serialize(s)
    }
}

impl Serialize for Tensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tensor::Sign(t) => t.serialize(s),
            Tensor::Unimodular(t) => t.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawDocument::deserialize(d)?;
        Tensor::try_from(raw).map_err(D::Error::custom)
    }
}

impl Tensor {
    pub fn kind(&self) -> TensorKind {
        match self {
            Tensor::Sign(_) => TensorKind::Sign,
            Tensor::Unimodular(_) => TensorKind::Unimodular,
        }
    }
}

/// Reads a tensor document.
pub fn parse_tensor(json: &str) -> Result<Tensor> {
    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a tensor document from raw bytes.
pub fn parse_tensor_bytes(bytes: &[u8]) -> Result<Tensor> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads an assignment document such as
/// `{"kind":"phases","vectors":[[0.0,1.5],[3.1]]}`.
pub fn parse_assignment(json: &str) -> Result<AxisAssignment> {
    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes a tensor document on one line.
pub fn tensor_to_json(tensor: &Tensor) -> String {
    serde_json::to_string(tensor).expect("tensor documents always serialize")
}
