//! `MMK1` checkpoint container and task-vector arithmetic.
//!
//! Layout of a container file:
//!
//! ```text
//! b"MMK1" | header_len: u64 LE | header: UTF-8 JSON, space padded | tensor bytes
//! ```
//!
//! The header maps each tensor name to `{dtype, shape, byte_offset, byte_length}`.
//! Offsets are relative to the start of the tensor bytes, which begins on a 64-byte
//! boundary of the file; every tensor starts on a 64-byte boundary as well. Tensors
//! are laid out in lexicographic name order, so the bytes are a pure function of
//! the checkpoint contents.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use half::f16;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MMK1";
pub const ALIGNMENT: usize = 64;
/// Reserved header key carrying free-form string metadata.
pub const METADATA_KEY: &str = "__metadata__";
const PREFIX_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F16,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F16 => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(DType::F32),
            "f16" => Ok(DType::F16),
            other => Err(Error::UnsupportedDtype(other.to_string())),
        }
    }
}

// NaN payloads are moved by hand: hardware conversions quiet signaling NaNs.
fn widen_f16(bits: u16) -> f32 {
    if bits & 0x7c00 == 0x7c00 && bits & 0x03ff != 0 {
        let sign = u32::from(bits & 0x8000) << 16;
        f32::from_bits(sign | 0x7f80_0000 | (u32::from(bits & 0x03ff) << 13))
    } else {
        f16::from_bits(bits).to_f32()
    }
}

fn narrow_f16(v: f32) -> u16 {
    if v.is_nan() {
        let bits = v.to_bits();
        let sign = ((bits >> 16) & 0x8000) as u16;
        let payload = ((bits >> 13) & 0x03ff) as u16;
        sign | 0x7c00 | if payload == 0 { 0x0200 } else { payload }
    } else {
        f16::from_f32(v).to_bits()
    }
}

/// One named tensor. Values are always held as `f32`; `f16` tensors are widened
/// on read and narrowed (round-to-nearest-even) on write.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub dtype: DType,
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, dtype: DType, shape: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        let t = Tensor {
            name: name.into(),
            dtype,
            shape,
            values,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn f32(name: impl Into<String>, shape: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        Self::new(name, DType::F32, shape, values)
    }

    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name == METADATA_KEY {
            return Err(Error::InvalidName(format!("{:?}", self.name)));
        }
        if self.shape.contains(&0) {
            return Err(Error::HeaderMismatch(format!(
                "{}: shape {:?} has a zero dimension",
                self.name, self.shape
            )));
        }
        if self.numel() != self.values.len() {
            return Err(Error::HeaderMismatch(format!(
                "{}: shape {:?} holds {} values, got {}",
                self.name,
                self.shape,
                self.numel(),
                self.values.len()
            )));
        }
        Ok(())
    }

    fn encode_into(&self, out: &mut Vec<u8>) {
        match self.dtype {
            DType::F32 => {
                for v in &self.values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            DType::F16 => {
                for v in &self.values {
                    out.extend_from_slice(&narrow_f16(*v).to_le_bytes());
                }
            }
        }
    }

    fn decode(name: &str, dtype: DType, shape: Vec<usize>, bytes: &[u8]) -> Result<Self> {
        let values = match dtype {
            DType::F32 => bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
            DType::F16 => bytes
                .chunks_exact(2)
                .map(|c| widen_f16(u16::from_le_bytes([c[0], c[1]])))
                .collect(),
        };
        Tensor::new(name, dtype, shape, values)
    }
}

/// 64-bit content hash of a container's canonical bytes (first 8 bytes of SHA-256,
/// big-endian).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub u64);

impl Digest {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        let hash = Sha256::digest(bytes);
        let mut head = [0u8; 8];
        head.copy_from_slice(&hash[..8]);
        Digest(u64::from_be_bytes(head))
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::of_bytes(&bytes))
    }

    pub fn parse(s: &str) -> Result<Self> {
        u64::from_str_radix(s, 16)
            .map(Digest)
            .map_err(|_| Error::HeaderMismatch(format!("bad digest {s:?}")))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Named tensor map for one model, kept in canonical (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    tensors: Vec<Tensor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryHeader {
    dtype: String,
    shape: Vec<usize>,
    byte_offset: u64,
    byte_length: u64,
}

fn align_up(n: usize) -> usize {
    n.div_ceil(ALIGNMENT) * ALIGNMENT
}

impl Checkpoint {
    /// Builds a checkpoint from entries in any order.
    pub fn new(mut tensors: Vec<Tensor>) -> Result<Self> {
        for t in &tensors {
            t.validate()?;
        }
        tensors.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = tensors.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(Error::NameCollision(w[0].name.clone()));
        }
        Ok(Checkpoint { tensors })
    }

    pub fn empty() -> Self {
        Checkpoint::default()
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors
            .binary_search_by(|t| t.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.tensors[i])
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.tensors.iter().map(|t| t.values.len()).sum()
    }

    /// All values concatenated in canonical tensor order.
    pub fn flat_values(&self) -> impl Iterator<Item = f32> + '_ {
        self.tensors.iter().flat_map(|t| t.values.iter().copied())
    }

    /// Checks that `other` has the same tensor names and shapes.
    pub fn check_same_layout(&self, other: &Checkpoint) -> Result<()> {
        if self.tensors.len() != other.tensors.len()
            || self.tensors.iter().zip(&other.tensors).any(|(a, b)| a.name != b.name)
        {
            let a: Vec<&str> = self.tensors.iter().map(|t| t.name.as_str()).collect();
            let b: Vec<&str> = other.tensors.iter().map(|t| t.name.as_str()).collect();
            return Err(Error::NameMismatch(format!("{a:?} vs {b:?}")));
        }
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            if a.shape != b.shape {
                return Err(Error::ShapeMismatch {
                    name: a.name.clone(),
                    expected: a.shape.clone(),
                    found: b.shape.clone(),
                });
            }
        }
        Ok(())
    }

    /// Canonical container bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        encode_container(self, &BTreeMap::new())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode_container(bytes).map(|(c, _)| c)
    }

    pub fn digest(&self) -> Digest {
        Digest::of_bytes(&self.to_bytes())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Same tensor layout with the flat value stream replaced, stored as f32.
    pub(crate) fn with_flat_values(&self, flat: &[f32]) -> Checkpoint {
        debug_assert_eq!(flat.len(), self.numel());
        let mut offset = 0;
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                let n = t.values.len();
                let values = flat[offset..offset + n].to_vec();
                offset += n;
                Tensor {
                    name: t.name.clone(),
                    dtype: DType::F32,
                    shape: t.shape.clone(),
                    values,
                }
            })
            .collect();
        Checkpoint { tensors }
    }
}

/// Writes `checkpoint` in `MMK1` format.
pub fn write_container(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    checkpoint.write(path)
}

/// Reads an `MMK1` file.
pub fn read_container(path: &Path) -> Result<Checkpoint> {
    Checkpoint::read(path)
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Serialises a checkpoint plus optional string metadata.
pub fn encode_container(checkpoint: &Checkpoint, metadata: &BTreeMap<String, String>) -> Vec<u8> {
    let mut header = serde_json::Map::new();
    let mut payload: Vec<u8> = Vec::new();
    for t in &checkpoint.tensors {
        let start = align_up(payload.len());
        payload.resize(start, 0);
        t.encode_into(&mut payload);
        let entry = EntryHeader {
            dtype: match t.dtype {
                DType::F32 => "f32".into(),
                DType::F16 => "f16".into(),
            },
            shape: t.shape.clone(),
            byte_offset: start as u64,
            byte_length: (payload.len() - start) as u64,
        };
        header.insert(t.name.clone(), serde_json::to_value(entry).expect("header entry"));
    }
    if !metadata.is_empty() {
        header.insert(
            METADATA_KEY.to_string(),
            serde_json::to_value(metadata).expect("metadata map"),
        );
    }
    let mut header_bytes = serde_json::to_vec(&header).expect("header json");
    let padded = align_up(PREFIX_LEN + header_bytes.len()) - PREFIX_LEN;
    header_bytes.resize(padded, b' ');

    let mut out = Vec::with_capacity(PREFIX_LEN + header_bytes.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    out.extend_from_slice(&payload);
    out
}

/// Parses container bytes into a checkpoint and its metadata map.
pub fn decode_container(bytes: &[u8]) -> Result<(Checkpoint, BTreeMap<String, String>)> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic(bytes[..bytes.len().min(4)].to_vec()));
    }
    if bytes.len() < PREFIX_LEN {
        return Err(Error::Truncated("missing header length".into()));
    }
    let header_len = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes"));
    let header_end = usize::try_from(header_len)
        .ok()
        .and_then(|n| n.checked_add(PREFIX_LEN))
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| {
            Error::Truncated(format!(
                "header declares {header_len} bytes, file has {}",
                bytes.len() - PREFIX_LEN
            ))
        })?;
    let header_text = std::str::from_utf8(&bytes[PREFIX_LEN..header_end])
        .map_err(|e| Error::HeaderMismatch(format!("header is not UTF-8: {e}")))?;
    let header: serde_json::Map<String, serde_json::Value> = serde_json::from_str(header_text)
        .map_err(|e| Error::HeaderMismatch(format!("header is not a JSON map: {e}")))?;

    let data_start = align_up(header_end);
    let data = bytes.get(data_start..).unwrap_or(&[]);
    let mut metadata = BTreeMap::new();
    let mut tensors = Vec::with_capacity(header.len());
    for (name, value) in header {
        if name == METADATA_KEY {
            metadata = serde_json::from_value(value)
                .map_err(|e| Error::HeaderMismatch(format!("metadata: {e}")))?;
            continue;
        }
        let entry: EntryHeader = serde_json::from_value(value)
            .map_err(|e| Error::HeaderMismatch(format!("{name}: {e}")))?;
        let dtype = DType::parse(&entry.dtype)?;
        let numel = entry.shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let expected_len = numel.and_then(|n| n.checked_mul(dtype.size()));
        if expected_len != Some(entry.byte_length as usize) {
            return Err(Error::HeaderMismatch(format!(
                "{name}: shape {:?} of {} needs {:?} bytes, header says {}",
                entry.shape, entry.dtype, expected_len, entry.byte_length
            )));
        }
        if !(entry.byte_offset as usize).is_multiple_of(ALIGNMENT) {
            return Err(Error::HeaderMismatch(format!(
                "{name}: offset {} is not {ALIGNMENT}-byte aligned",
                entry.byte_offset
            )));
        }
        let start = entry.byte_offset as usize;
        let end = start.checked_add(entry.byte_length as usize);
        let slice = end.and_then(|end| data.get(start..end)).ok_or_else(|| {
            Error::Truncated(format!(
                "{name}: declares {} bytes at offset {start}, payload has {}",
                entry.byte_length,
                data.len().saturating_sub(start)
            ))
        })?;
        tensors.push(Tensor::decode(&name, dtype, entry.shape, slice)?);
    }
    Ok((Checkpoint::new(tensors)?, metadata))
}

/// Element-wise delta `theta_t - theta_0`, always stored as f32.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskVector {
    checkpoint: Checkpoint,
    base_digest: Digest,
}

impl TaskVector {
    pub fn from_parts(checkpoint: Checkpoint, base_digest: Digest) -> Self {
        let tensors = checkpoint
            .tensors
            .into_iter()
            .map(|t| Tensor {
                dtype: DType::F32,
                ..t
            })
            .collect();
        TaskVector {
            checkpoint: Checkpoint { tensors },
            base_digest,
        }
    }

    pub fn checkpoint(&self) -> &Checkpoint {
        &self.checkpoint
    }

    pub fn base_digest(&self) -> Digest {
        self.base_digest
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.checkpoint.tensors
    }

    pub fn numel(&self) -> usize {
        self.checkpoint.numel()
    }

    pub fn flat(&self) -> Vec<f32> {
        self.checkpoint.flat_values().collect()
    }

    /// New task vector with this layout and base, carrying `flat` values.
    pub fn with_flat(&self, flat: &[f32]) -> TaskVector {
        TaskVector {
            checkpoint: self.checkpoint.with_flat_values(flat),
            base_digest: self.base_digest,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut meta = BTreeMap::new();
        meta.insert("base_digest".to_string(), self.base_digest.to_string());
        meta.insert("kind".to_string(), "task_vector".to_string());
        encode_container(&self.checkpoint, &meta)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let (checkpoint, meta) = decode_container(&bytes)?;
        let digest = meta.get("base_digest").ok_or_else(|| {
            Error::HeaderMismatch(format!("{}: not a task vector (no base_digest)", path.display()))
        })?;
        Ok(TaskVector::from_parts(checkpoint, Digest::parse(digest)?))
    }
}

/// `tau = theta_t - theta_0`, computed in f32.
pub fn task_vector(theta_t: &Checkpoint, theta_0: &Checkpoint) -> Result<TaskVector> {
    theta_0.check_same_layout(theta_t)?;
    let tensors = theta_t
        .tensors
        .iter()
        .zip(&theta_0.tensors)
        .map(|(t, b)| Tensor {
            name: t.name.clone(),
            dtype: DType::F32,
            shape: t.shape.clone(),
            values: t.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
        })
        .collect();
    Ok(TaskVector {
        checkpoint: Checkpoint { tensors },
        base_digest: theta_0.digest(),
    })
}

/// `theta_0 + scale * tau`, stored as f32.
///
/// A task vector derived from a different base is rejected unless
/// `allow_digest_mismatch` is set, in which case the mismatch is logged.
pub fn apply_task_vector(
    theta_0: &Checkpoint,
    tau: &TaskVector,
    scale: f64,
    allow_digest_mismatch: bool,
) -> Result<Checkpoint> {
    if !scale.is_finite() {
        return Err(Error::invalid(format!("scale must be finite, got {scale}")));
    }
    theta_0.check_same_layout(&tau.checkpoint)?;
    let base_digest = theta_0.digest();
    if base_digest != tau.base_digest {
        if !allow_digest_mismatch {
            return Err(Error::DigestMismatch {
                expected: tau.base_digest.to_string(),
                found: base_digest.to_string(),
            });
        }
        log::warn!(
            "applying task vector built from base {} onto base {}",
            tau.base_digest,
            base_digest
        );
    }
    let tensors = theta_0
        .tensors
        .iter()
        .zip(&tau.checkpoint.tensors)
        .map(|(b, t)| Tensor {
            name: b.name.clone(),
            dtype: DType::F32,
            shape: b.shape.clone(),
            values: b
                .values
                .iter()
                .zip(&t.values)
                .map(|(&x, &d)| (f64::from(x) + scale * f64::from(d)) as f32)
                .collect(),
        })
        .collect();
    Ok(Checkpoint { tensors })
}
