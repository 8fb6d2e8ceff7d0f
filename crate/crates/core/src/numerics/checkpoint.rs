//! Flat parameter checkpoints.
//!
//! Layout: an ASCII header
//!
//! ```text
//! GANEVENT-CKPT 1
//! <count>
//! <name> <rank> <dim_0> ... <dim_{rank-1}>     (one line per tensor)
//! END
//! ```
//!
//! followed by every tensor's values as little-endian `f64`, in manifest
//! order. Names may not contain whitespace.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::params::ParamSet;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &str = "GANEVENT-CKPT";
pub const FORMAT_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn encode(params: &ParamSet) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "{}", params.len())?;
    for (name, t) in params.iter() {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(bad(format!("invalid parameter name {name:?}")));
        }
        write!(out, "{name} {}", t.shape().len())?;
        for d in t.shape() {
            write!(out, " {d}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "END")?;
    for t in params.tensors() {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<ParamSet> {
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not UTF-8"))
    };
    let magic = next_line()?;
    let version = magic
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| bad("bad magic"))?;
    if version != FORMAT_VERSION.to_string() {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let count: usize = next_line()?.trim().parse().map_err(|_| bad("bad tensor count"))?;
    let mut manifest = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next_line()?;
        let mut it = line.split(' ');
        let name = it.next().ok_or_else(|| bad("empty manifest line"))?.to_string();
        let rank: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("bad rank for {name}")))?;
        let shape: Vec<usize> = it
            .map(|s| s.parse().map_err(|_| bad("bad dim")))
            .collect::<Result<_>>()?;
        if shape.len() != rank {
            return Err(bad(format!("rank mismatch for {name}")));
        }
        manifest.push((name, shape));
    }
    if next_line()? != "END" {
        return Err(bad("missing END marker"));
    }
    let total: usize = manifest.iter().map(|(_, s)| s.iter().product::<usize>()).sum();
    let body = &bytes[pos..];
    if body.len() != total * 8 {
        return Err(bad(format!(
            "payload holds {} bytes, manifest needs {}",
            body.len(),
            total * 8
        )));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut params = ParamSet::new();
    for (name, shape) in manifest {
        let n = shape.iter().product();
        let data: Vec<f64> = values.by_ref().take(n).collect();
        params.add(name, Tensor::new(shape, data)?);
    }
    Ok(params)
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn save(params: &ParamSet, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, &encode(params)?)
}

pub fn load(path: &Path) -> Result<ParamSet> {
    decode(&fs::read(path)?)
}
