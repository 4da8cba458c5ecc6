//! Model persistence: a versioned little-endian binary file that fully
//! reconstructs the model, plus a JSON metadata sidecar (`<file>.json`) for
//! humans and scripts.

use crate::classify::{Kernel, Model, SupportVector};
use crate::error::{Error, Result};
use crate::texture::DescriptorStamp;

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"CXSV";
const VERSION: u16 = 1;

/// Sidecar contents; everything here is also in the binary file.
#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    kernel: Kernel,
    c: f64,
    bias: f64,
    dim: usize,
    n_support: usize,
    operating_threshold: Option<f64>,
    stamp: Option<DescriptorStamp>,
}

/// Binary layout: magic `CXSV`, version u16, kernel tag u8 (0 linear,
/// 1 rbf), gamma f64 (kernel-dependent, 0 for linear), C f64, bias f64,
/// threshold flag u8 + f64, stamp as length-prefixed JSON (u32 + bytes,
/// length 0 when absent), dim u64, support count u64, then per support
/// vector y f64, alpha f64, and dim values f64. Little-endian throughout.
pub fn write_model<W: Write>(w: &mut W, model: &Model) -> Result<()> {
    let io_err = |e: std::io::Error| Error::format("model", e.to_string());
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    let (tag, gamma) = match model.kernel() {
        Kernel::Linear => (0u8, 0.0),
        Kernel::Rbf { gamma } => (1u8, gamma),
    };
    w.write_all(&[tag]).map_err(io_err)?;
    w.write_all(&gamma.to_le_bytes()).map_err(io_err)?;
    w.write_all(&model.c().to_le_bytes()).map_err(io_err)?;
    w.write_all(&model.bias().to_le_bytes()).map_err(io_err)?;
    match model.operating_threshold() {
        Some(t) => {
            w.write_all(&[1]).map_err(io_err)?;
            w.write_all(&t.to_le_bytes()).map_err(io_err)?;
        }
        None => {
            w.write_all(&[0]).map_err(io_err)?;
            w.write_all(&0f64.to_le_bytes()).map_err(io_err)?;
        }
    }
    let stamp_json = match model.stamp() {
        Some(stamp) => serde_json::to_vec(stamp).expect("stamp serializes"),
        None => Vec::new(),
    };
    w.write_all(&(stamp_json.len() as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&stamp_json).map_err(io_err)?;
    w.write_all(&(model.dim() as u64).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(model.support().len() as u64).to_le_bytes()).map_err(io_err)?;
    for sv in model.support() {
        w.write_all(&sv.y.to_le_bytes()).map_err(io_err)?;
        w.write_all(&sv.alpha.to_le_bytes()).map_err(io_err)?;
        for v in &sv.x {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_model<R: Read>(r: &mut R) -> Result<Model> {
    let bad = |msg: String| Error::format("model", msg);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf)
            .map_err(|e| Error::format("model", format!("truncated: {e}")))?;
        Ok(buf)
    };
    if take(4)? != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let tag = take(1)?[0];
    let gamma = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let kernel = match tag {
        0 => Kernel::Linear,
        1 => Kernel::Rbf { gamma },
        other => return Err(bad(format!("unknown kernel tag {other}"))),
    };
    kernel.validate()?;
    let c = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let bias = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let has_threshold = take(1)?[0] != 0;
    let threshold = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let stamp_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if stamp_len > 1 << 20 {
        return Err(bad(format!("implausible stamp length {stamp_len}")));
    }
    let stamp: Option<DescriptorStamp> = if stamp_len == 0 {
        None
    } else {
        Some(
            serde_json::from_slice(&take(stamp_len)?)
                .map_err(|e| bad(format!("bad stamp: {e}")))?,
        )
    };
    let dim = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let n_support = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    if dim > 1 << 20 || n_support > 1 << 24 {
        return Err(bad(format!("implausible sizes dim={dim} n_support={n_support}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(bad(format!("invalid C {c}")));
    }
    if let Some(s) = &stamp {
        if s.dim() != dim {
            return Err(Error::DimMismatch {
                expected: s.dim(),
                actual: dim,
            });
        }
    }
    let mut support = Vec::with_capacity(n_support);
    for _ in 0..n_support {
        let y = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let alpha = f64::from_le_bytes(take(8)?.try_into().unwrap());
        if y != 1.0 && y != -1.0 {
            return Err(bad(format!("support label must be +-1, got {y}")));
        }
        if !(alpha > 0.0) || alpha > c {
            return Err(bad(format!("support alpha {alpha} outside (0, {c}]")));
        }
        let bytes = take(8 * dim)?;
        let x: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        support.push(SupportVector { x, y, alpha });
    }
    let mut model = Model {
        kernel,
        c,
        support,
        bias,
        dim,
        stamp: None,
        operating_threshold: None,
    };
    if let Some(s) = stamp {
        model = model.with_stamp(s);
    }
    if has_threshold {
        model = model.with_threshold(threshold);
    }
    Ok(model)
}

/// Sidecar path of a model file: the model path with `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the binary model and its JSON sidecar.
pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    let mut buf = Vec::new();
    write_model(&mut buf, model)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    let sidecar = Sidecar {
        kernel: model.kernel(),
        c: model.c(),
        bias: model.bias(),
        dim: model.dim(),
        n_support: model.support().len(),
        operating_threshold: model.operating_threshold(),
        stamp: model.stamp().cloned(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    let sidecar_file = sidecar_path(path);
    std::fs::write(&sidecar_file, json + "\n").map_err(|e| Error::io(&sidecar_file, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut bytes.as_slice())
}
