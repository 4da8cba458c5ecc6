//! Descriptor serialization: a versioned little-endian binary format for
//! exact interchange, and a CSV export for debugging.

use crate::error::{Error, Result};
use crate::imaging::ColorSpace;
use crate::texture::{Descriptor, LbpParams, Sampling, SegmentInfo};

use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CXLD";
const VERSION: u16 = 1;

fn space_tag(space: ColorSpace) -> u8 {
    match space {
        ColorSpace::Gray => 0,
        ColorSpace::Rgb => 1,
        ColorSpace::Hsv => 2,
        ColorSpace::YCbCr => 3,
    }
}

fn space_from_tag(tag: u8) -> Result<ColorSpace> {
    match tag {
        0 => Ok(ColorSpace::Gray),
        1 => Ok(ColorSpace::Rgb),
        2 => Ok(ColorSpace::Hsv),
        3 => Ok(ColorSpace::YCbCr),
        other => Err(Error::format("descriptor", format!("unknown color space tag {other}"))),
    }
}

fn sampling_tag(sampling: Sampling) -> u8 {
    match sampling {
        Sampling::Interpolated => 0,
        Sampling::IntegerNeighborhood => 1,
    }
}

fn sampling_from_tag(tag: u8) -> Result<Sampling> {
    match tag {
        0 => Ok(Sampling::Interpolated),
        1 => Ok(Sampling::IntegerNeighborhood),
        other => Err(Error::format("descriptor", format!("unknown sampling tag {other}"))),
    }
}

/// Serializes a descriptor with the parameters that produced it.
///
/// Layout: magic `CXLD`, version u16, P u32, R f64, sampling u8, segment
/// count u32, then per segment (space u8, channel u32, bins u32), then value
/// count u64 followed by the values as f64. All integers and floats are
/// little-endian; round-trips are bit-exact.
pub fn write_descriptor<W: Write>(w: &mut W, desc: &Descriptor, params: &LbpParams) -> Result<()> {
    let io_err = |e: std::io::Error| Error::format("descriptor", e.to_string());
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&params.p().to_le_bytes()).map_err(io_err)?;
    w.write_all(&params.r().to_le_bytes()).map_err(io_err)?;
    w.write_all(&[sampling_tag(params.sampling())]).map_err(io_err)?;
    w.write_all(&(desc.layout().len() as u32).to_le_bytes()).map_err(io_err)?;
    for seg in desc.layout() {
        w.write_all(&[space_tag(seg.space)]).map_err(io_err)?;
        w.write_all(&(seg.channel as u32).to_le_bytes()).map_err(io_err)?;
        w.write_all(&(seg.bins as u32).to_le_bytes()).map_err(io_err)?;
    }
    w.write_all(&(desc.len() as u64).to_le_bytes()).map_err(io_err)?;
    for v in desc.values() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_descriptor<R: Read>(r: &mut R) -> Result<(Descriptor, LbpParams)> {
    let bad = |msg: String| Error::format("descriptor", msg);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf)
            .map_err(|e| Error::format("descriptor", format!("truncated: {e}")))?;
        Ok(buf)
    };
    if take(4)? != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let p = u32::from_le_bytes(take(4)?.try_into().unwrap());
    let radius = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let sampling = sampling_from_tag(take(1)?[0])?;
    let params = LbpParams::new(p, radius, sampling)?;
    let n_segments = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if n_segments > 64 {
        return Err(bad(format!("implausible segment count {n_segments}")));
    }
    let mut layout = Vec::with_capacity(n_segments);
    for _ in 0..n_segments {
        let space = space_from_tag(take(1)?[0])?;
        let channel = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let bins = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        layout.push(SegmentInfo { space, channel, bins });
    }
    let n_values = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let expected: usize = layout.iter().map(|s| s.bins).sum();
    if n_values != expected {
        return Err(bad(format!(
            "value count {n_values} does not match layout total {expected}"
        )));
    }
    let mut values = Vec::with_capacity(n_values);
    for _ in 0..n_values {
        values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let desc = Descriptor::new(values, layout)?;
    Ok((desc, params))
}

pub fn save_descriptor(path: &Path, desc: &Descriptor, params: &LbpParams) -> Result<()> {
    let mut buf = Vec::new();
    write_descriptor(&mut buf, desc, params)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_descriptor(path: &Path) -> Result<(Descriptor, LbpParams)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_descriptor(&mut bytes.as_slice())
}

/// Debug export: `segment,bin,value` rows with full float precision.
pub fn write_descriptor_csv<W: Write>(w: &mut W, desc: &Descriptor) -> Result<()> {
    let io_err = |e: std::io::Error| Error::format("descriptor csv", e.to_string());
    writeln!(w, "segment,bin,value").map_err(io_err)?;
    for (info, values) in desc.segments() {
        for (bin, v) in values.iter().enumerate() {
            writeln!(w, "{},{},{}", info.label(), bin, v).map_err(io_err)?;
        }
    }
    Ok(())
}
