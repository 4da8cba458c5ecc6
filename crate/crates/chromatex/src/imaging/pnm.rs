//! Binary PPM (P6) / PGM (P5) encode and decode, maxval 255.
//!
//! This is the bit-exact interchange format for frames: P6 for RGB, P5 for
//! gray.

use super::{ColorSpace, Image};
use crate::error::{Error, Result};

use std::fs;
use std::io::Write;
use std::path::Path;

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    let mut buf = Vec::with_capacity(img.data().len() + 32);
    let magic = match img.space() {
        ColorSpace::Gray => "P5",
        ColorSpace::Rgb => "P6",
        other => {
            return Err(Error::InvalidColorSpace {
                expected: "gray or rgb".into(),
                actual: other.to_string(),
            })
        }
    };
    write!(buf, "{magic}\n{} {}\n255\n", img.width(), img.height())
        .expect("write to Vec cannot fail");
    buf.extend_from_slice(img.data());
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|msg| Error::Format {
        what: format!("pnm file {}", path.display()),
        msg,
    })
}

fn decode(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or("missing magic")?;
    let space = match magic {
        b"P5" => ColorSpace::Gray,
        b"P6" => ColorSpace::Rgb,
        other => {
            return Err(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            ))
        }
    };
    let width = parse_number(bytes, &mut pos).ok_or("missing width")?;
    let height = parse_number(bytes, &mut pos).ok_or("missing height")?;
    let maxval = parse_number(bytes, &mut pos).ok_or("missing maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval} (expected 255)"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let n = width * height * space.channels();
    let raster = bytes.get(pos..pos + n).ok_or_else(|| {
        format!("raster truncated: expected {n} bytes, have {}", bytes.len() - pos)
    })?;
    Image::new(width, height, space, raster.to_vec()).map_err(|e| e.to_string())
}

/// Advances past whitespace and `#` comments, returning the next token.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| &bytes[start..*pos])
}

fn parse_number(bytes: &[u8], pos: &mut usize) -> Option<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok).ok()?.parse().ok()
}
