//! Pixel buffers, color-space conversion and face-crop normalization.
//!
//! Images are owned 8-bit buffers with an explicit channel layout and a
//! color-space tag. All conversions are per-pixel pure functions; results are
//! rounded to the nearest integer (half away from zero) and clamped to
//! `[0, 255]`.

pub mod pnm;

mod resize;

pub use resize::normalize_face;

use crate::error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Side length of a normalized face crop.
pub const FACE_SIZE: usize = 64;

/// Color space of an [`Image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Gray,
    Rgb,
    Hsv,
    YCbCr,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            _ => 3,
        }
    }

    /// Short name for channel `c`, e.g. `Cb` for YCbCr channel 1.
    pub fn channel_name(self, c: usize) -> &'static str {
        const NAMES: [[&str; 3]; 4] = [
            ["gray", "", ""],
            ["R", "G", "B"],
            ["H", "S", "V"],
            ["Y", "Cb", "Cr"],
        ];
        let row = match self {
            ColorSpace::Gray => 0,
            ColorSpace::Rgb => 1,
            ColorSpace::Hsv => 2,
            ColorSpace::YCbCr => 3,
        };
        NAMES[row][c]
    }
}

impl std::fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ColorSpace::Gray => "gray",
            ColorSpace::Rgb => "rgb",
            ColorSpace::Hsv => "hsv",
            ColorSpace::YCbCr => "ycbcr",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for ColorSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gray" | "grey" => Ok(ColorSpace::Gray),
            "rgb" => Ok(ColorSpace::Rgb),
            "hsv" => Ok(ColorSpace::Hsv),
            "ycbcr" => Ok(ColorSpace::YCbCr),
            other => Err(Error::InvalidParams(format!(
                "unknown color space {other:?} (expected gray|rgb|hsv|ycbcr)"
            ))),
        }
    }
}

/// Owned 8-bit image with row-major interleaved samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    space: ColorSpace,
    data: Vec<u8>,
}

impl Image {
    /// Wraps a sample buffer; `data.len()` must equal
    /// `width * height * space.channels()`.
    pub fn new(width: usize, height: usize, space: ColorSpace, data: Vec<u8>) -> Result<Self> {
        let expected = width * height * space.channels();
        if data.len() != expected {
            return Err(Error::InvalidParams(format!(
                "image buffer length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                space.channels()
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams("image dimensions must be non-zero".into()));
        }
        Ok(Image {
            width,
            height,
            space,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.space.channels()
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Interleaved samples of the pixel at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let c = self.channels();
        let off = (y * self.width + x) * c;
        &self.data[off..off + c]
    }

    /// Copies channel `c` out into a contiguous single-channel grid.
    pub fn plane(&self, c: usize) -> Plane {
        assert!(c < self.channels(), "channel {c} out of range");
        let n = self.channels();
        let data = self.data[c..].iter().step_by(n).copied().collect();
        Plane {
            width: self.width,
            height: self.height,
            data,
        }
    }

    fn expect_space(&self, expected: ColorSpace) -> Result<()> {
        if self.space != expected {
            return Err(Error::InvalidColorSpace {
                expected: expected.to_string(),
                actual: self.space.to_string(),
            });
        }
        Ok(())
    }

    /// Maps every pixel through `f`, producing an image in `space`.
    fn map_pixels(&self, space: ColorSpace, f: impl Fn(&[u8], &mut [u8])) -> Image {
        let out_c = space.channels();
        let in_c = self.channels();
        let mut data = vec![0u8; self.width * self.height * out_c];
        for (src, dst) in self.data.chunks_exact(in_c).zip(data.chunks_exact_mut(out_c)) {
            f(src, dst);
        }
        Image {
            width: self.width,
            height: self.height,
            space,
            data,
        }
    }
}

/// A single-channel 2-D 8-bit grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParams(format!(
                "plane buffer length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Face bounding box in source-image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl FaceBox {
    pub const MIN_SIDE: usize = 8;

    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w < Self::MIN_SIDE || h < Self::MIN_SIDE {
            return Err(Error::InvalidBox(format!(
                "{w}x{h} is below the {0}x{0} minimum",
                Self::MIN_SIDE
            )));
        }
        Ok(FaceBox { x, y, w, h })
    }

    /// Checks the box lies fully inside a `width`x`height` image.
    pub fn validate_in(&self, width: usize, height: usize) -> Result<()> {
        if self.w < Self::MIN_SIDE || self.h < Self::MIN_SIDE {
            return Err(Error::InvalidBox(format!(
                "{}x{} is below the {2}x{2} minimum",
                self.w,
                self.h,
                Self::MIN_SIDE
            )));
        }
        if self.x + self.w > width || self.y + self.h > height {
            return Err(Error::InvalidBox(format!(
                "box ({}, {}, {}, {}) exceeds image {}x{}",
                self.x, self.y, self.w, self.h, width, height
            )));
        }
        Ok(())
    }
}

/// Rounds half away from zero and clamps to the 8-bit range.
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Rounds the nonnegative rational `num / den` half away from zero and
/// clamps to the 8-bit range. The color conversion coefficients are exact
/// decimal fractions, so quantizing through integer ratios avoids float
/// rounding flipping exact-half ties (e.g. a scaled hue of exactly 147.5).
#[inline]
fn round_ratio(num: u64, den: u64) -> u8 {
    ((2 * num + den) / (2 * den)).min(255) as u8
}

/// Luma conversion, `round(0.299 R + 0.587 G + 0.114 B)` per pixel.
pub fn rgb_to_gray(img: &Image) -> Result<Image> {
    img.expect_space(ColorSpace::Rgb)?;
    Ok(img.map_pixels(ColorSpace::Gray, |src, dst| {
        let (r, g, b) = (src[0] as u64, src[1] as u64, src[2] as u64);
        dst[0] = round_ratio(299 * r + 587 * g + 114 * b, 1000);
    }))
}

/// Hexcone HSV conversion. Hue in degrees is rescaled from `[0, 360)` to
/// `[0, 255]` via `round(h * 255 / 360)` so every channel shares the 8-bit
/// LBP code path; saturation and value are scaled to `[0, 255]`. Achromatic
/// pixels get `H = 0`.
pub fn rgb_to_hsv(img: &Image) -> Result<Image> {
    img.expect_space(ColorSpace::Rgb)?;
    Ok(img.map_pixels(ColorSpace::Hsv, |src, dst| {
        let (r, g, b) = (src[0] as i64, src[1] as i64, src[2] as i64);
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let range = max - min;

        let h = if range == 0 {
            0
        } else {
            // Hue in units of 60 degrees is (diff / range + k); scaling by
            // 255/360 gives 42.5 * (diff + k * range) / range, kept as the
            // integer ratio 85 * (diff + k * range) / (2 * range).
            let (diff, k) = if max == r {
                (g - b, if g >= b { 0 } else { 6 })
            } else if max == g {
                (b - r, 2)
            } else {
                (r - g, 4)
            };
            round_ratio((85 * (diff + k * range)) as u64, 2 * range as u64)
        };
        let s = if max == 0 {
            0
        } else {
            round_ratio(255 * range as u64, max as u64)
        };
        dst[0] = h;
        dst[1] = s;
        dst[2] = max as u8;
    }))
}

/// Full-range (JPEG-style) BT.601 YCbCr conversion.
pub fn rgb_to_ycbcr(img: &Image) -> Result<Image> {
    img.expect_space(ColorSpace::Rgb)?;
    Ok(img.map_pixels(ColorSpace::YCbCr, |src, dst| {
        let (r, g, b) = (src[0] as i64, src[1] as i64, src[2] as i64);
        // Coefficients times 1e6; the chroma numerators stay nonnegative
        // because the offsets peak at +-127.5 around 128.
        dst[0] = round_ratio((299_000 * r + 587_000 * g + 114_000 * b) as u64, 1_000_000);
        dst[1] = round_ratio(
            (128_000_000 - 168_736 * r - 331_264 * g + 500_000 * b) as u64,
            1_000_000,
        );
        dst[2] = round_ratio(
            (128_000_000 + 500_000 * r - 418_688 * g - 81_312 * b) as u64,
            1_000_000,
        );
    }))
}

/// Converts an RGB image into `target`; RGB itself passes through unchanged.
pub fn convert(img: &Image, target: ColorSpace) -> Result<Image> {
    if img.space() == target {
        return Ok(img.clone());
    }
    match target {
        ColorSpace::Gray => rgb_to_gray(img),
        ColorSpace::Hsv => rgb_to_hsv(img),
        ColorSpace::YCbCr => rgb_to_ycbcr(img),
        ColorSpace::Rgb => Err(Error::InvalidColorSpace {
            expected: "rgb".into(),
            actual: img.space().to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_pixel(r: u8, g: u8, b: u8) -> Image {
        Image::new(1, 1, ColorSpace::Rgb, vec![r, g, b]).unwrap()
    }

    #[test]
    fn gray_conversion_anchors() {
        assert_eq!(rgb_to_gray(&one_pixel(255, 255, 255)).unwrap().data(), &[255]);
        assert_eq!(rgb_to_gray(&one_pixel(0, 0, 0)).unwrap().data(), &[0]);
        // round(0.299 * 255) = round(76.245)
        assert_eq!(rgb_to_gray(&one_pixel(255, 0, 0)).unwrap().data(), &[76]);
    }

    #[test]
    fn hsv_conversion_anchors() {
        assert_eq!(rgb_to_hsv(&one_pixel(128, 128, 128)).unwrap().data(), &[0, 0, 128]);
        assert_eq!(rgb_to_hsv(&one_pixel(255, 0, 0)).unwrap().data(), &[0, 255, 255]);
        // pure green: H = 120 degrees, round(120 * 255 / 360) = 85
        assert_eq!(rgb_to_hsv(&one_pixel(0, 255, 0)).unwrap().data(), &[85, 255, 255]);
    }

    #[test]
    fn ycbcr_conversion_anchors() {
        assert_eq!(
            rgb_to_ycbcr(&one_pixel(128, 128, 128)).unwrap().data(),
            &[128, 128, 128]
        );
        assert_eq!(
            rgb_to_ycbcr(&one_pixel(255, 255, 255)).unwrap().data(),
            &[255, 128, 128]
        );
        // Cr = 128 + 0.5 * 255 = 255.5 rounds up then clamps to 255
        assert_eq!(rgb_to_ycbcr(&one_pixel(255, 0, 0)).unwrap().data(), &[76, 85, 255]);
    }

    #[test]
    fn ycbcr_achromatic_is_exact_for_all_levels() {
        for v in 0..=255u8 {
            let out = rgb_to_ycbcr(&one_pixel(v, v, v)).unwrap();
            assert_eq!(out.data(), &[v, 128, 128], "level {v}");
        }
    }

    /// Independent scalar HSV reference. Hue is built as an unreduced exact
    /// rational in degree units, wrapped with rem_euclid, and rounded half
    /// away from zero by explicit remainder comparison, so it shares no
    /// arithmetic structure with the production converter.
    fn hsv_reference(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
        let (r, g, b) = (r as i64, g as i64, b as i64);
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let d = max - min;

        // H * 255 / 360 = 255 * 60 * (deg_num / d) / 360 as p / q.
        let h = if d == 0 {
            0i64
        } else {
            let deg_num = if max == r {
                (60 * (g - b)).rem_euclid(360 * d)
            } else if max == g {
                60 * (b - r) + 120 * d
            } else {
                60 * (r - g) + 240 * d
            };
            let p = 255 * deg_num;
            let q = 360 * d;
            let (quotient, rem) = (p / q, p % q);
            quotient + i64::from(2 * rem >= q)
        };
        let s = if max == 0 {
            0i64
        } else {
            let (p, q) = (255 * d, max);
            let (quotient, rem) = (p / q, p % q);
            quotient + i64::from(2 * rem >= q)
        };
        (h.min(255) as u8, s.min(255) as u8, max as u8)
    }

    #[test]
    fn hsv_matches_reference_on_stratified_sample() {
        // Stratified sweep plus boundary values: ~160k triples.
        let levels: Vec<u8> = (0..=255).step_by(5).chain([1, 254, 255]).collect();
        for &r in &levels {
            for &g in &levels {
                for &b in &levels {
                    let out = rgb_to_hsv(&one_pixel(r, g, b)).unwrap();
                    let (h, s, v) = hsv_reference(r, g, b);
                    assert_eq!(out.data(), &[h, s, v], "rgb ({r},{g},{b})");
                }
            }
        }
    }

    #[test]
    fn hsv_float_path_agrees_within_one_step() {
        // Third opinion through plain [0,1] float hexcone math. Exact-half
        // ties can fall either way in floats, hence the 1-step slack on H/S.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for _ in 0..50_000 {
            let (r, g, b) = (rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>());
            let rf = r as f64 / 255.0;
            let gf = g as f64 / 255.0;
            let bf = b as f64 / 255.0;
            let max = rf.max(gf).max(bf);
            let d = max - rf.min(gf).min(bf);
            let h_deg = if d == 0.0 {
                0.0
            } else if max == rf {
                (60.0 * ((gf - bf) / d)).rem_euclid(360.0)
            } else if max == gf {
                60.0 * ((bf - rf) / d) + 120.0
            } else {
                60.0 * ((rf - gf) / d) + 240.0
            };
            let s = if max == 0.0 { 0.0 } else { d / max };
            let out = rgb_to_hsv(&one_pixel(r, g, b)).unwrap();
            let [h8, s8, v8] = out.data() else { panic!() };
            assert!((*h8 as f64 - h_deg / 360.0 * 255.0).abs() <= 1.0, "rgb ({r},{g},{b})");
            assert!((*s8 as f64 - s * 255.0).abs() <= 1.0, "rgb ({r},{g},{b})");
            assert_eq!(*v8, quantize(max * 255.0), "rgb ({r},{g},{b})");
        }
    }

    #[test]
    fn conversions_stay_in_range_on_stratified_sample() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let (r, g, b) = (rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>());
            let px = one_pixel(r, g, b);
            // All outputs are u8 by construction; this guards the rounding
            // paths against panics and checks determinism of re-conversion.
            let y1 = rgb_to_ycbcr(&px).unwrap();
            let y2 = rgb_to_ycbcr(&px).unwrap();
            assert_eq!(y1.data(), y2.data());
            rgb_to_hsv(&px).unwrap();
            rgb_to_gray(&px).unwrap();
        }
    }

    #[test]
    fn conversions_are_per_pixel_pure() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let data: Vec<u8> = (0..4 * 3 * 3).map(|_| rng.gen()).collect();
        let img = Image::new(4, 3, ColorSpace::Rgb, data).unwrap();
        let whole = rgb_to_ycbcr(&img).unwrap();
        for y in 0..3 {
            for x in 0..4 {
                let p = img.pixel(x, y);
                let single = rgb_to_ycbcr(&one_pixel(p[0], p[1], p[2])).unwrap();
                assert_eq!(whole.pixel(x, y), single.data());
            }
        }
    }

    #[test]
    fn wrong_source_space_is_rejected() {
        let gray = Image::new(1, 1, ColorSpace::Gray, vec![7]).unwrap();
        assert!(matches!(
            rgb_to_hsv(&gray),
            Err(Error::InvalidColorSpace { .. })
        ));
        assert!(matches!(
            rgb_to_gray(&gray),
            Err(Error::InvalidColorSpace { .. })
        ));
        assert!(matches!(
            rgb_to_ycbcr(&gray),
            Err(Error::InvalidColorSpace { .. })
        ));
    }

    #[test]
    fn plane_extraction_deinterleaves() {
        let img = Image::new(2, 1, ColorSpace::Rgb, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(img.plane(0).data(), &[1, 4]);
        assert_eq!(img.plane(1).data(), &[2, 5]);
        assert_eq!(img.plane(2).data(), &[3, 6]);
    }

    #[test]
    fn image_invariants_enforced() {
        assert!(Image::new(2, 2, ColorSpace::Rgb, vec![0; 11]).is_err());
        assert!(Image::new(2, 2, ColorSpace::Gray, vec![0; 4]).is_ok());
        assert!(FaceBox::new(10, 10, 7, 20).is_err());
        let b = FaceBox::new(10, 10, 20, 20).unwrap();
        assert!(b.validate_in(30, 30).is_ok());
        assert!(b.validate_in(29, 30).is_err());
    }
}
