//! Face-crop normalization: crop to a box, then bilinear-resample to 64x64.

use super::{FaceBox, Image, FACE_SIZE};
use crate::error::Result;

/// Crops `img` to `box_` and resamples the crop to exactly 64x64.
///
/// Bilinear interpolation with pixel-center alignment: destination pixel `d`
/// samples source coordinate `(d + 0.5) * scale - 0.5`, clamped at the crop
/// edges. A 64x64 crop passes through bit-identically.
pub fn normalize_face(img: &Image, box_: &FaceBox) -> Result<Image> {
    box_.validate_in(img.width(), img.height())?;

    let channels = img.channels();
    let (sw, sh) = (box_.w, box_.h);
    if (sw, sh) == (FACE_SIZE, FACE_SIZE) {
        // Straight crop, no resampling.
        let mut data = Vec::with_capacity(FACE_SIZE * FACE_SIZE * channels);
        for y in 0..FACE_SIZE {
            let row = ((box_.y + y) * img.width() + box_.x) * channels;
            data.extend_from_slice(&img.data()[row..row + FACE_SIZE * channels]);
        }
        return Image::new(FACE_SIZE, FACE_SIZE, img.space(), data);
    }

    let scale_x = sw as f64 / FACE_SIZE as f64;
    let scale_y = sh as f64 / FACE_SIZE as f64;
    let mut data = vec![0u8; FACE_SIZE * FACE_SIZE * channels];

    for dy in 0..FACE_SIZE {
        let sy = ((dy as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let fy = sy - y0 as f64;
        for dx in 0..FACE_SIZE {
            let sx = ((dx as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let fx = sx - x0 as f64;
            for c in 0..channels {
                let at = |px: usize, py: usize| {
                    img.data()[((box_.y + py) * img.width() + box_.x + px) * channels + c] as f64
                };
                let top = lerp(at(x0, y0), at(x1, y0), fx);
                let bot = lerp(at(x0, y1), at(x1, y1), fx);
                data[(dy * FACE_SIZE + dx) * channels + c] = super::quantize(lerp(top, bot, fy));
            }
        }
    }
    Image::new(FACE_SIZE, FACE_SIZE, img.space(), data)
}

// Factored form so interpolating equal endpoints is exact.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{ColorSpace, Image};
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_resample_is_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let data: Vec<u8> = (0..64 * 64 * 3).map(|_| rng.gen()).collect();
        let img = Image::new(64, 64, ColorSpace::Rgb, data.clone()).unwrap();
        let out = normalize_face(&img, &FaceBox::new(0, 0, 64, 64).unwrap()).unwrap();
        assert_eq!(out.data(), &data[..]);
    }

    #[test]
    fn constant_color_stays_constant() {
        let img = Image::new(128, 128, ColorSpace::Rgb, vec![91; 128 * 128 * 3]).unwrap();
        let out = normalize_face(&img, &FaceBox::new(13, 5, 100, 77).unwrap()).unwrap();
        assert_eq!(out.width(), 64);
        assert_eq!(out.height(), 64);
        assert!(out.data().iter().all(|&v| v == 91));
    }

    #[test]
    fn upsampled_checkerboard_preserves_corners() {
        let mut data = vec![0u8; 8 * 8];
        for y in 0..8 {
            for x in 0..8 {
                data[y * 8 + x] = if (x + y) % 2 == 0 { 200 } else { 40 };
            }
        }
        let img = Image::new(8, 8, ColorSpace::Gray, data).unwrap();
        let out = normalize_face(&img, &FaceBox::new(0, 0, 8, 8).unwrap()).unwrap();
        assert_eq!(out.pixel(0, 0)[0], img.pixel(0, 0)[0]);
        assert_eq!(out.pixel(63, 0)[0], img.pixel(7, 0)[0]);
        assert_eq!(out.pixel(0, 63)[0], img.pixel(0, 7)[0]);
        assert_eq!(out.pixel(63, 63)[0], img.pixel(7, 7)[0]);
    }

    #[test]
    fn output_is_always_64x64() {
        let img = Image::new(33, 97, ColorSpace::Rgb, vec![7; 33 * 97 * 3]).unwrap();
        for (x, y, w, h) in [(0, 0, 33, 97), (5, 10, 9, 80), (20, 89, 13, 8)] {
            let out = normalize_face(&img, &FaceBox::new(x, y, w, h).unwrap()).unwrap();
            assert_eq!((out.width(), out.height(), out.channels()), (64, 64, 3));
        }
    }

    #[test]
    fn out_of_bounds_box_is_rejected() {
        let img = Image::new(32, 32, ColorSpace::Rgb, vec![0; 32 * 32 * 3]).unwrap();
        let b = FaceBox::new(20, 20, 16, 16).unwrap();
        assert!(normalize_face(&img, &b).is_err());
    }
}
