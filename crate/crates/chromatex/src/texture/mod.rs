//! Uniform LBP extraction per channel, histogram construction, and
//! color-LBP descriptor assembly.
//!
//! For each pixel a binary code is formed by thresholding a circularly
//! symmetric neighborhood against the center value: neighbor `n` sits at
//! angle `2*pi*n/P` on a circle of radius `R`, starting east (`n = 0` at
//! `(x+R, y)`) and proceeding counter-clockwise (`n = 2` is straight up,
//! at `(x, y-R)`), contributing `2^n` when its value is `>=` the center.
//! Codes whose circular bit string has at most two 0/1 transitions are
//! "uniform" and get their own histogram bin (in ascending code order);
//! everything else lands in one catch-all bin. For `P = 8` that gives
//! 58 uniform bins plus the catch-all at index 58, 59 bins total.
//!
//! A color descriptor is the concatenation of the per-channel histograms of
//! an image in a chosen color space; descriptors from different spaces can
//! be fused by further concatenation.

pub mod io;

use crate::error::{Error, Result};
use crate::imaging::{self, ColorSpace, Image, Plane};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

/// How neighbor values on the sampling circle are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Bilinear interpolation at the exact circle coordinates.
    Interpolated,
    /// Round each circle coordinate to the nearest pixel (the classic 3x3
    /// approximation for `P = 8`, `R = 1`).
    IntegerNeighborhood,
}

impl std::fmt::Display for Sampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sampling::Interpolated => f.write_str("interp"),
            Sampling::IntegerNeighborhood => f.write_str("int"),
        }
    }
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "interp" | "interpolated" => Ok(Sampling::Interpolated),
            "int" | "integer" => Ok(Sampling::IntegerNeighborhood),
            other => Err(Error::InvalidParams(format!(
                "unknown sampling mode {other:?} (expected interp|int)"
            ))),
        }
    }
}

/// LBP operator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbpParams {
    p: u32,
    r: f64,
    sampling: Sampling,
}

impl Default for LbpParams {
    fn default() -> Self {
        LbpParams {
            p: 8,
            r: 1.0,
            sampling: Sampling::Interpolated,
        }
    }
}

impl LbpParams {
    /// `4 <= p <= 16` (the code table has `2^p` entries) and `r > 0`.
    pub fn new(p: u32, r: f64, sampling: Sampling) -> Result<Self> {
        if !(4..=16).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "neighbor count P must be in [4, 16], got {p}"
            )));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!("radius R must be positive, got {r}")));
        }
        Ok(LbpParams { p, r, sampling })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    /// Histogram length: one bin per uniform code plus the catch-all,
    /// `P(P-1) + 3` in total (59 for `P = 8`).
    pub fn bins(&self) -> usize {
        (self.p * (self.p - 1) + 3) as usize
    }

    /// Interior margin excluded from histograms.
    pub fn margin(&self) -> usize {
        self.r.ceil() as usize
    }
}

/// Provenance of one histogram segment inside a [`Descriptor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub space: ColorSpace,
    pub channel: usize,
    pub bins: usize,
}

impl SegmentInfo {
    pub fn label(&self) -> String {
        format!("{}:{}", self.space, self.space.channel_name(self.channel))
    }
}

/// Flat real-valued histogram vector plus a record of which space/channel
/// each segment came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: Vec<f64>,
    layout: Vec<SegmentInfo>,
}

impl Descriptor {
    pub fn new(values: Vec<f64>, layout: Vec<SegmentInfo>) -> Result<Self> {
        let expected: usize = layout.iter().map(|s| s.bins).sum();
        if values.len() != expected {
            return Err(Error::DimMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Descriptor { values, layout })
    }

    pub fn empty() -> Self {
        Descriptor {
            values: Vec::new(),
            layout: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout(&self) -> &[SegmentInfo] {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterates `(segment, its slice of values)` in layout order.
    pub fn segments(&self) -> impl Iterator<Item = (&SegmentInfo, &[f64])> {
        let mut off = 0;
        self.layout.iter().map(move |seg| {
            let slice = &self.values[off..off + seg.bins];
            off += seg.bins;
            (seg, slice)
        })
    }
}

/// `(params, layout)` stamp recorded with every persisted descriptor set and
/// model so descriptors from different configurations cannot be mixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorStamp {
    pub params: LbpParams,
    pub layout: Vec<SegmentInfo>,
}

impl DescriptorStamp {
    pub fn dim(&self) -> usize {
        self.layout.iter().map(|s| s.bins).sum()
    }

    /// Human-readable descriptor name, e.g. `ycbcr+hsv`.
    pub fn descriptor_name(&self) -> String {
        let mut spaces: Vec<ColorSpace> = Vec::new();
        for seg in &self.layout {
            if spaces.last() != Some(&seg.space) {
                spaces.push(seg.space);
            }
        }
        spaces
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("+")
    }
}

// ---------------------------------------------------------------------------
// Uniform-pattern bin table

static BIN_TABLES: OnceLock<RwLock<HashMap<u32, Arc<Vec<u16>>>>> = OnceLock::new();

/// Number of circular 0/1 transitions in the `p`-bit string of `code`.
fn transitions(code: u32, p: u32) -> u32 {
    let bit = |n: u32| (code >> n) & 1;
    let mut u = (bit(p - 1) ^ bit(0)).count_ones();
    for n in 1..p {
        u += (bit(n) ^ bit(n - 1)).count_ones();
    }
    u
}

/// Lookup table mapping every `p`-bit code to its histogram bin. Built once
/// per `p` and shared read-only.
fn bin_table(p: u32) -> Arc<Vec<u16>> {
    let tables = BIN_TABLES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = tables.read().unwrap().get(&p) {
        return Arc::clone(t);
    }
    let catch_all = p * (p - 1) + 2;
    let mut table = vec![catch_all as u16; 1usize << p];
    let mut next = 0u16;
    for code in 0..(1u32 << p) {
        if transitions(code, p) <= 2 {
            table[code as usize] = next;
            next += 1;
        }
    }
    assert_eq!(
        next as u32, catch_all,
        "uniform code census for P={p} does not match P(P-1)+2"
    );
    let table = Arc::new(table);
    tables.write().unwrap().insert(p, Arc::clone(&table));
    table
}

/// Histogram bin of an LBP code: uniform codes (at most two circular
/// transitions) map to `0..P(P-1)+2` in ascending code order, everything
/// else to the catch-all bin `P(P-1)+2`.
pub fn uniform_bin(code: u32, p: u32) -> usize {
    assert!(code < (1u32 << p), "code {code} out of range for P={p}");
    bin_table(p)[code as usize] as usize
}

// ---------------------------------------------------------------------------
// Neighborhood sampling

/// Precomputed offset of one neighbor relative to the center pixel.
#[derive(Debug, Clone, Copy)]
enum NeighborOffset {
    Exact { dx: isize, dy: isize },
    Interp { dx0: isize, dy0: isize, fx: f64, fy: f64 },
}

/// Circle offsets for all `P` neighbors. Coordinates within 1e-9 of an
/// integer are snapped so the axis-aligned neighbors read exact pixels;
/// this snap is part of the sampling contract (golden vectors depend on it).
fn neighbor_offsets(params: &LbpParams) -> Vec<NeighborOffset> {
    let snap = |v: f64| {
        let r = v.round();
        if (v - r).abs() < 1e-9 {
            r
        } else {
            v
        }
    };
    (0..params.p)
        .map(|n| {
            let theta = 2.0 * PI * n as f64 / params.p as f64;
            // y grows downward, so counter-clockwise means subtracting sin.
            let dx = snap(params.r * theta.cos());
            let dy = snap(-params.r * theta.sin());
            match params.sampling {
                Sampling::IntegerNeighborhood => NeighborOffset::Exact {
                    dx: dx.round() as isize,
                    dy: dy.round() as isize,
                },
                Sampling::Interpolated => {
                    if dx.fract() == 0.0 && dy.fract() == 0.0 {
                        NeighborOffset::Exact {
                            dx: dx as isize,
                            dy: dy as isize,
                        }
                    } else {
                        NeighborOffset::Interp {
                            dx0: dx.floor() as isize,
                            dy0: dy.floor() as isize,
                            fx: dx - dx.floor(),
                            fy: dy - dy.floor(),
                        }
                    }
                }
            }
        })
        .collect()
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

#[inline]
fn sample_at(plane: &Plane, x: usize, y: usize, off: &NeighborOffset) -> f64 {
    match *off {
        NeighborOffset::Exact { dx, dy } => {
            plane.get((x as isize + dx) as usize, (y as isize + dy) as usize) as f64
        }
        NeighborOffset::Interp { dx0, dy0, fx, fy } => {
            let x0 = (x as isize + dx0) as usize;
            let y0 = (y as isize + dy0) as usize;
            let v00 = plane.get(x0, y0) as f64;
            let v10 = plane.get(x0 + 1, y0) as f64;
            let v01 = plane.get(x0, y0 + 1) as f64;
            let v11 = plane.get(x0 + 1, y0 + 1) as f64;
            lerp(lerp(v00, v10, fx), lerp(v01, v11, fx), fy)
        }
    }
}

/// Values of the `P` circle neighbors of `(x, y)`, in bit order.
///
/// `(x, y)` must be at least `ceil(R)` pixels from every border.
pub fn sample_neighbors(plane: &Plane, x: usize, y: usize, params: &LbpParams) -> Result<Vec<f64>> {
    let margin = params.margin();
    if x < margin || y < margin || x + margin >= plane.width() || y + margin >= plane.height() {
        return Err(Error::BorderViolation {
            x,
            y,
            margin,
            width: plane.width(),
            height: plane.height(),
        });
    }
    let offsets = neighbor_offsets(params);
    Ok(offsets.iter().map(|off| sample_at(plane, x, y, off)).collect())
}

/// LBP code and uniformity of a center value against its neighbors.
///
/// Neighbor `n` contributes `2^n` when `neighbors[n] >= center` (ties count
/// as 1). The uniformity is the circular 0/1 transition count of the
/// resulting bit string.
pub fn lbp_code(center: f64, neighbors: &[f64]) -> (u32, u32) {
    let p = neighbors.len() as u32;
    let mut code = 0u32;
    for (n, &v) in neighbors.iter().enumerate() {
        if v - center >= 0.0 {
            code |= 1 << n;
        }
    }
    (code, transitions(code, p))
}

/// Raw per-bin occurrence counts over all interior pixels.
pub fn lbp_histogram_counts(plane: &Plane, params: &LbpParams) -> Result<Vec<u64>> {
    let margin = params.margin();
    let min = 2 * margin + 1;
    if plane.width() < min || plane.height() < min {
        return Err(Error::ImageTooSmall {
            width: plane.width(),
            height: plane.height(),
            radius: params.r,
            min,
        });
    }
    let offsets = neighbor_offsets(params);
    let table = bin_table(params.p);
    let mut counts = vec![0u64; params.bins()];
    for y in margin..plane.height() - margin {
        for x in margin..plane.width() - margin {
            let center = plane.get(x, y) as f64;
            let mut code = 0u32;
            for (n, off) in offsets.iter().enumerate() {
                if sample_at(plane, x, y, off) - center >= 0.0 {
                    code |= 1 << n;
                }
            }
            counts[table[code as usize] as usize] += 1;
        }
    }
    Ok(counts)
}

/// L1-normalized uniform-LBP histogram of one channel.
pub fn lbp_histogram(plane: &Plane, params: &LbpParams) -> Result<Vec<f64>> {
    let counts = lbp_histogram_counts(plane, params)?;
    let total: u64 = counts.iter().sum();
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Color-LBP descriptor of `img` in `target` space: the image is converted,
/// a histogram is extracted per channel, and the histograms are concatenated
/// in channel order (`59 * M` values for `M` channels).
///
/// `img` must be RGB (converted internally) or already in `target`.
pub fn color_lbp_descriptor(
    img: &Image,
    target: ColorSpace,
    params: &LbpParams,
) -> Result<Descriptor> {
    let converted = imaging::convert(img, target)?;
    let mut values = Vec::with_capacity(params.bins() * converted.channels());
    let mut layout = Vec::with_capacity(converted.channels());
    for c in 0..converted.channels() {
        values.extend(lbp_histogram(&converted.plane(c), params)?);
        layout.push(SegmentInfo {
            space: target,
            channel: c,
            bins: params.bins(),
        });
    }
    Ok(Descriptor { values, layout })
}

/// Feature-level fusion: concatenates values and layouts.
pub fn fuse_descriptors(a: &Descriptor, b: &Descriptor) -> Descriptor {
    let mut values = Vec::with_capacity(a.len() + b.len());
    values.extend_from_slice(&a.values);
    values.extend_from_slice(&b.values);
    let mut layout = Vec::with_capacity(a.layout.len() + b.layout.len());
    layout.extend_from_slice(&a.layout);
    layout.extend_from_slice(&b.layout);
    Descriptor { values, layout }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Image;
    use rand::{Rng, SeedableRng};

    fn plane_from_fn(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> u8) -> Plane {
        let mut data = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                data[y * w + x] = f(x, y);
            }
        }
        Plane::new(w, h, data).unwrap()
    }

    #[test]
    fn constant_grid_neighbors_are_constant() {
        let plane = plane_from_fn(8, 8, |_, _| 100);
        for params in [
            LbpParams::default(),
            LbpParams::new(8, 1.0, Sampling::IntegerNeighborhood).unwrap(),
        ] {
            let n = sample_neighbors(&plane, 4, 4, &params).unwrap();
            assert_eq!(n, vec![100.0; 8]);
        }
    }

    #[test]
    fn axis_aligned_neighbors_read_exact_pixels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let plane = plane_from_fn(7, 7, |_, _| rng.gen());
        let params = LbpParams::default();
        let (x, y) = (3, 3);
        let n = sample_neighbors(&plane, x, y, &params).unwrap();
        assert_eq!(n[0], plane.get(x + 1, y) as f64, "east");
        assert_eq!(n[2], plane.get(x, y - 1) as f64, "north");
        assert_eq!(n[4], plane.get(x - 1, y) as f64, "west");
        assert_eq!(n[6], plane.get(x, y + 1) as f64, "south");
    }

    #[test]
    fn bilinear_on_linear_field_is_exact() {
        // Bilinear interpolation reproduces linear fields, so a diagonal
        // neighbor whose offset is orthogonal to the gradient matches the
        // center value. value = x + y cancels for NE/SW, x - y for NW/SE.
        let params = LbpParams::default();
        let plane = plane_from_fn(9, 9, |x, y| (x + y) as u8);
        let n = sample_neighbors(&plane, 4, 4, &params).unwrap();
        let center = plane.get(4, 4) as f64;
        assert!((n[1] - center).abs() < 1e-9, "NE = {}", n[1]);
        assert!((n[5] - center).abs() < 1e-9, "SW = {}", n[5]);
        let plane = plane_from_fn(9, 9, |x, y| (8 + x - y) as u8);
        let n = sample_neighbors(&plane, 4, 4, &params).unwrap();
        let center = plane.get(4, 4) as f64;
        assert!((n[3] - center).abs() < 1e-9, "NW = {}", n[3]);
        assert!((n[7] - center).abs() < 1e-9, "SE = {}", n[7]);
    }

    #[test]
    fn border_violation_is_reported() {
        let plane = plane_from_fn(5, 5, |_, _| 0);
        let params = LbpParams::default();
        assert!(sample_neighbors(&plane, 0, 2, &params).is_err());
        assert!(sample_neighbors(&plane, 4, 2, &params).is_err());
        assert!(sample_neighbors(&plane, 2, 2, &params).is_ok());
        let big_r = LbpParams::new(8, 2.0, Sampling::Interpolated).unwrap();
        assert!(sample_neighbors(&plane, 1, 2, &big_r).is_err());
        assert!(sample_neighbors(&plane, 2, 2, &big_r).is_ok());
    }

    #[test]
    fn code_anchors() {
        // Ties count as >= center.
        assert_eq!(lbp_code(50.0, &[50.0; 8]), (255, 0));
        assert_eq!(lbp_code(50.0, &[49.0; 8]), (0, 0));
        let alternating: Vec<f64> = (0..8).map(|n| if n % 2 == 0 { 60.0 } else { 40.0 }).collect();
        assert_eq!(lbp_code(50.0, &alternating), (0b0101_0101, 8));
    }

    #[test]
    fn uniform_bin_anchors() {
        assert_eq!(uniform_bin(0, 8), 0);
        assert_eq!(uniform_bin(255, 8), 57);
        assert_eq!(uniform_bin(85, 8), 58);
    }

    #[test]
    fn uniform_code_census_for_p8() {
        let uniform: Vec<u32> = (0..256).filter(|&c| transitions(c, 8) <= 2).collect();
        assert_eq!(uniform.len(), 58);
        // Largest uniform code is all-ones, mapped to the last uniform slot.
        assert_eq!(*uniform.last().unwrap(), 255);
        // Catch-all is P(P-1)+2.
        assert_eq!(uniform_bin(85, 8), 8 * 7 + 2);
        assert_eq!(LbpParams::default().bins(), 59);
    }

    #[test]
    fn constant_grid_histogram_hits_top_uniform_bin() {
        let plane = plane_from_fn(64, 64, |_, _| 42);
        let h = lbp_histogram(&plane, &LbpParams::default()).unwrap();
        assert_eq!(h.len(), 59);
        assert_eq!(h[57], 1.0);
        assert!(h.iter().take(57).all(|&v| v == 0.0) && h[58] == 0.0);
    }

    #[test]
    fn histogram_is_l1_normalized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let plane = plane_from_fn(64, 64, |_, _| rng.gen());
        let h = lbp_histogram(&plane, &LbpParams::default()).unwrap();
        let sum: f64 = h.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(h.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn histogram_counts_cover_interior() {
        let plane = plane_from_fn(16, 16, |x, y| (x * 16 + y) as u8);
        let counts = lbp_histogram_counts(&plane, &LbpParams::default()).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 14 * 14);
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let plane = plane_from_fn(2, 8, |_, _| 0);
        assert!(matches!(
            lbp_histogram(&plane, &LbpParams::default()),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn monotone_shift_leaves_codes_unchanged() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let base = plane_from_fn(16, 16, |_, _| rng.gen::<u8>() % 200);
            let shifted = Plane::new(
                16,
                16,
                base.data().iter().map(|&v| v + 55).collect(),
            )
            .unwrap();
            for params in [
                LbpParams::default(),
                LbpParams::new(8, 1.0, Sampling::IntegerNeighborhood).unwrap(),
            ] {
                assert_eq!(
                    lbp_histogram_counts(&base, &params).unwrap(),
                    lbp_histogram_counts(&shifted, &params).unwrap()
                );
            }
        }
    }

    #[test]
    fn descriptor_dimensions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let data: Vec<u8> = (0..64 * 64 * 3).map(|_| rng.gen()).collect();
        let img = Image::new(64, 64, ColorSpace::Rgb, data).unwrap();
        let params = LbpParams::default();
        assert_eq!(color_lbp_descriptor(&img, ColorSpace::Gray, &params).unwrap().len(), 59);
        assert_eq!(color_lbp_descriptor(&img, ColorSpace::Rgb, &params).unwrap().len(), 177);
        let ycbcr = color_lbp_descriptor(&img, ColorSpace::YCbCr, &params).unwrap();
        let hsv = color_lbp_descriptor(&img, ColorSpace::Hsv, &params).unwrap();
        assert_eq!(ycbcr.len(), 177);
        let fused = fuse_descriptors(&ycbcr, &hsv);
        assert_eq!(fused.len(), 354);
        assert_eq!(fused.layout().len(), 6);
        assert_eq!(
            fused.layout(),
            [ycbcr.layout(), hsv.layout()].concat().as_slice()
        );
    }

    #[test]
    fn gray_descriptor_equals_gray_histogram() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let data: Vec<u8> = (0..32 * 32 * 3).map(|_| rng.gen()).collect();
        let img = Image::new(32, 32, ColorSpace::Rgb, data).unwrap();
        let params = LbpParams::default();
        let desc = color_lbp_descriptor(&img, ColorSpace::Gray, &params).unwrap();
        let gray = crate::imaging::rgb_to_gray(&img).unwrap();
        let hist = lbp_histogram(&gray.plane(0), &params).unwrap();
        assert_eq!(desc.values(), hist.as_slice());
    }

    #[test]
    fn constant_image_descriptor_concentrates_mass() {
        let img = Image::new(64, 64, ColorSpace::Rgb, vec![180; 64 * 64 * 3]).unwrap();
        let desc = color_lbp_descriptor(&img, ColorSpace::Hsv, &LbpParams::default()).unwrap();
        for (_, seg) in desc.segments() {
            assert_eq!(seg[57], 1.0);
        }
    }

    #[test]
    fn per_channel_segments_sum_to_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let data: Vec<u8> = (0..64 * 64 * 3).map(|_| rng.gen()).collect();
        let img = Image::new(64, 64, ColorSpace::Rgb, data).unwrap();
        for space in [ColorSpace::Hsv, ColorSpace::YCbCr, ColorSpace::Rgb] {
            let desc = color_lbp_descriptor(&img, space, &LbpParams::default()).unwrap();
            for (info, seg) in desc.segments() {
                let sum: f64 = seg.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "{}", info.label());
            }
        }
    }

    #[test]
    fn fusing_with_empty_is_identity() {
        let d = Descriptor::new(
            vec![0.5, 0.5],
            vec![SegmentInfo {
                space: ColorSpace::Gray,
                channel: 0,
                bins: 2,
            }],
        )
        .unwrap();
        assert_eq!(fuse_descriptors(&d, &Descriptor::empty()), d);
        assert_eq!(fuse_descriptors(&Descriptor::empty(), &d), d);
    }

    #[test]
    fn params_validation() {
        assert!(LbpParams::new(3, 1.0, Sampling::Interpolated).is_err());
        assert!(LbpParams::new(8, 0.0, Sampling::Interpolated).is_err());
        assert!(LbpParams::new(17, 1.0, Sampling::Interpolated).is_err());
        assert!(LbpParams::new(12, 2.5, Sampling::Interpolated).is_ok());
    }

    #[test]
    fn bin_table_is_consistent_for_other_p() {
        // P(P-1)+2 uniform codes for any P.
        for p in [4u32, 6, 10, 12] {
            let n_uniform = (0..(1u32 << p)).filter(|&c| transitions(c, p) <= 2).count();
            assert_eq!(n_uniform as u32, p * (p - 1) + 2, "P={p}");
            assert_eq!(uniform_bin((1 << p) - 1, p) as u32, p * (p - 1) + 1);
        }
    }
}
