//! Deterministic synthetic corpus generator.
//!
//! Genuine "faces" are procedural 64x64 color textures: a subject-specific
//! three-color palette mixed by low-frequency fields, overlaid with
//! band-limited texture waves that drift slightly from frame to frame.
//! Attack videos are the same frames pushed through a recapture pipeline
//! that compresses chroma toward neutral, applies a display color cast,
//! blurs, adds chroma noise, and overlays a moire pattern. The design
//! target is that recapture disturbs chroma texture much more than luma
//! texture, so chroma-aware descriptors separate the classes better than
//! gray ones.
//!
//! Everything is keyed on `(params, seed)`: per-video RNG streams are
//! derived from the seed and the video id, so parallel generation yields
//! byte-identical corpora.

use super::{save_manifest, AttackKind, FrameRef, Label, Manifest, Quality, Split, VideoEntry};
use crate::error::{Error, Result};
use crate::imaging::{quantize, ColorSpace, FaceBox, Image, FACE_SIZE};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::Path;

/// Subject counts per protocol split; the sum must equal `n_subjects`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubjectSplit {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SubjectSplit {
    pub fn total(&self) -> usize {
        self.train + self.dev + self.test
    }
}

/// Generator configuration. The distortion fields describe the baseline
/// recapture; per-attack-kind presets scale them (see [`preset_params`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Number of distinct subjects; the palette map is injective up to 200.
    pub n_subjects: usize,
    pub frames_per_video: usize,
    pub fps: f64,
    pub split: SubjectSplit,
    /// Chroma scale toward neutral in `[0, 1]`: 1 keeps chroma, 0 removes it.
    pub gamut_compression: f64,
    /// Per-channel RGB offset added by the reproduction medium, each in
    /// `[-32, 32]`.
    pub color_cast: [f64; 3],
    /// Gaussian blur sigma in pixels, `[0, 8]`.
    pub blur_radius: f64,
    /// Additive Gaussian noise sigma on the chroma planes, `[0, 32]`.
    pub chroma_noise_sigma: f64,
    /// Peak amplitude of the sinusoidal moire overlay on luma, `[0, 32]`.
    pub moire_amplitude: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_subjects: 50,
            frames_per_video: 40,
            fps: 10.0,
            split: SubjectSplit {
                train: 20,
                dev: 0,
                test: 30,
            },
            gamut_compression: 0.85,
            color_cast: [5.0, 2.0, -4.0],
            blur_radius: 0.7,
            chroma_noise_sigma: 1.6,
            moire_amplitude: 5.0,
            seed: 7,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_subjects == 0 || self.n_subjects > 200 {
            return fail(format!(
                "n_subjects must be in [1, 200], got {}",
                self.n_subjects
            ));
        }
        if self.frames_per_video == 0 {
            return fail("frames_per_video must be positive".into());
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return fail(format!("fps must be positive, got {}", self.fps));
        }
        if self.split.total() != self.n_subjects {
            return fail(format!(
                "split {}+{}+{} does not cover {} subjects",
                self.split.train, self.split.dev, self.split.test, self.n_subjects
            ));
        }
        if !(0.0..=1.0).contains(&self.gamut_compression) {
            return fail(format!(
                "gamut_compression must be in [0, 1], got {}",
                self.gamut_compression
            ));
        }
        for (name, value, max) in [
            ("blur_radius", self.blur_radius, 8.0),
            ("chroma_noise_sigma", self.chroma_noise_sigma, 32.0),
            ("moire_amplitude", self.moire_amplitude, 32.0),
        ] {
            if !(0.0..=max).contains(&value) {
                return fail(format!("{name} must be in [0, {max}], got {value}"));
            }
        }
        for (c, offset) in self.color_cast.iter().enumerate() {
            if !offset.is_finite() || offset.abs() > 32.0 {
                return fail(format!(
                    "color_cast[{c}] must be in [-32, 32], got {offset}"
                ));
            }
        }
        Ok(())
    }
}

/// Stable stream key: FNV-1a over the tag, folded with the corpus seed.
fn stream_seed(seed: u64, tag: &str) -> u64 {
    const PRIME: u64 = 0x1000_0000_01b3;
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(PRIME);
    for byte in tag.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Continuous hexcone HSV (hue in degrees, s and v in `[0, 1]`) to RGB
/// floats in `[0, 255]`. Synthesis-side helper; the analysis pipeline uses
/// the exact integer converters in `imaging`.
fn hsv_to_rgb_f64(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h = h.rem_euclid(360.0) / 60.0;
    let f = h - h.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match h.floor() as u32 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r * 255.0, g * 255.0, b * 255.0]
}

const GOLDEN_ANGLE_DEG: f64 = 137.507_764_050_037_85;

/// Three base region colors for a subject. Hues walk the golden angle (plus
/// a seed-wide rotation), which keeps quantized palettes pairwise distinct
/// for the supported range of up to 200 subjects.
pub fn subject_palette(subject_id: u32, seed: u64) -> [[f64; 3]; 3] {
    let rotation = (stream_seed(seed, "palette") % 3600) as f64 * 0.1;
    let base = (f64::from(subject_id) * GOLDEN_ANGLE_DEG + rotation).rem_euclid(360.0);
    [
        hsv_to_rgb_f64(base, 0.60, 0.85),
        hsv_to_rgb_f64(base + 28.0, 0.50, 0.70),
        hsv_to_rgb_f64(base + 332.0, 0.72, 0.62),
    ]
}

/// One band-limited texture component.
struct Wave {
    fx: f64,
    fy: f64,
    phase: f64,
    /// Phase advance per frame.
    drift: f64,
    /// Per-channel amplitude in 8-bit units.
    amp: [f64; 3],
}

/// Subject-specific generative state, fully determined by `(seed, subject)`.
struct FaceBank {
    palette: [[f64; 3]; 3],
    /// Two low-frequency mixing fields as `(fx, fy, phase)`.
    regions: [(f64, f64, f64); 2],
    waves: Vec<Wave>,
    gain_phase: f64,
}

impl FaceBank {
    fn build(subject_id: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &format!("face:{subject_id}")));
        let region = |rng: &mut ChaCha8Rng| {
            let fx = rng.gen_range(0.4..1.2);
            let fy = rng.gen_range(0.4..1.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (fx, fy, rng.gen_range(0.0..2.0 * PI))
        };
        let regions = [region(&mut rng), region(&mut rng)];
        let waves = (0..6)
            .map(|_| {
                let angle = rng.gen_range(0.0..2.0 * PI);
                let cycles = rng.gen_range(4.0..12.0);
                Wave {
                    fx: cycles * angle.cos(),
                    fy: cycles * angle.sin(),
                    phase: rng.gen_range(0.0..2.0 * PI),
                    drift: rng.gen_range(0.05..0.3),
                    amp: [
                        rng.gen_range(2.5..6.0),
                        rng.gen_range(2.5..6.0),
                        rng.gen_range(2.5..6.0),
                    ],
                }
            })
            .collect();
        FaceBank {
            palette: subject_palette(subject_id, seed),
            regions,
            waves,
            gain_phase: rng.gen_range(0.0..2.0 * PI),
        }
    }
}

/// Renders one deterministic genuine frame: identical inputs give identical
/// bytes, and consecutive frames of a subject differ only by wave drift and
/// a small brightness wobble.
pub fn synth_genuine_face(subject_id: u32, frame_index: u32, params: &SynthParams) -> Image {
    let bank = FaceBank::build(subject_id, params.seed);
    let t = f64::from(frame_index);
    let gain = 1.0 + 0.015 * (0.7 * t + bank.gain_phase).sin();
    let span = (FACE_SIZE - 1) as f64;

    let mut data = Vec::with_capacity(FACE_SIZE * FACE_SIZE * 3);
    for y in 0..FACE_SIZE {
        let v = y as f64 / span;
        for x in 0..FACE_SIZE {
            let u = x as f64 / span;
            let field = |(fx, fy, phase): (f64, f64, f64)| {
                0.5 + 0.5 * (2.0 * PI * (fx * u + fy * v) + phase).sin()
            };
            let w1 = field(bank.regions[0]);
            let w2 = field(bank.regions[1]);
            let norm = 1.0 + w1 + w2;
            for c in 0..3 {
                let base = (bank.palette[0][c] + w1 * bank.palette[1][c] + w2 * bank.palette[2][c])
                    / norm;
                let texture: f64 = bank
                    .waves
                    .iter()
                    .map(|w| {
                        w.amp[c] * (2.0 * PI * (w.fx * u + w.fy * v) + w.phase + t * w.drift).sin()
                    })
                    .sum();
                data.push(quantize(gain * (base + texture)));
            }
        }
    }
    Image::new(FACE_SIZE, FACE_SIZE, ColorSpace::Rgb, data).expect("buffer sized to dimensions")
}

/// Float BT.601 planes of an RGB image, used only inside the recapture
/// pipeline where intermediate values must stay continuous.
fn to_ycbcr_planes(img: &Image) -> [Vec<f64>; 3] {
    let n = img.width() * img.height();
    let mut planes = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for px in img.data().chunks_exact(3) {
        let (r, g, b) = (f64::from(px[0]), f64::from(px[1]), f64::from(px[2]));
        planes[0].push(0.299 * r + 0.587 * g + 0.114 * b);
        planes[1].push(128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b);
        planes[2].push(128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b);
    }
    planes
}

fn from_ycbcr_planes(planes: &[Vec<f64>; 3], width: usize, height: usize) -> Image {
    const G_CB: f64 = 0.114 * 1.772 / 0.587;
    const G_CR: f64 = 0.299 * 1.402 / 0.587;
    let mut data = Vec::with_capacity(width * height * 3);
    for ((&y, &cb), &cr) in planes[0].iter().zip(&planes[1]).zip(&planes[2]) {
        let (cb, cr) = (cb - 128.0, cr - 128.0);
        data.push(quantize(y + 1.402 * cr));
        data.push(quantize(y - G_CB * cb - G_CR * cr));
        data.push(quantize(y + 1.772 * cb));
    }
    Image::new(width, height, ColorSpace::Rgb, data).expect("buffer sized to dimensions")
}

/// Separable Gaussian blur with clamp-to-edge borders; kernel half-width is
/// `ceil(3 sigma)`.
fn gaussian_blur(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = weights.iter().sum();

    let index = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let acc: f64 = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * data[y * width + index(x as isize + k as isize - half, width)])
                .sum();
            tmp[y * width + x] = acc / norm;
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let acc: f64 = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[index(y as isize + k as isize - half, height) * width + x])
                .sum();
            out[y * width + x] = acc / norm;
        }
    }
    out
}

/// Simulates re-imaging a frame off a reproduction medium. Steps run in a
/// fixed order on float YCbCr planes: chroma compression toward neutral,
/// color cast, Gaussian blur, additive chroma noise, sinusoidal moire on
/// luma; the result is clamped and converted back to RGB.
pub fn synth_recapture(img: &Image, params: &SynthParams, rng: &mut ChaCha8Rng) -> Result<Image> {
    if img.space() != ColorSpace::Rgb {
        return Err(Error::InvalidColorSpace {
            expected: "rgb".into(),
            actual: img.space().to_string(),
        });
    }
    params.validate()?;
    let (width, height) = (img.width(), img.height());
    let mut planes = to_ycbcr_planes(img);

    let g = params.gamut_compression;
    for plane in &mut planes[1..] {
        for v in plane.iter_mut() {
            *v = 128.0 + g * (*v - 128.0);
        }
    }

    // The cast is specified as an RGB offset; adding its linear BT.601
    // image keeps the pipeline in one color space.
    let [dr, dg, db] = params.color_cast;
    let cast = [
        0.299 * dr + 0.587 * dg + 0.114 * db,
        -0.168_736 * dr - 0.331_264 * dg + 0.5 * db,
        0.5 * dr - 0.418_688 * dg - 0.081_312 * db,
    ];
    for (plane, delta) in planes.iter_mut().zip(cast) {
        for v in plane.iter_mut() {
            *v += delta;
        }
    }

    if params.blur_radius > 0.0 {
        for plane in &mut planes {
            *plane = gaussian_blur(plane, width, height, params.blur_radius);
        }
    }

    if params.chroma_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, params.chroma_noise_sigma).expect("sigma validated finite");
        let [_, cb_plane, cr_plane] = &mut planes;
        for (cb, cr) in cb_plane.iter_mut().zip(cr_plane.iter_mut()) {
            *cb += normal.sample(rng);
            *cr += normal.sample(rng);
        }
    }

    if params.moire_amplitude > 0.0 {
        let angle = rng.gen_range(0.0..PI);
        let cycles_per_px = rng.gen_range(0.18..0.42);
        let (fx, fy) = (cycles_per_px * angle.cos(), cycles_per_px * angle.sin());
        let phase = rng.gen_range(0.0..2.0 * PI);
        for y in 0..height {
            for x in 0..width {
                planes[0][y * width + x] += params.moire_amplitude
                    * (2.0 * PI * (fx * x as f64 + fy * y as f64) + phase).sin();
            }
        }
    }

    for plane in &mut planes {
        for v in plane.iter_mut() {
            *v = v.clamp(0.0, 255.0);
        }
    }
    Ok(from_ycbcr_planes(&planes, width, height))
}

/// Derives the recapture parameters of one attack video from the corpus
/// baseline. Print media blur heavily and push the cast; screens compress
/// the gamut hardest, flip the cast direction and alias into moire;
/// high-definition replays degrade everything mildly. Lower capture quality
/// adds blur on top.
pub fn preset_params(base: &SynthParams, kind: AttackKind, quality: Quality) -> SynthParams {
    let (strength, cast_mul, blur_mul, noise_mul, moire_mul) = match kind {
        AttackKind::Print => (1.2, 1.4, 2.2, 0.7, 0.0),
        AttackKind::Screen => (1.6, -1.0, 1.0, 1.2, 1.0),
        AttackKind::Highdef => (0.5, 0.35, 0.45, 0.5, 0.3),
    };
    let quality_blur = match quality {
        Quality::Low => 1.25,
        Quality::Normal => 1.0,
        Quality::High => 0.8,
    };
    let mut p = base.clone();
    p.gamut_compression = (1.0 - strength * (1.0 - base.gamut_compression)).clamp(0.0, 1.0);
    p.color_cast = base.color_cast.map(|c| c * cast_mul);
    p.blur_radius = base.blur_radius * blur_mul * quality_blur;
    p.chroma_noise_sigma = base.chroma_noise_sigma * noise_mul;
    p.moire_amplitude = base.moire_amplitude * moire_mul;
    p
}

fn subject_tag(subject: u32) -> String {
    format!("s{subject:03}")
}

#[allow(clippy::too_many_arguments)]
fn write_video(
    out_dir: &Path,
    video_id: &str,
    subject: u32,
    label: Label,
    attack_kind: Option<AttackKind>,
    quality: Quality,
    split: Split,
    fps: f64,
    frames: &[Image],
) -> Result<VideoEntry> {
    let dir = out_dir.join(video_id);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut refs = Vec::with_capacity(frames.len());
    for (index, frame) in frames.iter().enumerate() {
        let name = format!("f{index:04}.ppm");
        crate::imaging::pnm::write_image(&dir.join(&name), frame)?;
        refs.push(FrameRef {
            path: format!("{video_id}/{name}"),
            face_box: FaceBox {
                x: 0,
                y: 0,
                w: FACE_SIZE,
                h: FACE_SIZE,
            },
        });
    }
    Ok(VideoEntry {
        video_id: video_id.into(),
        subject_id: subject_tag(subject),
        label,
        attack_kind,
        quality,
        split,
        fps,
        frames: refs,
    })
}

/// Generates every video of one subject: the genuine sequence plus one
/// recaptured sequence per attack kind.
fn write_subject_videos(
    params: &SynthParams,
    out_dir: &Path,
    subject: u32,
    split: Split,
) -> Result<Vec<VideoEntry>> {
    let quality = Quality::ALL[subject as usize % Quality::ALL.len()];
    let genuine: Vec<Image> = (0..params.frames_per_video as u32)
        .map(|i| synth_genuine_face(subject, i, params))
        .collect();

    let mut entries = Vec::with_capacity(1 + AttackKind::ALL.len());
    let genuine_id = format!("{}_genuine", subject_tag(subject));
    entries.push(write_video(
        out_dir,
        &genuine_id,
        subject,
        Label::Genuine,
        None,
        quality,
        split,
        params.fps,
        &genuine,
    )?);

    for kind in AttackKind::ALL {
        let video_id = format!("{}_{kind}", subject_tag(subject));
        let preset = preset_params(params, kind, quality);
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(params.seed, &video_id));
        let frames: Vec<Image> = genuine
            .iter()
            .map(|f| synth_recapture(f, &preset, &mut rng))
            .collect::<Result<_>>()?;
        entries.push(write_video(
            out_dir,
            &video_id,
            subject,
            Label::Attack,
            Some(kind),
            quality,
            split,
            params.fps,
            &frames,
        )?);
    }
    Ok(entries)
}

/// Writes a complete corpus under `out_dir`: per-video frame directories
/// plus `manifest.jsonl`. Subjects are dealt into subject-disjoint
/// train/dev/test splits by a seeded shuffle; generation parallelizes per
/// subject without affecting output bytes.
pub fn generate_corpus(params: &SynthParams, out_dir: &Path) -> Result<Manifest> {
    params.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut order: Vec<usize> = (0..params.n_subjects).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(params.seed, "split"));
    order.shuffle(&mut rng);
    let mut split_of = vec![Split::Test; params.n_subjects];
    for (rank, &subject) in order.iter().enumerate() {
        split_of[subject] = if rank < params.split.train {
            Split::Train
        } else if rank < params.split.train + params.split.dev {
            Split::Dev
        } else {
            Split::Test
        };
    }

    let per_subject: Vec<Vec<VideoEntry>> = (0..params.n_subjects)
        .into_par_iter()
        .map(|subject| write_subject_videos(params, out_dir, subject as u32, split_of[subject]))
        .collect::<Result<_>>()?;

    let entries = per_subject.into_iter().flatten().collect();
    let manifest = Manifest::new(out_dir, entries, true)?;
    save_manifest(&manifest, &out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}
