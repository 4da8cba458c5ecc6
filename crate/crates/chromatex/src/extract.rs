//! Manifest-to-feature extraction: decodes frames, normalizes face crops,
//! computes per-frame color LBP descriptors, averages them over time
//! windows, and persists the result as a JSON-lines feature file.
//!
//! Training-split videos contribute every window; dev and test videos
//! contribute only the first window, which is the scoring rule downstream.
//! Feature files carry a descriptor stamp so models and features from
//! different configurations cannot be combined.

use crate::classify::Sample;
use crate::corpus::{AttackKind, Label, Manifest, Quality, Split};
use crate::error::{Error, Result};
use crate::imaging::{normalize_face, pnm, ColorSpace};
use crate::temporal::{average_window, make_windows, FrameSequence, WindowMode, WindowSpec};
use crate::texture::{
    color_lbp_descriptor, fuse_descriptors, Descriptor, DescriptorStamp, LbpParams, SegmentInfo,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader};
use std::path::Path;

/// What to extract: one descriptor per frame, fusing the listed color
/// spaces in order, averaged over windows of `window_length` seconds placed
/// every `window_stride` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    pub spaces: Vec<ColorSpace>,
    pub lbp: LbpParams,
    pub window_length: f64,
    pub window_stride: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            spaces: vec![ColorSpace::YCbCr],
            lbp: LbpParams::default(),
            window_length: 3.0,
            window_stride: 1.0,
        }
    }
}

impl ExtractOptions {
    pub fn validate(&self) -> Result<()> {
        if self.spaces.is_empty() {
            return Err(Error::InvalidParams("at least one color space is required".into()));
        }
        for (i, space) in self.spaces.iter().enumerate() {
            if self.spaces[..i].contains(space) {
                return Err(Error::InvalidParams(format!(
                    "color space {space} listed twice"
                )));
            }
        }
        WindowSpec::new(self.window_length, self.window_stride, WindowMode::TrainAllWindows)?;
        Ok(())
    }

    /// The stamp every extracted descriptor will match.
    pub fn stamp(&self) -> DescriptorStamp {
        let mut layout = Vec::new();
        for &space in &self.spaces {
            for channel in 0..space.channels() {
                layout.push(SegmentInfo {
                    space,
                    channel,
                    bins: self.lbp.bins(),
                });
            }
        }
        DescriptorStamp {
            params: self.lbp,
            layout,
        }
    }
}

/// One windowed descriptor with the video metadata needed for training and
/// scenario-filtered scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub video_id: String,
    pub subject_id: String,
    pub label: Label,
    pub attack_kind: Option<AttackKind>,
    pub quality: Quality,
    pub split: Split,
    pub window_index: usize,
    pub values: Vec<f64>,
}

/// All windowed descriptors extracted from one manifest under one
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    stamp: DescriptorStamp,
    window_length: f64,
    window_stride: f64,
    records: Vec<FeatureRecord>,
}

impl FeatureSet {
    pub fn new(
        stamp: DescriptorStamp,
        window_length: f64,
        window_stride: f64,
        records: Vec<FeatureRecord>,
    ) -> Result<Self> {
        let dim = stamp.dim();
        for record in &records {
            if record.values.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: record.values.len(),
                });
            }
        }
        Ok(FeatureSet {
            stamp,
            window_length,
            window_stride,
            records,
        })
    }

    pub fn stamp(&self) -> &DescriptorStamp {
        &self.stamp
    }

    pub fn descriptor_name(&self) -> String {
        self.stamp.descriptor_name()
    }

    pub fn window_length(&self) -> f64 {
        self.window_length
    }

    pub fn window_stride(&self) -> f64 {
        self.window_stride
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn split_records(&self, split: Split) -> impl Iterator<Item = &FeatureRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Training/evaluation samples of one split, one per stored window.
    pub fn samples(&self, split: Split) -> Result<Vec<Sample>> {
        self.split_records(split)
            .map(|r| {
                Ok(Sample {
                    descriptor: Descriptor::new(r.values.clone(), self.stamp.layout.clone())?,
                    label: r.label,
                    subject_id: r.subject_id.clone(),
                    video_id: r.video_id.clone(),
                    attack_kind: r.attack_kind,
                    quality: r.quality,
                })
            })
            .collect()
    }
}

fn window_mode(split: Split) -> WindowMode {
    match split {
        Split::Train => WindowMode::TrainAllWindows,
        Split::Dev | Split::Test => WindowMode::TestFirstWindow,
    }
}

fn video_records(
    manifest: &Manifest,
    entry: &crate::corpus::VideoEntry,
    opts: &ExtractOptions,
) -> Result<Vec<FeatureRecord>> {
    let spec = WindowSpec::new(
        opts.window_length,
        opts.window_stride,
        window_mode(entry.split),
    )?;
    let mut frames = Vec::with_capacity(entry.frames.len());
    for (index, frame) in entry.frames.iter().enumerate() {
        let img = pnm::read_image(&manifest.resolve(frame))?;
        let face = normalize_face(&img, &frame.face_box)?;
        let mut descriptor: Option<Descriptor> = None;
        for &space in &opts.spaces {
            let d = color_lbp_descriptor(&face, space, &opts.lbp)?;
            descriptor = Some(match descriptor {
                Some(acc) => fuse_descriptors(&acc, &d),
                None => d,
            });
        }
        let timestamp = index as f64 / entry.fps;
        frames.push((timestamp, descriptor.expect("spaces validated non-empty")));
    }
    let seq = FrameSequence::new(entry.video_id.clone(), entry.fps, frames)?;
    let windows = make_windows(&seq, &spec)?;
    Ok(windows
        .into_iter()
        .enumerate()
        .map(|(window_index, range)| FeatureRecord {
            video_id: entry.video_id.clone(),
            subject_id: entry.subject_id.clone(),
            label: entry.label,
            attack_kind: entry.attack_kind,
            quality: entry.quality,
            split: entry.split,
            window_index,
            values: average_window(&seq, range).values().to_vec(),
        })
        .collect())
}

/// Extracts windowed descriptors for every video in the manifest. Videos
/// are processed in parallel; record order follows manifest order.
pub fn extract_features(manifest: &Manifest, opts: &ExtractOptions) -> Result<FeatureSet> {
    opts.validate()?;
    let per_video: Vec<Vec<FeatureRecord>> = manifest
        .entries()
        .par_iter()
        .map(|entry| video_records(manifest, entry, opts))
        .collect::<Result<_>>()?;
    FeatureSet::new(
        opts.stamp(),
        opts.window_length,
        opts.window_stride,
        per_video.into_iter().flatten().collect(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureHeader {
    format: String,
    version: u32,
    descriptor: String,
    stamp: DescriptorStamp,
    window_length: f64,
    window_stride: f64,
}

const FEATURES_FORMAT: &str = "chromatex-features";
const FEATURES_VERSION: u32 = 1;

/// Writes a feature set as one header line plus one JSON record per line.
pub fn save_features(set: &FeatureSet, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    let header = FeatureHeader {
        format: FEATURES_FORMAT.into(),
        version: FEATURES_VERSION,
        descriptor: set.descriptor_name(),
        stamp: set.stamp.clone(),
        window_length: set.window_length,
        window_stride: set.window_stride,
    };
    use std::io::Write;
    let io_err = |e: std::io::Error| Error::io(path, e);
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))
        .map_err(io_err)?;
    for record in &set.records {
        writeln!(out, "{}", serde_json::to_string(record).expect("record serializes"))
            .map_err(io_err)?;
    }
    std::fs::write(path, out).map_err(io_err)
}

pub fn load_features(path: &Path) -> Result<FeatureSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let fail = |line: usize, msg: String| Error::Format {
        what: format!("features file {}", path.display()),
        msg: format!("line {line}: {msg}"),
    };

    let mut header: Option<FeatureHeader> = None;
    let mut records = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let text = line.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            let h: FeatureHeader =
                serde_json::from_str(&text).map_err(|e| fail(line_no, format!("bad header: {e}")))?;
            if h.format != FEATURES_FORMAT {
                return Err(fail(line_no, format!("unknown format {:?}", h.format)));
            }
            if h.version != FEATURES_VERSION {
                return Err(fail(line_no, format!("unsupported version {}", h.version)));
            }
            header = Some(h);
            continue;
        }
        let record: FeatureRecord =
            serde_json::from_str(&text).map_err(|e| fail(line_no, e.to_string()))?;
        records.push(record);
    }
    let header = header.ok_or_else(|| fail(1, "missing header line".into()))?;
    FeatureSet::new(
        header.stamp,
        header.window_length,
        header.window_stride,
        records,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth::{generate_corpus, SubjectSplit, SynthParams};

    fn tiny_corpus(dir: &Path) -> Manifest {
        let params = SynthParams {
            n_subjects: 2,
            frames_per_video: 12,
            split: SubjectSplit {
                train: 1,
                dev: 0,
                test: 1,
            },
            ..SynthParams::default()
        };
        generate_corpus(&params, dir).unwrap()
    }

    fn tiny_options() -> ExtractOptions {
        ExtractOptions {
            spaces: vec![ColorSpace::Gray],
            window_length: 0.6,
            window_stride: 0.3,
            ..ExtractOptions::default()
        }
    }

    #[test]
    fn windows_follow_split_role() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_corpus(dir.path());
        let set = extract_features(&manifest, &tiny_options()).unwrap();
        // 12 frames at 10 fps span 1.2 s: starts 0.0/0.3/0.6 fit a 0.6 s
        // window, so train videos carry 3 windows and test videos 1.
        for entry in manifest.entries() {
            let count = set
                .records()
                .iter()
                .filter(|r| r.video_id == entry.video_id)
                .count();
            match entry.split {
                Split::Train => assert_eq!(count, 3, "{}", entry.video_id),
                _ => assert_eq!(count, 1, "{}", entry.video_id),
            }
        }
        assert_eq!(set.records().len(), 4 * 3 + 4);
    }

    #[test]
    fn descriptor_layout_matches_request() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_corpus(dir.path());
        let opts = ExtractOptions {
            spaces: vec![ColorSpace::YCbCr, ColorSpace::Hsv],
            ..tiny_options()
        };
        let set = extract_features(&manifest, &opts).unwrap();
        assert_eq!(set.stamp().dim(), 6 * 59);
        assert_eq!(set.descriptor_name(), "ycbcr+hsv");
        for r in set.records() {
            assert_eq!(r.values.len(), 6 * 59);
        }
        // Each per-channel histogram still sums to 1 after averaging.
        let sample = &set.records()[0];
        for segment in sample.values.chunks_exact(59) {
            let total: f64 = segment.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_corpus(dir.path());
        let set = extract_features(&manifest, &tiny_options()).unwrap();
        let path = dir.path().join("features.jsonl");
        save_features(&set, &path).unwrap();
        let back = load_features(&path).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn extraction_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_corpus(dir.path());
        let a = extract_features(&manifest, &tiny_options()).unwrap();
        let b = extract_features(&manifest, &tiny_options()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn samples_carry_split_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_corpus(dir.path());
        let set = extract_features(&manifest, &tiny_options()).unwrap();
        let train = set.samples(Split::Train).unwrap();
        let test = set.samples(Split::Test).unwrap();
        assert_eq!(train.len(), 12);
        assert_eq!(test.len(), 4);
        let train_subjects: std::collections::HashSet<_> =
            train.iter().map(|s| s.subject_id.clone()).collect();
        let test_subjects: std::collections::HashSet<_> =
            test.iter().map(|s| s.subject_id.clone()).collect();
        assert!(train_subjects.is_disjoint(&test_subjects));
        assert!(train.iter().any(|s| s.label == Label::Genuine));
        assert!(train.iter().any(|s| s.label == Label::Attack));
    }

    #[test]
    fn bad_options_are_rejected() {
        let mut opts = tiny_options();
        opts.spaces.clear();
        assert!(opts.validate().is_err());
        let mut opts = tiny_options();
        opts.spaces = vec![ColorSpace::Gray, ColorSpace::Gray];
        assert!(opts.validate().is_err());
        let mut opts = tiny_options();
        opts.window_stride = 0.9;
        assert!(opts.validate().is_err());
    }

    #[test]
    fn mismatched_record_dim_is_rejected() {
        let opts = tiny_options();
        let record = FeatureRecord {
            video_id: "v".into(),
            subject_id: "s".into(),
            label: Label::Genuine,
            attack_kind: None,
            quality: Quality::Normal,
            split: Split::Train,
            window_index: 0,
            values: vec![0.0; 7],
        };
        assert!(matches!(
            FeatureSet::new(opts.stamp(), 3.0, 1.0, vec![record]),
            Err(Error::DimMismatch { expected: 59, actual: 7 })
        ));
    }

    #[test]
    fn corrupt_feature_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.jsonl");
        std::fs::write(&path, "{\"format\":\"something\",\"version\":1}\n").unwrap();
        assert!(load_features(&path).is_err());
        std::fs::write(&path, "").unwrap();
        assert!(load_features(&path).is_err());
    }
}
