//! Dataset manifests and the synthetic corpus generator.
//!
//! A corpus is a directory of per-video frame images plus one JSON-lines
//! manifest describing every video: subject, genuine/attack label, attack
//! kind, quality tag, train/dev/test split, frame rate, and per-frame file
//! path and face box. The manifest is the only ingestion interface; real
//! datasets are used by writing a manifest for them.

pub mod synth;

use crate::error::{Error, Result};
use crate::imaging::FaceBox;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

/// Ground-truth class of a video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Attack,
}

impl Label {
    /// SVM target: genuine is the positive class.
    pub fn y(self) -> f64 {
        match self {
            Label::Genuine => 1.0,
            Label::Attack => -1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Genuine => "genuine",
            Label::Attack => "attack",
        })
    }
}

/// Reproduction medium of an attack video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Print,
    Screen,
    Highdef,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [AttackKind::Print, AttackKind::Screen, AttackKind::Highdef];
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackKind::Print => "print",
            AttackKind::Screen => "screen",
            AttackKind::Highdef => "highdef",
        })
    }
}

/// Capture-quality tag of a video (sensor tier, applies to genuine and
/// attack videos alike).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    Low,
    Normal,
    High,
}

impl Quality {
    pub const ALL: [Quality; 3] = [Quality::Low, Quality::Normal, Quality::High];
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quality::Low => "low",
            Quality::Normal => "normal",
            Quality::High => "high",
        })
    }
}

/// Protocol split a video belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

/// One frame of a video: image path relative to the manifest directory plus
/// the face box inside that image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRef {
    pub path: String,
    #[serde(rename = "box")]
    pub face_box: FaceBox,
}

/// One video of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub subject_id: String,
    pub label: Label,
    pub attack_kind: Option<AttackKind>,
    pub quality: Quality,
    pub split: Split,
    pub fps: f64,
    pub frames: Vec<FrameRef>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestHeader {
    format: String,
    version: u32,
}

const MANIFEST_FORMAT: &str = "chromatex-manifest";
const MANIFEST_VERSION: u32 = 1;

/// Validated corpus description; `root` is the directory frame paths are
/// relative to.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    root: PathBuf,
    entries: Vec<VideoEntry>,
}

impl Manifest {
    /// Wraps entries after semantic validation (`check_paths` additionally
    /// requires every frame file to exist under `root`).
    pub fn new(root: impl Into<PathBuf>, entries: Vec<VideoEntry>, check_paths: bool) -> Result<Self> {
        let root = root.into();
        let mut seen = BTreeSet::new();
        for (index, entry) in entries.iter().enumerate() {
            // Line number as it would appear in the saved file.
            let line = index + 2;
            let fail = |msg: String| Error::Manifest {
                path: root.clone(),
                line,
                msg,
            };
            if !seen.insert(entry.video_id.clone()) {
                return Err(fail(format!("duplicate video_id {:?}", entry.video_id)));
            }
            if !(entry.fps > 0.0) || !entry.fps.is_finite() {
                return Err(fail(format!("fps must be positive, got {}", entry.fps)));
            }
            if entry.frames.is_empty() {
                return Err(fail(format!("video {:?} has no frames", entry.video_id)));
            }
            match (entry.label, entry.attack_kind) {
                (Label::Attack, None) => {
                    return Err(fail(format!(
                        "attack video {:?} is missing attack_kind",
                        entry.video_id
                    )))
                }
                (Label::Genuine, Some(kind)) => {
                    return Err(fail(format!(
                        "genuine video {:?} carries attack_kind {kind}",
                        entry.video_id
                    )))
                }
                _ => {}
            }
            for frame in &entry.frames {
                let b = &frame.face_box;
                if b.w < FaceBox::MIN_SIDE || b.h < FaceBox::MIN_SIDE {
                    return Err(fail(format!(
                        "face box {}x{} in {:?} is below the minimum side {}",
                        b.w,
                        b.h,
                        frame.path,
                        FaceBox::MIN_SIDE
                    )));
                }
                if check_paths && !root.join(&frame.path).is_file() {
                    return Err(fail(format!("frame file {:?} not found", frame.path)));
                }
            }
        }
        Ok(Manifest { root, entries })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[VideoEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Absolute path of a frame image.
    pub fn resolve(&self, frame: &FrameRef) -> PathBuf {
        self.root.join(&frame.path)
    }

    pub fn split_entries(&self, split: Split) -> impl Iterator<Item = &VideoEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Sorted distinct subject ids.
    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.entries.iter().map(|e| e.subject_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }
}

/// Loads and fully validates a JSON-lines manifest; every frame path is
/// checked to exist. Errors carry the offending line number.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let fail = |line: usize, msg: String| Error::Manifest {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut entries = Vec::new();
    let mut saw_header = false;
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let text = line.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        if !saw_header {
            let header: ManifestHeader = serde_json::from_str(&text)
                .map_err(|e| fail(line_no, format!("bad header: {e}")))?;
            if header.format != MANIFEST_FORMAT {
                return Err(fail(line_no, format!("unknown format {:?}", header.format)));
            }
            if header.version != MANIFEST_VERSION {
                return Err(fail(line_no, format!("unsupported version {}", header.version)));
            }
            saw_header = true;
            continue;
        }
        let entry: VideoEntry =
            serde_json::from_str(&text).map_err(|e| fail(line_no, e.to_string()))?;
        entries.push(entry);
    }
    if !saw_header {
        return Err(fail(1, "missing header line".into()));
    }
    let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    // Re-map the generic validation path name to the manifest file.
    match Manifest::new(root, entries, true) {
        Ok(m) => Ok(m),
        Err(Error::Manifest { line, msg, .. }) => Err(fail(line, msg)),
        Err(other) => Err(other),
    }
}

/// Writes the manifest as one header line plus one JSON entry per line.
pub fn save_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    let header = ManifestHeader {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
    };
    let io_err = |e: std::io::Error| Error::io(path, e);
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))
        .map_err(io_err)?;
    for entry in &manifest.entries {
        writeln!(out, "{}", serde_json::to_string(entry).expect("entry serializes"))
            .map_err(io_err)?;
    }
    std::fs::write(path, out).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{ColorSpace, Image};

    fn write_frame(dir: &Path, rel: &str) {
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        let img = Image::new(16, 16, ColorSpace::Rgb, vec![128; 16 * 16 * 3]).unwrap();
        crate::imaging::pnm::write_image(&path, &img).unwrap();
    }

    fn entry(video_id: &str, label: Label, kind: Option<AttackKind>) -> VideoEntry {
        VideoEntry {
            video_id: video_id.into(),
            subject_id: "s001".into(),
            label,
            attack_kind: kind,
            quality: Quality::Normal,
            split: Split::Train,
            fps: 10.0,
            frames: vec![FrameRef {
                path: format!("{video_id}/f0000.ppm"),
                face_box: FaceBox::new(0, 0, 16, 16).unwrap(),
            }],
        }
    }

    #[test]
    fn empty_manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let m = Manifest::new(dir.path(), Vec::new(), true).unwrap();
        save_manifest(&m, &path).unwrap();
        let back = load_manifest(&path).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn full_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        write_frame(dir.path(), "g1/f0000.ppm");
        write_frame(dir.path(), "a1/f0000.ppm");
        let entries = vec![
            entry("g1", Label::Genuine, None),
            entry("a1", Label::Attack, Some(AttackKind::Print)),
        ];
        let m = Manifest::new(dir.path(), entries, true).unwrap();
        let path = dir.path().join("corpus.jsonl");
        save_manifest(&m, &path).unwrap();
        let back = load_manifest(&path).unwrap();
        assert_eq!(back.entries(), m.entries());
        assert_eq!(back.subjects(), vec!["s001".to_string()]);
    }

    #[test]
    fn unknown_label_is_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(
            &path,
            "{\"format\":\"chromatex-manifest\",\"version\":1}\n\
             {\"video_id\":\"v\",\"subject_id\":\"s\",\"label\":\"reall\",\"attack_kind\":null,\
              \"quality\":\"normal\",\"split\":\"train\",\"fps\":10.0,\"frames\":[]}\n",
        )
        .unwrap();
        match load_manifest(&path) {
            Err(Error::Manifest { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("reall"), "{msg}");
            }
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn missing_frame_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let m = Manifest::new(dir.path(), vec![entry("g1", Label::Genuine, None)], false).unwrap();
        save_manifest(&m, &path).unwrap();
        match load_manifest(&path) {
            Err(Error::Manifest { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("not found"), "{msg}");
            }
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn label_attack_kind_consistency_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        write_frame(dir.path(), "v/f0000.ppm");
        let bad_attack = vec![entry("v", Label::Attack, None)];
        assert!(Manifest::new(dir.path(), bad_attack, true).is_err());
        let bad_genuine = vec![entry("v", Label::Genuine, Some(AttackKind::Screen))];
        assert!(Manifest::new(dir.path(), bad_genuine, true).is_err());
    }

    #[test]
    fn duplicate_video_id_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_frame(dir.path(), "v/f0000.ppm");
        let entries = vec![entry("v", Label::Genuine, None), entry("v", Label::Genuine, None)];
        assert!(Manifest::new(dir.path(), entries, true).is_err());
    }

    #[test]
    fn bad_fps_and_empty_frames_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_frame(dir.path(), "v/f0000.ppm");
        let mut e = entry("v", Label::Genuine, None);
        e.fps = 0.0;
        assert!(Manifest::new(dir.path(), vec![e], true).is_err());
        let mut e = entry("v", Label::Genuine, None);
        e.frames.clear();
        assert!(Manifest::new(dir.path(), vec![e], true).is_err());
    }

    #[test]
    fn undersized_face_box_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_frame(dir.path(), "v/f0000.ppm");
        let mut e = entry("v", Label::Genuine, None);
        e.frames[0].face_box = FaceBox { x: 0, y: 0, w: 4, h: 4 };
        assert!(Manifest::new(dir.path(), vec![e], true).is_err());
    }

    #[test]
    fn missing_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(load_manifest(&path).is_err());
        std::fs::write(&path, "{\"format\":\"something-else\",\"version\":1}\n").unwrap();
        assert!(load_manifest(&path).is_err());
    }
}
