//! Temporal grouping of per-frame descriptors: a video becomes a list of
//! fixed-length windows and each window is averaged into one descriptor.
//!
//! Windows are anchored at the first frame (treated as t = 0) and step by
//! the stride; a window is emitted only when it lies fully inside the video
//! duration, except that a video shorter than one window yields a single
//! truncated window so nothing is silently dropped. Test-time evaluation
//! uses only the first window.

use crate::error::{Error, Result};
use crate::texture::{Descriptor, SegmentInfo};

use std::ops::Range;

/// Slack for comparing timestamps assembled from frame indices; real gaps
/// are at least one frame period, far above this.
const T_EPS: f64 = 1e-9;

/// Per-frame descriptors of one video with their capture timestamps.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    video_id: String,
    fps: f64,
    frames: Vec<(f64, Descriptor)>,
}

impl FrameSequence {
    /// Timestamps must be strictly increasing and all descriptors must share
    /// one layout.
    pub fn new(video_id: impl Into<String>, fps: f64, frames: Vec<(f64, Descriptor)>) -> Result<Self> {
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(Error::InvalidParams(format!("fps must be positive, got {fps}")));
        }
        for pair in frames.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidParams(format!(
                    "timestamps must be strictly increasing, got {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some((_, first)) = frames.first() {
            for (t, d) in &frames[1..] {
                if d.layout() != first.layout() {
                    return Err(Error::InvalidParams(format!(
                        "descriptor layout changes at t={t}"
                    )));
                }
            }
        }
        Ok(FrameSequence {
            video_id: video_id.into(),
            fps,
            frames,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frames(&self) -> &[(f64, Descriptor)] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn layout(&self) -> Option<&[SegmentInfo]> {
        self.frames.first().map(|(_, d)| d.layout())
    }

    /// Total covered time: last timestamp relative to the first plus one
    /// frame period, so an n-frame video at constant rate spans n / fps.
    pub fn duration(&self) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some((t0, _)), Some((t1, _))) => t1 - t0 + 1.0 / self.fps,
            _ => 0.0,
        }
    }
}

/// Which windows of a video are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Every full window (training).
    TrainAllWindows,
    /// Only the window starting at t = 0 (evaluation).
    TestFirstWindow,
}

/// Window length and step in seconds; a 3 s window with 2 s overlap is
/// length 3, stride 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    length: f64,
    stride: f64,
    mode: WindowMode,
}

impl WindowSpec {
    /// Requires `0 < stride <= length`.
    pub fn new(length: f64, stride: f64, mode: WindowMode) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParams(format!(
                "window length must be positive, got {length}"
            )));
        }
        if !(stride > 0.0) || stride > length {
            return Err(Error::InvalidParams(format!(
                "window stride must be in (0, length], got stride {stride} for length {length}"
            )));
        }
        Ok(WindowSpec { length, stride, mode })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    pub fn mode(&self) -> WindowMode {
        self.mode
    }
}

/// Frame-index ranges of the windows of `seq` under `spec`.
///
/// Window `k` spans `[k * stride, k * stride + length)` relative to the
/// first frame and is emitted only if its end does not exceed the sequence
/// duration. A sequence shorter than one window yields a single window over
/// all frames. Windows that contain no frames are dropped. For duration `D`
/// with `D >= length` the count is `floor((D - length) / stride) + 1`, minus
/// any empty windows.
pub fn make_windows(seq: &FrameSequence, spec: &WindowSpec) -> Result<Vec<Range<usize>>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let t0 = seq.frames[0].0;
    let duration = seq.duration();

    if duration + T_EPS < spec.length {
        let whole = 0..seq.len();
        return Ok(vec![whole]);
    }

    let mut windows = Vec::new();
    let mut k = 0u64;
    loop {
        let start = k as f64 * spec.stride;
        if start + spec.length > duration + T_EPS {
            break;
        }
        let lo = seq
            .frames
            .partition_point(|(t, _)| *t - t0 < start - T_EPS);
        let hi = seq
            .frames
            .partition_point(|(t, _)| *t - t0 < start + spec.length - T_EPS);
        if lo < hi {
            windows.push(lo..hi);
        }
        if spec.mode == WindowMode::TestFirstWindow && !windows.is_empty() {
            break;
        }
        k += 1;
    }
    Ok(windows)
}

/// Element-wise mean of the descriptors in `range`; layout is preserved.
///
/// `range` must be non-empty and within the sequence.
pub fn average_window(seq: &FrameSequence, range: Range<usize>) -> Descriptor {
    assert!(!range.is_empty(), "window range must be non-empty");
    let frames = &seq.frames[range];
    let first = &frames[0].1;
    let mut values = vec![0.0; first.len()];
    for (_, d) in frames {
        for (acc, v) in values.iter_mut().zip(d.values()) {
            *acc += v;
        }
    }
    let n = frames.len() as f64;
    for v in &mut values {
        *v /= n;
    }
    Descriptor::new(values, first.layout().to_vec()).expect("layout shared by construction")
}
