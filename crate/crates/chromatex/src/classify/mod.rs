//! Soft-margin SVM with linear and RBF kernels, trained by sequential
//! minimal optimization, plus subject-disjoint cross-validation and grid
//! search for hyperparameter tuning.
//!
//! Labels are fixed toolkit-wide as genuine = +1, attack = -1, so higher
//! decision values mean more genuine.

pub mod io;
mod smo;

use crate::corpus::{AttackKind, Label, Quality};
use crate::error::{Error, Result};
use crate::eval::{eer, ScoreSet};
use crate::texture::{Descriptor, DescriptorStamp};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Kernel function of the SVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        if let Kernel::Rbf { gamma } = self {
            if !(*gamma > 0.0) || !gamma.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "RBF gamma must be positive, got {gamma}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::Linear => KernelKind::Linear,
            Kernel::Rbf { .. } => KernelKind::Rbf,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Kernel::Linear => None,
            Kernel::Rbf { gamma } => Some(*gamma),
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kernel::Linear => f.write_str("linear"),
            Kernel::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
        }
    }
}

/// Kernel family, before a concrete gamma is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl KernelKind {
    pub fn with_gamma(self, gamma: f64) -> Kernel {
        match self {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Rbf => Kernel::Rbf { gamma },
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(Error::InvalidParams(format!(
                "unknown kernel {other:?} (expected linear|rbf)"
            ))),
        }
    }
}

/// One training or evaluation unit: a windowed descriptor with its video's
/// ground truth and scenario tags.
#[derive(Debug, Clone)]
pub struct Sample {
    pub descriptor: Descriptor,
    pub label: Label,
    pub subject_id: String,
    pub video_id: String,
    pub attack_kind: Option<AttackKind>,
    pub quality: Quality,
}

/// Hyperparameter grids and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// KKT tolerance of the SMO stop rule.
    pub tolerance: f64,
    /// Safety cap on SMO iterations.
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c_grid: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            gamma_grid: (-7..=3).map(|e| 2f64.powi(e)).collect(),
            tolerance: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::InvalidParams("hyperparameter grids must be non-empty".into()));
        }
        for &c in &self.c_grid {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParams(format!("C must be positive, got {c}")));
            }
        }
        for &g in &self.gamma_grid {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::InvalidParams(format!("gamma must be positive, got {g}")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Support vector retained by a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    pub x: Vec<f64>,
    pub y: f64,
    pub alpha: f64,
}

/// Trained SVM. Decision values are `sum alpha_i y_i K(x_i, d) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kernel: Kernel,
    c: f64,
    support: Vec<SupportVector>,
    bias: f64,
    dim: usize,
    stamp: Option<DescriptorStamp>,
    operating_threshold: Option<f64>,
}

impl Model {
    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn support(&self) -> &[SupportVector] {
        &self.support
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stamp(&self) -> Option<&DescriptorStamp> {
        self.stamp.as_ref()
    }

    pub fn operating_threshold(&self) -> Option<f64> {
        self.operating_threshold
    }

    /// Records which descriptor configuration produced the training data so
    /// mismatched descriptors are rejected at scoring time.
    pub fn with_stamp(mut self, stamp: DescriptorStamp) -> Self {
        self.stamp = Some(stamp);
        self
    }

    /// Fixes the acceptance threshold chosen on development or CV scores.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.operating_threshold = Some(threshold);
        self
    }

    /// Decision value of a raw feature vector.
    pub fn score(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                actual: values.len(),
            });
        }
        let sum: f64 = self
            .support
            .iter()
            .map(|sv| sv.alpha * sv.y * self.kernel.eval(&sv.x, values))
            .sum();
        Ok(sum + self.bias)
    }

    /// For the linear kernel, the collapsed weight vector
    /// `w = sum alpha_i y_i x_i`; decision values equal `dot(w, d) + bias`.
    pub fn weight_vector(&self) -> Option<Vec<f64>> {
        match self.kernel {
            Kernel::Linear => {
                let mut w = vec![0.0; self.dim];
                for sv in &self.support {
                    for (wi, xi) in w.iter_mut().zip(&sv.x) {
                        *wi += sv.alpha * sv.y * xi;
                    }
                }
                Some(w)
            }
            Kernel::Rbf { .. } => None,
        }
    }
}

/// Decision value of `d` under `model`; higher means more genuine.
pub fn decision_value(model: &Model, d: &Descriptor) -> Result<f64> {
    model.score(d.values())
}

fn check_dims(samples: &[Sample]) -> Result<usize> {
    let dim = samples[0].descriptor.len();
    for s in samples {
        if s.descriptor.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                actual: s.descriptor.len(),
            });
        }
    }
    Ok(dim)
}

/// Trains a soft-margin SVM to the dual optimum (within `cfg.tolerance`).
///
/// Requires at least one sample of each class and a consistent feature
/// dimension.
pub fn svm_train(samples: &[Sample], kernel: Kernel, c: f64, cfg: &TrainConfig) -> Result<Model> {
    kernel.validate()?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParams(format!("C must be positive, got {c}")));
    }
    if samples.is_empty() {
        return Err(Error::DegenerateTrainingSet);
    }
    let dim = check_dims(samples)?;
    let n_genuine = samples.iter().filter(|s| s.label == Label::Genuine).count();
    if n_genuine == 0 || n_genuine == samples.len() {
        return Err(Error::DegenerateTrainingSet);
    }

    let points: Vec<&[f64]> = samples.iter().map(|s| s.descriptor.values()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.label.y()).collect();
    let matrix = smo::KernelMatrix::compute(&points, |a, b| kernel.eval(a, b));
    let solution = smo::solve(&matrix, &y, c, cfg.tolerance, cfg.max_iter);
    if !solution.converged {
        log::warn!(
            "SMO stopped after {} iterations without reaching tolerance {}",
            solution.iterations,
            cfg.tolerance
        );
    }

    let support: Vec<SupportVector> = solution
        .alpha
        .iter()
        .zip(samples)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, s)| SupportVector {
            x: s.descriptor.values().to_vec(),
            y: s.label.y(),
            alpha: a,
        })
        .collect();

    Ok(Model {
        kernel,
        c,
        support,
        bias: solution.bias,
        dim,
        stamp: None,
        operating_threshold: None,
    })
}

/// Partitions the distinct subjects of `samples` into `k` folds whose sizes
/// differ by at most one; deterministic under `seed`.
pub fn subject_disjoint_folds(samples: &[Sample], k: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    if k == 0 {
        return Err(Error::InvalidParams("fold count must be at least 1".into()));
    }
    let mut subjects: Vec<String> = {
        let set: std::collections::BTreeSet<&str> =
            samples.iter().map(|s| s.subject_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    };
    if subjects.len() < k {
        return Err(Error::NotEnoughSubjects {
            subjects: subjects.len(),
            folds: k,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    subjects.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, subject) in subjects.into_iter().enumerate() {
        folds[i % k].push(subject);
    }
    Ok(folds)
}

/// Winning grid point of a cross-validated search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchResult {
    pub kernel: Kernel,
    pub c: f64,
    /// Mean held-out EER at the winning point.
    pub cv_eer: f64,
}

pub(crate) fn sorted_grid(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(|a, b| a.partial_cmp(b).expect("grid values must not be NaN"));
    g.dedup();
    g
}

/// Hyperparameter points in canonical search order: C ascending, then gamma
/// ascending, so a strict-improvement scan resolves ties to the smallest
/// values.
pub(crate) fn grid_points(kind: KernelKind, cfg: &TrainConfig) -> Vec<(f64, Kernel)> {
    let kernels: Vec<Kernel> = match kind {
        KernelKind::Linear => vec![Kernel::Linear],
        KernelKind::Rbf => sorted_grid(&cfg.gamma_grid)
            .into_iter()
            .map(|gamma| Kernel::Rbf { gamma })
            .collect(),
    };
    let mut points = Vec::new();
    for &c in &sorted_grid(&cfg.c_grid) {
        for &kernel in &kernels {
            points.push((c, kernel));
        }
    }
    points
}

/// Held-out scores of one CV pass at fixed hyperparameters, pooled over
/// folds in fold order.
pub fn cv_scores(
    samples: &[Sample],
    kernel: Kernel,
    c: f64,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<Vec<(f64, Label)>> {
    let folds = subject_disjoint_folds(samples, k, seed)?;
    let mut scores = Vec::new();
    for fold in &folds {
        let held: Vec<&Sample> = samples
            .iter()
            .filter(|s| fold.contains(&s.subject_id))
            .collect();
        let train: Vec<Sample> = samples
            .iter()
            .filter(|s| !fold.contains(&s.subject_id))
            .cloned()
            .collect();
        let model = svm_train(&train, kernel, c, cfg)?;
        for s in held {
            scores.push((model.score(s.descriptor.values())?, s.label));
        }
    }
    Ok(scores)
}

/// Grid search minimizing mean held-out EER over `k` subject-disjoint folds.
///
/// Grid points are visited with C ascending, then gamma ascending, and a
/// point wins only by strictly smaller mean EER, so ties resolve to the
/// smallest C, then the smallest gamma. Points run in parallel; the result
/// does not depend on thread scheduling.
pub fn grid_search(
    samples: &[Sample],
    kind: KernelKind,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<GridSearchResult> {
    cfg.validate()?;
    let folds = subject_disjoint_folds(samples, k, seed)?;
    let partitions: Vec<(Vec<Sample>, Vec<&Sample>)> = folds
        .iter()
        .map(|fold| {
            let train: Vec<Sample> = samples
                .iter()
                .filter(|s| !fold.contains(&s.subject_id))
                .cloned()
                .collect();
            let held: Vec<&Sample> = samples
                .iter()
                .filter(|s| fold.contains(&s.subject_id))
                .collect();
            (train, held)
        })
        .collect();

    let points = grid_points(kind, cfg);

    let means: Vec<f64> = points
        .par_iter()
        .map(|&(c, kernel)| -> Result<f64> {
            let mut total = 0.0;
            for (train, held) in &partitions {
                let model = svm_train(train, kernel, c, cfg)?;
                let mut set = ScoreSet::default();
                for s in held {
                    set.push(model.score(s.descriptor.values())?, s.label);
                }
                total += eer(&set)?.eer;
            }
            Ok(total / partitions.len() as f64)
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize)> = None;
    for (index, &mean) in means.iter().enumerate() {
        if best.is_none_or(|(b, _)| mean < b) {
            best = Some((mean, index));
        }
    }
    let (cv_eer, index) = best.expect("grids validated non-empty");
    let (c, kernel) = points[index];
    Ok(GridSearchResult { kernel, c, cv_eer })
}
