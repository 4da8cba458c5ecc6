//! Protocol runners on extracted feature sets.
//!
//! The intra-corpus protocol tunes and trains on the train split (using the
//! dev split when present, subject-disjoint cross-validation otherwise) and
//! reports the equal error rate on the test split, overall and under
//! scenario filters by capture quality and attack kind. The cross-corpus
//! protocol fixes the model and operating threshold on one corpus and
//! reports HTER on another, for both kernel families.

use crate::classify::{
    cv_scores, grid_points, grid_search, svm_train, GridSearchResult, KernelKind, Model, Sample,
    TrainConfig,
};
use crate::corpus::{AttackKind, Label, Quality, Split};
use crate::error::{Error, Result};
use crate::eval::{eer, far_frr, hter, roc_points, RocCurve, ScoreSet};
use crate::extract::FeatureSet;

use rayon::prelude::*;

/// A test-set slice reported as one row: everything, one capture quality,
/// or one attack kind (attack scenarios keep every genuine video).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Overall,
    Quality(Quality),
    Attack(AttackKind),
}

impl Scenario {
    /// The seven standard scenarios: three capture qualities, three attack
    /// kinds, then the overall pool.
    pub const STANDARD: [Scenario; 7] = [
        Scenario::Quality(Quality::Low),
        Scenario::Quality(Quality::Normal),
        Scenario::Quality(Quality::High),
        Scenario::Attack(AttackKind::Print),
        Scenario::Attack(AttackKind::Screen),
        Scenario::Attack(AttackKind::Highdef),
        Scenario::Overall,
    ];

    pub fn name(&self) -> String {
        match self {
            Scenario::Overall => "overall".into(),
            Scenario::Quality(q) => format!("quality:{q}"),
            Scenario::Attack(k) => format!("attack:{k}"),
        }
    }

    pub fn admits(&self, sample: &Sample) -> bool {
        match self {
            Scenario::Overall => true,
            Scenario::Quality(q) => sample.quality == *q,
            Scenario::Attack(k) => match sample.label {
                Label::Genuine => true,
                Label::Attack => sample.attack_kind == Some(*k),
            },
        }
    }
}

/// One metric at one operating point of one evaluation slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub descriptor: String,
    pub kernel: String,
    pub scenario: String,
    /// `eer` or `hter`.
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
    pub genuine: usize,
    pub attacks: usize,
}

/// Ordered evaluation rows with deterministic text and CSV renderings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn merge(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    /// Aligned plain-text table.
    pub fn text_table(&self) -> String {
        let header = [
            "descriptor",
            "kernel",
            "scenario",
            "metric",
            "value",
            "threshold",
            "far",
            "frr",
            "genuine",
            "attacks",
        ];
        let cells: Vec<[String; 10]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.descriptor.clone(),
                    r.kernel.clone(),
                    r.scenario.clone(),
                    r.metric.clone(),
                    format!("{:.4}", r.value),
                    format!("{:.6}", r.threshold),
                    format!("{:.4}", r.far),
                    format!("{:.4}", r.frr),
                    r.genuine.to_string(),
                    r.attacks.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut push_row = |cols: &[String]| {
            let line: Vec<String> = cols
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        };
        push_row(&header.map(String::from));
        for row in &cells {
            push_row(row);
        }
        out
    }

    /// Header line plus one comma-separated row per entry.
    pub fn csv(&self) -> String {
        let mut out =
            String::from("descriptor,kernel,scenario,metric,value,threshold,far,frr,genuine,attacks\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
                r.descriptor,
                r.kernel,
                r.scenario,
                r.metric,
                r.value,
                r.threshold,
                r.far,
                r.frr,
                r.genuine,
                r.attacks
            ));
        }
        out
    }
}

/// `threshold,far,frr` lines for external DET/ROC plotting.
pub fn roc_csv(points: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("threshold,far,frr\n");
    for (t, far, frr) in points {
        out.push_str(&format!("{t:.6},{far:.6},{frr:.6}\n"));
    }
    out
}

/// Shared protocol settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub train: TrainConfig,
    /// Cross-validation folds used when a corpus has no dev split.
    pub folds: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            train: TrainConfig::default(),
            folds: 5,
            seed: 7,
        }
    }
}

/// A trained model with its tuning summary and the operating threshold
/// fixed on the training corpus.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: Model,
    pub tuned: GridSearchResult,
    pub threshold: f64,
}

/// Picks `(C, kernel)` on held-out data and fixes the operating threshold:
/// with a dev split, hyperparameters and threshold come from dev-set EER;
/// otherwise from pooled subject-disjoint cross-validation scores on the
/// train split.
fn tune(
    train: &[Sample],
    dev: &[Sample],
    kind: KernelKind,
    cfg: &ProtocolConfig,
) -> Result<(GridSearchResult, f64)> {
    if dev.is_empty() {
        let tuned = grid_search(train, kind, &cfg.train, cfg.folds, cfg.seed)?;
        let pooled = ScoreSet::from_labeled(cv_scores(
            train,
            tuned.kernel,
            tuned.c,
            &cfg.train,
            cfg.folds,
            cfg.seed,
        )?);
        let point = eer(&pooled)?;
        return Ok((tuned, point.threshold));
    }

    cfg.train.validate()?;
    let points = grid_points(kind, &cfg.train);
    let evaluated: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(c, kernel)| -> Result<(f64, f64)> {
            let model = svm_train(train, kernel, c, &cfg.train)?;
            let mut set = ScoreSet::default();
            for s in dev {
                set.push(model.score(s.descriptor.values())?, s.label);
            }
            let point = eer(&set)?;
            Ok((point.eer, point.threshold))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<usize> = None;
    for (index, (dev_eer, _)) in evaluated.iter().enumerate() {
        if best.is_none_or(|b| *dev_eer < evaluated[b].0) {
            best = Some(index);
        }
    }
    let best = best.expect("grid validated non-empty");
    let (c, kernel) = points[best];
    let (dev_eer, threshold) = evaluated[best];
    Ok((
        GridSearchResult {
            kernel,
            c,
            cv_eer: dev_eer,
        },
        threshold,
    ))
}

/// Tunes, trains on the full train split, and stamps the model with the
/// feature layout and the tuning-time operating threshold.
pub fn train_protocol_model(
    features: &FeatureSet,
    kind: KernelKind,
    cfg: &ProtocolConfig,
) -> Result<TrainedModel> {
    let train = features.samples(Split::Train)?;
    if train.is_empty() {
        return Err(Error::DegenerateTrainingSet);
    }
    let dev = features.samples(Split::Dev)?;
    let (tuned, threshold) = tune(&train, &dev, kind, cfg)?;
    let model = svm_train(&train, tuned.kernel, tuned.c, &cfg.train)?
        .with_stamp(features.stamp().clone())
        .with_threshold(threshold);
    Ok(TrainedModel {
        model,
        tuned,
        threshold,
    })
}

fn score_samples(model: &Model, samples: &[Sample]) -> Result<Vec<(f64, Label)>> {
    samples
        .iter()
        .map(|s| Ok((model.score(s.descriptor.values())?, s.label)))
        .collect()
}

/// Scores the test split and reports EER per scenario. Scenarios missing a
/// class in this corpus are skipped. Also returns the overall-sweep
/// operating points for ROC export.
pub fn score_report(
    features: &FeatureSet,
    model: &Model,
) -> Result<(Report, RocCurve)> {
    let samples = features.samples(Split::Test)?;
    if samples.is_empty() {
        return Err(Error::EmptyScores);
    }
    let scored: Vec<(f64, Label)> = score_samples(model, &samples)?;
    let descriptor = features.descriptor_name();
    let kernel = model.kernel().to_string();

    let mut report = Report::default();
    for scenario in Scenario::STANDARD {
        let mut set = ScoreSet::default();
        for (sample, &(score, label)) in samples.iter().zip(&scored) {
            if scenario.admits(sample) {
                set.push(score, label);
            }
        }
        if set.genuine.is_empty() || set.attack.is_empty() {
            log::warn!("scenario {} lacks a class, skipped", scenario.name());
            continue;
        }
        let point = eer(&set)?;
        report.rows.push(ReportRow {
            descriptor: descriptor.clone(),
            kernel: kernel.clone(),
            scenario: scenario.name(),
            metric: "eer".into(),
            value: point.eer,
            threshold: point.threshold,
            far: point.far,
            frr: point.frr,
            genuine: set.genuine.len(),
            attacks: set.attack.len(),
        });
    }
    let overall = ScoreSet::from_labeled(scored);
    let roc = roc_points(&overall)?;
    Ok((report, roc))
}

/// Per-descriptor result of the intra-corpus protocol.
#[derive(Debug, Clone)]
pub struct IntraOutcome {
    pub descriptor: String,
    pub trained: TrainedModel,
    pub roc: RocCurve,
}

/// Full intra-corpus protocol over one or more descriptor configurations:
/// tune, train, and report test EER per scenario for each feature set.
pub fn run_intra_protocol(
    feature_sets: &[&FeatureSet],
    kind: KernelKind,
    cfg: &ProtocolConfig,
) -> Result<(Report, Vec<IntraOutcome>)> {
    let mut report = Report::default();
    let mut outcomes = Vec::with_capacity(feature_sets.len());
    for features in feature_sets {
        let trained = train_protocol_model(features, kind, cfg)?;
        let (part, roc) = score_report(features, &trained.model)?;
        report.merge(part);
        outcomes.push(IntraOutcome {
            descriptor: features.descriptor_name(),
            trained,
            roc,
        });
    }
    Ok((report, outcomes))
}

/// First-window records of the split used for cross-corpus scoring; train
/// splits carry extra windows that scoring must ignore.
fn first_window_samples(features: &FeatureSet, split: Split) -> Result<Vec<Sample>> {
    Ok(features
        .samples(split)?
        .into_iter()
        .zip(features.split_records(split))
        .filter(|(_, r)| r.window_index == 0)
        .map(|(s, _)| s)
        .collect())
}

/// Cross-corpus protocol: for each kernel family, the model and threshold
/// are fixed on corpus `a` (dev EER when `a` has a dev split, pooled CV
/// scores otherwise) and HTER is reported on corpus `b`, both on its
/// tuning-side split (dev when present, else train) and on its test split.
pub fn run_cross_protocol(
    a: &FeatureSet,
    b: &FeatureSet,
    kinds: &[KernelKind],
    cfg: &ProtocolConfig,
) -> Result<(Report, Vec<TrainedModel>)> {
    if a.stamp() != b.stamp() {
        return Err(Error::DimMismatch {
            expected: a.stamp().dim(),
            actual: b.stamp().dim(),
        });
    }
    let descriptor = a.descriptor_name();
    let b_has_dev = b.split_records(Split::Dev).next().is_some();
    let near_split = if b_has_dev { Split::Dev } else { Split::Train };

    let mut report = Report::default();
    let mut models = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let trained = train_protocol_model(a, kind, cfg)?;
        let kernel = trained.model.kernel().to_string();
        for split in [near_split, Split::Test] {
            let samples = first_window_samples(b, split)?;
            let set = ScoreSet::from_labeled(score_samples(&trained.model, &samples)?);
            if set.genuine.is_empty() || set.attack.is_empty() {
                log::warn!("cross split {split} lacks a class, skipped");
                continue;
            }
            let (far, frr) = far_frr(&set, trained.threshold)?;
            report.rows.push(ReportRow {
                descriptor: descriptor.clone(),
                kernel: kernel.clone(),
                scenario: format!("cross:{split}"),
                metric: "hter".into(),
                value: hter(&set, trained.threshold)?,
                threshold: trained.threshold,
                far,
                frr,
                genuine: set.genuine.len(),
                attacks: set.attack.len(),
            });
        }
        models.push(trained);
    }
    Ok((report, models))
}
