//! Biometric error metrics: FAR/FRR at a threshold, the equal error rate,
//! and HTER at a dev-fixed threshold.
//!
//! Score polarity is genuine-positive and the acceptance rule is
//! `score >= threshold` throughout.

pub mod protocol;

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Genuine and attack scores of one evaluation.
#[derive(Debug, Clone, Default)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub attack: Vec<f64>,
}

impl ScoreSet {
    pub fn new(genuine: Vec<f64>, attack: Vec<f64>) -> Self {
        ScoreSet { genuine, attack }
    }

    pub fn from_labeled<I: IntoIterator<Item = (f64, Label)>>(scores: I) -> Self {
        let mut set = ScoreSet::default();
        for (score, label) in scores {
            set.push(score, label);
        }
        set
    }

    pub fn push(&mut self, score: f64, label: Label) {
        match label {
            Label::Genuine => self.genuine.push(score),
            Label::Attack => self.attack.push(score),
        }
    }

    pub fn len(&self) -> usize {
        self.genuine.len() + self.attack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genuine.is_empty() && self.attack.is_empty()
    }

    fn require_both(&self) -> Result<()> {
        if self.genuine.is_empty() || self.attack.is_empty() {
            return Err(Error::EmptyScores);
        }
        Ok(())
    }
}

/// False acceptance rate (attack scores `>=` threshold) and false rejection
/// rate (genuine scores `<` threshold).
pub fn far_frr(scores: &ScoreSet, threshold: f64) -> Result<(f64, f64)> {
    scores.require_both()?;
    let accepted_attacks = scores.attack.iter().filter(|&&s| s >= threshold).count();
    let rejected_genuine = scores.genuine.iter().filter(|&&s| s < threshold).count();
    Ok((
        accepted_attacks as f64 / scores.attack.len() as f64,
        rejected_genuine as f64 / scores.genuine.len() as f64,
    ))
}

/// Equal-error operating point chosen by the midpoint sweep in [`eer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EerPoint {
    pub eer: f64,
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// Equal error rate estimated by sweeping every achievable operating point:
/// thresholds at the midpoints between adjacent distinct pooled scores plus
/// minus/plus infinity. The point minimizing `|FAR - FRR|` wins; ties go to
/// smaller `FAR + FRR`, then to the lower threshold. The reported rate is
/// `(FAR + FRR) / 2` there.
pub fn eer(scores: &ScoreSet) -> Result<EerPoint> {
    let thresholds = sweep_thresholds(scores)?;
    let mut best: Option<EerPoint> = None;
    for t in thresholds {
        let (far, frr) = far_frr(scores, t)?;
        let candidate = EerPoint {
            eer: 0.5 * (far + frr),
            threshold: t,
            far,
            frr,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                let (diff_c, diff_b) = ((far - frr).abs(), (b.far - b.frr).abs());
                diff_c < diff_b || (diff_c == diff_b && far + frr < b.far + b.frr)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("threshold list is never empty"))
}

/// Half total error rate: `(FAR + FRR) / 2` at a threshold fixed elsewhere
/// (on the development set, never on these scores).
pub fn hter(scores: &ScoreSet, threshold_from_dev: f64) -> Result<f64> {
    let (far, frr) = far_frr(scores, threshold_from_dev)?;
    Ok(0.5 * (far + frr))
}

/// Every achievable operating point: midpoints between adjacent distinct
/// pooled scores, bracketed by minus/plus infinity.
fn sweep_thresholds(scores: &ScoreSet) -> Result<Vec<f64>> {
    scores.require_both()?;
    let mut pooled: Vec<f64> = scores
        .genuine
        .iter()
        .chain(scores.attack.iter())
        .copied()
        .collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("scores must not be NaN"));
    pooled.dedup();

    let mut thresholds = Vec::with_capacity(pooled.len() + 1);
    thresholds.push(f64::NEG_INFINITY);
    for pair in pooled.windows(2) {
        thresholds.push(pair[0] + 0.5 * (pair[1] - pair[0]));
    }
    thresholds.push(f64::INFINITY);
    Ok(thresholds)
}

/// `(threshold, FAR, FRR)` operating points in ascending threshold order.
pub type RocCurve = Vec<(f64, f64, f64)>;

/// Every achievable operating point of a score set; the raw material for
/// DET/ROC plotting.
pub fn roc_points(scores: &ScoreSet) -> Result<RocCurve> {
    sweep_thresholds(scores)?
        .into_iter()
        .map(|t| {
            let (far, frr) = far_frr(scores, t)?;
            Ok((t, far, frr))
        })
        .collect()
}
