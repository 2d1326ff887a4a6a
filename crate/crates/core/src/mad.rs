//! Morphing attack detection metrics: APCER, BPCER, the DET operating
//! curve, EER and APCER at a fixed BPCER.
//!
//! Internally every score is turned into an attack score `a` (the score
//! itself for `higher_is_attack`, its negation otherwise) and a sample is
//! classified as attack iff `a >= t`. Ties therefore count as attacks.
//! Thresholds are reported back in the caller's score domain.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{MadScoreSet, MetricEntry, MetricsReport, Provenance, ReportKind, ScorePolarity};

/// BPCER budgets evaluated when none are given (1%, 10% and 20%).
pub const DEFAULT_BPCER_TARGETS: [f64; 3] = [0.01, 0.10, 0.20];

fn orient(polarity: ScorePolarity, score: f64) -> f64 {
    match polarity {
        ScorePolarity::HigherIsAttack => score,
        ScorePolarity::HigherIsBonafide => -score,
    }
}

/// Fraction of attack samples classified as bona fide at `threshold`.
pub fn apcer(scores: &MadScoreSet, threshold: f64) -> f64 {
    let p = scores.polarity();
    let t = orient(p, threshold);
    let missed = scores.attack().iter().filter(|&&s| orient(p, s) < t).count();
    missed as f64 / scores.attack().len() as f64
}

/// Fraction of bona fide samples classified as attacks at `threshold`.
pub fn bpcer(scores: &MadScoreSet, threshold: f64) -> f64 {
    let p = scores.polarity();
    let t = orient(p, threshold);
    let rejected = scores.bona_fide().iter().filter(|&&s| orient(p, s) >= t).count();
    rejected as f64 / scores.bona_fide().len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub apcer: f64,
    pub bpcer: f64,
}

/// Error rates at every distinct observed score plus one sentinel beyond the
/// most attack-like score, with thresholds strictly increasing.
///
/// For `higher_is_attack` APCER rises and BPCER falls along the curve; for
/// `higher_is_bonafide` the directions are reversed.
#[derive(Debug, Clone, PartialEq)]
pub struct DetOperatingCurve {
    points: Vec<DetPoint>,
}

impl DetOperatingCurve {
    pub fn points(&self) -> &[DetPoint] {
        &self.points
    }
}

/// Curve points in attack-score orientation (APCER non-decreasing), with the
/// threshold expressed as an attack score.
fn oriented_sweep(scores: &MadScoreSet) -> Vec<DetPoint> {
    let p = scores.polarity();
    let mut bona: Vec<f64> = scores.bona_fide().iter().map(|&s| orient(p, s)).collect();
    let mut atk: Vec<f64> = scores.attack().iter().map(|&s| orient(p, s)).collect();
    bona.sort_unstable_by(f64::total_cmp);
    atk.sort_unstable_by(f64::total_cmp);
    let (nb, na) = (bona.len() as f64, atk.len() as f64);

    let mut thresholds: Vec<f64> = bona.iter().chain(&atk).copied().collect();
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();
    let sentinel = thresholds.last().expect("non-empty").next_up();
    thresholds.push(sentinel);

    // Two pointers: count of samples strictly below the current threshold.
    let (mut ib, mut ia) = (0usize, 0usize);
    thresholds
        .into_iter()
        .map(|t| {
            while ib < bona.len() && bona[ib] < t {
                ib += 1;
            }
            while ia < atk.len() && atk[ia] < t {
                ia += 1;
            }
            DetPoint {
                threshold: t,
                apcer: ia as f64 / na,
                bpcer: (bona.len() - ib) as f64 / nb,
            }
        })
        .collect()
}

pub fn det_curve(scores: &MadScoreSet) -> DetOperatingCurve {
    let mut points = oriented_sweep(scores);
    if scores.polarity() == ScorePolarity::HigherIsBonafide {
        points.reverse();
        for pt in &mut points {
            pt.threshold = -pt.threshold;
        }
    }
    DetOperatingCurve { points }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eer {
    pub eer: f64,
    pub threshold: f64,
}

/// Equal error rate of the step-function curve: the mean of APCER and BPCER
/// at the threshold where they are closest. Ties go to the threshold that
/// classifies more samples as attacks.
pub fn eer(scores: &MadScoreSet) -> Eer {
    let p = scores.polarity();
    let mut best: Option<(f64, DetPoint)> = None;
    for pt in oriented_sweep(scores) {
        let gap = (pt.apcer - pt.bpcer).abs();
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, pt));
        }
    }
    let (_, pt) = best.expect("curve has at least two points");
    Eer {
        eer: (pt.apcer + pt.bpcer) / 2.0,
        threshold: orient(p, pt.threshold),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApcerAtBpcer {
    pub apcer: f64,
    pub achieved_bpcer: f64,
    pub threshold: f64,
    /// Only the sentinel threshold (nothing classified as attack) meets the
    /// budget.
    pub degenerate: bool,
}

/// APCER at the threshold with the largest BPCER not exceeding
/// `bpcer_target`.
pub fn apcer_at_bpcer(scores: &MadScoreSet, bpcer_target: f64) -> Result<ApcerAtBpcer> {
    if !(bpcer_target > 0.0 && bpcer_target < 1.0) {
        return Err(Error::InvalidParameter {
            name: "bpcer_target",
            reason: format!("{bpcer_target} not in (0, 1)"),
        });
    }
    let sweep = oriented_sweep(scores);
    let last = sweep.len() - 1;
    // BPCER is non-increasing along the sweep, so the first feasible point
    // has the largest feasible BPCER and the smallest APCER.
    let (i, pt) = sweep
        .iter()
        .enumerate()
        .find(|(_, pt)| pt.bpcer <= bpcer_target)
        .expect("sentinel has zero BPCER");
    Ok(ApcerAtBpcer {
        apcer: pt.apcer,
        achieved_bpcer: pt.bpcer,
        threshold: orient(scores.polarity(), pt.threshold),
        degenerate: i == last,
    })
}

/// `0.1 -> "BPCER10.00"`.
pub fn bpcer_label(target: f64) -> String {
    format!("BPCER{:.2}", target * 100.0)
}

/// EER and APCER@BPCER cells for every `(detector, morph type)` score set.
///
/// Detector names may carry the training set as `"Detector/TrainSet"`.
pub fn detectability_table(
    sets: &BTreeMap<(String, String), MadScoreSet>,
    bpcer_targets: &[f64],
    provenance: Provenance,
) -> Result<MetricsReport> {
    if sets.is_empty() {
        return Err(Error::EmptyScoreSet {
            what: "no detection score sets".into(),
        });
    }
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for ((model, morph_type), scores) in sets {
        let e = eer(scores);
        let cell = |metric: &str, op: &str, value: f64| MetricEntry {
            model: model.clone(),
            morph_type: morph_type.clone(),
            metric: metric.to_owned(),
            operating_point: op.to_owned(),
            value,
        };
        entries.push(cell("EER", "EER", e.eer));
        entries.push(cell("threshold", "EER", e.threshold));
        if e.eer > 0.5 {
            warnings.push(format!(
                "{model}/{morph_type}: EER above 50%, bona fide samples score as more attack-like than attacks (check score polarity)"
            ));
        }
        for &target in bpcer_targets {
            let r = apcer_at_bpcer(scores, target)?;
            let op = bpcer_label(target);
            entries.push(cell("APCER", &op, r.apcer));
            entries.push(cell("achieved_BPCER", &op, r.achieved_bpcer));
            entries.push(cell("threshold", &op, r.threshold));
            if r.degenerate {
                warnings.push(format!(
                    "{model}/{morph_type}: no threshold meets BPCER {:.2}% except classifying everything as bona fide",
                    target * 100.0
                ));
            }
        }
    }
    MetricsReport::new(ReportKind::Detectability, entries, warnings, provenance)
}
