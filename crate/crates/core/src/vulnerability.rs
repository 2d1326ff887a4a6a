//! Face recognition vulnerability to morphs: FMR-anchored thresholds,
//! MMPMR and FMMPMR.
//!
//! Scores are similarities (higher = more alike). A comparison matches when
//! its score is strictly greater than the threshold; the false match rate of
//! a threshold counts impostor scores at or above it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{MatedScoreSet, MetricEntry, MetricsReport, NonMatedScoreSet, Provenance, ReportKind};

/// FMR targets evaluated when none are given (1% and 0.1%).
pub const DEFAULT_FMR_TARGETS: [f64; 2] = [0.01, 0.001];

/// Threshold derived from a non-mated distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmrThreshold {
    pub threshold: f64,
    pub achieved_fmr: f64,
}

/// A decision threshold anchored at a target FMR.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub fmr_target: f64,
    pub threshold: f64,
    pub achieved_fmr: f64,
    pub label: String,
}

impl OperatingPoint {
    pub fn derive(nonmated: &NonMatedScoreSet, fmr_target: f64) -> Result<Self> {
        let t = fmr_threshold(nonmated, fmr_target)?;
        Ok(OperatingPoint {
            fmr_target,
            threshold: t.threshold,
            achieved_fmr: t.achieved_fmr,
            label: operating_point_label(fmr_target),
        })
    }
}

/// `0.01 -> "MMPMR100"`, `0.001 -> "MMPMR1000"`; targets whose reciprocal is
/// not an integer are labelled by the rate itself.
pub fn operating_point_label(fmr_target: f64) -> String {
    let inv = 1.0 / fmr_target;
    let rounded = inv.round();
    if (inv - rounded).abs() <= 1e-9 * rounded {
        format!("MMPMR{}", rounded as u64)
    } else {
        format!("MMPMR@FMR={fmr_target}")
    }
}

fn check_rate(name: &'static str, target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("{target} not in (0, 1)"),
        })
    }
}

/// Smallest threshold among the observed scores (plus one sentinel just above
/// the maximum) whose false match rate does not exceed `fmr_target`.
pub fn fmr_threshold(nonmated: &NonMatedScoreSet, fmr_target: f64) -> Result<FmrThreshold> {
    check_rate("fmr_target", fmr_target)?;
    let mut sorted = nonmated.scores().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;
    // Walk distinct values upward; `i` is the index of the first occurrence,
    // so `n - i` scores are >= sorted[i].
    let mut i = 0;
    while i < n {
        let fmr = (n - i) as f64 / nf;
        if fmr <= fmr_target {
            return Ok(FmrThreshold {
                threshold: sorted[i],
                achieved_fmr: fmr,
            });
        }
        let v = sorted[i];
        while i < n && sorted[i] == v {
            i += 1;
        }
    }
    Ok(FmrThreshold {
        threshold: sorted[n - 1].next_up(),
        achieved_fmr: 0.0,
    })
}

/// Fraction of morphs for which every contributing subject has at least one
/// probe scoring above `threshold`.
pub fn mmpmr(mated: &MatedScoreSet, threshold: f64) -> f64 {
    let morphs = mated.morphs();
    let accepted = morphs
        .iter()
        .filter(|m| {
            m.subjects
                .iter()
                .map(|s| s.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
                > threshold
        })
        .count();
    accepted as f64 / morphs.len() as f64
}

/// Fraction of probe attempts in which all contributing subjects match the
/// morph at once. Attempt `p` pairs the `p`-th probe score of every subject,
/// so all subjects of a morph must have the same number of probes. Attempts
/// are pooled across morphs.
pub fn fmmpmr(mated: &MatedScoreSet, threshold: f64) -> Result<f64> {
    let mut attempts = 0usize;
    let mut accepted = 0usize;
    for m in mated.morphs() {
        let p = m.subjects[0].scores.len();
        if m.subjects.iter().any(|s| s.scores.len() != p) {
            return Err(Error::UnevenProbeCounts {
                morph: m.morph_id.clone(),
            });
        }
        attempts += p;
        accepted += (0..p)
            .filter(|&i| m.subjects.iter().all(|s| s.scores[i] > threshold))
            .count();
    }
    Ok(accepted as f64 / attempts as f64)
}

/// Inputs for one vulnerability table.
#[derive(Debug, Clone, Default)]
pub struct VulnerabilityInputs {
    /// Keyed by `(fr_model, morph_type)`.
    pub mated: BTreeMap<(String, String), MatedScoreSet>,
    /// Keyed by `fr_model`.
    pub nonmated: BTreeMap<String, NonMatedScoreSet>,
}

/// MMPMR (and optionally FMMPMR) for every `(model, morph type, FMR target)`
/// cell. Thresholds and achieved FMRs are recorded per model under morph type
/// `"*"`.
pub fn vulnerability_table(
    inputs: &VulnerabilityInputs,
    fmr_targets: &[f64],
    with_fmmpmr: bool,
    provenance: Provenance,
) -> Result<MetricsReport> {
    if fmr_targets.is_empty() {
        return Err(Error::InvalidParameter {
            name: "fmr_targets",
            reason: "at least one target required".into(),
        });
    }
    if inputs.mated.is_empty() {
        return Err(Error::EmptyScoreSet {
            what: "no mated score sets".into(),
        });
    }
    let mated_models: BTreeSet<&str> = inputs.mated.keys().map(|(m, _)| m.as_str()).collect();
    for model in &mated_models {
        if !inputs.nonmated.contains_key(*model) {
            return Err(Error::KeyMismatch {
                missing: format!("non-mated scores for model {model}"),
            });
        }
    }
    for model in inputs.nonmated.keys() {
        if !mated_models.contains(model.as_str()) {
            return Err(Error::KeyMismatch {
                missing: format!("mated scores for model {model}"),
            });
        }
    }

    let mut entries = Vec::new();
    for (model, nonmated) in &inputs.nonmated {
        let points = fmr_targets
            .iter()
            .map(|&t| OperatingPoint::derive(nonmated, t))
            .collect::<Result<Vec<_>>>()?;
        for op in &points {
            entries.push(entry(model, "*", "threshold", &op.label, op.threshold));
            entries.push(entry(model, "*", "achieved_fmr", &op.label, op.achieved_fmr));
        }
        for ((_, morph_type), mated) in inputs.mated.iter().filter(|((m, _), _)| m == model) {
            for op in &points {
                entries.push(entry(model, morph_type, "MMPMR", &op.label, mmpmr(mated, op.threshold)));
                if with_fmmpmr {
                    entries.push(entry(model, morph_type, "FMMPMR", &op.label, fmmpmr(mated, op.threshold)?));
                }
            }
        }
    }
    MetricsReport::new(ReportKind::Vulnerability, entries, Vec::new(), provenance)
}

fn entry(model: &str, morph_type: &str, metric: &str, op: &str, value: f64) -> MetricEntry {
    MetricEntry {
        model: model.to_owned(),
        morph_type: morph_type.to_owned(),
        metric: metric.to_owned(),
        operating_point: op.to_owned(),
        value,
    }
}
