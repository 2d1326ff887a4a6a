//! Browser bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string: either the payload or
//! `{"error": "..."}`. The inner functions are plain Rust so they can be
//! tested natively.

use morphlab_core::backend::{random_pairs, toy_cohort, toy_decode, toy_encode, ToyWorld};
use morphlab_core::mad::{apcer_at_bpcer, det_curve, eer, DEFAULT_BPCER_TARGETS};
use morphlab_core::model::{MadScoreSet, MetaTable, MorphPair, ScorePolarity};
use morphlab_core::pairs::{partition_by_metadata, select_top_pairs};
use morphlab_core::vulnerability::{fmr_threshold, mmpmr};
use morphlab_core::{compose_morph_code, lerp, slerp, subtended_angle, InterpolationParams, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("demo payloads serialize"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Debug, Serialize)]
pub struct Path2 {
    pub angle: f64,
    pub lerp: Vec<[f64; 2]>,
    pub slerp: Vec<[f64; 2]>,
}

/// Lerp and SLerp paths between two 2-D points, `steps + 1` samples each,
/// from `b` (lambda 0) to `a` (lambda 1).
pub fn interpolation_path(a: [f64; 2], b: [f64; 2], steps: usize) -> Result<Path2> {
    let steps = steps.max(1);
    let angle = subtended_angle(&a, &b)?;
    let mut path = Path2 {
        angle,
        lerp: Vec::with_capacity(steps + 1),
        slerp: Vec::with_capacity(steps + 1),
    };
    for i in 0..=steps {
        let lambda = i as f64 / steps as f64;
        let l = lerp(&a, &b, lambda)?;
        let s = slerp(&a, &b, &InterpolationParams::with_lambda(lambda)?)?;
        path.lerp.push([l[0], l[1]]);
        path.slerp.push([s[0], s[1]]);
    }
    Ok(path)
}

#[wasm_bindgen]
pub fn interpolate(ax: f64, ay: f64, bx: f64, by: f64, steps: usize) -> String {
    to_json(interpolation_path([ax, ay], [bx, by], steps))
}

#[derive(Debug, Serialize)]
pub struct DetSummary {
    /// (APCER, BPCER) at every sweep point.
    pub curve: Vec<[f64; 2]>,
    pub eer: f64,
    pub eer_threshold: f64,
    /// (BPCER target, APCER, degenerate).
    pub apcer_at: Vec<(f64, f64, bool)>,
}

/// Gaussian detector scores: bona fide ~ N(0, 1), attacks ~ N(separation, 1).
pub fn det_summary(separation: f64, samples: usize, seed: u64) -> Result<DetSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut draw = |shift: f64| -> Vec<f64> { (0..samples).map(|_| shift + normal.sample(&mut rng)).collect() };
    let bona = draw(0.0);
    let attack = draw(separation);
    let scores = MadScoreSet::new(bona, attack, ScorePolarity::HigherIsAttack)?;
    let e = eer(&scores);
    let apcer_at = DEFAULT_BPCER_TARGETS
        .iter()
        .map(|&t| apcer_at_bpcer(&scores, t).map(|r| (t, r.apcer, r.degenerate)))
        .collect::<Result<_>>()?;
    Ok(DetSummary {
        curve: det_curve(&scores).points().iter().map(|p| [p.apcer, p.bpcer]).collect(),
        eer: e.eer,
        eer_threshold: e.threshold,
        apcer_at,
    })
}

#[wasm_bindgen]
pub fn detection(separation: f64, samples: usize, seed: u32) -> String {
    to_json(det_summary(separation, samples, seed.into()))
}

#[derive(Debug, Serialize)]
pub struct ToyStudy {
    pub thresholds: Vec<f64>,
    pub selected: Vec<f64>,
    pub random: Vec<f64>,
    /// Threshold at FMR 1% on the cohort's non-mated scores.
    pub fmr1: f64,
    pub pairs: usize,
}

/// MMPMR against threshold for the most similar pairs per split versus the
/// same number of random pairs, on the toy world, all in memory.
pub fn toy_study(subjects: usize, pairs_per_split: usize, lambda: f64, seed: u64) -> Result<ToyStudy> {
    let world = ToyWorld::with_seed(seed)?;
    let cohort = toy_cohort(&world, subjects, 2, seed.wrapping_add(1))?;
    let embeddings = cohort.source_embeddings(&world)?;
    let splits = partition_by_metadata(&embeddings, &MetaTable::new(cohort.meta.clone())?)?;
    let mut selected = Vec::new();
    let mut random = Vec::new();
    for (i, (_, split)) in splits.iter().enumerate() {
        let top = select_top_pairs(split, pairs_per_split)?;
        random.extend(random_pairs(split, pairs_per_split, &top, seed.wrapping_add(10 + i as u64))?);
        selected.extend(top);
    }

    let params = InterpolationParams::with_lambda(lambda)?;
    let image = |id: &str| {
        let img = cohort.sources.iter().find(|s| s.id == id).expect("pairs come from the cohort");
        toy_encode(&world, &img.values)
    };
    let morph = |pairs: &[MorphPair]| -> Result<Vec<(String, MorphPair, Vec<f64>)>> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let code = compose_morph_code(&image(&p.source_a)?, &image(&p.source_b)?, &params)?;
                Ok((format!("m{i}"), p.clone(), toy_decode(&world, &code)?))
            })
            .collect()
    };
    let selected_scores = cohort.mated_scores(&world, &morph(&selected)?)?;
    let random_scores = cohort.mated_scores(&world, &morph(&random)?)?;
    let fmr1 = fmr_threshold(&cohort.nonmated_scores(&world)?, 0.01)?.threshold;

    let thresholds: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    Ok(ToyStudy {
        selected: thresholds.iter().map(|&t| mmpmr(&selected_scores, t)).collect(),
        random: thresholds.iter().map(|&t| mmpmr(&random_scores, t)).collect(),
        thresholds,
        fmr1,
        pairs: selected.len(),
    })
}

#[wasm_bindgen]
pub fn study(subjects: usize, pairs_per_split: usize, lambda: f64, seed: u32) -> String {
    to_json(toy_study(subjects, pairs_per_split, lambda, seed.into()))
}
