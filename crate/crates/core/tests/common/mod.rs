//! Brute-force reference implementations and random instance generators
//! shared by the integration tests. Each oracle re-derives its metric from
//! the definition with plain loops, without sorting sweeps or early exits.

#![allow(dead_code)]

pub mod published;
pub mod study;

use morphlab_core::model::{
    Embedding, MadScoreSet, MatedMorph, MatedScoreSet, MorphPair, NonMatedScoreSet, ScorePolarity, SubjectScores,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A score drawn either from a coarse grid (forcing ties) or continuously.
pub fn score(rng: &mut ChaCha8Rng, coarse: bool) -> f64 {
    if coarse {
        rng.random_range(0..8) as f64 / 8.0
    } else {
        rng.random::<f64>()
    }
}

pub fn random_mated(rng: &mut ChaCha8Rng, even_probes: bool) -> MatedScoreSet {
    let coarse = rng.random_bool(0.5);
    let n = rng.random_range(1..=12);
    let probes = rng.random_range(1..=4);
    let morphs = (0..n)
        .map(|i| MatedMorph {
            morph_id: format!("m{i}"),
            subjects: (0..rng.random_range(2..=3))
                .map(|s| {
                    let p = if even_probes { probes } else { rng.random_range(1..=4) };
                    SubjectScores {
                        subject_id: format!("s{s}"),
                        scores: (0..p).map(|_| score(rng, coarse)).collect(),
                    }
                })
                .collect(),
        })
        .collect();
    MatedScoreSet::new(morphs).unwrap()
}

pub fn random_nonmated(rng: &mut ChaCha8Rng) -> NonMatedScoreSet {
    let coarse = rng.random_bool(0.5);
    let n = rng.random_range(1..=300);
    NonMatedScoreSet::new((0..n).map(|_| score(rng, coarse)).collect()).unwrap()
}

pub fn random_mad(rng: &mut ChaCha8Rng, coarse: bool) -> MadScoreSet {
    let nb = rng.random_range(1..=40);
    let na = rng.random_range(1..=40);
    let shift = rng.random_range(0.0..0.5);
    let bona = (0..nb).map(|_| score(rng, coarse)).collect();
    let atk = (0..na).map(|_| score(rng, coarse) + if coarse { 0.0 } else { shift }).collect();
    let polarity = if rng.random_bool(0.5) {
        ScorePolarity::HigherIsAttack
    } else {
        ScorePolarity::HigherIsBonafide
    };
    MadScoreSet::new(bona, atk, polarity).unwrap()
}

// Vulnerability.

pub fn oracle_mmpmr(set: &MatedScoreSet, t: f64) -> f64 {
    let mut hits = 0;
    for m in set.morphs() {
        let mut all = true;
        for s in &m.subjects {
            let mut any = false;
            for &x in &s.scores {
                if x > t {
                    any = true;
                }
            }
            if !any {
                all = false;
            }
        }
        if all {
            hits += 1;
        }
    }
    hits as f64 / set.morphs().len() as f64
}

pub fn oracle_fmmpmr(set: &MatedScoreSet, t: f64) -> f64 {
    let (mut hits, mut total) = (0, 0);
    for m in set.morphs() {
        for p in 0..m.subjects[0].scores.len() {
            total += 1;
            let mut all = true;
            for s in &m.subjects {
                if s.scores[p] <= t {
                    all = false;
                }
            }
            if all {
                hits += 1;
            }
        }
    }
    hits as f64 / total as f64
}

/// FMR at threshold `t`: share of non-mated scores at or above it.
pub fn oracle_fmr(scores: &[f64], t: f64) -> f64 {
    let mut c = 0;
    for &s in scores {
        if s >= t {
            c += 1;
        }
    }
    c as f64 / scores.len() as f64
}

/// Smallest candidate threshold (an observed score, or just above the
/// maximum) with FMR not above the target.
pub fn oracle_fmr_threshold(set: &NonMatedScoreSet, target: f64) -> (f64, f64) {
    let scores = set.scores();
    let mut max = f64::NEG_INFINITY;
    for &s in scores {
        if s > max {
            max = s;
        }
    }
    let mut best: Option<f64> = None;
    for &c in scores.iter().chain(std::iter::once(&max.next_up())) {
        if oracle_fmr(scores, c) <= target && best.is_none_or(|b| c < b) {
            best = Some(c);
        }
    }
    let t = best.unwrap();
    (t, oracle_fmr(scores, t))
}

// Detectability, in the native score domain.

pub fn says_attack(p: ScorePolarity, s: f64, t: f64) -> bool {
    match p {
        ScorePolarity::HigherIsAttack => s >= t,
        ScorePolarity::HigherIsBonafide => s <= t,
    }
}

pub fn oracle_apcer(set: &MadScoreSet, t: f64) -> f64 {
    let mut c = 0;
    for &s in set.attack() {
        if !says_attack(set.polarity(), s, t) {
            c += 1;
        }
    }
    c as f64 / set.attack().len() as f64
}

pub fn oracle_bpcer(set: &MadScoreSet, t: f64) -> f64 {
    let mut c = 0;
    for &s in set.bona_fide() {
        if says_attack(set.polarity(), s, t) {
            c += 1;
        }
    }
    c as f64 / set.bona_fide().len() as f64
}

/// Every observed score plus a threshold beyond the most attack-like one.
pub fn candidates(set: &MadScoreSet) -> Vec<f64> {
    let all: Vec<f64> = set.bona_fide().iter().chain(set.attack()).copied().collect();
    let sentinel = match set.polarity() {
        ScorePolarity::HigherIsAttack => all.iter().copied().fold(f64::NEG_INFINITY, f64::max).next_up(),
        ScorePolarity::HigherIsBonafide => all.iter().copied().fold(f64::INFINITY, f64::min).next_down(),
    };
    let mut out = all;
    out.push(sentinel);
    out
}

/// Is `a` a more lenient attack threshold (classifies more as attack) than `b`?
fn more_lenient(p: ScorePolarity, a: f64, b: f64) -> bool {
    match p {
        ScorePolarity::HigherIsAttack => a < b,
        ScorePolarity::HigherIsBonafide => a > b,
    }
}

/// (eer, threshold): midpoint at the candidate minimising |APCER - BPCER|,
/// ties to the most lenient threshold.
pub fn oracle_eer(set: &MadScoreSet) -> (f64, f64) {
    let p = set.polarity();
    let mut best: Option<(f64, f64, f64)> = None;
    for t in candidates(set) {
        let (a, b) = (oracle_apcer(set, t), oracle_bpcer(set, t));
        let gap = (a - b).abs();
        let better = match best {
            None => true,
            Some((g, bt, _)) => gap < g || (gap == g && more_lenient(p, t, bt)),
        };
        if better {
            best = Some((gap, t, (a + b) / 2.0));
        }
    }
    let (_, t, e) = best.unwrap();
    (e, t)
}

/// (apcer, degenerate): lowest APCER over candidates with BPCER within the
/// target; degenerate when no observed score qualifies.
pub fn oracle_apcer_at_bpcer(set: &MadScoreSet, target: f64) -> (f64, bool) {
    let cands = candidates(set);
    let sentinel = *cands.last().unwrap();
    let mut best = f64::INFINITY;
    let mut observed_ok = false;
    for &t in &cands {
        if oracle_bpcer(set, t) <= target {
            let a = oracle_apcer(set, t);
            if a < best {
                best = a;
            }
            if t != sentinel {
                observed_ok = true;
            }
        }
    }
    (best, !observed_ok)
}

// Pair selection.

pub fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        ab += a[i] * b[i];
    }
    for i in 0..a.len() {
        aa += a[i] * a[i];
    }
    for i in 0..b.len() {
        bb += b[i] * b[i];
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// Selection sort over all cross-subject pairs: highest similarity first,
/// then the lexicographically smallest (lower id, higher id).
pub fn oracle_top_pairs(split: &[Embedding], k: usize) -> Vec<(String, String, f64)> {
    let mut all = Vec::new();
    for i in 0..split.len() {
        for j in 0..split.len() {
            let (a, b) = (&split[i], &split[j]);
            if a.id < b.id && a.subject_id != b.subject_id {
                all.push((a.id.clone(), b.id.clone(), oracle_cosine(&a.values, &b.values)));
            }
        }
    }
    let mut out = Vec::new();
    while out.len() < k && !all.is_empty() {
        let mut best = 0;
        for i in 1..all.len() {
            let (x, y) = (&all[i], &all[best]);
            if x.2 > y.2 || (x.2 == y.2 && (&x.0, &x.1) < (&y.0, &y.1)) {
                best = i;
            }
        }
        out.push(all.remove(best));
    }
    out
}

pub fn as_triples(pairs: &[MorphPair]) -> Vec<(String, String, f64)> {
    pairs
        .iter()
        .map(|p| (p.source_a.clone(), p.source_b.clone(), p.similarity))
        .collect()
}

/// A split of `n` images over `n / 2 + 1` subjects. Quantized vectors avoid
/// zero components and produce many exact similarity ties.
pub fn random_split(rng: &mut ChaCha8Rng, n: usize, quantized: bool) -> Vec<Embedding> {
    let dim = rng.random_range(2..=6);
    let subjects = n / 2 + 1;
    let mut ids: Vec<usize> = (0..n).collect();
    // Shuffle ids so that input order differs from id order.
    for i in (1..n).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    (0..n)
        .map(|i| {
            let values = (0..dim)
                .map(|_| {
                    if quantized {
                        let v = rng.random_range(1..=3) as f64;
                        if rng.random_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect();
            Embedding::new(
                format!("img{:03}", ids[i]),
                format!("sub{:03}", rng.random_range(0..subjects)),
                values,
            )
            .unwrap()
        })
        .collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Angle between two vectors, `2 atan2(|u - v|, |u + v|)` on their unit
/// directions, which stays accurate near 0 and pi.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let unit = |v: &[f64]| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let (u, v) = (unit(a), unit(b));
    let (mut d, mut s) = (0.0, 0.0);
    for i in 0..u.len() {
        d += (u[i] - v[i]) * (u[i] - v[i]);
        s += (u[i] + v[i]) * (u[i] + v[i]);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

pub fn coin(rng: &mut ChaCha8Rng) -> bool {
    rng.random_bool(0.5)
}
