//! Synthetic subjects, images and face-recognition scores in a [`ToyWorld`].
//!
//! Each subject gets one source image (used for pair selection and morphing)
//! and a number of probe images (used for verification). Subjects are spread
//! evenly over the four gender/expression splits.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::toy::{toy_sample_image, ToyWorld};
use crate::error::{Error, Result};
use crate::model::{
    Embedding, Expression, Gender, MatedMorph, MatedScoreSet, MorphPair, NonMatedScoreSet, SubjectMeta,
    SubjectScores,
};
use crate::pairs::cosine;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyImage {
    pub id: String,
    pub subject_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyCohort {
    pub sources: Vec<ToyImage>,
    pub probes: Vec<ToyImage>,
    pub meta: Vec<SubjectMeta>,
}

pub fn toy_cohort(world: &ToyWorld, subjects: usize, probes_per_subject: usize, seed: u64) -> Result<ToyCohort> {
    if subjects < 2 {
        return Err(Error::InsufficientSubjects { found: subjects });
    }
    if probes_per_subject == 0 {
        return Err(Error::InvalidParameter {
            name: "probes_per_subject",
            reason: "must be at least 1".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cohort = ToyCohort {
        sources: Vec::with_capacity(subjects),
        probes: Vec::with_capacity(subjects * probes_per_subject),
        meta: Vec::with_capacity(subjects),
    };
    for i in 0..subjects {
        let subject_id = format!("s{i:04}");
        let identity = world.random_subject(rng.random());
        cohort.sources.push(ToyImage {
            id: format!("{subject_id}-src"),
            subject_id: subject_id.clone(),
            values: toy_sample_image(world, &identity, rng.random())?,
        });
        for p in 0..probes_per_subject {
            cohort.probes.push(ToyImage {
                id: format!("{subject_id}-p{p}"),
                subject_id: subject_id.clone(),
                values: toy_sample_image(world, &identity, rng.random())?,
            });
        }
        cohort.meta.push(SubjectMeta {
            subject_id,
            gender: if i % 2 == 0 { Gender::Female } else { Gender::Male },
            expression: if (i / 2) % 2 == 0 {
                Expression::Neutral
            } else {
                Expression::Smiling
            },
            image_id: None,
        });
    }
    Ok(cohort)
}

impl ToyCohort {
    /// Face-recognition embeddings of the source images.
    pub fn source_embeddings(&self, world: &ToyWorld) -> Result<Vec<Embedding>> {
        self.sources
            .iter()
            .map(|img| Embedding::new(&img.id, &img.subject_id, world.fr_feature(&img.values)?))
            .collect()
    }

    /// Comparison scores between every pair of probes from different subjects.
    pub fn nonmated_scores(&self, world: &ToyWorld) -> Result<NonMatedScoreSet> {
        let features = features(world, &self.probes)?;
        let mut scores = Vec::new();
        for (i, (a, fa)) in self.probes.iter().zip(&features).enumerate() {
            for (b, fb) in self.probes[i + 1..].iter().zip(&features[i + 1..]) {
                if a.subject_id != b.subject_id {
                    scores.push(cosine(fa, fb)?);
                }
            }
        }
        NonMatedScoreSet::new(scores)
    }

    /// Scores of each morph image against the probes of its two subjects.
    pub fn mated_scores(&self, world: &ToyWorld, morphs: &[(String, MorphPair, Vec<f64>)]) -> Result<MatedScoreSet> {
        let mut probes: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
        for p in &self.probes {
            probes
                .entry(p.subject_id.as_str())
                .or_default()
                .push(world.fr_feature(&p.values)?);
        }
        let morphs = morphs
            .iter()
            .map(|(id, pair, image)| {
                let feature = world.fr_feature(image)?;
                let subjects = [&pair.subject_a, &pair.subject_b]
                    .into_iter()
                    .map(|s| {
                        let own = probes
                            .get(s.as_str())
                            .ok_or_else(|| Error::Invalid(format!("no probes for subject {s}")))?;
                        Ok(SubjectScores {
                            subject_id: s.clone(),
                            scores: own.iter().map(|f| cosine(&feature, f)).collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(MatedMorph {
                    morph_id: id.clone(),
                    subjects,
                })
            })
            .collect::<Result<_>>()?;
        MatedScoreSet::new(morphs)
    }
}

fn features(world: &ToyWorld, images: &[ToyImage]) -> Result<Vec<Vec<f64>>> {
    images.iter().map(|img| world.fr_feature(&img.values)).collect()
}

/// `k` distinct cross-subject pairs drawn uniformly from a split, skipping
/// any pair in `exclude` (compared as unordered image id pairs).
pub fn random_pairs(split: &[Embedding], k: usize, exclude: &[MorphPair], seed: u64) -> Result<Vec<MorphPair>> {
    let excluded: BTreeSet<(&str, &str)> = exclude
        .iter()
        .map(|p| ordered(&p.source_a, &p.source_b))
        .collect();
    let mut candidates = Vec::new();
    for (i, a) in split.iter().enumerate() {
        for b in &split[i + 1..] {
            let (lo, hi) = if a.id <= b.id { (a, b) } else { (b, a) };
            if a.subject_id != b.subject_id && !excluded.contains(&(lo.id.as_str(), hi.id.as_str())) {
                candidates.push((lo, hi));
            }
        }
    }
    if candidates.len() < k {
        return Err(Error::Invalid(format!(
            "only {} eligible random pairs, {k} requested",
            candidates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    candidates
        .into_iter()
        .take(k)
        .map(|(lo, hi)| {
            Ok(MorphPair {
                source_a: lo.id.clone(),
                subject_a: lo.subject_id.clone(),
                source_b: hi.id.clone(),
                subject_b: hi.subject_id.clone(),
                lambda: crate::interp::DEFAULT_LAMBDA,
                similarity: cosine(&lo.values, &hi.values)?,
            })
        })
        .collect()
}

fn ordered<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
