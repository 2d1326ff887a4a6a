//! Morph pair selection: split images by gender and expression, score all
//! cross-subject pairs inside a split by cosine similarity, keep the top k.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::interp::{dot, DEFAULT_LAMBDA};
use crate::model::{Embedding, Expression, Gender, MetaTable, MorphPair};

/// Pairs kept per split when no k is given.
pub const DEFAULT_PAIRS_PER_SPLIT: usize = 250;

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    cosine(&a.values, &b.values)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "cosine similarity".into(),
            expected: a.len(),
            found: b.len(),
        });
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector {
            context: "cosine similarity".into(),
        });
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitKey {
    pub gender: Gender,
    pub expression: Expression,
}

impl SplitKey {
    pub const ALL: [SplitKey; 4] = [
        SplitKey {
            gender: Gender::Female,
            expression: Expression::Neutral,
        },
        SplitKey {
            gender: Gender::Female,
            expression: Expression::Smiling,
        },
        SplitKey {
            gender: Gender::Male,
            expression: Expression::Neutral,
        },
        SplitKey {
            gender: Gender::Male,
            expression: Expression::Smiling,
        },
    ];
}

impl fmt::Display for SplitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.gender, self.expression)
    }
}

/// The four gender/expression splits, in the order of [`SplitKey::ALL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    splits: Vec<(SplitKey, Vec<Embedding>)>,
}

impl Splits {
    pub fn get(&self, key: SplitKey) -> &[Embedding] {
        self.splits
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (SplitKey, &[Embedding])> {
        self.splits.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn total(&self) -> usize {
        self.splits.iter().map(|(_, v)| v.len()).sum()
    }
}

pub fn partition_by_metadata(embeddings: &[Embedding], meta: &MetaTable) -> Result<Splits> {
    let mut missing = BTreeSet::new();
    let mut splits: Vec<(SplitKey, Vec<Embedding>)> = SplitKey::ALL.iter().map(|k| (*k, Vec::new())).collect();
    for e in embeddings {
        match meta.lookup(e) {
            Some(m) => {
                let key = SplitKey {
                    gender: m.gender,
                    expression: m.expression,
                };
                let slot = splits.iter_mut().find(|(k, _)| *k == key).expect("all keys present");
                slot.1.push(e.clone());
            }
            None => {
                missing.insert(e.subject_id.clone());
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingMetadata {
            subjects: missing.into_iter().collect(),
        });
    }
    Ok(Splits { splits })
}

/// Descending similarity, then ascending `(lower id, higher id)`.
pub(crate) fn pair_order(a: &MorphPair, b: &MorphPair) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.source_a.cmp(&b.source_a))
        .then_with(|| a.source_b.cmp(&b.source_b))
}

/// Top `k` most similar cross-subject pairs of a split, most similar first.
///
/// `source_a` is always the lexicographically smaller image id. Selected
/// pairs carry the default lambda.
pub fn select_top_pairs(split: &[Embedding], k: usize) -> Result<Vec<MorphPair>> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "must be at least 1".into(),
        });
    }
    let subjects: BTreeSet<&str> = split.iter().map(|e| e.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(Error::InsufficientSubjects { found: subjects.len() });
    }
    let mut pairs = Vec::with_capacity(split.len() * (split.len() - 1) / 2);
    for (i, a) in split.iter().enumerate() {
        for b in &split[i + 1..] {
            if a.subject_id == b.subject_id {
                continue;
            }
            let similarity = cosine_similarity(a, b)?;
            let (lo, hi) = if a.id <= b.id { (a, b) } else { (b, a) };
            pairs.push(MorphPair {
                source_a: lo.id.clone(),
                subject_a: lo.subject_id.clone(),
                source_b: hi.id.clone(),
                subject_b: hi.subject_id.clone(),
                lambda: DEFAULT_LAMBDA,
                similarity,
            });
        }
    }
    if k < pairs.len() {
        pairs.select_nth_unstable_by(k - 1, pair_order);
        pairs.truncate(k);
    }
    pairs.sort_unstable_by(pair_order);
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SubjectMeta;

    fn emb(id: &str, subject: &str, values: Vec<f64>) -> Embedding {
        Embedding::new(id, subject, values).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let a = emb("a", "A", vec![1.0, 2.0, 3.0]);
        let b = emb("b", "B", vec![3.0, 2.0, 1.0]);
        assert_eq!(cosine_similarity(&a, &a).unwrap(), 1.0);
        assert!((cosine_similarity(&a, &b).unwrap() - 10.0 / 14.0).abs() < 1e-15);
        let x = emb("x", "X", vec![1.0, 0.0]);
        let y = emb("y", "Y", vec![0.0, 5.0]);
        assert_eq!(cosine_similarity(&x, &y).unwrap(), 0.0);
        let z = emb("z", "Z", vec![0.0, 0.0]);
        assert!(matches!(cosine_similarity(&x, &z), Err(Error::ZeroVector { .. })));
        assert!(matches!(cosine_similarity(&x, &a), Err(Error::DimensionMismatch { .. })));
    }

    fn meta(subject: &str, gender: Gender, expression: Expression) -> SubjectMeta {
        SubjectMeta {
            subject_id: subject.into(),
            gender,
            expression,
            image_id: None,
        }
    }

    #[test]
    fn partition_one_per_category() {
        let embs = vec![
            emb("1", "a", vec![1.0]),
            emb("2", "b", vec![1.0]),
            emb("3", "c", vec![1.0]),
            emb("4", "d", vec![1.0]),
        ];
        let table = MetaTable::new(vec![
            meta("a", Gender::Female, Expression::Neutral),
            meta("b", Gender::Female, Expression::Smiling),
            meta("c", Gender::Male, Expression::Neutral),
            meta("d", Gender::Male, Expression::Smiling),
        ])
        .unwrap();
        let splits = partition_by_metadata(&embs, &table).unwrap();
        for (key, expected) in SplitKey::ALL.iter().zip(["1", "2", "3", "4"]) {
            let s = splits.get(*key);
            assert_eq!(s.len(), 1);
            assert_eq!(s[0].id, expected);
        }
    }

    #[test]
    fn partition_missing_metadata() {
        let embs = vec![emb("1", "a", vec![1.0]), emb("2", "ghost", vec![1.0])];
        let table = MetaTable::new(vec![meta("a", Gender::Male, Expression::Neutral)]).unwrap();
        match partition_by_metadata(&embs, &table) {
            Err(Error::MissingMetadata { subjects }) => assert_eq!(subjects, vec!["ghost".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partition_frll_shaped() {
        // 102 subjects, one neutral and one smiling frontal image each.
        let mut embs = Vec::new();
        let mut entries = Vec::new();
        for s in 0..102 {
            let subject = format!("s{s:03}");
            let gender = if s % 3 == 0 { Gender::Male } else { Gender::Female };
            for expression in [Expression::Neutral, Expression::Smiling] {
                let id = format!("{subject}-{expression}");
                embs.push(emb(&id, &subject, vec![1.0, s as f64]));
                entries.push(SubjectMeta {
                    subject_id: subject.clone(),
                    gender,
                    expression,
                    image_id: Some(id),
                });
            }
        }
        let splits = partition_by_metadata(&embs, &MetaTable::new(entries).unwrap()).unwrap();
        assert_eq!(splits.total(), 204);
    }

    #[test]
    fn top_pairs_three_subjects() {
        // Rows of the Cholesky factor of the Gram matrix with
        // AB = 0.9, AC = 0.5, BC = 0.7.
        let l22 = 0.19f64.sqrt();
        let l32 = 0.25 / l22;
        let l33 = (1.0 - 0.25 - l32 * l32).sqrt();
        let split = vec![
            emb("A", "A", vec![1.0, 0.0, 0.0]),
            emb("B", "B", vec![0.9, l22, 0.0]),
            emb("C", "C", vec![0.5, l32, l33]),
        ];
        assert!((cosine_similarity(&split[0], &split[2]).unwrap() - 0.5).abs() < 1e-12);
        let pairs = select_top_pairs(&split, 2).unwrap();
        let ids: Vec<_> = pairs.iter().map(|p| (p.source_a.as_str(), p.source_b.as_str())).collect();
        assert_eq!(ids, vec![("A", "B"), ("B", "C")]);
        assert!((pairs[0].similarity - 0.9).abs() < 1e-12);
        assert!((pairs[1].similarity - 0.7).abs() < 1e-12);
    }

    #[test]
    fn top_pairs_clamps_k_and_breaks_ties() {
        let split = vec![
            emb("d", "D", vec![1.0, 1.0]),
            emb("b", "B", vec![1.0, 1.0]),
            emb("c", "C", vec![1.0, 1.0]),
        ];
        let pairs = select_top_pairs(&split, 10).unwrap();
        let ids: Vec<_> = pairs.iter().map(|p| (p.source_a.as_str(), p.source_b.as_str())).collect();
        assert_eq!(ids, vec![("b", "c"), ("b", "d"), ("c", "d")]);
    }

    #[test]
    fn top_pairs_skips_same_subject() {
        let split = vec![
            emb("a1", "A", vec![1.0, 0.0]),
            emb("a2", "A", vec![1.0, 0.0]),
            emb("b1", "B", vec![0.0, 1.0]),
        ];
        let pairs = select_top_pairs(&split, 10).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.subject_a != p.subject_b));
    }

    #[test]
    fn top_pairs_needs_two_subjects() {
        let split = vec![emb("a1", "A", vec![1.0]), emb("a2", "A", vec![2.0])];
        assert!(matches!(
            select_top_pairs(&split, 3),
            Err(Error::InsufficientSubjects { found: 1 })
        ));
    }
}
