//! Shared domain types and their validation.
//!
//! Every type here is immutable once constructed; constructors validate the
//! invariants so downstream modules can rely on them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A face embedding (or any fixed-dimension feature vector) with its labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub id: String,
    pub subject_id: String,
    pub values: Vec<f64>,
}

impl Embedding {
    pub fn new(id: impl Into<String>, subject_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let e = Embedding {
            id: id.into(),
            subject_id: subject_id.into(),
            values,
        };
        if e.values.is_empty() {
            return Err(Error::Invalid(format!("embedding {} has dimension 0", e.id)));
        }
        if !all_finite(&e.values) {
            return Err(Error::NonFiniteValue {
                context: format!("embedding {}", e.id),
            });
        }
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Check that a collection of embeddings is non-empty, finite and of a single
/// dimension. Returns the collection unchanged on success.
pub fn validate_embedding_set(embeddings: Vec<Embedding>) -> Result<Vec<Embedding>> {
    let Some(first) = embeddings.first() else {
        return Err(Error::EmptyScoreSet {
            what: "embedding set".into(),
        });
    };
    let expected = first.dim();
    if expected == 0 {
        return Err(Error::Invalid(format!("embedding {} has dimension 0", first.id)));
    }
    let offending: Vec<String> = embeddings
        .iter()
        .filter(|e| e.dim() != expected)
        .map(|e| e.id.clone())
        .collect();
    if !offending.is_empty() {
        return Err(Error::EmbeddingDimensionMismatch { expected, offending });
    }
    if let Some(bad) = embeddings.iter().find(|e| !all_finite(&e.values)) {
        return Err(Error::NonFiniteValue {
            context: format!("embedding {}", bad.id),
        });
    }
    let mut seen = HashSet::new();
    for e in &embeddings {
        if !seen.insert(e.id.as_str()) {
            return Err(Error::DuplicateKey { key: e.id.clone() });
        }
    }
    Ok(embeddings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expression {
    Neutral,
    Smiling,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Female => "female",
            Gender::Male => "male",
        })
    }
}

impl FromStr for Gender {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            other => Err(Error::Invalid(format!("unknown gender {other:?}"))),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expression::Neutral => "neutral",
            Expression::Smiling => "smiling",
        })
    }
}

impl FromStr for Expression {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neutral" => Ok(Expression::Neutral),
            "smiling" => Ok(Expression::Smiling),
            other => Err(Error::Invalid(format!("unknown expression {other:?}"))),
        }
    }
}

/// Gender and expression labels for a subject.
///
/// When `image_id` is set the entry applies to that single image only, which
/// is how per-image expression labels (one neutral and one smiling frontal
/// image per subject) are expressed. Image-level entries take precedence over
/// subject-level ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub subject_id: String,
    pub gender: Gender,
    pub expression: Expression,
    pub image_id: Option<String>,
}

/// Lookup table over [`SubjectMeta`] entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetaTable {
    entries: Vec<SubjectMeta>,
    by_subject: BTreeMap<String, usize>,
    by_image: BTreeMap<String, usize>,
}

impl MetaTable {
    pub fn new(entries: Vec<SubjectMeta>) -> Result<Self> {
        let mut by_subject = BTreeMap::new();
        let mut by_image = BTreeMap::new();
        for (i, m) in entries.iter().enumerate() {
            let dup = match &m.image_id {
                Some(img) => by_image.insert(img.clone(), i).is_some(),
                None => by_subject.insert(m.subject_id.clone(), i).is_some(),
            };
            if dup {
                let key = m.image_id.clone().unwrap_or_else(|| m.subject_id.clone());
                return Err(Error::DuplicateMetadata { key });
            }
        }
        Ok(MetaTable {
            entries,
            by_subject,
            by_image,
        })
    }

    pub fn entries(&self) -> &[SubjectMeta] {
        &self.entries
    }

    /// Metadata applying to an embedding, if any.
    pub fn lookup(&self, e: &Embedding) -> Option<&SubjectMeta> {
        if let Some(&i) = self.by_image.get(&e.id) {
            let m = &self.entries[i];
            if m.subject_id == e.subject_id {
                return Some(m);
            }
        }
        self.by_subject.get(&e.subject_id).map(|&i| &self.entries[i])
    }
}

/// Semantic and stochastic latent codes of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphCode {
    semantic: Vec<f64>,
    stochastic: Vec<f64>,
    shape: Vec<usize>,
}

impl MorphCode {
    pub fn new(semantic: Vec<f64>, stochastic: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if semantic.is_empty() {
            return Err(Error::Invalid("semantic latent is empty".into()));
        }
        if stochastic.is_empty() {
            return Err(Error::Invalid("stochastic latent is empty".into()));
        }
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Invalid(format!("invalid stochastic shape {shape:?}")));
        }
        let product = shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| Error::Invalid(format!("stochastic shape {shape:?} overflows")))?;
        if product != stochastic.len() {
            return Err(Error::DimensionMismatch {
                context: format!("stochastic shape {shape:?}"),
                expected: product,
                found: stochastic.len(),
            });
        }
        if !all_finite(&semantic) {
            return Err(Error::NonFiniteValue {
                context: "semantic latent".into(),
            });
        }
        if !all_finite(&stochastic) {
            return Err(Error::NonFiniteValue {
                context: "stochastic latent".into(),
            });
        }
        Ok(MorphCode {
            semantic,
            stochastic,
            shape,
        })
    }

    pub fn semantic(&self) -> &[f64] {
        &self.semantic
    }

    pub fn stochastic(&self) -> &[f64] {
        &self.stochastic
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
}

/// An unordered pair of source images selected for morphing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphPair {
    pub source_a: String,
    pub subject_a: String,
    pub source_b: String,
    pub subject_b: String,
    pub lambda: f64,
    pub similarity: f64,
}

impl MorphPair {
    pub fn validate(&self) -> Result<()> {
        if self.source_a == self.source_b {
            return Err(Error::Invalid(format!(
                "pair uses the same source twice ({})",
                self.source_a
            )));
        }
        check_lambda(self.lambda)?;
        if !self.similarity.is_finite() {
            return Err(Error::NonFiniteValue {
                context: format!("similarity of pair {}/{}", self.source_a, self.source_b),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// Probe scores of one contributing subject against a morph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectScores {
    pub subject_id: String,
    pub scores: Vec<f64>,
}

/// Comparison scores of one morph against each of its contributing subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatedMorph {
    pub morph_id: String,
    pub subjects: Vec<SubjectScores>,
}

/// Similarity scores between morphs and the probes of their contributors.
/// Higher means more similar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatedScoreSet {
    morphs: Vec<MatedMorph>,
}

impl MatedScoreSet {
    pub fn new(morphs: Vec<MatedMorph>) -> Result<Self> {
        if morphs.is_empty() {
            return Err(Error::EmptyScoreSet {
                what: "mated score set has no morphs".into(),
            });
        }
        let mut ids = HashSet::new();
        for m in &morphs {
            if !ids.insert(m.morph_id.as_str()) {
                return Err(Error::DuplicateKey {
                    key: m.morph_id.clone(),
                });
            }
            if m.subjects.len() < 2 {
                return Err(Error::Invalid(format!(
                    "morph {} has {} contributing subject(s), need at least 2",
                    m.morph_id,
                    m.subjects.len()
                )));
            }
            for s in &m.subjects {
                if s.scores.is_empty() {
                    return Err(Error::EmptyScoreSet {
                        what: format!("morph {} subject {} has no probe scores", m.morph_id, s.subject_id),
                    });
                }
                if !all_finite(&s.scores) {
                    return Err(Error::NonFiniteValue {
                        context: format!("scores of morph {} subject {}", m.morph_id, s.subject_id),
                    });
                }
            }
        }
        Ok(MatedScoreSet { morphs })
    }

    pub fn morphs(&self) -> &[MatedMorph] {
        &self.morphs
    }

    /// Apply a function to every score, keeping the structure.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let morphs = self
            .morphs
            .iter()
            .map(|m| MatedMorph {
                morph_id: m.morph_id.clone(),
                subjects: m
                    .subjects
                    .iter()
                    .map(|s| SubjectScores {
                        subject_id: s.subject_id.clone(),
                        scores: s.scores.iter().map(|&x| f(x)).collect(),
                    })
                    .collect(),
            })
            .collect();
        MatedScoreSet::new(morphs)
    }
}

/// Impostor similarity scores used to anchor decision thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonMatedScoreSet {
    scores: Vec<f64>,
}

impl NonMatedScoreSet {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyScoreSet {
                what: "non-mated score set".into(),
            });
        }
        if !all_finite(&scores) {
            return Err(Error::NonFiniteValue {
                context: "non-mated scores".into(),
            });
        }
        Ok(NonMatedScoreSet { scores })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// Orientation of detector scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorePolarity {
    HigherIsAttack,
    HigherIsBonafide,
}

impl ScorePolarity {
    pub fn flipped(self) -> Self {
        match self {
            ScorePolarity::HigherIsAttack => ScorePolarity::HigherIsBonafide,
            ScorePolarity::HigherIsBonafide => ScorePolarity::HigherIsAttack,
        }
    }
}

impl fmt::Display for ScorePolarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScorePolarity::HigherIsAttack => "higher_is_attack",
            ScorePolarity::HigherIsBonafide => "higher_is_bonafide",
        })
    }
}

impl FromStr for ScorePolarity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "higher_is_attack" => Ok(ScorePolarity::HigherIsAttack),
            "higher_is_bonafide" => Ok(ScorePolarity::HigherIsBonafide),
            other => Err(Error::Invalid(format!("unknown score polarity {other:?}"))),
        }
    }
}

/// Morphing-attack detector scores for bona fide and attack samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadScoreSet {
    bona_fide: Vec<f64>,
    attack: Vec<f64>,
    polarity: ScorePolarity,
}

impl MadScoreSet {
    pub fn new(bona_fide: Vec<f64>, attack: Vec<f64>, polarity: ScorePolarity) -> Result<Self> {
        if bona_fide.is_empty() {
            return Err(Error::EmptyScoreSet {
                what: "bona fide scores".into(),
            });
        }
        if attack.is_empty() {
            return Err(Error::EmptyScoreSet {
                what: "attack scores".into(),
            });
        }
        if !all_finite(&bona_fide) || !all_finite(&attack) {
            return Err(Error::NonFiniteValue {
                context: "detection scores".into(),
            });
        }
        Ok(MadScoreSet {
            bona_fide,
            attack,
            polarity,
        })
    }

    pub fn bona_fide(&self) -> &[f64] {
        &self.bona_fide
    }

    pub fn attack(&self) -> &[f64] {
        &self.attack
    }

    pub fn polarity(&self) -> ScorePolarity {
        self.polarity
    }

    /// Same samples with every score negated and the polarity flipped.
    pub fn negated(&self) -> Self {
        MadScoreSet {
            bona_fide: self.bona_fide.iter().map(|x| -x).collect(),
            attack: self.attack.iter().map(|x| -x).collect(),
            polarity: self.polarity.flipped(),
        }
    }
}

/// What a [`MetricsReport`] measures; selects the table layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Vulnerability,
    Detectability,
}

/// One scalar result cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub model: String,
    pub morph_type: String,
    pub metric: String,
    pub operating_point: String,
    pub value: f64,
}

impl MetricEntry {
    pub fn key(&self) -> (&str, &str, &str, &str) {
        (&self.model, &self.morph_type, &self.metric, &self.operating_point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub parameters: BTreeMap<String, String>,
}

/// Metric names whose values are not rates and may be any real number.
pub const UNBOUNDED_METRICS: &[&str] = &["threshold"];

/// Structured evaluation results, one entry per table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub kind: ReportKind,
    pub entries: Vec<MetricEntry>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl MetricsReport {
    pub fn new(
        kind: ReportKind,
        entries: Vec<MetricEntry>,
        warnings: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        let r = MetricsReport {
            kind,
            entries,
            warnings,
            provenance,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let mut keys = BTreeSet::new();
        for e in &self.entries {
            if !keys.insert(e.key()) {
                let (m, t, n, o) = e.key();
                return Err(Error::DuplicateKey {
                    key: format!("{m}/{t}/{n}/{o}"),
                });
            }
            if !e.value.is_finite() {
                return Err(Error::NonFiniteValue {
                    context: format!("metric {}/{}/{}", e.model, e.morph_type, e.metric),
                });
            }
            if !UNBOUNDED_METRICS.contains(&e.metric.as_str()) && !(0.0..=1.0).contains(&e.value) {
                return Err(Error::Invalid(format!(
                    "metric {}/{}/{}/{} = {} outside [0, 1]",
                    e.model, e.morph_type, e.metric, e.operating_point, e.value
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, model: &str, morph_type: &str, metric: &str, operating_point: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.key() == (model, morph_type, metric, operating_point))
            .map(|e| e.value)
    }

    /// Concatenate reports of the same kind. Duplicate cells are an error.
    pub fn merge(reports: Vec<MetricsReport>) -> Result<Self> {
        let mut iter = reports.into_iter();
        let Some(mut acc) = iter.next() else {
            return Err(Error::EmptyScoreSet {
                what: "no metrics reports".into(),
            });
        };
        for r in iter {
            if r.kind != acc.kind {
                return Err(Error::Invalid("cannot merge reports of different kinds".into()));
            }
            acc.entries.extend(r.entries);
            acc.warnings.extend(r.warnings);
            acc.provenance.inputs.extend(r.provenance.inputs);
            for (k, v) in r.provenance.parameters {
                acc.provenance.parameters.entry(k).or_insert(v);
            }
        }
        acc.validate()?;
        Ok(acc)
    }
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(id: &str, values: Vec<f64>) -> Embedding {
        Embedding {
            id: id.into(),
            subject_id: format!("s-{id}"),
            values,
        }
    }

    #[test]
    fn validate_accepts_uniform_finite() {
        let set = vec![emb("a", vec![1.0, 2.0, 3.0, 4.0]), emb("b", vec![0.0, 0.5, -1.0, 2.0])];
        assert_eq!(validate_embedding_set(set.clone()).unwrap(), set);
    }

    #[test]
    fn validate_rejects_mixed_dims() {
        let set = vec![emb("a", vec![1.0; 4]), emb("b", vec![1.0; 5])];
        match validate_embedding_set(set) {
            Err(Error::EmbeddingDimensionMismatch { expected, offending }) => {
                assert_eq!(expected, 4);
                assert_eq!(offending, vec!["b".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_nan() {
        let set = vec![emb("a", vec![1.0; 4]), emb("b", vec![1.0, f64::NAN, 0.0, 0.0])];
        assert!(matches!(validate_embedding_set(set), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn validate_rejects_empty() {
        assert!(validate_embedding_set(vec![]).is_err());
    }

    #[test]
    fn morph_code_shape_must_match() {
        assert!(MorphCode::new(vec![1.0], vec![0.0; 6], vec![2, 3]).is_ok());
        assert!(matches!(
            MorphCode::new(vec![1.0], vec![0.0; 6], vec![2, 4]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(MorphCode::new(vec![], vec![0.0; 6], vec![6]).is_err());
        assert!(MorphCode::new(vec![1.0], vec![0.0; 6], vec![6, 0]).is_err());
        assert!(MorphCode::new(vec![f64::INFINITY], vec![0.0; 6], vec![6]).is_err());
    }

    #[test]
    fn mated_set_requires_two_subjects_and_probes() {
        let one = MatedMorph {
            morph_id: "m".into(),
            subjects: vec![SubjectScores {
                subject_id: "a".into(),
                scores: vec![0.1],
            }],
        };
        assert!(MatedScoreSet::new(vec![one]).is_err());
        let empty_probe = MatedMorph {
            morph_id: "m".into(),
            subjects: vec![
                SubjectScores {
                    subject_id: "a".into(),
                    scores: vec![0.1],
                },
                SubjectScores {
                    subject_id: "b".into(),
                    scores: vec![],
                },
            ],
        };
        assert!(matches!(
            MatedScoreSet::new(vec![empty_probe]),
            Err(Error::EmptyScoreSet { .. })
        ));
    }

    #[test]
    fn mad_set_rejects_empty_attack() {
        assert!(matches!(
            MadScoreSet::new(vec![0.1], vec![], ScorePolarity::HigherIsAttack),
            Err(Error::EmptyScoreSet { .. })
        ));
    }

    #[test]
    fn meta_image_entry_wins() {
        let table = MetaTable::new(vec![
            SubjectMeta {
                subject_id: "s1".into(),
                gender: Gender::Female,
                expression: Expression::Neutral,
                image_id: None,
            },
            SubjectMeta {
                subject_id: "s1".into(),
                gender: Gender::Female,
                expression: Expression::Smiling,
                image_id: Some("s1-smile".into()),
            },
        ])
        .unwrap();
        let smile = Embedding::new("s1-smile", "s1", vec![1.0]).unwrap();
        let neutral = Embedding::new("s1-neutral", "s1", vec![1.0]).unwrap();
        assert_eq!(table.lookup(&smile).unwrap().expression, Expression::Smiling);
        assert_eq!(table.lookup(&neutral).unwrap().expression, Expression::Neutral);
    }

    #[test]
    fn meta_duplicate_subject_rejected() {
        let m = SubjectMeta {
            subject_id: "s1".into(),
            gender: Gender::Male,
            expression: Expression::Neutral,
            image_id: None,
        };
        assert!(matches!(
            MetaTable::new(vec![m.clone(), m]),
            Err(Error::DuplicateMetadata { .. })
        ));
    }

    #[test]
    fn report_rejects_duplicate_keys_and_out_of_range() {
        let e = MetricEntry {
            model: "A".into(),
            morph_type: "X".into(),
            metric: "MMPMR".into(),
            operating_point: "MMPMR100".into(),
            value: 0.5,
        };
        let dup = MetricsReport::new(ReportKind::Vulnerability, vec![e.clone(), e.clone()], vec![], Provenance::default());
        assert!(matches!(dup, Err(Error::DuplicateKey { .. })));
        let mut big = e.clone();
        big.value = 1.5;
        assert!(MetricsReport::new(ReportKind::Vulnerability, vec![big], vec![], Provenance::default()).is_err());
        let mut thr = e;
        thr.metric = "threshold".into();
        thr.value = -3.0;
        assert!(MetricsReport::new(ReportKind::Vulnerability, vec![thr], vec![], Provenance::default()).is_ok());
    }
}
