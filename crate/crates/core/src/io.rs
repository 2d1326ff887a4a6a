//! Canonical text file formats.
//!
//! All files are UTF-8, tab separated and line oriented. The first line is a
//! header: a magic token, the format version `v1`, then optional `key=value`
//! fields. Floats are written in decimal scientific notation with 17
//! significant digits so that every value survives a round trip.
//!
//! | magic                 | records                                             |
//! |-----------------------|-----------------------------------------------------|
//! | `morphlab-embeddings` | `id  subject  v1 .. vd` (`dim=d` in the header)     |
//! | `morphlab-meta`       | `subject= gender= expression= [image=]`             |
//! | `morphlab-pairs`      | `split= source_a= subject_a= source_b= subject_b= similarity= lambda=` |
//! | `morphlab-mated`      | `morph  subject  probe  score` (`model=`, `morph_type=`) |
//! | `morphlab-nonmated`   | `score` (`model=`)                                  |
//! | `morphlab-mad`        | `bona_fide|attack  score` (`model=`, `morph_type=`, `polarity=`) |
//! | `morphlab-code`       | `semantic ..` / `stochastic ..` (`semantic_dim=`, `shape=`) |
//! | `morphlab-images`     | `id= path=`                                         |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    Embedding, Expression, Gender, InputDigest, MadScoreSet, MatedMorph, MatedScoreSet, MetricsReport, MorphCode,
    MorphPair, NonMatedScoreSet, ScorePolarity, SubjectMeta, SubjectScores,
};

pub const VERSION: &str = "v1";

pub const EMBEDDINGS_MAGIC: &str = "morphlab-embeddings";
pub const META_MAGIC: &str = "morphlab-meta";
pub const PAIRS_MAGIC: &str = "morphlab-pairs";
pub const MATED_MAGIC: &str = "morphlab-mated";
pub const NONMATED_MAGIC: &str = "morphlab-nonmated";
pub const MAD_MAGIC: &str = "morphlab-mad";
pub const CODE_MAGIC: &str = "morphlab-code";
pub const IMAGES_MAGIC: &str = "morphlab-images";

/// Decimal text with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: None,
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn parse_f64(s: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line, column, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, column, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

pub(crate) fn parse_usize(s: &str, line: usize, column: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| parse_err(line, column, format!("not a non-negative integer: {s:?}")))
}

/// Reject values that would break the line/tab framing.
pub(crate) fn check_token(what: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        return Err(Error::Invalid(format!("{what} {s:?} is empty or contains tab/newline")));
    }
    Ok(())
}

/// Non-empty lines of a file, numbered from 1.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

/// Parsed `key=value` fields, remembering the column each came from.
#[derive(Debug)]
pub(crate) struct Fields<'a> {
    line: usize,
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Fields<'a> {
    pub(crate) fn parse(tokens: impl Iterator<Item = (usize, &'a str)>, line: usize) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (col, tok) in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(line, col, format!("expected key=value, found {tok:?}")))?;
            if map.insert(k, (col, v)).is_some() {
                return Err(parse_err(line, col, format!("duplicate key {k:?}")));
            }
        }
        Ok(Fields { line, map })
    }

    pub(crate) fn from_line(line_text: &'a str, line: usize) -> Result<Self> {
        Self::parse(line_text.split('\t').enumerate().map(|(i, t)| (i + 1, t)), line)
    }

    pub(crate) fn str(&self, key: &str) -> Result<&'a str> {
        self.map
            .get(key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::schema(format!("line {}: missing field {key:?}", self.line)))
    }

    pub(crate) fn opt(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|(_, v)| *v)
    }

    pub(crate) fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key)?;
        parse_f64(v, self.line, self.map[key].0)
    }

    pub(crate) fn usize(&self, key: &str) -> Result<usize> {
        let v = self.str(key)?;
        parse_usize(v, self.line, self.map[key].0)
    }

    pub(crate) fn parsed<T: std::str::FromStr<Err = Error>>(&self, key: &str) -> Result<T> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|e: Error| parse_err(self.line, self.map[key].0, e.to_string()))
    }

    pub(crate) fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for (k, (col, _)) in &self.map {
            if !known.contains(k) {
                return Err(parse_err(self.line, *col, format!("unknown field {k:?}")));
            }
        }
        Ok(())
    }
}

/// Split off and check the header line. Returns its `key=value` fields and
/// the remaining record lines.
pub(crate) fn header<'a>(text: &'a str, magic: &str) -> Result<(Fields<'a>, Vec<(usize, &'a str)>)> {
    let mut it = lines(text);
    let (n, first) = it
        .next()
        .ok_or_else(|| Error::schema(format!("empty file, expected {magic} header")))?;
    let mut toks = first.split('\t');
    let got = toks.next().unwrap_or_default();
    if got != magic {
        return Err(parse_err(n, 1, format!("expected header {magic:?}, found {got:?}")));
    }
    match toks.next() {
        Some(VERSION) => {}
        other => {
            return Err(parse_err(
                n,
                2,
                format!("unsupported format version {:?}", other.unwrap_or_default()),
            ))
        }
    }
    let fields = Fields::parse(first.split('\t').enumerate().skip(2).map(|(i, t)| (i + 1, t)), n)?;
    Ok((fields, it.collect()))
}

fn header_line(magic: &str, fields: &[(&str, String)]) -> String {
    let mut s = format!("{magic}\t{VERSION}");
    for (k, v) in fields {
        s.push('\t');
        s.push_str(k);
        s.push('=');
        s.push_str(v);
    }
    s.push('\n');
    s
}

// ---------------------------------------------------------------- embeddings

pub fn format_embeddings(embeddings: &[Embedding]) -> Result<String> {
    let dim = embeddings.first().map(Embedding::dim).unwrap_or(0);
    let mut out = header_line(EMBEDDINGS_MAGIC, &[("dim", dim.to_string())]);
    for e in embeddings {
        check_token("embedding id", &e.id)?;
        check_token("subject id", &e.subject_id)?;
        if e.dim() != dim {
            return Err(Error::EmbeddingDimensionMismatch {
                expected: dim,
                offending: vec![e.id.clone()],
            });
        }
        out.push_str(&e.id);
        out.push('\t');
        out.push_str(&e.subject_id);
        for v in &e.values {
            out.push('\t');
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_embeddings(text: &str) -> Result<Vec<Embedding>> {
    let (h, rows) = header(text, EMBEDDINGS_MAGIC)?;
    h.reject_unknown(&["dim"])?;
    let dim = h.usize("dim")?;
    if dim == 0 {
        return Err(Error::schema("dim must be at least 1"));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (n, line) in rows {
        let toks: Vec<&str> = line.split('\t').collect();
        if toks.len() != dim + 2 {
            return Err(parse_err(
                n,
                toks.len().min(dim + 2) + 1,
                format!("expected id, subject and {dim} values, found {} fields", toks.len()),
            ));
        }
        let values = toks[2..]
            .iter()
            .enumerate()
            .map(|(i, t)| parse_f64(t, n, i + 3))
            .collect::<Result<Vec<_>>>()?;
        out.push(Embedding::new(toks[0], toks[1], values)?);
    }
    Ok(out)
}

// ------------------------------------------------------------------ metadata

pub fn format_meta(entries: &[SubjectMeta]) -> Result<String> {
    let mut out = header_line(META_MAGIC, &[]);
    for m in entries {
        check_token("subject id", &m.subject_id)?;
        out.push_str(&format!(
            "subject={}\tgender={}\texpression={}",
            m.subject_id, m.gender, m.expression
        ));
        if let Some(img) = &m.image_id {
            check_token("image id", img)?;
            out.push_str(&format!("\timage={img}"));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_meta(text: &str) -> Result<Vec<SubjectMeta>> {
    let (h, rows) = header(text, META_MAGIC)?;
    h.reject_unknown(&[])?;
    rows.into_iter()
        .map(|(n, line)| {
            let f = Fields::from_line(line, n)?;
            f.reject_unknown(&["subject", "gender", "expression", "image"])?;
            Ok(SubjectMeta {
                subject_id: f.str("subject")?.to_owned(),
                gender: f.parsed::<Gender>("gender")?,
                expression: f.parsed::<Expression>("expression")?,
                image_id: f.opt("image").map(str::to_owned),
            })
        })
        .collect()
}

// --------------------------------------------------------------------- pairs

/// A selected pair together with the split it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub split: String,
    pub pair: MorphPair,
}

pub fn format_pairs(records: &[PairRecord]) -> Result<String> {
    let mut out = header_line(PAIRS_MAGIC, &[]);
    for r in records {
        let p = &r.pair;
        for (what, s) in [
            ("split", &r.split),
            ("source_a", &p.source_a),
            ("subject_a", &p.subject_a),
            ("source_b", &p.source_b),
            ("subject_b", &p.subject_b),
        ] {
            check_token(what, s)?;
        }
        out.push_str(&format!(
            "split={}\tsource_a={}\tsubject_a={}\tsource_b={}\tsubject_b={}\tsimilarity={}\tlambda={}\n",
            r.split,
            p.source_a,
            p.subject_a,
            p.source_b,
            p.subject_b,
            format_f64(p.similarity),
            format_f64(p.lambda)
        ));
    }
    Ok(out)
}

pub fn parse_pairs(text: &str) -> Result<Vec<PairRecord>> {
    let (h, rows) = header(text, PAIRS_MAGIC)?;
    h.reject_unknown(&[])?;
    rows.into_iter()
        .map(|(n, line)| {
            let f = Fields::from_line(line, n)?;
            f.reject_unknown(&[
                "split",
                "source_a",
                "subject_a",
                "source_b",
                "subject_b",
                "similarity",
                "lambda",
            ])?;
            let pair = MorphPair {
                source_a: f.str("source_a")?.to_owned(),
                subject_a: f.str("subject_a")?.to_owned(),
                source_b: f.str("source_b")?.to_owned(),
                subject_b: f.str("subject_b")?.to_owned(),
                similarity: f.f64("similarity")?,
                lambda: f.f64("lambda")?,
            };
            pair.validate()
                .map_err(|e| parse_err(n, 1, e.to_string()))?;
            Ok(PairRecord {
                split: f.str("split")?.to_owned(),
                pair,
            })
        })
        .collect()
}

// -------------------------------------------------------------------- scores

/// Labels carried in a score file header.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScoreLabels {
    pub model: String,
    pub morph_type: String,
}

pub fn format_mated(labels: &ScoreLabels, set: &MatedScoreSet) -> Result<String> {
    check_token("model", &labels.model)?;
    check_token("morph type", &labels.morph_type)?;
    let mut out = header_line(
        MATED_MAGIC,
        &[("model", labels.model.clone()), ("morph_type", labels.morph_type.clone())],
    );
    for m in set.morphs() {
        check_token("morph id", &m.morph_id)?;
        for s in &m.subjects {
            check_token("subject id", &s.subject_id)?;
            for (p, score) in s.scores.iter().enumerate() {
                out.push_str(&format!("{}\t{}\t{}\t{}\n", m.morph_id, s.subject_id, p, format_f64(*score)));
            }
        }
    }
    Ok(out)
}

pub fn parse_mated(text: &str) -> Result<(ScoreLabels, MatedScoreSet)> {
    let (h, rows) = header(text, MATED_MAGIC)?;
    h.reject_unknown(&["model", "morph_type"])?;
    let labels = ScoreLabels {
        model: h.str("model")?.to_owned(),
        morph_type: h.str("morph_type")?.to_owned(),
    };
    // morph -> subject -> probe -> score, in order of first appearance.
    let mut morphs: Vec<(String, Vec<(String, BTreeMap<usize, (usize, f64)>)>)> = Vec::new();
    for (n, line) in rows {
        let toks: Vec<&str> = line.split('\t').collect();
        if toks.len() != 4 {
            return Err(parse_err(
                n,
                toks.len().min(4) + 1,
                format!("expected morph, subject, probe, score; found {} fields", toks.len()),
            ));
        }
        let probe = parse_usize(toks[2], n, 3)?;
        let score = parse_f64(toks[3], n, 4)?;
        let mi = match morphs.iter().position(|(m, _)| m == toks[0]) {
            Some(i) => i,
            None => {
                morphs.push((toks[0].to_owned(), Vec::new()));
                morphs.len() - 1
            }
        };
        let subjects = &mut morphs[mi].1;
        let si = match subjects.iter().position(|(s, _)| s == toks[1]) {
            Some(i) => i,
            None => {
                subjects.push((toks[1].to_owned(), BTreeMap::new()));
                subjects.len() - 1
            }
        };
        if subjects[si].1.insert(probe, (n, score)).is_some() {
            return Err(parse_err(n, 3, format!("duplicate probe index {probe}")));
        }
    }
    let mut out = Vec::with_capacity(morphs.len());
    for (morph_id, subjects) in morphs {
        let mut ss = Vec::with_capacity(subjects.len());
        for (subject_id, probes) in subjects {
            for (expected, (&p, &(n, _))) in probes.iter().enumerate() {
                if p != expected {
                    return Err(parse_err(
                        n,
                        3,
                        format!("probe indices of {morph_id}/{subject_id} must be 0..P-1, missing {expected}"),
                    ));
                }
            }
            ss.push(SubjectScores {
                subject_id,
                scores: probes.values().map(|&(_, s)| s).collect(),
            });
        }
        out.push(MatedMorph { morph_id, subjects: ss });
    }
    Ok((labels, MatedScoreSet::new(out)?))
}

pub fn format_nonmated(model: &str, set: &NonMatedScoreSet) -> Result<String> {
    check_token("model", model)?;
    let mut out = header_line(NONMATED_MAGIC, &[("model", model.to_owned())]);
    for s in set.scores() {
        out.push_str(&format_f64(*s));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_nonmated(text: &str) -> Result<(String, NonMatedScoreSet)> {
    let (h, rows) = header(text, NONMATED_MAGIC)?;
    h.reject_unknown(&["model"])?;
    let model = h.str("model")?.to_owned();
    let scores = rows
        .into_iter()
        .map(|(n, line)| {
            if line.contains('\t') {
                return Err(parse_err(n, 2, "expected a single score per line"));
            }
            parse_f64(line, n, 1)
        })
        .collect::<Result<Vec<_>>>()?;
    if scores.is_empty() {
        return Err(Error::schema("non-mated score file has no scores"));
    }
    Ok((model, NonMatedScoreSet::new(scores)?))
}

pub fn format_mad(labels: &ScoreLabels, set: &MadScoreSet) -> Result<String> {
    check_token("model", &labels.model)?;
    check_token("morph type", &labels.morph_type)?;
    let mut out = header_line(
        MAD_MAGIC,
        &[
            ("model", labels.model.clone()),
            ("morph_type", labels.morph_type.clone()),
            ("polarity", set.polarity().to_string()),
        ],
    );
    for s in set.bona_fide() {
        out.push_str(&format!("bona_fide\t{}\n", format_f64(*s)));
    }
    for s in set.attack() {
        out.push_str(&format!("attack\t{}\n", format_f64(*s)));
    }
    Ok(out)
}

pub fn parse_mad(text: &str) -> Result<(ScoreLabels, MadScoreSet)> {
    let (h, rows) = header(text, MAD_MAGIC)?;
    h.reject_unknown(&["model", "morph_type", "polarity"])?;
    let labels = ScoreLabels {
        model: h.str("model")?.to_owned(),
        morph_type: h.str("morph_type")?.to_owned(),
    };
    let polarity: ScorePolarity = h.parsed("polarity")?;
    let (mut bona, mut attack) = (Vec::new(), Vec::new());
    for (n, line) in rows {
        let toks: Vec<&str> = line.split('\t').collect();
        if toks.len() != 2 {
            return Err(parse_err(n, toks.len().min(2) + 1, "expected label and score"));
        }
        let score = parse_f64(toks[1], n, 2)?;
        match toks[0] {
            "bona_fide" => bona.push(score),
            "attack" => attack.push(score),
            other => return Err(parse_err(n, 1, format!("unknown label {other:?}"))),
        }
    }
    if bona.is_empty() {
        return Err(Error::schema("no bona_fide scores"));
    }
    if attack.is_empty() {
        return Err(Error::schema("no attack scores"));
    }
    Ok((labels, MadScoreSet::new(bona, attack, polarity)?))
}

// ---------------------------------------------------------------- morph code

pub fn format_code(code: &MorphCode) -> String {
    let shape = code
        .shape()
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let mut out = header_line(
        CODE_MAGIC,
        &[("semantic_dim", code.semantic().len().to_string()), ("shape", shape)],
    );
    for (name, values) in [("semantic", code.semantic()), ("stochastic", code.stochastic())] {
        out.push_str(name);
        for v in values {
            out.push('\t');
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_code(text: &str) -> Result<MorphCode> {
    let (h, rows) = header(text, CODE_MAGIC)?;
    h.reject_unknown(&["semantic_dim", "shape"])?;
    let semantic_dim = h.usize("semantic_dim")?;
    let shape = h
        .str("shape")?
        .split(',')
        .map(|s| parse_usize(s, 1, 4))
        .collect::<Result<Vec<_>>>()?;
    let mut semantic = None;
    let mut stochastic = None;
    for (n, line) in rows {
        let mut toks = line.split('\t');
        let name = toks.next().unwrap_or_default();
        let values = toks
            .enumerate()
            .map(|(i, t)| parse_f64(t, n, i + 2))
            .collect::<Result<Vec<_>>>()?;
        let slot = match name {
            "semantic" => &mut semantic,
            "stochastic" => &mut stochastic,
            other => return Err(parse_err(n, 1, format!("unknown record {other:?}"))),
        };
        if slot.replace(values).is_some() {
            return Err(parse_err(n, 1, format!("duplicate {name} record")));
        }
    }
    let semantic = semantic.ok_or_else(|| Error::schema("missing semantic record"))?;
    let stochastic = stochastic.ok_or_else(|| Error::schema("missing stochastic record"))?;
    if semantic.len() != semantic_dim {
        return Err(Error::DimensionMismatch {
            context: "semantic record".into(),
            expected: semantic_dim,
            found: semantic.len(),
        });
    }
    MorphCode::new(semantic, stochastic, shape)
}

// -------------------------------------------------------------- image index

/// Image id to file path.
pub fn parse_image_index(text: &str, base: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let (h, rows) = header(text, IMAGES_MAGIC)?;
    h.reject_unknown(&[])?;
    let mut out = BTreeMap::new();
    for (n, line) in rows {
        let f = Fields::from_line(line, n)?;
        f.reject_unknown(&["id", "path"])?;
        let id = f.str("id")?.to_owned();
        let path = base.join(f.str("path")?);
        if out.insert(id.clone(), path).is_some() {
            return Err(parse_err(n, 1, format!("duplicate image id {id:?}")));
        }
    }
    Ok(out)
}

pub fn format_image_index(entries: &BTreeMap<String, String>) -> Result<String> {
    let mut out = header_line(IMAGES_MAGIC, &[]);
    for (id, path) in entries {
        check_token("image id", id)?;
        check_token("image path", path)?;
        out.push_str(&format!("id={id}\tpath={path}\n"));
    }
    Ok(out)
}

// ------------------------------------------------------------------- reports

pub fn parse_report(text: &str) -> Result<MetricsReport> {
    let report: MetricsReport = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            Error::schema(e.to_string())
        } else {
            parse_err(e.line(), e.column(), e.to_string())
        }
    })?;
    report.validate()?;
    Ok(report)
}

pub fn format_report(report: &MetricsReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

// ----------------------------------------------------------------- file I/O

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Write through a temporary sibling and rename, so readers never observe a
/// partially written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Read and parse a file, attaching the path to parse errors.
pub fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    let text = read_text(path)?;
    parse(&text).map_err(|e| e.with_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_round_trip() {
        let set = vec![
            Embedding::new("a", "s1", vec![0.1, -2.5e-300, 1.0 / 3.0]).unwrap(),
            Embedding::new("b", "s1", vec![-0.0, 7.0, f64::MAX]).unwrap(),
            Embedding::new("c", "s2", vec![f64::MIN_POSITIVE, 1e300, -123.456]).unwrap(),
        ];
        let text = format_embeddings(&set).unwrap();
        let back = parse_embeddings(&text).unwrap();
        assert_eq!(back, set);
        assert!(back[1].values[0].is_sign_negative());
    }

    #[test]
    fn embeddings_short_row() {
        let text = "morphlab-embeddings\tv1\tdim=4\na\ts\t1\t2\t3\t4\nb\ts\t1\t2\t3\n";
        match parse_embeddings(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn embeddings_bad_float_and_header() {
        let text = "morphlab-embeddings\tv1\tdim=2\na\ts\t1\tx\n";
        assert!(matches!(
            parse_embeddings(text),
            Err(Error::Parse { line: 2, column: 4, .. })
        ));
        assert!(matches!(
            parse_embeddings("morphlab-embeddings\tv2\tdim=2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_embeddings("morphlab-embeddings\tv1\n"),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            parse_embeddings("morphlab-embeddings\tv1\tdim=1\na\ts\tNaN\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn meta_missing_field_named() {
        let text = "morphlab-meta\tv1\nsubject=a\tgender=female\n";
        match parse_meta(text) {
            Err(Error::Schema { message, .. }) => assert!(message.contains("expression")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mad_empty_attack_is_schema_error() {
        let text = "morphlab-mad\tv1\tmodel=D\tmorph_type=M\tpolarity=higher_is_attack\nbona_fide\t0.1\n";
        assert!(matches!(parse_mad(text), Err(Error::Schema { .. })));
    }

    #[test]
    fn mad_missing_polarity_is_schema_error() {
        let text = "morphlab-mad\tv1\tmodel=D\tmorph_type=M\nbona_fide\t0.1\nattack\t0.2\n";
        match parse_mad(text) {
            Err(Error::Schema { message, .. }) => assert!(message.contains("polarity")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonmated_empty_is_schema_error() {
        assert!(matches!(
            parse_nonmated("morphlab-nonmated\tv1\tmodel=X\n"),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn mated_probe_gaps_rejected() {
        let text = "morphlab-mated\tv1\tmodel=F\tmorph_type=M\nm\ta\t0\t0.5\nm\ta\t2\t0.5\nm\tb\t0\t0.1\n";
        assert!(matches!(parse_mated(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn mated_probe_order_normalised() {
        let text = "morphlab-mated\tv1\tmodel=F\tmorph_type=M\nm\ta\t1\t0.25\nm\ta\t0\t0.5\nm\tb\t0\t0.1\n";
        let (labels, set) = parse_mated(text).unwrap();
        assert_eq!(labels.model, "F");
        assert_eq!(set.morphs()[0].subjects[0].scores, vec![0.5, 0.25]);
    }

    #[test]
    fn code_round_trip() {
        let code = MorphCode::new(vec![0.5, -1.0], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![2, 3]).unwrap();
        assert_eq!(parse_code(&format_code(&code)).unwrap(), code);
    }

    #[test]
    fn tokens_with_tabs_rejected() {
        let e = Embedding::new("a\tb", "s", vec![1.0]).unwrap();
        assert!(format_embeddings(&[e]).is_err());
    }
}
