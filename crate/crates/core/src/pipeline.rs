//! End-to-end morph generation: encode both sources, compose the morph code,
//! decode it.
//!
//! Job directory layout:
//!
//! ```text
//! encode/manifest.txt   encode/out/enc-NNNNN.code   encode/status/...
//! decode/manifest.txt   decode/in/morph-NNNNN.code  decode/out/morph-NNNNN.<fmt>
//! decode/status/...     morphs.txt
//! ```
//!
//! `morphs.txt` lists one record per input pair, including failed ones.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::backend::{Backend, BackendDescriptor, BackendJob, Request, RequestOp};
use crate::error::{Error, Result};
use crate::interp::{compose_morph_code, InterpolationParams, DEFAULT_COLLINEARITY_EPSILON};
use crate::io::{self, check_token, format_f64, header, Fields};
use crate::model::{MorphCode, MorphPair};

pub const MORPHS_FILE: &str = "morphs.txt";
pub const MORPHS_MAGIC: &str = "morphlab-morphs";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Overrides the lambda stored in each pair.
    pub lambda: Option<f64>,
    pub collinearity_epsilon: f64,
    pub seed: u64,
    pub backend_params: BTreeMap<String, String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lambda: None,
            collinearity_epsilon: DEFAULT_COLLINEARITY_EPSILON,
            seed: 0,
            backend_params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MorphOutcome {
    Ok {
        /// Relative to the job directory.
        image: PathBuf,
        sha256: String,
        code: MorphCode,
    },
    Failed {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphRecord {
    pub morph_id: String,
    /// The pair with the lambda actually used.
    pub pair: MorphPair,
    pub outcome: MorphOutcome,
}

impl MorphRecord {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, MorphOutcome::Ok { .. })
    }
}

fn prepare_job_dir(job_dir: &Path) -> Result<()> {
    if job_dir.exists() {
        let mut entries = fs::read_dir(job_dir).map_err(|e| Error::io(job_dir, e))?;
        if entries.next().is_some() {
            return Err(Error::Invalid(format!(
                "job directory {} is not empty",
                job_dir.display()
            )));
        }
    }
    fs::create_dir_all(job_dir).map_err(|e| Error::io(job_dir, e))
}

/// Generate one morph per pair. Per-pair failures are recorded, not fatal;
/// `Err` is returned only for job-level problems (bad inputs, backend
/// crash, I/O).
pub fn run_morph_pipeline(
    pairs: &[MorphPair],
    images: &BTreeMap<String, PathBuf>,
    backend: &dyn Backend,
    config: &PipelineConfig,
    job_dir: &Path,
) -> Result<Vec<MorphRecord>> {
    let descriptor = backend.descriptor()?;
    descriptor.validate()?;
    let params: Vec<InterpolationParams> = pairs
        .iter()
        .map(|p| {
            p.validate()?;
            InterpolationParams::new(config.lambda.unwrap_or(p.lambda), config.collinearity_epsilon)
        })
        .collect::<Result<_>>()?;
    prepare_job_dir(job_dir)?;

    // Stage 1: encode each distinct source once.
    let mut sources: Vec<&str> = pairs
        .iter()
        .flat_map(|p| [p.source_a.as_str(), p.source_b.as_str()])
        .filter(|id| images.contains_key(*id))
        .collect();
    sources.sort_unstable();
    sources.dedup();
    let encode_dir = job_dir.join("encode");
    let encode_job = BackendJob {
        job_dir: encode_dir.clone(),
        backend_name: descriptor.name.clone(),
        seed: config.seed,
        params: config.backend_params.clone(),
        requests: sources
            .iter()
            .enumerate()
            .map(|(i, id)| Request {
                id: format!("enc-{i:05}"),
                op: RequestOp::Encode,
                input: images[*id].clone(),
                output: PathBuf::from(format!("out/enc-{i:05}.code")),
            })
            .collect(),
    };
    let codes = run_stage(backend, &encode_job)?
        .into_iter()
        .zip(&sources)
        .map(|(res, id)| {
            let code = res.and_then(|out| {
                let code = io::load(&out, io::parse_code).map_err(|e| e.to_string())?;
                descriptor.check_code(&code).map_err(|e| e.to_string())?;
                Ok(code)
            });
            (id.to_string(), code)
        })
        .collect::<BTreeMap<_, _>>();

    // Stage 2: compose in-process, then decode.
    let decode_dir = job_dir.join("decode");
    let mut decode_requests = Vec::new();
    let mut records = Vec::with_capacity(pairs.len());
    for (i, (pair, p)) in pairs.iter().zip(&params).enumerate() {
        let morph_id = format!("morph-{i:05}");
        let mut used = pair.clone();
        used.lambda = p.lambda();
        let composed = compose_pair(&codes, pair, p, &descriptor);
        let outcome = match composed {
            Ok(code) => {
                let input = PathBuf::from(format!("in/{morph_id}.code"));
                io::write_atomic(&decode_dir.join(&input), io::format_code(&code).as_bytes())?;
                decode_requests.push((
                    records.len(),
                    Request {
                        id: format!("dec-{i:05}"),
                        op: RequestOp::Decode,
                        input,
                        output: PathBuf::from(format!("out/{morph_id}.{}", descriptor.image_format)),
                    },
                ));
                MorphOutcome::Ok {
                    image: PathBuf::new(),
                    sha256: String::new(),
                    code,
                }
            }
            Err(reason) => MorphOutcome::Failed { reason },
        };
        records.push(MorphRecord {
            morph_id,
            pair: used,
            outcome,
        });
    }
    let decode_job = BackendJob {
        job_dir: decode_dir.clone(),
        backend_name: descriptor.name.clone(),
        seed: config.seed,
        params: config.backend_params.clone(),
        requests: decode_requests.iter().map(|(_, r)| r.clone()).collect(),
    };
    let decoded = run_stage_raw(backend, &decode_job)?;
    for ((idx, _), outcome) in decode_requests.iter().zip(decoded) {
        let rec = &mut records[*idx];
        rec.outcome = match (outcome.result, &rec.outcome) {
            (Ok(done), MorphOutcome::Ok { code, .. }) => MorphOutcome::Ok {
                image: done
                    .output
                    .strip_prefix(job_dir)
                    .map(Path::to_path_buf)
                    .unwrap_or(done.output),
                sha256: done.sha256,
                code: code.clone(),
            },
            (Err(reason), _) => MorphOutcome::Failed {
                reason: format!("decode: {reason}"),
            },
            (Ok(_), failed) => failed.clone(),
        };
    }

    io::write_atomic(&job_dir.join(MORPHS_FILE), format_morphs(&records)?.as_bytes())?;
    Ok(records)
}

fn compose_pair(
    codes: &BTreeMap<String, std::result::Result<MorphCode, String>>,
    pair: &MorphPair,
    params: &InterpolationParams,
    descriptor: &BackendDescriptor,
) -> std::result::Result<MorphCode, String> {
    let get = |id: &str| match codes.get(id) {
        Some(Ok(c)) => Ok(c),
        Some(Err(e)) => Err(format!("encode {id}: {e}")),
        None => Err(format!("unknown image id {id:?}")),
    };
    let a = get(&pair.source_a)?;
    let b = get(&pair.source_b)?;
    let code = compose_morph_code(a, b, params).map_err(|e| format!("compose: {e}"))?;
    descriptor.check_code(&code).map_err(|e| e.to_string())?;
    Ok(code)
}

fn run_stage_raw(backend: &dyn Backend, job: &BackendJob) -> Result<Vec<crate::backend::RequestOutcome>> {
    fs::create_dir_all(&job.job_dir).map_err(|e| Error::io(&job.job_dir, e))?;
    job.write()?;
    if !job.requests.is_empty() {
        backend.serve(&job.job_dir)?;
    }
    job.collect()
}

fn run_stage(backend: &dyn Backend, job: &BackendJob) -> Result<Vec<std::result::Result<PathBuf, String>>> {
    Ok(run_stage_raw(backend, job)?
        .into_iter()
        .map(|o| o.result.map(|c| c.output))
        .collect())
}

fn one_line(s: &str) -> String {
    s.chars()
        .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
        .collect()
}

pub fn format_morphs(records: &[MorphRecord]) -> Result<String> {
    let mut out = format!("{MORPHS_MAGIC}\t{}\n", io::VERSION);
    for r in records {
        let p = &r.pair;
        for (what, s) in [
            ("source_a", &p.source_a),
            ("subject_a", &p.subject_a),
            ("source_b", &p.source_b),
            ("subject_b", &p.subject_b),
        ] {
            check_token(what, s)?;
        }
        out.push_str(&format!(
            "morph={}\tsource_a={}\tsubject_a={}\tsource_b={}\tsubject_b={}\tlambda={}\tsimilarity={}",
            r.morph_id,
            p.source_a,
            p.subject_a,
            p.source_b,
            p.subject_b,
            format_f64(p.lambda),
            format_f64(p.similarity)
        ));
        match &r.outcome {
            MorphOutcome::Ok { image, sha256, .. } => {
                out.push_str(&format!("\tstatus=ok\timage={}\tsha256={sha256}\n", image.display()));
            }
            MorphOutcome::Failed { reason } => {
                out.push_str(&format!("\tstatus=failed\terror={}\n", one_line(reason)));
            }
        }
    }
    Ok(out)
}

/// One line of `morphs.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphManifestEntry {
    pub morph_id: String,
    pub pair: MorphPair,
    /// Image path relative to the job directory and its digest, or the
    /// failure reason.
    pub result: std::result::Result<(PathBuf, String), String>,
}

pub fn parse_morphs(text: &str) -> Result<Vec<MorphManifestEntry>> {
    let (h, rows) = header(text, MORPHS_MAGIC)?;
    h.reject_unknown(&[])?;
    rows.into_iter()
        .map(|(n, line)| {
            let f = Fields::from_line(line, n)?;
            let pair = MorphPair {
                source_a: f.str("source_a")?.to_owned(),
                subject_a: f.str("subject_a")?.to_owned(),
                source_b: f.str("source_b")?.to_owned(),
                subject_b: f.str("subject_b")?.to_owned(),
                lambda: f.f64("lambda")?,
                similarity: f.f64("similarity")?,
            };
            let result = match f.str("status")? {
                "ok" => Ok((PathBuf::from(f.str("image")?), f.str("sha256")?.to_owned())),
                "failed" => Err(f.str("error")?.to_owned()),
                other => return Err(io::parse_err(n, 1, format!("unknown status {other:?}"))),
            };
            Ok(MorphManifestEntry {
                morph_id: f.str("morph")?.to_owned(),
                pair,
                result,
            })
        })
        .collect()
}
