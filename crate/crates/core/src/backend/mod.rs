//! Encoder/decoder backends and the file-based job protocol that drives them.
//!
//! A job directory holds `manifest.txt` listing requests. A backend processes
//! every request and, for each one, atomically writes either
//! `status/<id>.done` (`output=<path>\tsha256=<hex>`) or `status/<id>.error`
//! (a single line). Relative paths in the manifest resolve against the job
//! directory.
//!
//! Manifest layout:
//!
//! ```text
//! morphlab-job	v1	backend=toy	seed=7
//! param	name=timestep	value=250
//! request	id=enc-00000	op=encode	input=/data/a.vec	output=out/enc-00000.code
//! request	id=dec-00000	op=decode	input=in/morph-00000.code	output=out/morph-00000.vec
//! ```

mod external;
pub mod cohort;
pub mod toy;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use external::{ExternalBackend, BACKEND_PATH_ENV};
pub use cohort::{random_pairs, toy_cohort, ToyCohort, ToyImage};
pub use toy::{toy_decode, toy_encode, toy_sample_image, ToyBackend, ToyWorld};

use crate::error::{Error, Result};
use crate::io::{self, check_token, header, parse_err, Fields};
use crate::model::MorphCode;

pub const JOB_MAGIC: &str = "morphlab-job";
pub const DESCRIPTOR_MAGIC: &str = "morphlab-backend";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const STATUS_DIR: &str = "status";

/// What a backend advertises about its latent space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendDescriptor {
    pub name: String,
    pub version: String,
    pub semantic_dim: usize,
    pub stochastic_shape: Vec<usize>,
    /// File extension of decoded images, e.g. `vec` or `png`.
    pub image_format: String,
}

impl BackendDescriptor {
    pub fn validate(&self) -> Result<()> {
        check_token("backend name", &self.name)?;
        check_token("backend version", &self.version)?;
        check_token("image format", &self.image_format)?;
        if self.semantic_dim == 0 || self.stochastic_shape.is_empty() || self.stochastic_shape.contains(&0) {
            return Err(Error::Invalid(format!(
                "backend {} advertises non-positive dimensions",
                self.name
            )));
        }
        Ok(())
    }

    pub fn stochastic_len(&self) -> usize {
        self.stochastic_shape.iter().product()
    }

    /// Check that a code fits this backend's latent space.
    pub fn check_code(&self, code: &MorphCode) -> Result<()> {
        if code.semantic().len() != self.semantic_dim {
            return Err(Error::DimensionMismatch {
                context: format!("semantic latent for backend {}", self.name),
                expected: self.semantic_dim,
                found: code.semantic().len(),
            });
        }
        if code.shape() != self.stochastic_shape.as_slice() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "stochastic shape {:?} for backend {} (expects {:?})",
                    code.shape(),
                    self.name,
                    self.stochastic_shape
                ),
                expected: self.stochastic_len(),
                found: code.stochastic().len(),
            });
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let shape = self
            .stochastic_shape
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{DESCRIPTOR_MAGIC}\t{}\tname={}\tversion={}\tsemantic_dim={}\tstochastic_shape={}\timage_format={}\n",
            io::VERSION,
            self.name,
            self.version,
            self.semantic_dim,
            shape,
            self.image_format
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (h, rest) = header(text, DESCRIPTOR_MAGIC)?;
        if let Some((n, _)) = rest.first() {
            return Err(parse_err(*n, 1, "descriptor must be a single line"));
        }
        h.reject_unknown(&["name", "version", "semantic_dim", "stochastic_shape", "image_format"])?;
        let d = BackendDescriptor {
            name: h.str("name")?.to_owned(),
            version: h.str("version")?.to_owned(),
            semantic_dim: h.usize("semantic_dim")?,
            stochastic_shape: h
                .str("stochastic_shape")?
                .split(',')
                .map(|s| io::parse_usize(s, 1, 6))
                .collect::<Result<_>>()?,
            image_format: h.str("image_format")?.to_owned(),
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestOp {
    /// Image file in, [`MorphCode`] file out.
    Encode,
    /// [`MorphCode`] file in, image file out.
    Decode,
}

impl fmt::Display for RequestOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequestOp::Encode => "encode",
            RequestOp::Decode => "decode",
        })
    }
}

impl FromStr for RequestOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encode" => Ok(RequestOp::Encode),
            "decode" => Ok(RequestOp::Decode),
            other => Err(Error::Invalid(format!("unknown request op {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub id: String,
    pub op: RequestOp,
    pub input: PathBuf,
    pub output: PathBuf,
}

/// A batch of encode/decode requests for one backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendJob {
    pub job_dir: PathBuf,
    pub backend_name: String,
    pub seed: u64,
    /// Opaque backend parameters (e.g. a diffusion timestep).
    pub params: BTreeMap<String, String>,
    pub requests: Vec<Request>,
}

fn check_request_id(id: &str) -> Result<()> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) || id.starts_with('.') {
        return Err(Error::Invalid(format!(
            "request id {id:?} must be non-empty and use only [A-Za-z0-9._-]"
        )));
    }
    Ok(())
}

fn path_token(p: &Path) -> Result<String> {
    let s = p
        .to_str()
        .ok_or_else(|| Error::Invalid(format!("path {} is not valid UTF-8", p.display())))?;
    check_token("path", s)?;
    Ok(s.to_owned())
}

impl BackendJob {
    pub fn validate(&self) -> Result<()> {
        check_token("backend name", &self.backend_name)?;
        let mut ids = HashSet::new();
        for r in &self.requests {
            check_request_id(&r.id)?;
            if !ids.insert(r.id.as_str()) {
                return Err(Error::DuplicateKey { key: r.id.clone() });
            }
        }
        for (k, v) in &self.params {
            check_token("parameter name", k)?;
            check_token("parameter value", v)?;
        }
        Ok(())
    }

    pub fn manifest_text(&self) -> Result<String> {
        self.validate()?;
        let mut out = format!(
            "{JOB_MAGIC}\t{}\tbackend={}\tseed={}\n",
            io::VERSION,
            self.backend_name,
            self.seed
        );
        for (k, v) in &self.params {
            out.push_str(&format!("param\tname={k}\tvalue={v}\n"));
        }
        for r in &self.requests {
            out.push_str(&format!(
                "request\tid={}\top={}\tinput={}\toutput={}\n",
                r.id,
                r.op,
                path_token(&r.input)?,
                path_token(&r.output)?
            ));
        }
        Ok(out)
    }

    pub fn parse_manifest(text: &str, job_dir: &Path) -> Result<Self> {
        let (h, rows) = header(text, JOB_MAGIC)?;
        h.reject_unknown(&["backend", "seed"])?;
        let seed_text = h.str("seed")?;
        let seed = seed_text
            .parse::<u64>()
            .map_err(|_| parse_err(1, 4, format!("seed {seed_text:?} is not an unsigned integer")))?;
        let mut job = BackendJob {
            job_dir: job_dir.to_path_buf(),
            backend_name: h.str("backend")?.to_owned(),
            seed,
            params: BTreeMap::new(),
            requests: Vec::new(),
        };
        for (n, line) in rows {
            let (kind, rest) = line.split_once('\t').unwrap_or((line, ""));
            let f = Fields::parse(
                rest.split('\t').filter(|t| !t.is_empty()).enumerate().map(|(i, t)| (i + 2, t)),
                n,
            )?;
            match kind {
                "param" => {
                    f.reject_unknown(&["name", "value"])?;
                    job.params.insert(f.str("name")?.to_owned(), f.str("value")?.to_owned());
                }
                "request" => {
                    f.reject_unknown(&["id", "op", "input", "output"])?;
                    job.requests.push(Request {
                        id: f.str("id")?.to_owned(),
                        op: f.parsed("op")?,
                        input: PathBuf::from(f.str("input")?),
                        output: PathBuf::from(f.str("output")?),
                    });
                }
                other => return Err(parse_err(n, 1, format!("unknown record {other:?}"))),
            }
        }
        job.validate()?;
        Ok(job)
    }

    pub fn read(job_dir: &Path) -> Result<Self> {
        let path = job_dir.join(MANIFEST_FILE);
        io::load(&path, |t| Self::parse_manifest(t, job_dir))
    }

    /// Write the manifest into the job directory.
    pub fn write(&self) -> Result<()> {
        let text = self.manifest_text()?;
        io::write_atomic(&self.job_dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.job_dir.join(p)
    }

    fn status_path(&self, id: &str, ext: &str) -> PathBuf {
        self.job_dir.join(STATUS_DIR).join(format!("{id}.{ext}"))
    }

    /// Record a successful request: hash the output and write the done marker.
    pub fn mark_done(&self, request: &Request) -> Result<()> {
        let out = self.resolve(&request.output);
        let bytes = fs::read(&out).map_err(|e| Error::io(&out, e))?;
        let text = format!("output={}\tsha256={}\n", path_token(&request.output)?, io::sha256_hex(&bytes));
        io::write_atomic(&self.status_path(&request.id, "done"), text.as_bytes())
    }

    pub fn mark_error(&self, request: &Request, message: &str) -> Result<()> {
        let line: String = message
            .chars()
            .map(|c| if c == '\n' || c == '\r' || c == '\t' { ' ' } else { c })
            .collect();
        io::write_atomic(&self.status_path(&request.id, "error"), format!("{line}\n").as_bytes())
    }

    /// Outcome of every request, in manifest order.
    pub fn collect(&self) -> Result<Vec<RequestOutcome>> {
        self.requests
            .iter()
            .map(|r| {
                let done = self.status_path(&r.id, "done");
                let error = self.status_path(&r.id, "error");
                let result = if done.exists() {
                    let text = io::read_text(&done)?;
                    let f = Fields::from_line(text.trim_end(), 1).map_err(|e| e.with_path(&done))?;
                    Ok(CompletedRequest {
                        output: self.resolve(Path::new(f.str("output")?)),
                        sha256: f.str("sha256")?.to_owned(),
                    })
                } else if error.exists() {
                    Err(io::read_text(&error)?.trim_end().to_owned())
                } else {
                    Err("backend left no completion marker".to_owned())
                };
                Ok(RequestOutcome {
                    id: r.id.clone(),
                    result,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletedRequest {
    pub output: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestOutcome {
    pub id: String,
    pub result: std::result::Result<CompletedRequest, String>,
}

/// An encoder/decoder implementation reachable through the job protocol.
pub trait Backend {
    fn descriptor(&self) -> Result<BackendDescriptor>;

    /// Process every request in the manifest found in `job_dir`. Per-request
    /// failures go to error markers; `Err` means the job as a whole failed.
    fn serve(&self, job_dir: &Path) -> Result<()>;
}
