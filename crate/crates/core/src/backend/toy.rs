//! Deterministic linear stand-in for a diffusion autoencoder.
//!
//! An "image" is a unit vector in R^d. Encoding rotates it by a fixed
//! orthonormal matrix Q and splits the result: the first `d_s` coordinates
//! are the semantic code, the rest the stochastic code. Decoding is the exact
//! inverse, so every end-to-end quantity has a closed-form oracle.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Backend, BackendDescriptor, BackendJob, Request, RequestOp};
use crate::error::{Error, Result};
use crate::interp::norm;
use crate::io;
use crate::model::{Embedding, MorphCode};

pub const DEFAULT_DIM: usize = 32;
pub const DEFAULT_SEMANTIC_DIM: usize = 8;
pub const DEFAULT_NOISE: f64 = 0.05;

const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyWorld {
    dim: usize,
    semantic_dim: usize,
    noise_scale: f64,
    seed: u64,
    mixing: DMatrix<f64>,
}

impl ToyWorld {
    pub fn new(dim: usize, semantic_dim: usize, noise_scale: f64, seed: u64) -> Result<Self> {
        if semantic_dim == 0 || semantic_dim >= dim {
            return Err(Error::InvalidParameter {
                name: "semantic_dim",
                reason: format!("need 0 < {semantic_dim} < {dim}"),
            });
        }
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "noise_scale",
                reason: format!("{noise_scale} must be finite and >= 0"),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaussian = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mixing = gaussian.qr().q();
        let defect = (mixing.transpose() * &mixing - DMatrix::identity(dim, dim)).amax();
        if defect > 1e-10 {
            return Err(Error::Invalid(format!("mixing matrix not orthonormal (defect {defect:e})")));
        }
        Ok(ToyWorld {
            dim,
            semantic_dim,
            noise_scale,
            seed,
            mixing,
        })
    }

    pub fn with_seed(seed: u64) -> Result<Self> {
        Self::new(DEFAULT_DIM, DEFAULT_SEMANTIC_DIM, DEFAULT_NOISE, seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn semantic_dim(&self) -> usize {
        self.semantic_dim
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    pub fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: "toy".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            semantic_dim: self.semantic_dim,
            stochastic_shape: vec![self.dim - self.semantic_dim],
            image_format: "vec".into(),
        }
    }

    /// A random unit identity vector.
    pub fn random_subject(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm(&v);
            if n > 0.0 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    /// The toy face-recognition feature of an image: its semantic code.
    pub fn fr_feature(&self, image: &[f64]) -> Result<Vec<f64>> {
        Ok(toy_encode(self, image)?.semantic().to_vec())
    }
}

/// A noisy, renormalized sample of a unit subject vector. The noise vector
/// has per-coordinate deviation `sigma / sqrt(d)`, so its expected norm is
/// about `sigma`.
pub fn toy_sample_image(world: &ToyWorld, subject: &[f64], seed: u64) -> Result<Vec<f64>> {
    if subject.len() != world.dim {
        return Err(Error::DimensionMismatch {
            context: "toy subject vector".into(),
            expected: world.dim,
            found: subject.len(),
        });
    }
    let n = norm(subject);
    if !((n - 1.0).abs() <= UNIT_TOLERANCE) {
        return Err(Error::NonUnitSubject { norm: n });
    }
    if world.noise_scale == 0.0 {
        return Ok(subject.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = world.noise_scale / (world.dim as f64).sqrt();
    let v: Vec<f64> = subject
        .iter()
        .map(|&s| s + scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let n = norm(&v);
    Ok(v.into_iter().map(|x| x / n).collect())
}

pub fn toy_encode(world: &ToyWorld, image: &[f64]) -> Result<MorphCode> {
    if image.len() != world.dim {
        return Err(Error::DimensionMismatch {
            context: "toy image".into(),
            expected: world.dim,
            found: image.len(),
        });
    }
    let rotated = world.mixing.tr_mul(&DVector::from_column_slice(image));
    let (semantic, stochastic) = rotated.as_slice().split_at(world.semantic_dim);
    MorphCode::new(semantic.to_vec(), stochastic.to_vec(), vec![stochastic.len()])
}

pub fn toy_decode(world: &ToyWorld, code: &MorphCode) -> Result<Vec<f64>> {
    world.descriptor().check_code(code)?;
    let joined = DVector::from_iterator(
        world.dim,
        code.semantic().iter().chain(code.stochastic()).copied(),
    );
    Ok((&world.mixing * joined).as_slice().to_vec())
}

/// Read a toy image file (an embeddings file holding one vector).
pub fn read_image(path: &Path) -> Result<Vec<f64>> {
    let mut records = io::load(path, io::parse_embeddings)?;
    if records.len() != 1 {
        return Err(Error::Schema {
            path: Some(path.to_path_buf()),
            message: format!("image file must hold exactly one vector, found {}", records.len()),
        });
    }
    Ok(records.pop().expect("one record").values)
}

pub fn write_image(path: &Path, id: &str, values: Vec<f64>) -> Result<()> {
    let e = Embedding::new(id, id, values)?;
    io::write_atomic(path, io::format_embeddings(&[e])?.as_bytes())
}

/// In-process backend over a [`ToyWorld`].
#[derive(Debug, Clone)]
pub struct ToyBackend {
    world: ToyWorld,
}

impl ToyBackend {
    pub fn new(world: ToyWorld) -> Self {
        ToyBackend { world }
    }

    pub fn world(&self) -> &ToyWorld {
        &self.world
    }

    fn run(&self, job: &BackendJob, r: &Request) -> Result<()> {
        let input = job.resolve(&r.input);
        let output = job.resolve(&r.output);
        match r.op {
            RequestOp::Encode => {
                let image = read_image(&input)?;
                let code = toy_encode(&self.world, &image)?;
                io::write_atomic(&output, io::format_code(&code).as_bytes())
            }
            RequestOp::Decode => {
                let code = io::load(&input, io::parse_code)?;
                let image = toy_decode(&self.world, &code)?;
                write_image(&output, &r.id, image)
            }
        }
    }
}

impl Backend for ToyBackend {
    fn descriptor(&self) -> Result<BackendDescriptor> {
        Ok(self.world.descriptor())
    }

    fn serve(&self, job_dir: &Path) -> Result<()> {
        let job = BackendJob::read(job_dir)?;
        for r in &job.requests {
            match self.run(&job, r) {
                Ok(()) => job.mark_done(r)?,
                Err(e) => job.mark_error(r, &format!("request {}: {e}", r.id))?,
            }
        }
        Ok(())
    }
}
