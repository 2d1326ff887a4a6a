//! Face-morph generation by latent interpolation, and the vulnerability and
//! detectability metrics used to evaluate morphing attacks.
//!
//! The numerical core (interpolation, pair mining, MMPMR, APCER/BPCER/EER)
//! is pure and deterministic. Encoders and decoders sit behind the
//! [`backend::Backend`] trait and a file-based job protocol, with a linear
//! [`backend::ToyWorld`] for tests and demos.

pub mod backend;
pub mod error;
pub mod interp;
pub mod io;
pub mod mad;
pub mod model;
pub mod pairs;
pub mod pipeline;
pub mod report;
pub mod vulnerability;

pub use error::{Error, Result};
pub use interp::{compose_morph_code, lerp, slerp, subtended_angle, InterpolationParams};
pub use mad::{apcer, apcer_at_bpcer, bpcer, det_curve, detectability_table, eer};
pub use model::{
    Embedding, MadScoreSet, MatedScoreSet, MetricsReport, MorphCode, MorphPair, NonMatedScoreSet,
    ScorePolarity,
};
pub use pairs::{partition_by_metadata, select_top_pairs};
pub use pipeline::{run_morph_pipeline, PipelineConfig};
pub use vulnerability::{fmmpmr, fmr_threshold, mmpmr, vulnerability_table};
