//! Latent interpolation: linear for semantic codes, spherical for
//! stochastic codes, and their composition into a morph code.
//!
//! Orientation follows `lerp`: `lambda = 1` reproduces the first argument and
//! `lambda = 0` the second.

use std::f64::consts::PI;

use crate::error::{Component, Error, Result};
use crate::model::{check_lambda, MorphCode};

/// Lambda used when none is given: equal contribution of both sources.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Default angle (radians) below which SLerp falls back to Lerp.
pub const DEFAULT_COLLINEARITY_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationParams {
    lambda: f64,
    collinearity_epsilon: f64,
}

impl InterpolationParams {
    pub fn new(lambda: f64, collinearity_epsilon: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(collinearity_epsilon > 0.0 && collinearity_epsilon <= 0.1) {
            return Err(Error::InvalidParameter {
                name: "collinearity_epsilon",
                reason: format!("{collinearity_epsilon} not in (0, 0.1]"),
            });
        }
        Ok(InterpolationParams {
            lambda,
            collinearity_epsilon,
        })
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, DEFAULT_COLLINEARITY_EPSILON)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn collinearity_epsilon(&self) -> f64 {
        self.collinearity_epsilon
    }
}

impl Default for InterpolationParams {
    fn default() -> Self {
        InterpolationParams {
            lambda: DEFAULT_LAMBDA,
            collinearity_epsilon: DEFAULT_COLLINEARITY_EPSILON,
        }
    }
}

fn check_pair(a: &[f64], b: &[f64], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: what.to_owned(),
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue {
            context: what.to_owned(),
        });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `lambda * z1 + (1 - lambda) * z2`, componentwise.
pub fn lerp(z1: &[f64], z2: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_pair(z1, z2, "lerp")?;
    check_lambda(lambda)?;
    Ok(lerp_unchecked(z1, z2, lambda))
}

fn lerp_unchecked(z1: &[f64], z2: &[f64], lambda: f64) -> Vec<f64> {
    let mu = 1.0 - lambda;
    z1.iter()
        .zip(z2)
        .map(|(&a, &b)| if a == b { a } else { lambda * a + mu * b })
        .collect()
}

/// Angle between two vectors in `[0, pi]`.
pub fn subtended_angle(x1: &[f64], x2: &[f64]) -> Result<f64> {
    check_pair(x1, x2, "subtended angle")?;
    let (n1, n2) = (norm(x1), norm(x2));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroVector {
            context: "subtended angle".into(),
        });
    }
    Ok((dot(x1, x2) / (n1 * n2)).clamp(-1.0, 1.0).acos())
}

/// Spherical linear interpolation along the great-circle arc from `x2`
/// (`lambda = 0`) to `x1` (`lambda = 1`).
///
/// Near-collinear inputs (angle below the collinearity epsilon) fall back to
/// Lerp, rescaled to the Lerp of the input norms. Near-antipodal inputs are
/// rejected.
pub fn slerp(x1: &[f64], x2: &[f64], params: &InterpolationParams) -> Result<Vec<f64>> {
    let lambda = params.lambda;
    let theta = subtended_angle(x1, x2)?;
    let eps = params.collinearity_epsilon;
    if PI - theta < eps {
        return Err(Error::AntipodalInputs { angle: theta });
    }
    if theta < eps {
        let mut out = lerp_unchecked(x1, x2, lambda);
        let target = lambda * norm(x1) + (1.0 - lambda) * norm(x2);
        let current = norm(&out);
        if current > 0.0 {
            let scale = target / current;
            out.iter_mut().for_each(|v| *v *= scale);
        }
        return Ok(out);
    }
    let sin_theta = theta.sin();
    let w1 = (lambda * theta).sin() / sin_theta;
    let w2 = ((1.0 - lambda) * theta).sin() / sin_theta;
    Ok(x1.iter().zip(x2).map(|(a, b)| w1 * a + w2 * b).collect())
}

/// Morph code `z(lambda)`: Lerp of the semantic parts and SLerp of the
/// flattened stochastic parts. The stochastic shape is carried over.
pub fn compose_morph_code(code1: &MorphCode, code2: &MorphCode, params: &InterpolationParams) -> Result<MorphCode> {
    let in_component = |component| move |e| Error::Component {
        component,
        source: Box::new(e),
    };
    if code1.shape() != code2.shape() {
        return Err(in_component(Component::Stochastic)(Error::Invalid(format!(
            "shapes differ: {:?} vs {:?}",
            code1.shape(),
            code2.shape()
        ))));
    }
    let semantic = lerp(code1.semantic(), code2.semantic(), params.lambda)
        .map_err(in_component(Component::Semantic))?;
    let stochastic = slerp(code1.stochastic(), code2.stochastic(), params)
        .map_err(in_component(Component::Stochastic))?;
    MorphCode::new(semantic, stochastic, code1.shape().to_vec())
}
