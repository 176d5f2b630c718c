//! Two-phase metric coefficients.
//!
//! The single-scale coefficient equals `beta` on the tiled inclusion and 1 in
//! the matrix; the contrast-scaled coefficient replaces `beta` with
//! `beta * eps^(-p)` and, for infinite exponent, with a hard obstacle. All
//! evaluations take unfolded coordinates (unit period): callers divide by
//! epsilon themselves.

use crate::error::{Error, Result};
use crate::geometry::{periodic_contains, InclusionShape, Point2};
use std::fmt;

/// Contrast-scaling exponent; the infinite case encodes a hard obstacle and
/// is kept symbolic so the solver can remove obstacle nodes exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinite,
}

impl PExponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PExponent::Finite(p) => Some(p),
            PExponent::Infinite => None,
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinite => write!(f, "inf"),
        }
    }
}

/// Parameters of the contrast-scaled metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub beta: f64,
    pub p: PExponent,
    pub epsilon: f64,
}

impl MetricParams {
    pub fn new(beta: f64, p: PExponent, epsilon: f64) -> Result<Self> {
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if let PExponent::Finite(p) = p {
            if p <= 0.0 || !p.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "p must be positive or infinite, got {p}"
                )));
            }
        }
        Ok(MetricParams { beta, p, epsilon })
    }

    /// Single-scale parameters: contrast beta at period 1.
    pub fn single_scale(beta: f64) -> Result<Self> {
        Self::new(beta, PExponent::Finite(1.0), 1.0)
    }

    /// The inclusion-phase coefficient value beta * eps^(-p), infinite for
    /// the hard-obstacle exponent.
    pub fn inclusion_weight(&self) -> f64 {
        match self.p {
            PExponent::Finite(p) => self.beta * self.epsilon.powf(-p),
            PExponent::Infinite => f64::INFINITY,
        }
    }
}

/// Single-scale coefficient at `x` (unfolded coordinates).
pub fn eval_single_scale(shape: &InclusionShape, beta: f64, x: Point2) -> f64 {
    if periodic_contains(shape, x) {
        beta
    } else {
        1.0
    }
}

/// Contrast-scaled coefficient at `x` (unfolded coordinates). Returns
/// `f64::INFINITY` on the inclusion phase when the exponent is infinite.
pub fn eval_contrast(shape: &InclusionShape, params: &MetricParams, x: Point2) -> f64 {
    if periodic_contains(shape, x) {
        params.inclusion_weight()
    } else {
        1.0
    }
}

/// Structured admissibility verdict for a parameter set against a shape's
/// high opacity coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Admissible,
    /// beta <= lambda: the contrast never clears the opacity threshold.
    BetaTooSmall { beta: f64, lambda: f64 },
    /// eps^p >= beta / lambda: the scaled contrast is too weak at this period.
    EpsilonTooLarge { eps_pow_p: f64, beta_over_lambda: f64 },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admissibility::Admissible => write!(f, "admissible"),
            Admissibility::BetaTooSmall { beta, lambda } => {
                write!(f, "beta <= lambda ({beta} <= {lambda})")
            }
            Admissibility::EpsilonTooLarge {
                eps_pow_p,
                beta_over_lambda,
            } => write!(
                f,
                "epsilon^p >= beta/lambda ({eps_pow_p} >= {beta_over_lambda})"
            ),
        }
    }
}

/// Checks beta > lambda and eps^p < beta / lambda (the latter trivially holds
/// at infinite exponent).
pub fn check_admissible(params: &MetricParams, lambda: f64) -> Admissibility {
    if params.beta <= lambda {
        return Admissibility::BetaTooSmall {
            beta: params.beta,
            lambda,
        };
    }
    if let PExponent::Finite(p) = params.p {
        let eps_pow_p = params.epsilon.powf(p);
        let beta_over_lambda = params.beta / lambda;
        if eps_pow_p >= beta_over_lambda {
            return Admissibility::EpsilonTooLarge {
                eps_pow_p,
                beta_over_lambda,
            };
        }
    }
    Admissibility::Admissible
}
