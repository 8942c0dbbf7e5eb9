//! FitzHugh–Nagumo reaction terms.
//!
//! The membrane potential reacts through a cubic nonlinearity
//! `N(v) = v (1 - v) (v - theta)` and relaxes against the adaptation
//! variable through the affine map `A(v, w) = tau (v - gamma w)`.
//! A linear reaction `N(v) = -alpha v` is available for accuracy studies.

use crate::error::{invalid, Result};

/// Reaction term used for the membrane potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reaction {
    /// `N(v) = v (1 - v) (v - theta)`.
    Cubic,
    /// `N(v) = -alpha v`.
    Linear { alpha: f64 },
}

/// Model parameters shared by every scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    theta: f64,
    tau: f64,
    gamma: f64,
    reaction: Reaction,
}

impl ModelParams {
    pub const DEFAULT_THETA: f64 = 0.1;
    pub const DEFAULT_TAU: f64 = 0.005;
    pub const DEFAULT_GAMMA: f64 = 5.0;

    /// Cubic FitzHugh–Nagumo model. Requires `0 < theta < 1`, `tau >= 0`, `gamma > 0`.
    pub fn new(theta: f64, tau: f64, gamma: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(theta > 0.0 && theta < 1.0) {
            problems.push(format!("theta must lie in (0, 1), got {theta}"));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            problems.push(format!("tau must be >= 0, got {tau}"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            problems.push(format!("gamma must be > 0, got {gamma}"));
        }
        if !problems.is_empty() {
            return Err(invalid(problems.join("; ")));
        }
        Ok(Self {
            theta,
            tau,
            gamma,
            reaction: Reaction::Cubic,
        })
    }

    /// Linear test model `N(v) = -alpha v` with the given adaptation rate.
    pub fn linear(alpha: f64, tau: f64, gamma: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(invalid(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self::new(Self::DEFAULT_THETA, tau, gamma)?.with_reaction(Reaction::Linear { alpha }))
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reaction(&self) -> Reaction {
        self.reaction
    }

    #[inline]
    pub fn nonlinearity(&self, v: f64) -> f64 {
        match self.reaction {
            Reaction::Cubic => v * (1.0 - v) * (v - self.theta),
            Reaction::Linear { alpha } => -alpha * v,
        }
    }

    #[inline]
    pub fn adaptation(&self, v: f64, w: f64) -> f64 {
        self.tau * (v - self.gamma * w)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            theta: Self::DEFAULT_THETA,
            tau: Self::DEFAULT_TAU,
            gamma: Self::DEFAULT_GAMMA,
            reaction: Reaction::Cubic,
        }
    }
}

/// `N(v)` for the configured reaction.
#[inline]
pub fn nonlinearity(v: f64, params: &ModelParams) -> f64 {
    params.nonlinearity(v)
}

/// `A(v, w) = tau (v - gamma w)`.
#[inline]
pub fn adaptation(v: f64, w: f64, params: &ModelParams) -> f64 {
    params.adaptation(v, w)
}
