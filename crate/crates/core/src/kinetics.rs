//! Power-law kinetics θ(y) = y^p and the transforms built on it.
//!
//! The whole crate works with this one-parameter family: it covers mass
//! action at p = 1, its logarithm ρ(y) = p·ln y maps the positive reals
//! onto the reals, and the inverse and antiderivatives needed by the
//! equilibrium and entropy computations stay in closed form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KineticsError {
    #[error("kinetics exponent must be a positive finite real, got {0}")]
    BadExponent(f64),
}

/// The kinetics map θ(y) = y^p for a fixed exponent p > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinetics {
    exponent: f64,
}

impl Default for Kinetics {
    fn default() -> Self {
        Kinetics::mass_action()
    }
}

impl Kinetics {
    /// Mass-action kinetics, θ(y) = y.
    pub fn mass_action() -> Self {
        Kinetics { exponent: 1.0 }
    }

    pub fn new(exponent: f64) -> Result<Self, KineticsError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(KineticsError::BadExponent(exponent));
        }
        Ok(Kinetics { exponent })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// θ(y) = y^p for y ≥ 0.
    pub fn theta(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        if y == 0.0 {
            0.0
        } else {
            y.powf(self.exponent)
        }
    }

    /// θ(y)^b with the boundary conventions r^0 = 1 and 0^c = 0 for c > 0.
    /// Evaluated without logarithms so zero states never produce NaN.
    pub fn theta_pow(&self, y: f64, b: f64) -> f64 {
        debug_assert!(y >= 0.0 && b >= 0.0);
        if b == 0.0 {
            1.0
        } else if y == 0.0 {
            0.0
        } else {
            y.powf(self.exponent * b)
        }
    }

    /// ρ(y) = ln θ(y) = p·ln y, defined for y > 0.
    pub fn log_theta(&self, y: f64) -> f64 {
        debug_assert!(y > 0.0);
        self.exponent * y.ln()
    }

    /// ρ applied componentwise to a strictly positive vector.
    pub fn log_theta_vec(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.log_theta(v)).collect()
    }

    /// ρ⁻¹(s) = exp(s / p), mapping the reals onto the positive reals.
    pub fn inv_log_theta(&self, s: f64) -> f64 {
        (s / self.exponent).exp()
    }

    /// Derivative of ρ⁻¹, used as the Hessian weight in the convex
    /// coordinatization solve.
    pub fn inv_log_theta_deriv(&self, s: f64) -> f64 {
        (s / self.exponent).exp() / self.exponent
    }

    /// ∫₁^r ρ(s) ds = p·(r·ln r − r + 1), extended continuously to r = 0
    /// (value p) via the 0·ln 0 = 0 convention.
    pub fn log_theta_antideriv(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            self.exponent
        } else {
            self.exponent * (r * r.ln() - r + 1.0)
        }
    }
}
