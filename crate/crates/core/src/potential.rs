//! Regularized disjoining-pressure potential and its convex-concave splitting.
//!
//! For `h >= eps` the potential is the van der Waals form `-A / (2 h^2)`; below
//! `eps` it is replaced by the quadratic `A h^2 / (2 eps^4) - A / eps^2`, which
//! matches value and slope at `eps`. The convex part `phi_plus = A h^2 / (2 eps^4)`
//! is treated implicitly by the time stepper and `phi_minus = phi - phi_plus`
//! explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    /// Nondimensional Hamaker constant; zero disables the potential.
    pub hamaker: f64,
    /// Regularization threshold.
    pub eps: f64,
}

impl PotentialParams {
    pub fn new(hamaker: f64, eps: f64) -> Result<Self> {
        let p = PotentialParams { hamaker, eps };
        p.validate()?;
        Ok(p)
    }

    /// Rupture physics off.
    pub fn disabled() -> Self {
        PotentialParams {
            hamaker: 0.0,
            eps: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hamaker.is_finite() && self.hamaker >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Hamaker constant must be finite and >= 0, got {}",
                self.hamaker
            )));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be finite and > 0, got {}",
                self.eps
            )));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.hamaker != 0.0
    }

    /// `A / eps^4`, the curvature of the convex part.
    pub fn convex_coefficient(&self) -> f64 {
        self.hamaker / self.eps.powi(4)
    }

    /// Global Lipschitz constant of `phi'`.
    pub fn lipschitz_constant(&self) -> f64 {
        3.0 * self.convex_coefficient()
    }

    pub fn phi(&self, h: f64) -> f64 {
        let a = self.hamaker;
        if h < self.eps {
            0.5 * self.convex_coefficient() * h * h - a / (self.eps * self.eps)
        } else {
            -0.5 * a / (h * h)
        }
    }

    pub fn phi_prime(&self, h: f64) -> f64 {
        if h < self.eps {
            self.convex_coefficient() * h
        } else {
            self.hamaker / (h * h * h)
        }
    }

    /// Jumps at `eps` from `A/eps^4` to `-3A/eps^4`.
    pub fn phi_double_prime(&self, h: f64) -> f64 {
        if h < self.eps {
            self.convex_coefficient()
        } else {
            -3.0 * self.hamaker / h.powi(4)
        }
    }

    pub fn phi_plus(&self, h: f64) -> f64 {
        0.5 * self.convex_coefficient() * h * h
    }

    pub fn phi_prime_plus(&self, h: f64) -> f64 {
        self.convex_coefficient() * h
    }

    pub fn phi_double_prime_plus(&self, _h: f64) -> f64 {
        self.convex_coefficient()
    }

    pub fn phi_minus(&self, h: f64) -> f64 {
        if h < self.eps {
            -self.hamaker / (self.eps * self.eps)
        } else {
            self.phi(h) - self.phi_plus(h)
        }
    }

    pub fn phi_prime_minus(&self, h: f64) -> f64 {
        if h < self.eps {
            0.0
        } else {
            self.phi_prime(h) - self.phi_prime_plus(h)
        }
    }

    pub fn phi_double_prime_minus(&self, h: f64) -> f64 {
        if h < self.eps {
            0.0
        } else {
            self.phi_double_prime(h) - self.convex_coefficient()
        }
    }
}
