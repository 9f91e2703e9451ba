//! Closed-form Landau-Zener excitation probabilities.
//!
//! The asymptotic formulas assume a sweep from t = −∞ to +∞. For finite sweeps
//! the correction is negligible once both endpoints sit well outside the
//! crossing (tens of gap-widths); the propagation tests quantify this.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CpbParams, FluxParams};
use crate::units::angular;

/// Two-level sweep `H/ħ = (βt/2)σ_z + (D/2)σ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzTwoLevel {
    /// D/2π (Hz).
    pub d_hz: f64,
    /// β (rad/s²).
    pub beta_rate: f64,
}

impl LzTwoLevel {
    pub fn new(d_hz: f64, beta_rate: f64) -> Result<Self> {
        if !(d_hz >= 0.0) || !d_hz.is_finite() {
            return Err(Error::invalid("d_hz", "must be >= 0"));
        }
        if !(beta_rate > 0.0) {
            return Err(Error::invalid("beta_rate", "must be > 0"));
        }
        Ok(LzTwoLevel { d_hz, beta_rate })
    }

    /// Adiabaticity parameter ξ = (E₁₂/ħ)²/α with E₁₂ = ħD/2 and α = β.
    pub fn xi(&self) -> f64 {
        let half_gap = 0.5 * angular(self.d_hz);
        half_gap * half_gap / self.beta_rate
    }
}

/// P(g → e) = exp(−πD²/2β).
pub fn lz_probability(m: &LzTwoLevel) -> Result<f64> {
    if !(m.beta_rate > 0.0) {
        return Err(Error::invalid("beta_rate", "must be > 0"));
    }
    let d = angular(m.d_hz);
    Ok((-PI * d * d / (2.0 * m.beta_rate)).exp())
}

/// The same probability written through ξ: P = exp(−2πξ).
pub fn lz_probability_from_xi(xi: f64) -> f64 {
    (-2.0 * PI * xi).exp()
}

/// Exponent π² f_J² / (2 f_Q λ) of the charge-qubit excitation probability.
pub fn cpb_exponent(p: &CpbParams, lambda_rate: f64) -> Result<f64> {
    if !(lambda_rate > 0.0) {
        return Err(Error::invalid("lambda_rate", "must be > 0"));
    }
    let fq = p.charging_energy_hz();
    Ok(PI * PI * p.ej_hz * p.ej_hz / (2.0 * fq * lambda_rate))
}

/// Excitation probability of a charge qubit swept at λ = dn_g/dt (1/s).
pub fn cpb_excitation_probability(p: &CpbParams, lambda_rate: f64) -> Result<f64> {
    Ok((-cpb_exponent(p, lambda_rate)?).exp())
}

/// The charge-qubit sweep expressed as a two-level LZ model:
/// D = 2π f_J, β = 2·(2π f_Q)·λ.
pub fn cpb_as_two_level(p: &CpbParams, lambda_rate: f64) -> Result<LzTwoLevel> {
    LzTwoLevel::new(p.ej_hz, 2.0 * angular(p.charging_energy_hz()) * lambda_rate)
}

/// Exponent π² f_Δ² / (γ f_EJ μ) of the flux-qubit excitation probability.
pub fn flux_exponent(p: &FluxParams, mu_rate: f64) -> Result<f64> {
    let gamma = p.gamma()?;
    if !(mu_rate > 0.0) {
        return Err(Error::invalid("mu_rate", "must be > 0"));
    }
    Ok(PI * PI * p.delta_hz * p.delta_hz / (gamma * p.ej_hz * mu_rate))
}

/// Excitation probability of a flux qubit swept at μ (rad/s), where
/// δφ_e = (Φ₀/2π)·μ·t.
pub fn flux_excitation_probability(p: &FluxParams, mu_rate: f64) -> Result<f64> {
    Ok((-flux_exponent(p, mu_rate)?).exp())
}
