//! Physical constants and the unit convention used across the crate.
//!
//! Every energy is stored as an ordinary frequency `E/h` in Hz. Angular
//! frequencies (rad/s) are formed explicitly as `2π·f` at the few places that
//! need them: decay-rate formulas, the Schrödinger right-hand side and the
//! Landau-Zener sweep rate `β`.
//!
//! | quantity                         | stored as        | unit    |
//! |----------------------------------|------------------|---------|
//! | `E_J`, `E_Q`, `Δ`, gaps          | `E/h`            | Hz      |
//! | emission frequency `ω`           | angular          | rad/s   |
//! | LZ gap `D` (two-level model)     | `D/2π`           | Hz      |
//! | LZ sweep rate `β`                | angular / s      | rad/s²  |
//! | gate sweep rate `λ = dn_g/dt`    | plain rate       | 1/s     |
//! | flux sweep rate `μ`              | phase rate       | rad/s   |
//! | decay / dephasing rates `Γ`      | rate             | 1/s     |
//! | linewidths (`fwhm_hz`, ...)      | ordinary         | Hz      |
//! | capacitances / inductances       | SI               | F / H   |
//! | flux offsets `δφ_e`              | flux quanta      | Φ₀      |
//!
//! With this convention the two closed-form excitation exponents become
//! `π² f_J² / (2 f_Q λ)` for the charge qubit and `π² f_Δ² / (γ f_EJ μ)` for
//! the flux qubit.

use std::f64::consts::PI;

/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Magnetic flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * E_CHARGE);

pub const FEMTO: f64 = 1e-15;
pub const ATTO: f64 = 1e-18;
pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;
pub const PICO: f64 = 1e-12;
pub const NANO: f64 = 1e-9;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn ordinary(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Energy in joules expressed as `E/h` (Hz).
#[inline]
pub fn joules_to_hz(e: f64) -> f64 {
    e / PLANCK
}

/// `E/h` (Hz) back to joules.
#[inline]
pub fn hz_to_joules(f: f64) -> f64 {
    f * PLANCK
}
