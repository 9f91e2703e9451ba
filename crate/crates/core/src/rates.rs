//! Decay and dephasing rates, usable efficiency, and analytic side bounds.
//!
//! All rates are in 1/s. Angular frequencies `omega` are rad/s; `*_hz`
//! arguments are ordinary frequencies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lz::{cpb_excitation_probability, flux_excitation_probability};
use crate::model::{c_sigma, CpbParams, FluxParams, DEFAULT_FLUX_LINE_M};
use crate::units::{angular, E_CHARGE, FLUX_QUANTUM, GHZ, HBAR, K_B, PLANCK};

/// Outcome of one design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub p_ex: f64,
    /// Decay into the output line.
    pub gamma_o: f64,
    /// Decay into the control line (Γ_g for the charge qubit, Γ_f for the
    /// flux qubit).
    pub gamma_other: f64,
    pub gamma_nr: f64,
    pub eta: f64,
    pub t1: f64,
    pub gamma_phi: f64,
    /// Γ₂ = Γ₁/2 + Γ_φ.
    pub gamma2: f64,
    /// Full width at half maximum, Γ₂/π (Hz).
    pub fwhm_hz: f64,
    /// Γ₂/2π (Hz), the half width.
    pub linewidth_hz: f64,
    /// 1/(5 T1).
    pub rep_rate_hz: f64,
}

/// Number of T1 periods allowed between shots.
pub const REP_PERIODS: f64 = 5.0;

impl EfficiencyReport {
    pub fn assemble(
        p_ex: f64,
        gamma_o: f64,
        gamma_other: f64,
        gamma_nr: f64,
        gamma_phi: f64,
    ) -> Self {
        let gamma1 = gamma_o + gamma_other + gamma_nr;
        let eta = if gamma1 > 0.0 {
            p_ex * gamma_o / gamma1
        } else {
            0.0
        };
        let t1 = 1.0 / gamma1;
        let gamma2 = 0.5 * gamma1 + gamma_phi;
        EfficiencyReport {
            p_ex,
            gamma_o,
            gamma_other,
            gamma_nr,
            eta,
            t1,
            gamma_phi,
            gamma2,
            fwhm_hz: gamma2 / PI,
            linewidth_hz: gamma2 / (2.0 * PI),
            rep_rate_hz: 1.0 / (REP_PERIODS * t1),
        }
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma_o + self.gamma_other + self.gamma_nr
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid("omega", "must be > 0 rad/s"));
    }
    Ok(())
}

/// R C² ω² / (4 C_Σ) for coupling capacitance `c_coupling`.
pub fn cpb_gamma1(p: &CpbParams, c_coupling: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    if !(c_coupling >= 0.0) {
        return Err(Error::invalid("c_coupling", "must be >= 0"));
    }
    Ok(p.r_env * c_coupling * c_coupling * omega * omega / (4.0 * c_sigma(p)))
}

/// Γ_φ ≈ n_rms · 2π E_Q/h.
pub fn cpb_gamma_phi_approx(p: &CpbParams) -> f64 {
    p.n_rms * angular(p.charging_energy_hz())
}

/// Charge-noise dephasing from the first and second derivatives of the
/// two-level transition frequency at gate charge `n_g`.
pub fn cpb_gamma_phi(p: &CpbParams, n_g: f64) -> f64 {
    let fj = p.ej_hz;
    let fq = p.charging_energy_hz();
    let u = 1.0 - 2.0 * n_g;
    let f = fj.hypot(fq * u);
    if f == 0.0 {
        return 0.0;
    }
    let d1 = angular(-2.0 * fq * fq * u / f);
    let d2 = angular(4.0 * fq * fq * fj * fj / (f * f * f));
    let n2 = p.n_rms * p.n_rms;
    (n2 * d1 * d1 + 0.75 * n2 * n2 * d2 * d2).sqrt()
}

/// Gate charge in [0, 0.5] at which the two-level transition frequency equals
/// `f_hz`; the crossing point when `f_hz` is below the gap.
pub fn cpb_bias_for_frequency(p: &CpbParams, f_hz: f64) -> f64 {
    let fj = p.ej_hz;
    let fq = p.charging_energy_hz();
    if f_hz <= fj {
        return 0.5;
    }
    let u = (f_hz * f_hz - fj * fj).sqrt() / fq;
    0.5 * (1.0 - u.min(1.0))
}

/// Charge-noise model used in the efficiency report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dephasing {
    /// n_rms · E_Q/ħ.
    #[default]
    Approximate,
    /// Derivative expression at the bias point where the qubit emits at ω.
    Full,
}

/// Usable efficiency with the default (approximate) dephasing model.
pub fn usable_efficiency_cpb(
    p: &CpbParams,
    lambda_rate: f64,
    omega: f64,
) -> Result<EfficiencyReport> {
    usable_efficiency_cpb_with(p, lambda_rate, omega, Dephasing::Approximate)
}

pub fn usable_efficiency_cpb_with(
    p: &CpbParams,
    lambda_rate: f64,
    omega: f64,
    dephasing: Dephasing,
) -> Result<EfficiencyReport> {
    p.validate()?;
    check_omega(omega)?;
    let p_ex = cpb_excitation_probability(p, lambda_rate)?;
    let gamma_o = cpb_gamma1(p, p.co_eff(), omega)?;
    let gamma_g = cpb_gamma1(p, p.cg_eff(), omega)?;
    let gamma_phi = match dephasing {
        Dephasing::Approximate => cpb_gamma_phi_approx(p),
        Dephasing::Full => cpb_gamma_phi(p, cpb_bias_for_frequency(p, omega / (2.0 * PI))),
    };
    Ok(EfficiencyReport::assemble(
        p_ex, gamma_o, gamma_g, p.gamma_nr, gamma_phi,
    ))
}

/// Output-line voltage scale ν = (E_J/h per GHz) × 10⁻⁷ V.
pub fn flux_voltage_scale(p: &FluxParams) -> f64 {
    p.ej_hz / GHZ * 1e-7
}

/// (Γ₁,o, Γ_φ) for the flux qubit: 2ωZ(C_o ν)²/ħ and φ_rms γ E_J/ħ.
pub fn flux_rates(p: &FluxParams, omega: f64) -> Result<(f64, f64)> {
    check_omega(omega)?;
    let gamma = p.gamma()?;
    let q = p.co * flux_voltage_scale(p);
    let gamma1_o = 2.0 * omega * p.z_env * q * q / HBAR;
    let gamma_phi = p.phi_rms * gamma * angular(p.ej_hz);
    Ok((gamma1_o, gamma_phi))
}

// Reference point of the flux-line estimate: Γ_f ≈ 10³ s⁻¹.
const FLUX_LINE_REF_RATE: f64 = 1e3;
const FLUX_LINE_REF_DELTA_HZ: f64 = 4.0 * GHZ;
const FLUX_LINE_REF_EJ_HZ: f64 = 250.0 * GHZ;
const FLUX_LINE_REF_OMEGA: f64 = 2.0 * PI * 4.0 * GHZ;

/// Order-of-magnitude decay into the flux line, Γ_f ∝ M² E_J² Δ² / ω,
/// anchored at 10³ s⁻¹ for Δ/h = 4 GHz, E_J/h = 250 GHz, ω = 2π·4 GHz and
/// M = 0.015 Φ₀/mA.
pub fn flux_line_rate_estimate(p: &FluxParams, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let m = p.m_coupling / DEFAULT_FLUX_LINE_M;
    let e = p.ej_hz / FLUX_LINE_REF_EJ_HZ;
    let d = p.delta_hz / FLUX_LINE_REF_DELTA_HZ;
    Ok(FLUX_LINE_REF_RATE * m * m * e * e * d * d * FLUX_LINE_REF_OMEGA / omega)
}

/// Usable efficiency of the flux qubit swept at `mu_rate`.
///
/// With `include_flux_line = false` the flux-line channel is dropped and
/// `gamma_other` is zero.
pub fn usable_efficiency_flux(
    p: &FluxParams,
    mu_rate: f64,
    omega: f64,
    include_flux_line: bool,
) -> Result<EfficiencyReport> {
    p.validate()?;
    let p_ex = flux_excitation_probability(p, mu_rate)?;
    let (gamma_o, gamma_phi) = flux_rates(p, omega)?;
    let gamma_f = if include_flux_line {
        flux_line_rate_estimate(p, omega)?
    } else {
        0.0
    };
    Ok(EfficiencyReport::assemble(
        p_ex, gamma_o, gamma_f, p.gamma_nr, gamma_phi,
    ))
}

/// sin(πx)/(πx).
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let y = PI * x;
        y.sin() / y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PulseEnvelope {
    /// Rise and fall t_r, flat top T/2, period T (s).
    Trapezoid { period: f64 },
    /// Rise and fall t_r, no flat top.
    Triangle,
}

/// What the sweep line drives, which sets the pulse energy per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "arch")]
pub enum LeakageSource {
    /// Gate line with capacitance `cg` (F): energy (2e)²/C_g.
    Charge { cg: f64 },
    /// Flux line with mutual inductance `m_coupling` (H) to a qubit of
    /// Josephson energy `ej_hz`: energy E_J + Φ₀²/2M.
    Flux { ej_hz: f64, m_coupling: f64 },
}

impl LeakageSource {
    fn pulse_energy(&self) -> Result<f64> {
        match *self {
            LeakageSource::Charge { cg } => {
                if !(cg > 0.0) {
                    return Err(Error::invalid("cg", "gate capacitance must be > 0"));
                }
                Ok((2.0 * E_CHARGE).powi(2) / cg)
            }
            LeakageSource::Flux { ej_hz, m_coupling } => {
                if !(m_coupling > 0.0) {
                    return Err(Error::invalid(
                        "m_coupling",
                        "mutual inductance must be > 0",
                    ));
                }
                Ok(PLANCK * ej_hz + FLUX_QUANTUM * FLUX_QUANTUM / (2.0 * m_coupling))
            }
        }
    }
}

/// Photons leaked into the output line per cycle by the sweep itself,
/// `β_c P_l / (ħ ω Γ)`.
///
/// `P_l` collects the sweep power spectral density in the band ω ± Γ₂ with
/// `gamma2` in rad/s; the photon rate is normalised by the emission linewidth
/// expressed as the FWHM Γ₂/π (Hz).
pub fn spectral_leakage(
    envelope: PulseEnvelope,
    source: LeakageSource,
    rise_time: f64,
    omega: f64,
    gamma2: f64,
    beta_c: f64,
) -> Result<f64> {
    check_omega(omega)?;
    if !(gamma2 > 0.0) {
        return Err(Error::invalid("gamma_linewidth", "must be > 0"));
    }
    if !(0.0..=1.0).contains(&beta_c) {
        return Err(Error::invalid("beta_c", "must lie in [0, 1]"));
    }
    if !(rise_time > 0.0) {
        return Err(Error::invalid("rise_time", "must be > 0"));
    }
    let energy = source.pulse_energy()?;
    let p_l = match envelope {
        PulseEnvelope::Trapezoid { period } => {
            if !(period > 2.0 * rise_time) {
                return Err(Error::invalid("period", "must exceed twice the rise time"));
            }
            let s = 0.5 * sinc(omega * period / 4.0) * sinc(omega * rise_time / 2.0);
            2.0 * gamma2 * period * (energy / period) * s * s
        }
        PulseEnvelope::Triangle => {
            let s = sinc(omega * rise_time / 2.0).powi(2);
            1.5 * gamma2 * rise_time * (energy / rise_time) * s * s
        }
    };
    let fwhm_hz = gamma2 / PI;
    Ok(beta_c * p_l / (HBAR * omega * fwhm_hz))
}

/// Boltzmann factor exp(−hf/k_B T).
pub fn thermal_population(f_hz: f64, temp: f64) -> Result<f64> {
    if !(f_hz > 0.0) {
        return Err(Error::invalid("f", "must be > 0"));
    }
    if !(temp >= 0.0) {
        return Err(Error::invalid("temp", "must be >= 0"));
    }
    if temp == 0.0 {
        return Ok(0.0);
    }
    Ok((-PLANCK * f_hz / (K_B * temp)).exp())
}

/// 1 − exp(−1.5 t_r/T1): probability of decaying while the control is
/// away from its final value.
pub fn protocol_decay_bound(rise_time: f64, t1: f64) -> Result<f64> {
    if !(rise_time > 0.0) || !(t1 > 0.0) {
        return Err(Error::invalid("rise_time/t1", "both must be > 0"));
    }
    Ok(-(-1.5 * rise_time / t1).exp_m1())
}
