//! Device parameter records, Hamiltonian builders and transition frequencies.
//!
//! The charge qubit is represented in a truncated charge basis `|n⟩`; the flux
//! qubit is handled in its two-level approximation near half a flux quantum.
//! All matrices are in `E/h` (Hz).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{angular, E_CHARGE, FEMTO, FLUX_QUANTUM, GHZ, PLANCK};

/// Transmission-line cutoff for aluminium films, as a frequency (Hz).
pub const DEFAULT_KM_HZ: f64 = 90.0 * GHZ;
/// Frequency-equivalent line coefficient: `β_hz = coeff / C`, i.e. 3.2 THz for
/// 1 fF on a 50 Ω coplanar waveguide on silicon.
pub const DEFAULT_BETA_COEFF_HZ_F: f64 = 3.2e12 * FEMTO;
/// Flux-line mutual inductance 0.015 Φ₀/mA (H).
pub const DEFAULT_FLUX_LINE_M: f64 = 0.015 * FLUX_QUANTUM / 1e-3;

fn require(cond: bool, name: &str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(name, reason))
    }
}

/// Cooper-pair-box device parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpbParams {
    /// Josephson energy E_J/h (Hz).
    pub ej_hz: f64,
    /// Junction capacitance (F).
    pub cj: f64,
    /// Gate capacitance (F).
    pub cg: f64,
    /// Output capacitance (F).
    pub co: f64,
    /// Environment resistance seen by the coupling capacitors (Ω).
    #[serde(default = "default_r_env")]
    pub r_env: f64,
    /// RMS charge noise (dimensionless).
    #[serde(default)]
    pub n_rms: f64,
    /// Non-radiative decay rate (1/s).
    #[serde(default)]
    pub gamma_nr: f64,
    /// Transmission-line mode cutoff as a frequency (Hz).
    #[serde(default = "default_km_hz")]
    pub km_hz: f64,
    /// Line coefficient for the effective capacitance (Hz·F).
    #[serde(default = "default_beta_coeff")]
    pub beta_coeff_hz_f: f64,
    /// Fixes E_Q/h instead of deriving it from the capacitances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_hz_override: Option<f64>,
}

fn default_r_env() -> f64 {
    50.0
}
fn default_km_hz() -> f64 {
    DEFAULT_KM_HZ
}
fn default_beta_coeff() -> f64 {
    DEFAULT_BETA_COEFF_HZ_F
}

impl CpbParams {
    /// Circuit of the reference charge-qubit design point:
    /// E_J/h = 1 GHz, C_J = 1 fF, C_g = 10 aF, C_o = 2.3 fF, Γ_nr = 1 μs⁻¹,
    /// n_rms = 0.5e-3.
    pub fn reference() -> Self {
        CpbParams {
            ej_hz: 1.0 * GHZ,
            cj: 1.0 * FEMTO,
            cg: 10e-18,
            co: 2.3 * FEMTO,
            r_env: 50.0,
            n_rms: 0.5e-3,
            gamma_nr: 1e6,
            km_hz: DEFAULT_KM_HZ,
            beta_coeff_hz_f: DEFAULT_BETA_COEFF_HZ_F,
            eq_hz_override: None,
        }
    }

    /// Parameters with a prescribed charging energy E_Q/h, for reproducing
    /// simulations that quote E_J and E_Q directly. The capacitances keep the
    /// reference values and only enter the decay rates.
    pub fn from_charging_energy(ej_hz: f64, eq_hz: f64) -> Self {
        CpbParams {
            ej_hz,
            eq_hz_override: Some(eq_hz),
            ..Self::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.ej_hz.is_finite() && self.ej_hz > 0.0,
            "ej_hz",
            "must be > 0",
        )?;
        require(self.cj.is_finite() && self.cj > 0.0, "cj", "must be > 0")?;
        require(self.cg.is_finite() && self.cg >= 0.0, "cg", "must be >= 0")?;
        require(self.co.is_finite() && self.co >= 0.0, "co", "must be >= 0")?;
        require(
            self.r_env.is_finite() && self.r_env >= 0.0,
            "r_env",
            "must be >= 0",
        )?;
        require(
            self.n_rms.is_finite() && self.n_rms >= 0.0,
            "n_rms",
            "must be >= 0",
        )?;
        require(
            self.gamma_nr.is_finite() && self.gamma_nr >= 0.0,
            "gamma_nr",
            "must be >= 0",
        )?;
        require(
            self.km_hz.is_finite() && self.km_hz >= 0.0,
            "km_hz",
            "must be >= 0",
        )?;
        require(
            self.beta_coeff_hz_f.is_finite() && self.beta_coeff_hz_f > 0.0,
            "beta_coeff_hz_f",
            "must be > 0",
        )?;
        if let Some(eq) = self.eq_hz_override {
            require(eq.is_finite() && eq > 0.0, "eq_hz_override", "must be > 0")?;
        }
        Ok(())
    }

    /// Effective gate capacitance C_g,eff (F); zero when C_g is zero.
    pub fn cg_eff(&self) -> f64 {
        coupling_eff(self.cg, self.km_hz, self.beta_coeff_hz_f)
    }

    /// Effective output capacitance C_o,eff (F); zero when C_o is zero.
    pub fn co_eff(&self) -> f64 {
        coupling_eff(self.co, self.km_hz, self.beta_coeff_hz_f)
    }

    /// Charging energy E_Q/h = (2e)²/(2 C_Σ h) in Hz, or the override.
    pub fn charging_energy_hz(&self) -> f64 {
        match self.eq_hz_override {
            Some(eq) => eq,
            None => charging_energy_hz(c_sigma(self)),
        }
    }
}

/// Flux-qubit device parameters (two-level approximation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxParams {
    /// Josephson energy of the two identical junctions, E_J/h (Hz).
    pub ej_hz: f64,
    /// Tunnel splitting Δ/h (Hz).
    pub delta_hz: f64,
    /// Junction asymmetry α (> 0.5).
    pub alpha: f64,
    /// Output capacitance (F).
    pub co: f64,
    /// Flux-line mutual inductance (H).
    #[serde(default = "default_m")]
    pub m_coupling: f64,
    /// RMS flux noise in units of Φ₀.
    #[serde(default)]
    pub phi_rms: f64,
    /// Non-radiative decay rate (1/s).
    #[serde(default)]
    pub gamma_nr: f64,
    /// Output-line impedance (Ω).
    #[serde(default = "default_r_env")]
    pub z_env: f64,
    /// Largest single-step flux excursion from Φ₀/2, in Φ₀.
    #[serde(default = "default_halfrange")]
    pub sweep_halfrange_phi0: f64,
}

fn default_m() -> f64 {
    DEFAULT_FLUX_LINE_M
}
fn default_halfrange() -> f64 {
    0.1
}

impl FluxParams {
    /// Reference flux-qubit operating parameters: Δ/h = 1 GHz, α = 0.7,
    /// E_J/h = 250 GHz, φ_rms = 1e-5 Φ₀, Γ_nr = 2 μs⁻¹, Z = 50 Ω.
    pub fn reference() -> Self {
        FluxParams {
            ej_hz: 250.0 * GHZ,
            delta_hz: 1.0 * GHZ,
            alpha: 0.7,
            co: 2.5 * FEMTO,
            m_coupling: DEFAULT_FLUX_LINE_M,
            phi_rms: 1e-5,
            gamma_nr: 2e6,
            z_env: 50.0,
            sweep_halfrange_phi0: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.ej_hz.is_finite() && self.ej_hz > 0.0,
            "ej_hz",
            "must be > 0",
        )?;
        require(
            self.delta_hz.is_finite() && self.delta_hz >= 0.0,
            "delta_hz",
            "must be >= 0",
        )?;
        require(
            self.alpha.is_finite() && self.alpha > 0.5,
            "alpha",
            "must be > 0.5",
        )?;
        require(self.co.is_finite() && self.co >= 0.0, "co", "must be >= 0")?;
        require(
            self.m_coupling.is_finite() && self.m_coupling >= 0.0,
            "m_coupling",
            "must be >= 0",
        )?;
        require(
            self.phi_rms.is_finite() && self.phi_rms >= 0.0,
            "phi_rms",
            "must be >= 0",
        )?;
        require(
            self.gamma_nr.is_finite() && self.gamma_nr >= 0.0,
            "gamma_nr",
            "must be >= 0",
        )?;
        require(
            self.z_env.is_finite() && self.z_env >= 0.0,
            "z_env",
            "must be >= 0",
        )?;
        require(
            self.sweep_halfrange_phi0.is_finite() && self.sweep_halfrange_phi0 > 0.0,
            "sweep_halfrange_phi0",
            "must be > 0",
        )?;
        Ok(())
    }

    /// γ = sqrt(1 − (1/2α)²).
    pub fn gamma(&self) -> Result<f64> {
        flux_gamma(self.alpha)
    }
}

/// γ = sqrt(1 − (1/2α)²), defined for α > 0.5.
pub fn flux_gamma(alpha: f64) -> Result<f64> {
    if !(alpha > 0.5) {
        return Err(Error::invalid("alpha", "must be > 0.5"));
    }
    let x = 1.0 / (2.0 * alpha);
    Ok((1.0 - x * x).sqrt())
}

/// Truncated charge basis `n_min ..= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeBasis {
    n_min: i32,
    n_max: i32,
}

impl ChargeBasis {
    /// The {0, 1} working pair must be interior: `n_min < 0` and `n_max > 1`.
    pub fn new(n_min: i32, n_max: i32) -> Result<Self> {
        if !(n_min < 0 && n_max > 1) {
            return Err(Error::invalid(
                "basis",
                format!("need n_min < 0 < 1 < n_max, got [{n_min}, {n_max}]"),
            ));
        }
        Ok(ChargeBasis { n_min, n_max })
    }

    pub fn n_min(&self) -> i32 {
        self.n_min
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn charges(&self) -> impl Iterator<Item = i32> {
        self.n_min..=self.n_max
    }

    pub fn index_of(&self, n: i32) -> Option<usize> {
        (self.n_min..=self.n_max)
            .contains(&n)
            .then(|| (n - self.n_min) as usize)
    }
}

impl Default for ChargeBasis {
    /// n ∈ [−3, 4], eight levels.
    fn default() -> Self {
        ChargeBasis {
            n_min: -3,
            n_max: 4,
        }
    }
}

/// Eigen-decomposition with eigenvalues sorted ascending; column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.vectors.column(k).into_owned()
    }
}

/// Dense Hermitian matrix in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<Complex64>,
}

const HERMITIAN_RTOL: f64 = 1e-12;

impl HermitianMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::invalid("matrix", "must be square and non-empty"));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = entries.nrows();
        for i in 0..n {
            for j in i..n {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if d > HERMITIAN_RTOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::invalid(
                        "matrix",
                        format!("not Hermitian at ({i}, {j}): mismatch {d:e}"),
                    ));
                }
            }
        }
        Ok(HermitianMatrix { entries })
    }

    /// Real symmetric tridiagonal matrix from its diagonal and first
    /// off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        let n = diag.len();
        assert_eq!(
            off.len() + 1,
            n,
            "off-diagonal must have len(diag) - 1 entries"
        );
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        for (i, &o) in off.iter().enumerate() {
            m[(i, i + 1)] = Complex64::new(o, 0.0);
            m[(i + 1, i)] = Complex64::new(o, 0.0);
        }
        HermitianMatrix { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Largest Gershgorin radius, an upper bound on the spectral radius (Hz).
    pub fn gershgorin_bound(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues (ascending) and matching eigenvectors.
    pub fn eigh(&self) -> Spectrum {
        let eig = self.entries.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::<Complex64>::zeros(self.dim(), self.dim());
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Spectrum { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().values
    }
}

/// Line-loaded coupling capacitance `C/(1 + k_m/β)` with `β_hz = coeff/C`.
pub fn effective_capacitance(c: f64, km_hz: f64, beta_coeff_hz_f: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("c", "capacitance must be > 0"));
    }
    if !(km_hz >= 0.0) {
        return Err(Error::invalid("km_hz", "must be >= 0"));
    }
    if !(beta_coeff_hz_f > 0.0) {
        return Err(Error::invalid("beta_coeff_hz_f", "must be > 0"));
    }
    let beta_hz = beta_coeff_hz_f / c;
    Ok(c / (1.0 + km_hz / beta_hz))
}

fn coupling_eff(c: f64, km_hz: f64, coeff: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        effective_capacitance(c, km_hz, coeff).unwrap_or(0.0)
    }
}

/// Island capacitance C_Σ = C_J + C_g,eff + C_o,eff (F).
pub fn c_sigma(p: &CpbParams) -> f64 {
    p.cj + p.cg_eff() + p.co_eff()
}

/// E_Q/h = (2e)²/(2 C h) in Hz.
pub fn charging_energy_hz(c_sigma: f64) -> f64 {
    (2.0 * E_CHARGE).powi(2) / (2.0 * c_sigma) / PLANCK
}

/// Charge-basis Hamiltonian: diagonal E_Q(n − n_g)², nearest-neighbour
/// coupling −E_J/2, both in Hz.
pub fn cpb_hamiltonian(p: &CpbParams, basis: &ChargeBasis, n_g: f64) -> Result<HermitianMatrix> {
    if basis.dim() < 2 {
        return Err(Error::invalid("basis", "dimension must be >= 2"));
    }
    let eq = p.charging_energy_hz();
    let diag: Vec<f64> = basis
        .charges()
        .map(|n| {
            let d = n as f64 - n_g;
            eq * d * d
        })
        .collect();
    let off = vec![-0.5 * p.ej_hz; basis.dim() - 1];
    Ok(HermitianMatrix::tridiagonal(&diag, &off))
}

/// Two-level charge-qubit transition frequency
/// sqrt(f_J² + f_Q²(1 − 2n_g)²) in Hz.
pub fn cpb_transition_frequency(p: &CpbParams, n_g: f64) -> f64 {
    let eq = p.charging_energy_hz();
    p.ej_hz.hypot(eq * (1.0 - 2.0 * n_g))
}

/// Half the diabatic splitting of the flux qubit, γ·(E_J/h)·2π·δφ_e (Hz).
fn flux_bias_hz(p: &FluxParams, gamma: f64, dphi_e: f64) -> f64 {
    gamma * p.ej_hz * angular(dphi_e)
}

/// Two-level flux-qubit Hamiltonian at offset `dphi_e` (Φ₀) from the
/// symmetry point: `diag(−b, +b)` with `b = γ f_EJ 2π δφ_e`, off-diagonal −Δ/2.
pub fn flux_hamiltonian(p: &FluxParams, dphi_e: f64) -> Result<HermitianMatrix> {
    let gamma = p.gamma()?;
    if dphi_e.abs() > p.sweep_halfrange_phi0 {
        log::warn!(
            "flux offset {dphi_e} Φ₀ exceeds the single-step sweep half-range {} Φ₀",
            p.sweep_halfrange_phi0
        );
    }
    let b = flux_bias_hz(p, gamma, dphi_e);
    Ok(HermitianMatrix::tridiagonal(&[-b, b], &[-0.5 * p.delta_hz]))
}

/// sqrt((2γ f_EJ 2π δφ_e)² + f_Δ²) in Hz.
pub fn flux_transition_frequency(p: &FluxParams, dphi_e: f64) -> Result<f64> {
    let gamma = p.gamma()?;
    Ok((2.0 * flux_bias_hz(p, gamma, dphi_e)).hypot(p.delta_hz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ATTO;
    use approx::assert_relative_eq;

    fn bare(cj: f64, cg: f64, co: f64) -> CpbParams {
        CpbParams {
            cj,
            cg,
            co,
            km_hz: 0.0,
            ..CpbParams::reference()
        }
    }

    #[test]
    fn c_sigma_zero_cutoff_is_plain_sum() {
        let p = bare(1.0 * FEMTO, 10.0 * ATTO, 2.3 * FEMTO);
        assert_relative_eq!(c_sigma(&p), 3.31 * FEMTO, max_relative = 1e-12);
    }

    #[test]
    fn c_sigma_junction_only() {
        let p = bare(1.0 * FEMTO, 0.0, 0.0);
        assert_relative_eq!(c_sigma(&p), 1.0 * FEMTO, max_relative = 1e-15);
    }

    #[test]
    fn c_sigma_with_aluminium_cutoff() {
        let p = CpbParams {
            km_hz: 90.0 * GHZ,
            ..bare(1.0 * FEMTO, 10.0 * ATTO, 2.3 * FEMTO)
        };
        // hand evaluation: 1 + 0.01/(1 + 90e9/320e12) + 2.3/(1 + 90e9/1.3913e12) fF
        let expected = 1.0 + 0.01 / (1.0 + 2.8125e-4) + 2.3 / (1.0 + 0.064_687_5);
        assert_relative_eq!(c_sigma(&p) / FEMTO, expected, max_relative = 1e-12);
        assert!((c_sigma(&p) / FEMTO - 3.167).abs() < 0.005);
        assert!(c_sigma(&p) > p.cj);
    }

    #[test]
    fn effective_capacitance_values() {
        let c = effective_capacitance(1.0 * FEMTO, 0.0, DEFAULT_BETA_COEFF_HZ_F).unwrap();
        assert_eq!(c, 1.0 * FEMTO);
        let c = effective_capacitance(1.0 * FEMTO, 90.0 * GHZ, DEFAULT_BETA_COEFF_HZ_F).unwrap();
        assert_relative_eq!(c / FEMTO, 1.0 / 1.028_125, max_relative = 1e-12);
        assert!((c / FEMTO - 0.9726).abs() < 1e-4);
        // β_hz = 1.391 THz for 2.3 fF
        let coeff = 1.391e12 * 2.3 * FEMTO;
        let c = effective_capacitance(2.3 * FEMTO, 90.0 * GHZ, coeff).unwrap();
        assert!((c / FEMTO - 2.16).abs() < 0.005);
    }

    #[test]
    fn effective_capacitance_rejects_nonpositive() {
        assert!(effective_capacitance(0.0, 1.0, 1.0).is_err());
        assert!(effective_capacitance(-1e-15, 1.0, 1.0).is_err());
    }

    #[test]
    fn cpb_hamiltonian_structure() {
        let p = CpbParams::from_charging_energy(1.0 * GHZ, 19.27 * GHZ);
        let basis = ChargeBasis::default();
        let h = cpb_hamiltonian(&p, &basis, 0.0).unwrap();
        let i0 = basis.index_of(0).unwrap();
        assert_eq!(h.entry(i0, i0).re, 0.0);
        for i in 0..basis.dim() - 1 {
            assert_eq!(h.entry(i, i + 1).re, -0.5 * GHZ);
            assert_eq!(h.entry(i + 1, i).re, -0.5 * GHZ);
            for j in i + 2..basis.dim() {
                assert_eq!(h.entry(i, j), Complex64::new(0.0, 0.0));
            }
        }
        let h = cpb_hamiltonian(&p, &basis, 0.5).unwrap();
        let i1 = basis.index_of(1).unwrap();
        assert_relative_eq!(h.entry(i0, i0).re, 4.8175 * GHZ, max_relative = 1e-12);
        assert_relative_eq!(h.entry(i1, i1).re, 4.8175 * GHZ, max_relative = 1e-12);
    }

    #[test]
    fn basis_validation() {
        assert!(ChargeBasis::new(0, 4).is_err());
        assert!(ChargeBasis::new(-1, 1).is_err());
        let b = ChargeBasis::new(-1, 2).unwrap();
        assert_eq!(b.dim(), 4);
        assert_eq!(ChargeBasis::default().dim(), 8);
    }

    #[test]
    fn cpb_transition_frequency_values() {
        let p = CpbParams::from_charging_energy(1.0 * GHZ, 19.27 * GHZ);
        assert_relative_eq!(
            cpb_transition_frequency(&p, 0.5),
            1.0 * GHZ,
            max_relative = 1e-15
        );
        let f0 = cpb_transition_frequency(&p, 0.0);
        assert_relative_eq!(
            f0,
            (1.0f64 + 19.27 * 19.27).sqrt() * GHZ,
            max_relative = 1e-12
        );
        assert!((f0 / GHZ - 19.296).abs() < 1e-3);
        for k in 0..=100 {
            let ng = k as f64 / 100.0;
            assert_relative_eq!(
                cpb_transition_frequency(&p, ng),
                cpb_transition_frequency(&p, 1.0 - ng),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn two_level_gap_minimum_matches_dense_spectrum() {
        let p = CpbParams::from_charging_energy(1.0 * GHZ, 19.27 * GHZ);
        let h = cpb_hamiltonian(&p, &ChargeBasis::default(), 0.5).unwrap();
        let ev = h.eigenvalues();
        let gap = ev[1] - ev[0];
        assert!(((gap - 1.0 * GHZ) / GHZ).abs() < 0.02);
        let min = (0..=1000)
            .map(|k| cpb_transition_frequency(&p, k as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, cpb_transition_frequency(&p, 0.5));
    }

    #[test]
    fn flux_gamma_value() {
        let g = flux_gamma(0.7).unwrap();
        assert_relative_eq!(
            g,
            (1.0 - (1.0f64 / 1.4).powi(2)).sqrt(),
            max_relative = 1e-15
        );
        assert!((g - 0.6999).abs() < 1e-4);
        assert!(flux_gamma(0.5).is_err());
    }

    #[test]
    fn flux_hamiltonian_cases() {
        let p = FluxParams::reference();
        let h = flux_hamiltonian(&p, 0.0).unwrap();
        assert_eq!(h.entry(0, 1).re, -0.5 * GHZ);
        assert_eq!(h.entry(0, 0).re, 0.0);
        let ev = h.eigenvalues();
        assert_relative_eq!(ev[1] - ev[0], 1.0 * GHZ, max_relative = 1e-12);

        let p0 = FluxParams { delta_hz: 0.0, ..p };
        let dphi = 0.01;
        let h = flux_hamiltonian(&p0, dphi).unwrap();
        let g = p0.gamma().unwrap();
        let b = g * p0.ej_hz * angular(dphi);
        assert_relative_eq!(h.entry(1, 1).re, b, max_relative = 1e-15);
        assert_relative_eq!(h.entry(0, 0).re, -b, max_relative = 1e-15);
        assert!(h.trace().abs() < 1e-3);
        assert_relative_eq!(
            flux_transition_frequency(&p0, dphi).unwrap(),
            2.0 * b,
            max_relative = 1e-12
        );

        let bad = FluxParams { alpha: 0.5, ..p };
        assert!(flux_hamiltonian(&bad, 0.0).is_err());
    }

    #[test]
    fn flux_gap_inversion_by_bisection() {
        let p = FluxParams::reference();
        let target = 6.0 * GHZ;
        let (mut lo, mut hi) = (0.0, 0.1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if flux_transition_frequency(&p, mid).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // frozen from the bisection above: 2γ f_EJ 2π δφ = sqrt(35) GHz
        assert!((lo - 2.690_76e-3).abs() < 1e-7, "dphi = {lo}");
        let g = p.gamma().unwrap();
        let slope = 2.0 * g * p.ej_hz * angular(1.0);
        let far = flux_transition_frequency(&p, 0.1).unwrap();
        assert!((far / (slope * 0.1) - 1.0).abs() < 1e-4);
    }
}
