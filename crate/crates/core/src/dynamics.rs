//! Time-dependent Schrödinger propagation.
//!
//! The state is integrated in the fixed (diabatic) basis of the Hamiltonian
//! family, `dψ/dt = −i 2π H(χ(t)) ψ` with H in Hz. Populations are reported in
//! the instantaneous eigenbasis, levels ordered by ascending energy.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    cpb_hamiltonian, flux_hamiltonian, ChargeBasis, CpbParams, FluxParams, HermitianMatrix,
    Spectrum,
};
use crate::pulse::{Drive, PulseSegment, PulseShape};
use crate::tableau::{Tableau, DOP853, DOPRI5};

const TWO_PI: f64 = 2.0 * PI;

/// Hamiltonians `H(χ)` (Hz) parameterised by a scalar control value.
pub trait HamiltonianFamily: Sync {
    fn dim(&self) -> usize;

    fn at(&self, chi: f64) -> Result<HermitianMatrix>;

    /// `out = H(χ) ψ`. The default goes through the dense matrix.
    fn apply(&self, chi: f64, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let h = self.at(chi)?;
        let m = h.entries();
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..psi.len()).map(|j| m[(i, j)] * psi[j]).sum();
        }
        Ok(())
    }

    /// Energy (Hz) subtracted from H during integration. Any real function of
    /// χ only changes the global phase; a good choice keeps the occupied
    /// levels slowly rotating.
    fn energy_offset(&self, _chi: f64) -> f64 {
        0.0
    }
}

/// Charge qubit with χ = n_g − 0.5.
#[derive(Debug, Clone)]
pub struct CpbFamily {
    params: CpbParams,
    basis: ChargeBasis,
    eq_hz: f64,
    charges: Vec<f64>,
}

impl CpbFamily {
    pub fn new(params: CpbParams, basis: ChargeBasis) -> Result<Self> {
        params.validate()?;
        let eq_hz = params.charging_energy_hz();
        let charges = basis.charges().map(f64::from).collect();
        Ok(CpbFamily {
            params,
            basis,
            eq_hz,
            charges,
        })
    }

    pub fn params(&self) -> &CpbParams {
        &self.params
    }

    pub fn basis(&self) -> &ChargeBasis {
        &self.basis
    }
}

impl HamiltonianFamily for CpbFamily {
    fn dim(&self) -> usize {
        self.charges.len()
    }

    fn at(&self, chi: f64) -> Result<HermitianMatrix> {
        cpb_hamiltonian(&self.params, &self.basis, chi + 0.5)
    }

    fn apply(&self, chi: f64, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let ng = chi + 0.5;
        let half_ej = -0.5 * self.params.ej_hz;
        let n = psi.len();
        for i in 0..n {
            let d = self.charges[i] - ng;
            let mut acc = psi[i] * (self.eq_hz * d * d);
            if i > 0 {
                acc += psi[i - 1] * half_ej;
            }
            if i + 1 < n {
                acc += psi[i + 1] * half_ej;
            }
            out[i] = acc;
        }
        Ok(())
    }

    fn energy_offset(&self, chi: f64) -> f64 {
        let ng = chi + 0.5;
        self.charges
            .iter()
            .map(|&n| self.eq_hz * (n - ng) * (n - ng))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Flux qubit with χ = δφ_e (Φ₀).
#[derive(Debug, Clone)]
pub struct FluxFamily {
    params: FluxParams,
}

impl FluxFamily {
    pub fn new(params: FluxParams) -> Result<Self> {
        params.validate()?;
        Ok(FluxFamily { params })
    }
}

impl HamiltonianFamily for FluxFamily {
    fn dim(&self) -> usize {
        2
    }

    fn at(&self, chi: f64) -> Result<HermitianMatrix> {
        flux_hamiltonian(&self.params, chi)
    }
}

/// Generic sweep `H = ½(χ σ_z + d σ_x)` in Hz: χ is the diabatic splitting and
/// `d` the minimum gap. A linear ramp of χ at rate r (Hz/s) is the
/// Landau-Zener problem with β = 2π r (rad/s²).
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelFamily {
    pub d_hz: f64,
}

impl HamiltonianFamily for TwoLevelFamily {
    fn dim(&self) -> usize {
        2
    }

    fn at(&self, chi: f64) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::tridiagonal(
            &[0.5 * chi, -0.5 * chi],
            &[0.5 * self.d_hz],
        ))
    }

    fn apply(&self, chi: f64, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        out[0] = psi[0] * (0.5 * chi) + psi[1] * (0.5 * self.d_hz);
        out[1] = psi[0] * (0.5 * self.d_hz) - psi[1] * (0.5 * chi);
        Ok(())
    }
}

/// Family built from a closure.
pub struct FnFamily<F> {
    dim: usize,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(f64) -> Result<HermitianMatrix> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnFamily { dim, f }
    }
}

impl<F> HamiltonianFamily for FnFamily<F>
where
    F: Fn(f64) -> Result<HermitianMatrix> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, chi: f64) -> Result<HermitianMatrix> {
        let h = (self.f)(chi)?;
        if h.dim() != self.dim {
            return Err(Error::invalid(
                "hamiltonian",
                format!("expected dimension {}, got {}", self.dim, h.dim()),
            ));
        }
        Ok(h)
    }
}

/// χ held fixed for a given duration.
#[derive(Debug, Clone, Copy)]
pub struct Hold {
    pub chi: f64,
    pub duration: f64,
}

impl Drive for Hold {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn value(&self, _t: f64) -> f64 {
        self.chi
    }

    fn rise_time(&self) -> f64 {
        self.duration
    }
}

/// Plays another drive backwards in time.
pub struct TimeReversed<'a, D: ?Sized>(pub &'a D);

impl<D: Drive + ?Sized> Drive for TimeReversed<'_, D> {
    fn duration(&self) -> f64 {
        self.0.duration()
    }

    fn value(&self, t: f64) -> f64 {
        self.0.value(self.0.duration() - t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let total = self.0.duration();
        let mut b: Vec<f64> = self.0.breakpoints().iter().map(|t| total - t).collect();
        b.reverse();
        b
    }

    fn rise_time(&self) -> f64 {
        self.0.rise_time()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Accepts any nonzero vector with unit norm to within 1e-9.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = StateVector { amplitudes };
        if s.amplitudes.is_empty() {
            return Err(Error::invalid("psi0", "empty state"));
        }
        if (s.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "psi0",
                format!("state must be normalised (norm = {})", s.norm()),
            ));
        }
        Ok(s)
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("psi0", "zero or non-finite state"));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    /// Unit vector along basis state `k`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::invalid("k", format!("{k} outside dimension {dim}")));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); dim];
        a[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes: a })
    }

    /// Eigenvector `level` (ascending energy) of `h`.
    pub fn eigenstate(h: &HermitianMatrix, level: usize) -> Result<Self> {
        if level >= h.dim() {
            return Err(Error::invalid(
                "level",
                format!("{level} outside dimension {}", h.dim()),
            ));
        }
        Self::normalized(h.eigh().vector(level).iter().copied().collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn conj(&self) -> Self {
        StateVector {
            amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect(),
        }
    }

    /// |⟨v_k|ψ⟩|² for every eigenvector of `spec`, normalised by ‖ψ‖².
    pub fn populations(&self, spec: &Spectrum) -> Vec<f64> {
        let psi = DVector::from_column_slice(&self.amplitudes);
        let n2 = psi.norm_squared();
        (0..spec.values.len())
            .map(|k| spec.vectors.column(k).dotc(&psi).norm_sqr() / n2)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4,
    /// Dormand-Prince 5(4) with error control.
    DormandPrince45,
    /// Dormand-Prince 8(5,3) with error control.
    DormandPrince853,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step as a fraction of the drive's rise time.
    pub max_step_fraction: f64,
    /// Fixed-step method: largest phase advance 2π·‖H‖·h per step (rad).
    pub rk4_max_phase: f64,
    pub max_steps: usize,
    /// Number of equally spaced output times, endpoints included.
    pub samples: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::DormandPrince853,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step_fraction: 1.0 / 200.0,
            rk4_max_phase: 0.02,
            max_steps: 50_000_000,
            samples: 201,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::invalid("solver", "tolerances must be > 0"));
        }
        if !(self.max_step_fraction > 0.0) {
            return Err(Error::invalid("max_step_fraction", "must be > 0"));
        }
        if !(self.rk4_max_phase > 0.0) {
            return Err(Error::invalid("rk4_max_phase", "must be > 0"));
        }
        if self.samples < 2 {
            return Err(Error::invalid("samples", "need at least 2 output times"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub chi: Vec<f64>,
    /// `populations[i][k]`: level k at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    pub p_ground_final: f64,
    pub p_excited_final: f64,
    /// Population outside the two lowest levels at the end.
    pub leakage_final: f64,
    /// max |‖ψ(t)‖ − 1| over the output times.
    pub norm_drift: f64,
    pub steps: usize,
    #[serde(skip)]
    pub final_state: Option<StateVector>,
}

impl SimulationResult {
    pub fn leakage(&self, i: usize) -> f64 {
        self.populations[i].iter().skip(2).sum()
    }
}

struct Rhs<'a> {
    family: &'a dyn HamiltonianFamily,
    drive: &'a dyn Drive,
    evals: usize,
}

impl Rhs<'_> {
    fn eval(&mut self, t: f64, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let chi = self.drive.value(t);
        self.family.apply(chi, y, out)?;
        let off = self.family.energy_offset(chi);
        for (o, &yi) in out.iter_mut().zip(y) {
            let hy = *o - yi * off;
            *o = Complex64::new(hy.im, -hy.re) * TWO_PI;
        }
        self.evals += 1;
        Ok(())
    }
}

/// Integrates from t = 0 to the end of `drive` starting in `psi0`.
pub fn propagate(
    family: &dyn HamiltonianFamily,
    drive: &dyn Drive,
    psi0: &StateVector,
    opts: &SolverOptions,
) -> Result<SimulationResult> {
    opts.validate()?;
    let total = drive.duration();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::invalid("drive", "duration must be > 0"));
    }
    if psi0.dim() != family.dim() {
        return Err(Error::invalid(
            "psi0",
            format!(
                "dimension {} does not match Hamiltonian {}",
                psi0.dim(),
                family.dim()
            ),
        ));
    }
    if (psi0.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("psi0", "state must be normalised"));
    }

    let n_out = opts.samples;
    let sample_times: Vec<f64> = (0..n_out)
        .map(|i| total * i as f64 / (n_out - 1) as f64)
        .collect();
    let mut stops: Vec<(f64, bool)> = sample_times.iter().skip(1).map(|&t| (t, true)).collect();
    for b in drive.breakpoints() {
        if b > 0.0 && b < total {
            stops.push((b, false));
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));

    let h_max = opts.max_step_fraction * drive.rise_time();
    let mut rhs = Rhs {
        family,
        drive,
        evals: 0,
    };
    let mut y: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut integ = Integrator::new(family.dim(), opts.method);
    let mut h = h_max.min(initial_step(family, drive, opts));

    let mut out = Output::default();
    out.record(family, drive, 0.0, &y)?;
    for &(t_stop, record) in &stops {
        if t_stop > t {
            match opts.method {
                Method::DormandPrince45 => integ.advance_adaptive(
                    &DOPRI5, &mut rhs, &mut t, &mut y, t_stop, &mut h, h_max, opts, &mut steps,
                )?,
                Method::DormandPrince853 => integ.advance_adaptive(
                    &DOP853, &mut rhs, &mut t, &mut y, t_stop, &mut h, h_max, opts, &mut steps,
                )?,
                Method::Rk4 => integ
                    .advance_fixed(&mut rhs, &mut t, &mut y, t_stop, h_max, opts, &mut steps)?,
            }
        }
        if record {
            out.record(family, drive, t_stop, &y)?;
        }
    }

    let last = out.populations.last().expect("at least two samples");
    let p_ground_final = last[0];
    let p_excited_final = last.get(1).copied().unwrap_or(0.0);
    let leakage_final = last.iter().skip(2).sum();
    log::debug!("propagate: {steps} steps, {} rhs evaluations", rhs.evals);
    Ok(SimulationResult {
        times: out.times,
        chi: out.chi,
        populations: out.populations,
        p_ground_final,
        p_excited_final,
        leakage_final,
        norm_drift: out.norm_drift,
        steps,
        final_state: Some(StateVector { amplitudes: y }),
    })
}

/// Starts in the ground state of H(χ(0)) and propagates.
pub fn propagate_from_ground(
    family: &dyn HamiltonianFamily,
    drive: &dyn Drive,
    opts: &SolverOptions,
) -> Result<SimulationResult> {
    let h0 = family.at(drive.value(0.0))?;
    let psi0 = StateVector::eigenstate(&h0, 0)?;
    propagate(family, drive, &psi0, opts)
}

#[derive(Default)]
struct Output {
    times: Vec<f64>,
    chi: Vec<f64>,
    populations: Vec<Vec<f64>>,
    norm_drift: f64,
}

impl Output {
    fn record(
        &mut self,
        family: &dyn HamiltonianFamily,
        drive: &dyn Drive,
        t: f64,
        y: &[Complex64],
    ) -> Result<()> {
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let chi = drive.value(t);
        let spec = family.at(chi)?.eigh();
        let state = StateVector {
            amplitudes: y.to_vec(),
        };
        self.norm_drift = self.norm_drift.max((state.norm() - 1.0).abs());
        self.times.push(t);
        self.chi.push(chi);
        self.populations.push(state.populations(&spec));
        Ok(())
    }
}

fn initial_step(family: &dyn HamiltonianFamily, drive: &dyn Drive, opts: &SolverOptions) -> f64 {
    let chi = drive.value(0.0);
    let bound = family
        .at(chi)
        .map(|h| h.gershgorin_bound() + family.energy_offset(chi).abs())
        .unwrap_or(0.0);
    if bound > 0.0 {
        0.01 / (TWO_PI * bound)
    } else {
        opts.max_step_fraction * drive.rise_time()
    }
}

struct Integrator {
    k: Vec<Vec<Complex64>>,
    tmp: Vec<Complex64>,
    y_new: Vec<Complex64>,
    fsal_valid: bool,
}

impl Integrator {
    fn new(dim: usize, method: Method) -> Self {
        let stages = match method {
            Method::DormandPrince45 => DOPRI5.stages(),
            Method::DormandPrince853 => DOP853.stages(),
            Method::Rk4 => 4,
        };
        let zero = Complex64::new(0.0, 0.0);
        Integrator {
            k: vec![vec![zero; dim]; stages],
            tmp: vec![zero; dim],
            y_new: vec![zero; dim],
            fsal_valid: false,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn advance_adaptive(
        &mut self,
        tab: &Tableau,
        rhs: &mut Rhs<'_>,
        t: &mut f64,
        y: &mut Vec<Complex64>,
        t_end: f64,
        h: &mut f64,
        h_max: f64,
        opts: &SolverOptions,
        steps: &mut usize,
    ) -> Result<()> {
        let n_st = tab.stages();
        let dim = y.len();
        // χ̇ may jump at a stop, so the carried-over derivative is discarded.
        self.fsal_valid = false;
        while *t < t_end {
            let remaining = t_end - *t;
            let mut step = h.min(h_max);
            let last = step >= remaining * (1.0 - 1e-12);
            if last {
                step = remaining;
            }
            if step <= 1e-15 * t_end.abs().max(h_max) {
                return Err(Error::StepUnderflow { t: *t, h: step });
            }
            if !self.fsal_valid {
                rhs.eval(*t, y, &mut self.k[0])?;
                self.fsal_valid = true;
            }
            for s in 1..n_st {
                let row = tab.a[s];
                for i in 0..dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &a) in row.iter().enumerate() {
                        if a != 0.0 {
                            acc += self.k[j][i] * a;
                        }
                    }
                    self.tmp[i] = y[i] + acc * step;
                }
                let (_, after) = self.k.split_at_mut(s);
                rhs.eval(*t + tab.c[s] * step, &self.tmp, &mut after[0])?;
            }
            match tab.b {
                // the last stage was evaluated at the new solution
                None => self.y_new.copy_from_slice(&self.tmp),
                Some(b) => {
                    for i in 0..dim {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, &w) in b.iter().enumerate() {
                            if w != 0.0 {
                                acc += self.k[j][i] * w;
                            }
                        }
                        self.y_new[i] = y[i] + acc * step;
                    }
                }
            }
            let (mut hi2, mut lo2) = (0.0, 0.0);
            for i in 0..dim {
                let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(self.y_new[i].norm());
                hi2 += (weighted(&self.k, tab.e, i) / scale).norm_sqr();
                if let Some(e3) = tab.e_low {
                    lo2 += (weighted(&self.k, e3, i) / scale).norm_sqr();
                }
            }
            let err = match tab.e_low {
                None => step * (hi2 / dim as f64).sqrt(),
                Some(_) if hi2 == 0.0 && lo2 == 0.0 => 0.0,
                Some(_) => step * hi2 / ((hi2 + 0.01 * lo2) * dim as f64).sqrt(),
            };
            *steps += 1;
            if *steps > opts.max_steps {
                return Err(Error::StepLimit {
                    steps: *steps,
                    t: *t,
                });
            }
            if !err.is_finite() {
                return Err(Error::NonFinite { t: *t });
            }
            if err <= 1.0 {
                *t = if last { t_end } else { *t + step };
                std::mem::swap(y, &mut self.y_new);
                if tab.b.is_none() {
                    self.k.swap(0, n_st - 1);
                } else {
                    self.fsal_valid = false;
                }
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-tab.exponent)).clamp(0.2, 5.0)
                };
                if !last {
                    *h = step * factor;
                }
            } else {
                *h = step * (0.9 * err.powf(-tab.exponent)).clamp(0.1, 0.9);
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance_fixed(
        &mut self,
        rhs: &mut Rhs<'_>,
        t: &mut f64,
        y: &mut [Complex64],
        t_end: f64,
        h_max: f64,
        opts: &SolverOptions,
        steps: &mut usize,
    ) -> Result<()> {
        let span = t_end - *t;
        let t0 = *t;
        let bound = [t0, 0.5 * (t0 + t_end), t_end]
            .iter()
            .map(|&tt| {
                let chi = rhs.drive.value(tt);
                rhs.family
                    .at(chi)
                    .map(|h| spectral_spread(&h, rhs.family.energy_offset(chi)))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut h = h_max;
        if bound > 0.0 {
            h = h.min(opts.rk4_max_phase / (TWO_PI * bound));
        }
        let n = (span / h).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for i in 0..n {
            let ti = t0 + i as f64 * h;
            let [k1, k2, k3, k4] = &mut self.k[..] else {
                unreachable!("fixed-step integrator has four stages")
            };
            rhs.eval(ti, y, k1)?;
            for j in 0..y.len() {
                self.tmp[j] = y[j] + k1[j] * (0.5 * h);
            }
            rhs.eval(ti + 0.5 * h, &self.tmp, k2)?;
            for j in 0..y.len() {
                self.tmp[j] = y[j] + k2[j] * (0.5 * h);
            }
            rhs.eval(ti + 0.5 * h, &self.tmp, k3)?;
            for j in 0..y.len() {
                self.tmp[j] = y[j] + k3[j] * h;
            }
            rhs.eval(ti + h, &self.tmp, k4)?;
            for j in 0..y.len() {
                y[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            }
            *steps += 1;
            if *steps > opts.max_steps {
                return Err(Error::StepLimit {
                    steps: *steps,
                    t: ti,
                });
            }
        }
        *t = t_end;
        Ok(())
    }
}

fn weighted(k: &[Vec<Complex64>], w: &[f64], i: usize) -> Complex64 {
    w.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(s, &c)| k[s][i] * c)
        .sum()
}

/// max |λ − offset| over the Gershgorin discs of `h`.
fn spectral_spread(h: &HermitianMatrix, offset: f64) -> f64 {
    let m = h.entries();
    (0..h.dim())
        .map(|i| {
            let r: f64 = (0..h.dim())
                .filter(|&j| j != i)
                .map(|j| m[(i, j)].norm())
                .sum();
            (m[(i, i)].re - offset).abs() + r
        })
        .fold(0.0, f64::max)
}

/// |⟨g(H_i)|e(H_f)⟩|²: the excitation probability of an infinitely fast
/// switch from `h_initial` to `h_final`.
pub fn diabatic_limit(h_initial: &HermitianMatrix, h_final: &HermitianMatrix) -> Result<f64> {
    if h_initial.dim() != h_final.dim() {
        return Err(Error::invalid(
            "hamiltonian",
            format!(
                "dimensions differ: {} vs {}",
                h_initial.dim(),
                h_final.dim()
            ),
        ));
    }
    if h_initial.dim() < 2 {
        return Err(Error::invalid("hamiltonian", "need at least two levels"));
    }
    let si = h_initial.eigh();
    let sf = h_final.eigh();
    for s in [&si, &sf] {
        let split = s.values[1] - s.values[0];
        let scale = s.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if split <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate {
                level_a: 0,
                level_b: 1,
                split,
            });
        }
    }
    Ok(si.vector(0).dotc(&sf.vector(1)).norm_sqr())
}

/// Diabatic limit and final populations for a charge-qubit sweep
/// between two gate charges.
pub fn cpb_diabatic_limit(p: &CpbParams, basis: &ChargeBasis, ng_i: f64, ng_f: f64) -> Result<f64> {
    diabatic_limit(
        &cpb_hamiltonian(p, basis, ng_i)?,
        &cpb_hamiltonian(p, basis, ng_f)?,
    )
}

/// Grid for [`leakage_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axis", deny_unknown_fields)]
pub enum ScanAxis {
    /// Rise times (s) at a fixed sweep `ng_min → 1 − ng_min`.
    RiseTime { values: Vec<f64>, ng_min: f64 },
    /// Start points `ng_min` (sweep to `1 − ng_min`) at a fixed rise time.
    NgMin { values: Vec<f64>, rise_time: f64 },
}

impl ScanAxis {
    fn points(&self) -> Vec<(f64, f64)> {
        match self {
            ScanAxis::RiseTime { values, ng_min } => values.iter().map(|&t| (t, *ng_min)).collect(),
            ScanAxis::NgMin { values, rise_time } => {
                values.iter().map(|&n| (*rise_time, n)).collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ScanAxis::RiseTime { values, .. } | ScanAxis::NgMin { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub rise_time: f64,
    pub ng_min: f64,
    pub ng_max: f64,
    /// Effective rise time at n_g = 0.5.
    pub effective_rise_time: f64,
    pub p_excited: f64,
    pub leakage: f64,
    pub norm_drift: f64,
    pub error: Option<String>,
}

/// The single-segment gate sweep `ng_min → 1 − ng_min` in χ = n_g − 0.5.
pub fn cpb_sweep(shape: PulseShape, ng_min: f64, rise_time: f64) -> Result<PulseSegment> {
    if !(ng_min > 0.0 && ng_min < 0.5) {
        return Err(Error::invalid("ng_min", "must lie in (0, 0.5)"));
    }
    PulseSegment::with_origin(shape, ng_min - 0.5, 0.5 - ng_min, rise_time, -0.5)
}

/// Final excitation and leakage over a grid of sweeps. Grid points run in
/// parallel; the output keeps grid order and failures are reported per point.
pub fn leakage_scan(
    p: &CpbParams,
    basis: &ChargeBasis,
    shape: PulseShape,
    axis: &ScanAxis,
    opts: &SolverOptions,
) -> Result<Vec<ScanPoint>> {
    if axis.is_empty() {
        return Err(Error::invalid("grid", "scan grid is empty"));
    }
    let family = CpbFamily::new(*p, *basis)?;
    let opts = SolverOptions {
        samples: 2,
        ..*opts
    };
    Ok(axis
        .points()
        .into_par_iter()
        .map(|(t_r, ng_min)| {
            let run = || -> Result<(SimulationResult, f64)> {
                let seg = cpb_sweep(shape, ng_min, t_r)?;
                let t_eff = seg.effective_rise_time(0.0)?;
                Ok((propagate_from_ground(&family, &seg, &opts)?, t_eff))
            };
            match run() {
                Ok((r, t_eff)) => ScanPoint {
                    rise_time: t_r,
                    ng_min,
                    ng_max: 1.0 - ng_min,
                    effective_rise_time: t_eff,
                    p_excited: r.p_excited_final,
                    leakage: r.leakage_final,
                    norm_drift: r.norm_drift,
                    error: None,
                },
                Err(e) => ScanPoint {
                    rise_time: t_r,
                    ng_min,
                    ng_max: 1.0 - ng_min,
                    effective_rise_time: f64::NAN,
                    p_excited: f64::NAN,
                    leakage: f64::NAN,
                    norm_drift: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
