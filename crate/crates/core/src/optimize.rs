//! Constrained maximisation of the usable efficiency.
//!
//! The charge qubit is optimised over C_o; the flux qubit over (C_o, E_J).
//! Every search is a logarithmic grid scan followed by golden-section
//! refinement inside the bracket of the best feasible grid point. Grid points
//! are evaluated in parallel but reduced in grid order, so results do not
//! depend on the thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CpbParams, FluxParams};
use crate::rates::{
    usable_efficiency_cpb_with, usable_efficiency_flux, Dephasing, EfficiencyReport,
};
use crate::units::{FEMTO, GHZ, NANO};

/// How the flux sweep rate μ is formed from the swept flux Δφ (Φ₀) and the
/// rise time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxRateConvention {
    /// μ = Δφ/t_r, the convention behind the reference flux-qubit design
    /// curves.
    #[default]
    PerFluxQuantum,
    /// μ = 2π Δφ/t_r, from δφ_e = (Φ₀/2π) μ t.
    Angular,
}

impl FluxRateConvention {
    pub fn rate(&self, sweep_phi0: f64, rise_time: f64) -> f64 {
        match self {
            FluxRateConvention::PerFluxQuantum => sweep_phi0 / rise_time,
            FluxRateConvention::Angular => 2.0 * PI * sweep_phi0 / rise_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "architecture")]
pub enum Device {
    Cpb(CpbParams),
    Flux(FluxParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constraints {
    /// Upper limit on T1 (s), i.e. a lower limit on the repetition rate.
    pub t1_max: f64,
    /// Upper limit on the half width Γ₂/2π (Hz).
    pub linewidth_max_hz: Option<f64>,
    /// Charge qubit: Γ₂ may exceed its minimum over C_o by this fraction.
    pub linewidth_slack: Option<f64>,
}

impl Default for Constraints {
    fn default() -> Self {
        Constraints {
            t1_max: 200.0 * NANO,
            linewidth_max_hz: None,
            linewidth_slack: Some(0.25),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub device: Device,
    pub rise_time: f64,
    /// Swept range of the control: Δn_g for the charge qubit, Δφ (Φ₀) for the
    /// flux qubit. Defaults to 1 and to the device's full flux range.
    pub sweep_range: Option<f64>,
    pub emission_hz: f64,
    pub constraints: Constraints,
    pub co_bounds: (f64, f64),
    pub ej_bounds_hz: (f64, f64),
    pub co_grid: usize,
    pub ej_grid: usize,
    pub dephasing: Dephasing,
    pub flux_rate: FluxRateConvention,
    pub include_flux_line: bool,
}

impl OptimizationProblem {
    pub fn cpb(params: CpbParams, rise_time: f64) -> Self {
        Self::new(Device::Cpb(params), rise_time)
    }

    pub fn flux(params: FluxParams, rise_time: f64, linewidth_max_hz: Option<f64>) -> Self {
        let mut p = Self::new(Device::Flux(params), rise_time);
        p.constraints.linewidth_slack = None;
        p.constraints.linewidth_max_hz = linewidth_max_hz;
        p
    }

    fn new(device: Device, rise_time: f64) -> Self {
        OptimizationProblem {
            device,
            rise_time,
            sweep_range: None,
            emission_hz: 6.0 * GHZ,
            constraints: Constraints::default(),
            co_bounds: (0.1 * FEMTO, 50.0 * FEMTO),
            ej_bounds_hz: (1.0 * GHZ, 250.0 * GHZ),
            co_grid: 161,
            ej_grid: 41,
            dephasing: Dephasing::Approximate,
            flux_rate: FluxRateConvention::default(),
            include_flux_line: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rise_time > 0.0) || !self.rise_time.is_finite() {
            return Err(Error::invalid("rise_time", "must be > 0"));
        }
        let (lo, hi) = self.co_bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid("co_bounds", "need 0 < lower < upper"));
        }
        if !(self.emission_hz > 0.0) {
            return Err(Error::invalid("emission_hz", "must be > 0"));
        }
        if !(self.constraints.t1_max > 0.0) {
            return Err(Error::invalid("t1_max", "must be > 0"));
        }
        if let Some(l) = self.constraints.linewidth_max_hz {
            if !(l > 0.0) {
                return Err(Error::invalid("linewidth_max_hz", "must be > 0"));
            }
        }
        if let Some(s) = self.constraints.linewidth_slack {
            if !(s >= 0.0) {
                return Err(Error::invalid("linewidth_slack", "must be >= 0"));
            }
        }
        if self.co_grid < 3 {
            return Err(Error::invalid("co_grid", "need at least 3 points"));
        }
        if let Some(r) = self.sweep_range {
            if !(r > 0.0) {
                return Err(Error::invalid("sweep_range", "must be > 0"));
            }
        }
        match &self.device {
            Device::Cpb(p) => p.validate()?,
            Device::Flux(p) => {
                p.validate()?;
                let (a, b) = self.ej_bounds_hz;
                if !(a > 0.0 && b >= a && b.is_finite()) {
                    return Err(Error::invalid("ej_bounds_hz", "need 0 < lower <= upper"));
                }
                if self.ej_grid < 1 || (b > a && self.ej_grid < 3) {
                    return Err(Error::invalid("ej_grid", "need at least 3 points"));
                }
            }
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.emission_hz
    }

    /// λ (1/s) or μ (per the chosen convention).
    pub fn sweep_rate(&self) -> f64 {
        match &self.device {
            Device::Cpb(_) => self.sweep_range.unwrap_or(1.0) / self.rise_time,
            Device::Flux(p) => {
                let range = self.sweep_range.unwrap_or(2.0 * p.sweep_halfrange_phi0);
                self.flux_rate.rate(range, self.rise_time)
            }
        }
    }

    /// Efficiency report at output capacitance `co` and, for the flux qubit,
    /// Josephson energy `ej_hz` (ignored for the charge qubit).
    pub fn evaluate(&self, co: f64, ej_hz: f64) -> Result<EfficiencyReport> {
        let rate = self.sweep_rate();
        match &self.device {
            Device::Cpb(p) => {
                let mut p = *p;
                p.co = co;
                if ej_hz > 0.0 {
                    p.ej_hz = ej_hz;
                }
                usable_efficiency_cpb_with(&p, rate, self.omega(), self.dephasing)
            }
            Device::Flux(p) => {
                let mut p = *p;
                p.co = co;
                p.ej_hz = ej_hz;
                usable_efficiency_flux(&p, rate, self.omega(), self.include_flux_line)
            }
        }
    }

    fn base_ej(&self) -> f64 {
        match &self.device {
            Device::Cpb(p) => p.ej_hz,
            Device::Flux(p) => p.ej_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub co: f64,
    pub ej_hz: f64,
    pub eta: f64,
    pub t1: f64,
    pub linewidth_hz: f64,
    pub feasible: bool,
}

/// Remaining margin on each constraint (≥ 0 when satisfied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub t1: f64,
    pub linewidth_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub status: Status,
    pub rise_time: f64,
    pub sweep_rate: f64,
    pub co: f64,
    pub ej_hz: f64,
    pub report: Option<EfficiencyReport>,
    pub slack: Option<Slack>,
    /// Linewidth limit actually applied (Hz), if any.
    pub linewidth_limit_hz: Option<f64>,
    pub trace: Vec<TracePoint>,
}

impl OptimizationResult {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn eta(&self) -> f64 {
        self.report.map_or(f64::NAN, |r| r.eta)
    }
}

// Relative tolerance of feasibility checks, so that a point sitting on a
// constraint boundary after refinement is not rejected by rounding.
const FEAS_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Limits {
    t1_max: f64,
    linewidth_hz: Option<f64>,
}

impl Limits {
    fn violation(&self, r: &EfficiencyReport) -> f64 {
        let mut v = 0.0;
        if !r.t1.is_finite() || r.t1 > self.t1_max {
            v += if r.t1.is_finite() {
                r.t1 / self.t1_max - 1.0
            } else {
                1.0
            };
        }
        if let Some(l) = self.linewidth_hz {
            if r.linewidth_hz > l {
                v += r.linewidth_hz / l - 1.0;
            }
        }
        v
    }

    fn feasible(&self, r: &EfficiencyReport) -> bool {
        self.violation(r) <= FEAS_RTOL
    }

    /// η when feasible, otherwise a value below every feasible η that
    /// improves as the violation shrinks.
    fn objective(&self, r: &EfficiencyReport) -> f64 {
        let v = self.violation(r);
        if v <= FEAS_RTOL {
            r.eta
        } else {
            -1.0 - v
        }
    }

    fn slack(&self, r: &EfficiencyReport) -> Slack {
        Slack {
            t1: self.t1_max - r.t1,
            linewidth_hz: self.linewidth_hz.map(|l| l - r.linewidth_hz),
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || hi == lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximises `f` over [a, b]; returns the abscissa of the best value seen,
/// including both ends.
fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    let fa0 = f(a);
    let fb0 = f(b);
    let mut best = if fb0 > fa0 { (b, fb0) } else { (a, fa0) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= xtol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

const XTOL: f64 = 1e-10;

/// Smallest achievable Γ₂/2π (Hz) over the C_o bounds at the given E_J,
/// subject to the T1 limit when `respect_t1` is set.
pub fn min_linewidth(prob: &OptimizationProblem, ej_hz: f64, respect_t1: bool) -> Result<f64> {
    prob.validate()?;
    let t1_max = if respect_t1 {
        prob.constraints.t1_max
    } else {
        f64::INFINITY
    };
    let limits = Limits {
        t1_max,
        linewidth_hz: None,
    };
    let cos = log_grid(prob.co_bounds.0, prob.co_bounds.1, prob.co_grid);
    let reps = cos
        .par_iter()
        .map(|&co| prob.evaluate(co, ej_hz))
        .collect::<Result<Vec<_>>>()?;
    let score = |r: &EfficiencyReport| {
        if limits.feasible(r) {
            -r.linewidth_hz
        } else {
            f64::NEG_INFINITY
        }
    };
    let (i, best) = argmax(reps.iter().map(score));
    if best == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "no output capacitance meets the T1 limit".into(),
        ));
    }
    let (lo, hi) = bracket(&cos, i);
    let (_, v) = golden_max(
        |x| {
            prob.evaluate(x.exp(), ej_hz)
                .map(|r| score(&r))
                .unwrap_or(f64::NEG_INFINITY)
        },
        lo.ln(),
        hi.ln(),
        XTOL,
    );
    Ok(-v.max(best))
}

/// First index of the maximum (ties go to the smaller index).
fn argmax<I: Iterator<Item = f64>>(it: I) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn bracket(grid: &[f64], i: usize) -> (f64, f64) {
    (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)])
}

struct Best {
    co: f64,
    report: EfficiencyReport,
    objective: f64,
}

/// Grid plus golden refinement over C_o at fixed E_J.
fn optimize_co(
    prob: &OptimizationProblem,
    ej_hz: f64,
    limits: &Limits,
    trace: Option<&mut Vec<TracePoint>>,
) -> Result<Best> {
    let cos = log_grid(prob.co_bounds.0, prob.co_bounds.1, prob.co_grid);
    let reps = cos
        .par_iter()
        .map(|&co| prob.evaluate(co, ej_hz))
        .collect::<Result<Vec<_>>>()?;
    if let Some(t) = trace {
        t.extend(cos.iter().zip(&reps).map(|(&co, r)| TracePoint {
            co,
            ej_hz,
            eta: r.eta,
            t1: r.t1,
            linewidth_hz: r.linewidth_hz,
            feasible: limits.feasible(r),
        }));
    }
    let (i, obj) = argmax(reps.iter().map(|r| limits.objective(r)));
    let mut best = Best {
        co: cos[i],
        report: reps[i],
        objective: obj,
    };
    let (lo, hi) = bracket(&cos, i);
    let (x, v) = golden_max(
        |x| {
            prob.evaluate(x.exp(), ej_hz)
                .map(|r| limits.objective(&r))
                .unwrap_or(f64::NEG_INFINITY)
        },
        lo.ln(),
        hi.ln(),
        XTOL,
    );
    if v > best.objective {
        let co = x.exp();
        let report = prob.evaluate(co, ej_hz)?;
        if limits.feasible(&report) || !limits.feasible(&best.report) {
            best = Best {
                co,
                report,
                objective: limits.objective(&report),
            };
        }
    }
    Ok(best)
}

fn finish(
    prob: &OptimizationProblem,
    limits: Limits,
    co: f64,
    ej_hz: f64,
    report: EfficiencyReport,
    trace: Vec<TracePoint>,
) -> OptimizationResult {
    let feasible = limits.feasible(&report);
    OptimizationResult {
        status: if feasible {
            Status::Optimal
        } else {
            Status::Infeasible
        },
        rise_time: prob.rise_time,
        sweep_rate: prob.sweep_rate(),
        co,
        ej_hz,
        report: Some(report),
        slack: Some(limits.slack(&report)),
        linewidth_limit_hz: limits.linewidth_hz,
        trace,
    }
}

fn infeasible(
    prob: &OptimizationProblem,
    limits: Limits,
    trace: Vec<TracePoint>,
) -> OptimizationResult {
    OptimizationResult {
        status: Status::Infeasible,
        rise_time: prob.rise_time,
        sweep_rate: prob.sweep_rate(),
        co: f64::NAN,
        ej_hz: f64::NAN,
        report: None,
        slack: None,
        linewidth_limit_hz: limits.linewidth_hz,
        trace,
    }
}

/// Best feasible output capacitance for a charge qubit.
///
/// The linewidth limit is the tighter of the absolute limit and
/// `(1 + slack)` times the smallest Γ₂ reachable by tuning C_o.
pub fn optimize_cpb(prob: &OptimizationProblem) -> Result<OptimizationResult> {
    prob.validate()?;
    if !matches!(prob.device, Device::Cpb(_)) {
        return Err(Error::invalid(
            "architecture",
            "optimize_cpb needs a charge-qubit device",
        ));
    }
    let ej = prob.base_ej();
    let mut lw = prob.constraints.linewidth_max_hz;
    if let Some(s) = prob.constraints.linewidth_slack {
        let rel = (1.0 + s) * min_linewidth(prob, ej, false)?;
        lw = Some(lw.map_or(rel, |l| l.min(rel)));
    }
    let limits = Limits {
        t1_max: prob.constraints.t1_max,
        linewidth_hz: lw,
    };
    let mut trace = Vec::new();
    let best = optimize_co(prob, ej, &limits, Some(&mut trace))?;
    if !limits.feasible(&best.report) {
        return Ok(infeasible(prob, limits, trace));
    }
    Ok(finish(prob, limits, best.co, ej, best.report, trace))
}

/// Best feasible (C_o, E_J) for a flux qubit: for every E_J the best C_o is
/// found first, then the resulting profile is maximised over E_J.
pub fn optimize_flux(prob: &OptimizationProblem) -> Result<OptimizationResult> {
    prob.validate()?;
    if !matches!(prob.device, Device::Flux(_)) {
        return Err(Error::invalid(
            "architecture",
            "optimize_flux needs a flux-qubit device",
        ));
    }
    let limits = Limits {
        t1_max: prob.constraints.t1_max,
        linewidth_hz: prob.constraints.linewidth_max_hz,
    };
    let (ej_lo, ej_hi) = prob.ej_bounds_hz;
    let ejs = log_grid(ej_lo, ej_hi, prob.ej_grid);
    let rows = ejs
        .par_iter()
        .map(|&ej| {
            let mut t = Vec::new();
            optimize_co(prob, ej, &limits, Some(&mut t)).map(|b| (b, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let (i, _) = argmax(rows.iter().map(|(b, _)| b.objective));
    let mut trace: Vec<TracePoint> = Vec::new();
    for (_, t) in &rows {
        trace.extend_from_slice(t);
    }
    let mut best_ej = ejs[i];
    let mut best = Best { ..rows[i].0 };
    if ejs.len() > 1 {
        let (lo, hi) = bracket(&ejs, i);
        let (x, v) = golden_max(
            |x| {
                optimize_co(prob, x.exp(), &limits, None)
                    .map(|b| b.objective)
                    .unwrap_or(f64::NEG_INFINITY)
            },
            lo.ln(),
            hi.ln(),
            XTOL,
        );
        if v > best.objective {
            let ej = x.exp();
            let cand = optimize_co(prob, ej, &limits, None)?;
            if limits.feasible(&cand.report) {
                best_ej = ej;
                best = cand;
            }
        }
    }
    if !limits.feasible(&best.report) {
        return Ok(infeasible(prob, limits, trace));
    }
    Ok(finish(prob, limits, best.co, best_ej, best.report, trace))
}

/// Dispatches on the device type.
pub fn optimize(prob: &OptimizationProblem) -> Result<OptimizationResult> {
    match prob.device {
        Device::Cpb(_) => optimize_cpb(prob),
        Device::Flux(_) => optimize_flux(prob),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub eta_min: f64,
    pub eta_max: f64,
    pub rel_err: f64,
    pub points: Vec<TracePoint>,
}

impl Envelope {
    pub fn width(&self) -> f64 {
        self.eta_max - self.eta_min
    }
}

/// η over the 3×3 grid of (C_o, E_J) scaled by {1 − ε, 1, 1 + ε} around an
/// optimised design. The design is not re-optimised; constraint violations are
/// flagged per point with the limits used for the optimisation.
pub fn fabrication_envelope(
    prob: &OptimizationProblem,
    result: &OptimizationResult,
    rel_err: f64,
) -> Result<Envelope> {
    if !(0.0..1.0).contains(&rel_err) {
        return Err(Error::invalid("rel_err", "must lie in [0, 1)"));
    }
    if !result.is_feasible() {
        return Err(Error::invalid(
            "result",
            "envelope needs a feasible design point",
        ));
    }
    let limits = Limits {
        t1_max: prob.constraints.t1_max,
        linewidth_hz: result.linewidth_limit_hz,
    };
    let factors = [1.0 - rel_err, 1.0, 1.0 + rel_err];
    let mut points = Vec::with_capacity(9);
    for fc in factors {
        for fe in factors {
            let (co, ej) = (result.co * fc, result.ej_hz * fe);
            let r = prob.evaluate(co, ej)?;
            points.push(TracePoint {
                co,
                ej_hz: ej,
                eta: r.eta,
                t1: r.t1,
                linewidth_hz: r.linewidth_hz,
                feasible: limits.feasible(&r),
            });
        }
    }
    let eta_min = points.iter().map(|p| p.eta).fold(f64::INFINITY, f64::min);
    let eta_max = points
        .iter()
        .map(|p| p.eta)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Envelope {
        eta_min,
        eta_max,
        rel_err,
        points,
    })
}

/// Independent optimisations over a grid of rise times, in grid order.
pub fn risetime_sweep(
    prob: &OptimizationProblem,
    rise_times: &[f64],
) -> Result<Vec<OptimizationResult>> {
    if rise_times.is_empty() {
        return Err(Error::invalid("grid", "rise-time grid is empty"));
    }
    rise_times
        .par_iter()
        .map(|&tr| {
            let mut p = prob.clone();
            p.rise_time = tr;
            optimize(&p)
        })
        .collect()
}
