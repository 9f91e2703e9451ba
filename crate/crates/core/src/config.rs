//! Run configuration files.
//!
//! A run is described by one TOML document. Sections that a command does not
//! use may be omitted; unknown keys are rejected everywhere. Every physical
//! value is checked when the file is loaded.
//!
//! ```toml
//! architecture = "cpb"
//!
//! [device]
//! ej_hz = 1e9
//! eq_hz = 19.27e9   # fix the charging energy instead of deriving it
//!
//! [pulse]
//! shape = "linear"
//! chi_start = -0.4
//! chi_end = 0.4
//! rise_time = 1e-9
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::SolverOptions;
use crate::error::{Error, Result};
use crate::model::{ChargeBasis, CpbParams, FluxParams};
use crate::optimize::{Constraints, Device, FluxRateConvention, OptimizationProblem};
use crate::pulse::{CatapultSequence, PulseSegment, PulseShape};
use crate::rates::{Dephasing, PulseEnvelope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Cpb,
    Flux,
}

/// Union of the charge- and flux-qubit parameter keys. Keys left out take
/// the reference values of the chosen architecture; keys belonging to the
/// other architecture are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ej_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub co: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_nr: Option<f64>,
    // charge qubit
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cj: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_env: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_rms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub km_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_coeff_hz_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eq_hz: Option<f64>,
    // flux qubit
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_coupling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_rms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_env: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_halfrange_phi0: Option<f64>,
}

fn reject_foreign(arch: &str, keys: &[(&str, bool)]) -> Result<()> {
    for (k, present) in keys {
        if *present {
            return Err(Error::Config(format!(
                "device.{k} does not apply to architecture `{arch}`"
            )));
        }
    }
    Ok(())
}

impl DeviceBlock {
    pub fn cpb(&self) -> Result<CpbParams> {
        reject_foreign(
            "cpb",
            &[
                ("delta_hz", self.delta_hz.is_some()),
                ("alpha", self.alpha.is_some()),
                ("m_coupling", self.m_coupling.is_some()),
                ("phi_rms", self.phi_rms.is_some()),
                ("z_env", self.z_env.is_some()),
                ("sweep_halfrange_phi0", self.sweep_halfrange_phi0.is_some()),
            ],
        )?;
        let mut p = CpbParams::reference();
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.ej_hz, self.ej_hz);
        set(&mut p.co, self.co);
        set(&mut p.gamma_nr, self.gamma_nr);
        set(&mut p.cj, self.cj);
        set(&mut p.cg, self.cg);
        set(&mut p.r_env, self.r_env);
        set(&mut p.n_rms, self.n_rms);
        set(&mut p.km_hz, self.km_hz);
        set(&mut p.beta_coeff_hz_f, self.beta_coeff_hz_f);
        p.eq_hz_override = self.eq_hz;
        p.validate().map_err(|e| prefix("device", e))?;
        Ok(p)
    }

    pub fn flux(&self) -> Result<FluxParams> {
        reject_foreign(
            "flux",
            &[
                ("cj", self.cj.is_some()),
                ("cg", self.cg.is_some()),
                ("r_env", self.r_env.is_some()),
                ("n_rms", self.n_rms.is_some()),
                ("km_hz", self.km_hz.is_some()),
                ("beta_coeff_hz_f", self.beta_coeff_hz_f.is_some()),
                ("eq_hz", self.eq_hz.is_some()),
            ],
        )?;
        let mut p = FluxParams::reference();
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.ej_hz, self.ej_hz);
        set(&mut p.co, self.co);
        set(&mut p.gamma_nr, self.gamma_nr);
        set(&mut p.delta_hz, self.delta_hz);
        set(&mut p.alpha, self.alpha);
        set(&mut p.m_coupling, self.m_coupling);
        set(&mut p.phi_rms, self.phi_rms);
        set(&mut p.z_env, self.z_env);
        set(&mut p.sweep_halfrange_phi0, self.sweep_halfrange_phi0);
        p.validate().map_err(|e| prefix("device", e))?;
        Ok(p)
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            reason,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    /// One rise from `chi_start` to `chi_end`.
    #[default]
    Segment,
    /// Three-segment catapult from `chi_i` to `chi_f` over the range `chi_0`.
    Catapult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    #[serde(default)]
    pub kind: PulseKind,
    #[serde(default = "default_shape")]
    pub shape: PulseShape,
    pub rise_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_0: Option<f64>,
    #[serde(default = "one")]
    pub range_fraction: f64,
    /// Sampling step for trajectory output (s); defaults to t_r/100.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_shape() -> PulseShape {
    PulseShape::Linear
}
fn one() -> f64 {
    1.0
}

/// A built drive.
#[derive(Debug, Clone)]
pub enum Pulse {
    Segment(PulseSegment),
    Catapult(CatapultSequence),
}

impl Pulse {
    pub fn as_drive(&self) -> &dyn crate::pulse::Drive {
        match self {
            Pulse::Segment(s) => s,
            Pulse::Catapult(c) => c,
        }
    }
}

impl PulseBlock {
    /// `origin` is the value of χ where the absolute control variable
    /// vanishes (−0.5 for the charge qubit).
    pub fn build(&self, origin: f64) -> Result<Pulse> {
        if !(self.rise_time > 0.0) || !self.rise_time.is_finite() {
            return Err(Error::invalid("pulse.rise_time", "must be > 0"));
        }
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("pulse.{name} is required for this pulse kind")))
        };
        let out = match self.kind {
            PulseKind::Segment => Pulse::Segment(PulseSegment::with_origin(
                self.shape,
                need(self.chi_start, "chi_start")?,
                need(self.chi_end, "chi_end")?,
                self.rise_time,
                origin,
            )?),
            PulseKind::Catapult => Pulse::Catapult(CatapultSequence::new(
                need(self.chi_i, "chi_i")?,
                need(self.chi_f, "chi_f")?,
                need(self.chi_0, "chi_0")?,
                self.rise_time,
                self.shape,
                self.range_fraction,
                origin,
            )?),
        };
        Ok(out)
    }

    pub fn sample_step(&self) -> Result<f64> {
        let dt = self.dt.unwrap_or(self.rise_time / 100.0);
        if !(dt > 0.0) {
            return Err(Error::invalid("pulse.dt", "must be > 0"));
        }
        Ok(dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub n_min: i32,
    pub n_max: i32,
}

impl Default for BasisBlock {
    fn default() -> Self {
        BasisBlock {
            n_min: -3,
            n_max: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise_time: Option<f64>,
    /// Rise times for `sweep` with `kind = "optimize"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rise_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_range: Option<f64>,
    #[serde(default = "default_emission")]
    pub emission_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub co_bounds: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej_bounds_hz: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub co_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej_grid: Option<usize>,
    #[serde(default)]
    pub dephasing: Dephasing,
    #[serde(default)]
    pub flux_rate: FluxRateConvention,
    #[serde(default)]
    pub include_flux_line: bool,
    #[serde(default = "default_rel_err")]
    pub envelope_rel_err: f64,
}

fn default_emission() -> f64 {
    6e9
}
fn default_rel_err() -> f64 {
    0.1
}

/// Constraint overrides; absent keys keep the architecture defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth_max_hz: Option<f64>,
    /// Charge qubit only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth_slack: Option<f64>,
    /// Charge qubit: set to false to drop the limit relative to the minimum
    /// linewidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_linewidth: Option<bool>,
}

impl ConstraintsBlock {
    fn apply(&self, arch: Architecture, c: &mut Constraints) -> Result<()> {
        if let Some(t) = self.t1_max {
            c.t1_max = t;
        }
        if self.linewidth_max_hz.is_some() {
            c.linewidth_max_hz = self.linewidth_max_hz;
        }
        if arch == Architecture::Flux
            && (self.linewidth_slack.is_some() || self.relative_linewidth.is_some())
        {
            return Err(Error::Config(
                "optimization.constraints: the relative linewidth limit applies only to `cpb`"
                    .into(),
            ));
        }
        if let Some(s) = self.linewidth_slack {
            c.linewidth_slack = Some(s);
        }
        if self.relative_linewidth == Some(false) {
            c.linewidth_slack = None;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Rise time, every shape in `shapes`.
    #[default]
    RiseTime,
    /// Start of the gate sweep n_g,min → 1 − n_g,min.
    NgMin,
    /// Pulse shape at a fixed rise time.
    Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Propagate each grid point.
    #[default]
    Dynamics,
    /// Optimise the design at each rise time.
    Optimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default)]
    pub kind: SweepKind,
    #[serde(default)]
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Convenience log grid `[start, stop, points]`, appended to `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_grid: Option<(f64, f64, usize)>,
    #[serde(default = "all_shapes")]
    pub shapes: Vec<PulseShape>,
    #[serde(default = "default_ng_min")]
    pub ng_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise_time: Option<f64>,
    /// Interpret rise-time values as effective rise times at the crossing.
    #[serde(default)]
    pub effective: bool,
}

fn all_shapes() -> Vec<PulseShape> {
    PulseShape::ALL.to_vec()
}
fn default_ng_min() -> f64 {
    0.1
}

impl SweepBlock {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let mut v = self.values.clone();
        if let Some((a, b, n)) = self.log_grid {
            if !(a > 0.0 && b > 0.0) || n < 2 {
                return Err(Error::invalid(
                    "sweep.log_grid",
                    "need positive bounds and >= 2 points",
                ));
            }
            let (la, lb) = (a.ln(), b.ln());
            v.extend((0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()));
        }
        if v.is_empty() && self.axis != SweepAxis::Shape {
            return Err(Error::invalid("sweep.values", "grid is empty"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageBlock {
    #[serde(default = "default_envelope")]
    pub envelope: PulseEnvelope,
    #[serde(default = "one")]
    pub beta_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise_time: Option<f64>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

impl Default for LeakageBlock {
    fn default() -> Self {
        LeakageBlock {
            envelope: default_envelope(),
            beta_c: 1.0,
            rise_time: None,
            temperature: default_temperature(),
        }
    }
}

fn default_envelope() -> PulseEnvelope {
    PulseEnvelope::Triangle
}
fn default_temperature() -> f64 {
    20e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub chi_min: f64,
    pub chi_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    201
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: None,
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub architecture: Architecture,
    #[serde(default)]
    pub device: DeviceBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseBlock>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage: Option<LeakageBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> Result<()> {
        match self.architecture {
            Architecture::Cpb => {
                self.cpb()?;
                self.basis()?;
            }
            Architecture::Flux => {
                self.flux()?;
                if self.basis.is_some() {
                    return Err(Error::Config(
                        "basis applies only to architecture `cpb`".into(),
                    ));
                }
            }
        }
        self.solver.validate().map_err(|e| prefix("solver", e))?;
        if let Some(p) = &self.pulse {
            p.build(self.origin())?;
            p.sample_step()?;
        }
        if let Some(o) = &self.optimization {
            if let Some(tr) = o.rise_time {
                self.problem(tr)?
                    .validate()
                    .map_err(|e| prefix("optimization", e))?;
            }
            if !(0.0..1.0).contains(&o.envelope_rel_err) {
                return Err(Error::invalid(
                    "optimization.envelope_rel_err",
                    "must lie in [0, 1)",
                ));
            }
            for &tr in &o.rise_times {
                if !(tr > 0.0) {
                    return Err(Error::invalid("optimization.rise_times", "must be > 0"));
                }
            }
        }
        if let Some(s) = &self.sweep {
            let g = s.grid()?;
            if s.shapes.is_empty() {
                return Err(Error::invalid("sweep.shapes", "need at least one shape"));
            }
            if s.kind == SweepKind::Dynamics && self.architecture != Architecture::Cpb {
                return Err(Error::Config(
                    "dynamics sweeps need architecture `cpb`".into(),
                ));
            }
            if s.axis == SweepAxis::RiseTime && g.iter().any(|&t| !(t > 0.0)) {
                return Err(Error::invalid("sweep.values", "rise times must be > 0"));
            }
            if s.axis != SweepAxis::RiseTime && s.kind == SweepKind::Optimize {
                return Err(Error::Config(
                    "optimisation sweeps run over rise time only".into(),
                ));
            }
            if s.axis != SweepAxis::RiseTime && s.rise_time.is_none_or(|t| !(t > 0.0)) {
                return Err(Error::invalid(
                    "sweep.rise_time",
                    "required and must be > 0 for this axis",
                ));
            }
            if !(s.ng_min > 0.0 && s.ng_min < 0.5) {
                return Err(Error::invalid("sweep.ng_min", "must lie in (0, 0.5)"));
            }
        }
        if let Some(l) = &self.leakage {
            if !(0.0..=1.0).contains(&l.beta_c) {
                return Err(Error::invalid("leakage.beta_c", "must lie in [0, 1]"));
            }
            if let Some(t) = l.rise_time {
                if !(t > 0.0) {
                    return Err(Error::invalid("leakage.rise_time", "must be > 0"));
                }
            }
            if !(l.temperature >= 0.0) {
                return Err(Error::invalid("leakage.temperature", "must be >= 0"));
            }
        }
        if let Some(s) = &self.spectrum {
            if !(s.chi_max > s.chi_min) || s.points < 2 {
                return Err(Error::invalid(
                    "spectrum",
                    "need chi_min < chi_max and >= 2 points",
                ));
            }
        }
        Ok(())
    }

    pub fn cpb(&self) -> Result<CpbParams> {
        if self.architecture != Architecture::Cpb {
            return Err(Error::Config("architecture is not `cpb`".into()));
        }
        self.device.cpb()
    }

    pub fn flux(&self) -> Result<FluxParams> {
        if self.architecture != Architecture::Flux {
            return Err(Error::Config("architecture is not `flux`".into()));
        }
        self.device.flux()
    }

    pub fn basis(&self) -> Result<ChargeBasis> {
        let b = self.basis.unwrap_or_default();
        ChargeBasis::new(b.n_min, b.n_max).map_err(|e| prefix("basis", e))
    }

    /// χ at which the absolute control variable vanishes.
    pub fn origin(&self) -> f64 {
        match self.architecture {
            Architecture::Cpb => -0.5,
            Architecture::Flux => 0.0,
        }
    }

    pub fn pulse(&self) -> Result<Pulse> {
        self.pulse
            .as_ref()
            .ok_or_else(|| Error::Config("missing [pulse] section".into()))?
            .build(self.origin())
    }

    /// Optimisation problem at rise time `rise_time`.
    pub fn problem(&self, rise_time: f64) -> Result<OptimizationProblem> {
        let default_block;
        let o = match &self.optimization {
            Some(o) => o,
            None => {
                default_block = toml::from_str::<OptimizationBlock>("")
                    .map_err(|e| Error::Config(e.to_string()))?;
                &default_block
            }
        };
        let device = match self.architecture {
            Architecture::Cpb => Device::Cpb(self.cpb()?),
            Architecture::Flux => Device::Flux(self.flux()?),
        };
        let mut prob = match device {
            Device::Cpb(p) => OptimizationProblem::cpb(p, rise_time),
            Device::Flux(p) => OptimizationProblem::flux(p, rise_time, None),
        };
        if let Some(c) = o.constraints {
            c.apply(self.architecture, &mut prob.constraints)?;
        }
        prob.sweep_range = o.sweep_range;
        prob.emission_hz = o.emission_hz;
        if let Some(b) = o.co_bounds {
            prob.co_bounds = b;
        }
        if let Some(b) = o.ej_bounds_hz {
            prob.ej_bounds_hz = b;
        }
        if let Some(n) = o.co_grid {
            prob.co_grid = n;
        }
        if let Some(n) = o.ej_grid {
            prob.ej_grid = n;
        }
        prob.dephasing = o.dephasing;
        prob.flux_rate = o.flux_rate;
        prob.include_flux_line = o.include_flux_line;
        Ok(prob)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM: &str = r#"
# eight-level charge qubit, linear gate sweep
architecture = "cpb"

[device]
ej_hz = 1e9
eq_hz = 19.27e9

[pulse]
shape = "linear"
chi_start = -0.4
chi_end = 0.4
rise_time = 1e-9
"#;

    #[test]
    fn parses_with_comments_and_defaults() {
        let c = RunConfig::from_toml_str(SIM).unwrap();
        assert_eq!(c.cpb().unwrap().charging_energy_hz(), 19.27e9);
        assert_eq!(c.basis().unwrap().dim(), 8);
        assert!(matches!(c.pulse().unwrap(), Pulse::Segment(_)));
        assert_eq!(c.solver, SolverOptions::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SIM.replace("ej_hz = 1e9", "ej_hz = 1e9\nbogus = 3");
        assert!(matches!(
            RunConfig::from_toml_str(&bad),
            Err(Error::Config(_))
        ));
        let bad = format!("{SIM}\n[extra]\nx = 1\n");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn foreign_device_keys_rejected() {
        let bad = SIM.replace("ej_hz = 1e9", "ej_hz = 1e9\nalpha = 0.7");
        let e = RunConfig::from_toml_str(&bad).unwrap_err();
        assert!(e.to_string().contains("alpha"));
    }

    #[test]
    fn nonpositive_rise_time_names_field() {
        let bad = SIM.replace("rise_time = 1e-9", "rise_time = 0.0");
        match RunConfig::from_toml_str(&bad) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "pulse.rise_time"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_physics_rejected_at_load() {
        let bad = SIM.replace("ej_hz = 1e9", "ej_hz = -1e9");
        assert!(RunConfig::from_toml_str(&bad).is_err());
        let flux = "architecture = \"flux\"\n[device]\nalpha = 0.4\n";
        assert!(RunConfig::from_toml_str(flux).is_err());
    }

    #[test]
    fn toml_and_json_round_trip() {
        let c = RunConfig::from_toml_str(SIM).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
        let j = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&j).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn optimisation_block_builds_problem() {
        let text = r#"
architecture = "flux"
[optimization]
rise_time = 300e-12
co_grid = 21
[optimization.constraints]
t1_max = 2e-7
linewidth_max_hz = 1e7
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        let p = c.problem(300e-12).unwrap();
        assert_eq!(p.co_grid, 21);
        assert_eq!(p.constraints.linewidth_max_hz, Some(1e7));
        assert_eq!(p.constraints.linewidth_slack, None);
    }

    #[test]
    fn sweep_grid_validation() {
        let text = format!("{SIM}\n[sweep]\naxis = \"rise_time\"\n");
        assert!(RunConfig::from_toml_str(&text).is_err());
        let text = format!("{SIM}\n[sweep]\naxis = \"rise_time\"\nlog_grid = [1e-11, 1e-8, 4]\n");
        let c = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.sweep.unwrap().grid().unwrap().len(), 4);
    }
}
