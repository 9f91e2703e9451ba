//! Control-parameter trajectories.
//!
//! A [`PulseSegment`] moves the control parameter χ between two values in one
//! rise time using one of four rise profiles. A [`CatapultSequence`] chains
//! three segments: pull back to one end of the full range, traverse the whole
//! range in a single rise time, then settle on the target value. The crossing
//! is always traversed at the instrument's maximum slew rate, whatever the
//! initial and final set points.
//!
//! χ is `n_g − 0.5` for the charge qubit and `δφ_e` (Φ₀) for the flux qubit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rise profile for `0 ≤ τ = t/t_r ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Linear,
    /// Half-Gaussian with σ = t_r/3.
    GaussianRise,
    /// tanh centred at t_r/2 with k = t_r/3.
    TanhRise,
    /// Geometric progression `(x_f/x_i)^τ` in the absolute control variable.
    ExponentialRise,
}

impl PulseShape {
    pub const ALL: [PulseShape; 4] = [
        PulseShape::Linear,
        PulseShape::GaussianRise,
        PulseShape::TanhRise,
        PulseShape::ExponentialRise,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::Linear => "linear",
            PulseShape::GaussianRise => "gaussian_rise",
            PulseShape::TanhRise => "tanh_rise",
            PulseShape::ExponentialRise => "exponential_rise",
        }
    }
}

impl std::str::FromStr for PulseShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PulseShape::Linear),
            "gaussian_rise" | "gaussian" => Ok(PulseShape::GaussianRise),
            "tanh_rise" | "tanh" => Ok(PulseShape::TanhRise),
            "exponential_rise" | "exponential" => Ok(PulseShape::ExponentialRise),
            other => Err(Error::invalid(
                "shape",
                format!("unknown pulse shape `{other}`"),
            )),
        }
    }
}

const E_M9: f64 = 1.234_098_040_866_795_5e-4; // e^-9

/// One rise from `chi_start` to `chi_end` in `rise_time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSegment {
    pub shape: PulseShape,
    pub chi_start: f64,
    pub chi_end: f64,
    pub rise_time: f64,
    /// Value of χ at which the absolute control variable vanishes. Only the
    /// exponential profile depends on it: the ratio is taken of `χ − origin`.
    /// For a charge qubit with χ = n_g − 0.5 this is −0.5.
    #[serde(default)]
    pub origin: f64,
}

impl PulseSegment {
    pub fn new(shape: PulseShape, chi_start: f64, chi_end: f64, rise_time: f64) -> Result<Self> {
        Self::with_origin(shape, chi_start, chi_end, rise_time, 0.0)
    }

    pub fn with_origin(
        shape: PulseShape,
        chi_start: f64,
        chi_end: f64,
        rise_time: f64,
        origin: f64,
    ) -> Result<Self> {
        let seg = PulseSegment {
            shape,
            chi_start,
            chi_end,
            rise_time,
            origin,
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rise_time > 0.0) || !self.rise_time.is_finite() {
            return Err(Error::invalid("rise_time", "must be > 0"));
        }
        if !self.chi_start.is_finite() || !self.chi_end.is_finite() {
            return Err(Error::invalid("chi", "endpoints must be finite"));
        }
        if self.shape == PulseShape::ExponentialRise {
            let a = self.chi_start - self.origin;
            let b = self.chi_end - self.origin;
            if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
                return Err(Error::invalid(
                    "shape",
                    "exponential rise needs nonzero endpoints of the same sign (relative to origin)",
                ));
            }
        }
        Ok(())
    }

    fn ratio(&self) -> f64 {
        (self.chi_end - self.origin) / (self.chi_start - self.origin)
    }

    /// Normalised progress `(χ(τ) − χ_start)/(χ_end − χ_start)`.
    pub fn progress(&self, tau: f64) -> f64 {
        match self.shape {
            PulseShape::Linear => tau,
            PulseShape::GaussianRise => {
                let u = 1.0 - tau;
                ((-9.0 * u * u).exp() - E_M9) / (1.0 - E_M9)
            }
            PulseShape::TanhRise => 0.5 * (1.0 + ((tau - 0.5) * 6.0).tanh() / 3f64.tanh()),
            PulseShape::ExponentialRise => {
                let r = self.ratio();
                if (r - 1.0).abs() < 1e-12 {
                    tau
                } else {
                    (r.powf(tau) - 1.0) / (r - 1.0)
                }
            }
        }
    }

    /// d(progress)/dτ.
    pub fn progress_slope(&self, tau: f64) -> f64 {
        match self.shape {
            PulseShape::Linear => 1.0,
            PulseShape::GaussianRise => {
                let u = 1.0 - tau;
                18.0 * u * (-9.0 * u * u).exp() / (1.0 - E_M9)
            }
            PulseShape::TanhRise => {
                let c = ((tau - 0.5) * 6.0).cosh();
                3.0 / (c * c * 3f64.tanh())
            }
            PulseShape::ExponentialRise => {
                let r = self.ratio();
                if (r - 1.0).abs() < 1e-12 {
                    1.0
                } else {
                    r.ln() * r.powf(tau) / (r - 1.0)
                }
            }
        }
    }

    /// Inverse of [`progress`](Self::progress) for `0 < p < 1`.
    fn progress_inverse(&self, p: f64) -> f64 {
        match self.shape {
            PulseShape::Linear => p,
            PulseShape::GaussianRise => {
                let q = p * (1.0 - E_M9) + E_M9;
                1.0 - (-q.ln() / 9.0).sqrt()
            }
            PulseShape::TanhRise => 0.5 + ((2.0 * p - 1.0) * 3f64.tanh()).atanh() / 6.0,
            PulseShape::ExponentialRise => {
                let r = self.ratio();
                if (r - 1.0).abs() < 1e-12 {
                    p
                } else {
                    (1.0 + p * (r - 1.0)).ln() / r.ln()
                }
            }
        }
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.rise_time;
        if !(t >= -slack && t <= self.rise_time + slack) {
            return Err(Error::invalid(
                "t",
                format!("{t:e} s outside [0, {:e}] s", self.rise_time),
            ));
        }
        Ok((t / self.rise_time).clamp(0.0, 1.0))
    }

    /// χ(t) for `0 ≤ t ≤ t_r`.
    pub fn sample(&self, t: f64) -> Result<f64> {
        let tau = self.check_time(t)?;
        Ok(self.value_at_tau(tau))
    }

    fn value_at_tau(&self, tau: f64) -> f64 {
        if tau >= 1.0 {
            return self.chi_end;
        }
        if tau <= 0.0 {
            return self.chi_start;
        }
        self.chi_start + (self.chi_end - self.chi_start) * self.progress(tau)
    }

    /// dχ/dt (1/s in χ units).
    pub fn rate(&self, t: f64) -> Result<f64> {
        let tau = self.check_time(t)?;
        Ok((self.chi_end - self.chi_start) * self.progress_slope(tau) / self.rise_time)
    }

    pub fn span(&self) -> f64 {
        self.chi_end - self.chi_start
    }

    /// |span|/t_r.
    pub fn nominal_slew_rate(&self) -> f64 {
        self.span().abs() / self.rise_time
    }

    /// Largest |dχ/dt| over the segment.
    pub fn max_slew_rate(&self) -> f64 {
        let peak = match self.shape {
            PulseShape::Linear => 1.0,
            PulseShape::GaussianRise => 18.0 / 18f64.sqrt() * (-0.5f64).exp() / (1.0 - E_M9),
            PulseShape::TanhRise => 3.0 / 3f64.tanh(),
            PulseShape::ExponentialRise => self
                .progress_slope(0.0)
                .abs()
                .max(self.progress_slope(1.0).abs()),
        };
        self.nominal_slew_rate() * peak
    }

    /// `t_r,eff = span / dχ/dt` evaluated where the trajectory passes
    /// `chi_crossing`.
    pub fn effective_rise_time(&self, chi_crossing: f64) -> Result<f64> {
        let span = self.span();
        let p = if span != 0.0 {
            (chi_crossing - self.chi_start) / span
        } else {
            f64::NAN
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(
                "chi_crossing",
                format!(
                    "{chi_crossing} not strictly between {} and {}",
                    self.chi_start, self.chi_end
                ),
            ));
        }
        let tau = self.progress_inverse(p);
        let slope = self.progress_slope(tau);
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::invalid(
                "shape",
                "trajectory is flat at the crossing",
            ));
        }
        Ok(self.rise_time / slope)
    }

    /// Same segment with endpoints swapped.
    pub fn reversed(&self) -> Self {
        PulseSegment {
            chi_start: self.chi_end,
            chi_end: self.chi_start,
            ..*self
        }
    }
}

/// Free-running χ(t) as seen by the propagator.
pub trait Drive: Sync {
    /// Total duration (s).
    fn duration(&self) -> f64;
    /// χ at time t, clamped to `[0, duration]`.
    fn value(&self, t: f64) -> f64;
    /// Times where dχ/dt is discontinuous, excluding 0 and the end.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Shortest rise time in the drive; used to bound the integrator step.
    fn rise_time(&self) -> f64;

    /// Samples `(t, χ)` every `dt` seconds, always including the final point.
    fn trajectory(&self, dt: f64) -> Vec<(f64, f64)> {
        let total = self.duration();
        let n = (total / dt).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| {
                let t = (k as f64 * dt).min(total);
                (t, self.value(t))
            })
            .collect()
    }
}

impl Drive for PulseSegment {
    fn duration(&self) -> f64 {
        self.rise_time
    }

    fn value(&self, t: f64) -> f64 {
        self.value_at_tau((t / self.rise_time).clamp(0.0, 1.0))
    }

    fn rise_time(&self) -> f64 {
        self.rise_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    /// Pull back to −ρχ₀/2, traverse to +ρχ₀/2.
    Up,
    /// Mirror image used for the return half-cycle.
    Down,
}

/// Three-segment catapult protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatapultSequence {
    pub segments: [PulseSegment; 3],
    pub chi_i: f64,
    pub chi_f: f64,
    pub chi_0: f64,
    pub rise_time: f64,
    pub range_fraction: f64,
    pub direction: SweepDirection,
}

/// Catapult from `chi_i` to `chi_f` across the full range `chi_0`.
pub fn catapult(
    chi_i: f64,
    chi_f: f64,
    chi_0: f64,
    rise_time: f64,
    shape: PulseShape,
) -> Result<CatapultSequence> {
    CatapultSequence::new(chi_i, chi_f, chi_0, rise_time, shape, 1.0, 0.0)
}

impl CatapultSequence {
    /// `range_fraction` ρ ∈ (0, 1] shrinks the traversal to ±ρχ₀/2; `origin`
    /// is forwarded to the segments (see [`PulseSegment::origin`]).
    pub fn new(
        chi_i: f64,
        chi_f: f64,
        chi_0: f64,
        rise_time: f64,
        shape: PulseShape,
        range_fraction: f64,
        origin: f64,
    ) -> Result<Self> {
        if !(chi_0 > 0.0) || !chi_0.is_finite() {
            return Err(Error::invalid("chi_0", "full range must be > 0"));
        }
        if !(range_fraction > 0.0 && range_fraction <= 1.0) {
            return Err(Error::invalid("range_fraction", "must lie in (0, 1]"));
        }
        let half = 0.5 * chi_0;
        for (name, v) in [("chi_i", chi_i), ("chi_f", chi_f)] {
            if !(v.abs() <= half) {
                return Err(Error::invalid(
                    name,
                    format!("{v} outside [−χ₀/2, χ₀/2] = [{}, {half}]", -half),
                ));
            }
        }
        let edge = range_fraction * half;
        let segments = [
            PulseSegment::with_origin(shape, chi_i, -edge, rise_time, origin)?,
            PulseSegment::with_origin(shape, -edge, edge, rise_time, origin)?,
            PulseSegment::with_origin(shape, edge, chi_f, rise_time, origin)?,
        ];
        Ok(CatapultSequence {
            segments,
            chi_i,
            chi_f,
            chi_0,
            rise_time,
            range_fraction,
            direction: SweepDirection::Up,
        })
    }

    /// Sequence for the return half-cycle: from `chi_f` back to `chi_i`,
    /// crossing in the opposite direction.
    pub fn reverse(&self) -> Self {
        let [a, b, c] = self.segments;
        CatapultSequence {
            segments: [c.reversed(), b.reversed(), a.reversed()],
            chi_i: self.chi_f,
            chi_f: self.chi_i,
            direction: match self.direction {
                SweepDirection::Up => SweepDirection::Down,
                SweepDirection::Down => SweepDirection::Up,
            },
            ..self.clone()
        }
    }

    pub fn middle(&self) -> &PulseSegment {
        &self.segments[1]
    }

    /// Nominal slew rate of the crossing segment, ρχ₀/t_r.
    pub fn middle_slew_rate(&self) -> f64 {
        self.middle().nominal_slew_rate()
    }

    pub fn max_slew_rate(&self) -> f64 {
        self.segments
            .iter()
            .map(PulseSegment::max_slew_rate)
            .fold(0.0, f64::max)
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let t = t.clamp(0.0, self.duration());
        let k = ((t / self.rise_time).floor() as usize).min(2);
        (k, t - k as f64 * self.rise_time)
    }
}

impl Drive for CatapultSequence {
    fn duration(&self) -> f64 {
        3.0 * self.rise_time
    }

    fn value(&self, t: f64) -> f64 {
        let (k, local) = self.locate(t);
        self.segments[k].value(local)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.rise_time, 2.0 * self.rise_time]
    }

    fn rise_time(&self) -> f64 {
        self.rise_time
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn seg(shape: PulseShape) -> PulseSegment {
        PulseSegment::with_origin(shape, -0.4, 0.4, 1e-9, -0.5).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        for shape in PulseShape::ALL {
            let s = seg(shape);
            assert!((s.sample(0.0).unwrap() - s.chi_start).abs() < 1e-12);
            assert!((s.sample(s.rise_time).unwrap() - s.chi_end).abs() < 1e-12);
            assert!((s.chi_start + s.span() * s.progress(1.0) - s.chi_end).abs() < 1e-12);
            assert!((s.progress(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_and_tanh_midpoints() {
        let s = seg(PulseShape::Linear);
        assert_relative_eq!(s.sample(0.5e-9).unwrap(), 0.0, epsilon = 1e-15);
        let s = seg(PulseShape::TanhRise);
        assert_relative_eq!(s.sample(0.5e-9).unwrap(), 0.0, epsilon = 1e-15);
        let s = seg(PulseShape::GaussianRise);
        assert_eq!(s.progress(1.0), 1.0);
    }

    #[test]
    fn sample_rejects_out_of_range_time() {
        let s = seg(PulseShape::Linear);
        assert!(s.sample(-1e-12).is_err());
        assert!(s.sample(1.1e-9).is_err());
    }

    #[test]
    fn exponential_needs_same_sign_endpoints() {
        assert!(PulseSegment::new(PulseShape::ExponentialRise, -0.4, 0.4, 1e-9).is_err());
        assert!(PulseSegment::new(PulseShape::ExponentialRise, 0.0, 0.4, 1e-9).is_err());
        assert!(PulseSegment::new(PulseShape::ExponentialRise, 0.1, 0.9, 1e-9).is_ok());
        assert!(PulseSegment::new(PulseShape::Linear, 0.1, 0.9, 0.0).is_err());
    }

    #[test]
    fn exponential_matches_geometric_formula_in_gate_charge() {
        let s = seg(PulseShape::ExponentialRise);
        let (ni, nf) = (0.1f64, 0.9f64);
        for k in 0..=10 {
            let tau = k as f64 / 10.0;
            let ng = ni + (nf - ni) * ((nf / ni).powf(tau) - 1.0) / (nf / ni - 1.0);
            assert_relative_eq!(s.sample(tau * 1e-9).unwrap() + 0.5, ng, epsilon = 1e-12);
        }
    }

    #[test]
    fn effective_rise_time_linear_and_tanh() {
        let s = seg(PulseShape::Linear);
        assert_relative_eq!(
            s.effective_rise_time(0.0).unwrap(),
            1e-9,
            max_relative = 1e-12
        );
        let s = seg(PulseShape::TanhRise);
        assert_relative_eq!(
            s.effective_rise_time(0.0).unwrap(),
            1e-9 * 3f64.tanh() / 3.0,
            max_relative = 1e-12
        );
        assert!((s.effective_rise_time(0.0).unwrap() / 1e-9 - 0.3317).abs() < 1e-4);
        assert!(s.effective_rise_time(0.4).is_err());
        assert!(s.effective_rise_time(-0.7).is_err());
    }

    // oracle: locate the crossing by dense sampling, differentiate by central
    // differences of the sampled trajectory
    fn sampled_effective_rise_time(s: &PulseSegment, chi_c: f64) -> f64 {
        let n = 200_000;
        let dt = s.rise_time / n as f64;
        let mut k = 0;
        while k < n && (s.sample(k as f64 * dt).unwrap() - chi_c) * s.span().signum() < 0.0 {
            k += 1;
        }
        let (a, b) = (
            s.sample((k - 1) as f64 * dt).unwrap(),
            s.sample(k as f64 * dt).unwrap(),
        );
        let t_c = (k - 1) as f64 * dt + dt * (chi_c - a) / (b - a);
        let h = 1e-6 * s.rise_time;
        let rate = (s.sample(t_c + h).unwrap() - s.sample(t_c - h).unwrap()) / (2.0 * h);
        s.span() / rate
    }

    #[test]
    fn effective_rise_time_matches_sampled_oracle() {
        for shape in PulseShape::ALL {
            let s = seg(shape);
            let oracle = sampled_effective_rise_time(&s, 0.0);
            let got = s.effective_rise_time(0.0).unwrap();
            assert_relative_eq!(got, oracle, max_relative = 1e-6);
        }
        // Gaussian crossing where its derivative peaks: τ = 1 − 1/sqrt(18)
        let s = seg(PulseShape::GaussianRise);
        let tau = 1.0 - 1.0 / 18f64.sqrt();
        let chi_c = s.sample(tau * s.rise_time).unwrap();
        let got = s.effective_rise_time(chi_c).unwrap();
        assert_relative_eq!(
            got,
            sampled_effective_rise_time(&s, chi_c),
            max_relative = 1e-6
        );
        assert_relative_eq!(
            s.rise_time * s.nominal_slew_rate() / s.max_slew_rate(),
            got,
            max_relative = 1e-9
        );
    }

    #[test]
    fn catapult_pull_back_sequence() {
        let chi0 = 1.0;
        let c = catapult(-0.2 * chi0, 0.35 * chi0, chi0, 300e-12, PulseShape::Linear).unwrap();
        let ends: Vec<(f64, f64)> = c
            .segments
            .iter()
            .map(|s| (s.chi_start, s.chi_end))
            .collect();
        assert_eq!(ends, vec![(-0.2, -0.5), (-0.5, 0.5), (0.5, 0.35)]);
        assert_relative_eq!(c.duration(), 900e-12, max_relative = 1e-15);
        assert_relative_eq!(c.middle_slew_rate(), chi0 / 300e-12, max_relative = 1e-15);
    }

    #[test]
    fn catapult_symmetric_crossing_at_midpoint() {
        let c = catapult(0.0, 0.0, 0.2, 1e-9, PulseShape::Linear).unwrap();
        assert!(c.value(1.5e-9).abs() < 1e-15);
        assert!(catapult(0.2, 0.0, 0.2, 1e-9, PulseShape::Linear).is_err());
        assert!(catapult(0.0, 0.0, 0.2, 0.0, PulseShape::Linear).is_err());
    }

    #[test]
    fn reduced_range_catapult() {
        let c = CatapultSequence::new(0.0, 0.1, 1.0, 1e-9, PulseShape::Linear, 0.8, 0.0).unwrap();
        assert_eq!(c.middle().chi_start, -0.4);
        assert_eq!(c.middle().chi_end, 0.4);
    }

    #[test]
    fn reverse_visits_mirror_path() {
        let c = catapult(-0.1, 0.3, 1.0, 1e-9, PulseShape::Linear).unwrap();
        let r = c.reverse();
        assert_eq!(r.chi_i, 0.3);
        assert_eq!(r.chi_f, -0.1);
        assert_eq!(r.direction, SweepDirection::Down);
        for k in 0..=30 {
            let t = k as f64 * 1e-10;
            assert_relative_eq!(r.value(t), c.value(3e-9 - t), epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn reverse_is_an_involution(ci in -0.5f64..0.5, cf in -0.5f64..0.5, tr in 1e-11f64..1e-8) {
            let c = catapult(ci, cf, 1.0, tr, PulseShape::TanhRise).unwrap();
            prop_assert_eq!(c.reverse().reverse(), c);
        }

        #[test]
        fn middle_slew_independent_of_endpoints(ci in -0.5f64..0.5, cf in -0.5f64..0.5, chi0 in 0.05f64..2.0) {
            let c = catapult(ci * chi0, cf * chi0, chi0, 300e-12, PulseShape::Linear).unwrap();
            let expect = chi0 / 300e-12;
            prop_assert!((c.middle_slew_rate() - expect).abs() <= 1e-12 * expect);
        }

        #[test]
        fn sampled_catapult_is_continuous(
            ci in -0.5f64..0.5,
            cf in -0.5f64..0.5,
            tr_ps in 20.0f64..500.0,
            shape_idx in 0usize..3,
        ) {
            let shape = [PulseShape::Linear, PulseShape::GaussianRise, PulseShape::TanhRise][shape_idx];
            let c = catapult(ci, cf, 1.0, tr_ps * 1e-12, shape).unwrap();
            let dt = 1e-12;
            let bound = c.max_slew_rate() * dt * (1.0 + 1e-9) + 1e-15;
            let traj = c.trajectory(dt);
            for w in traj.windows(2) {
                prop_assert!((w[1].1 - w[0].1).abs() <= bound);
            }
        }

        #[test]
        fn shapes_are_monotone(shape_idx in 0usize..4, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let s = seg(PulseShape::ALL[shape_idx]);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(s.progress(lo) <= s.progress(hi) + 1e-15);
        }
    }
}
