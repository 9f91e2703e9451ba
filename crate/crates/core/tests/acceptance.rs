//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use lzphoton::dynamics::{
    cpb_diabatic_limit, cpb_sweep, leakage_scan, propagate_from_ground, CpbFamily, FluxFamily,
    HamiltonianFamily, ScanAxis, SimulationResult, SolverOptions, TwoLevelFamily,
};
use lzphoton::lz::{lz_probability, LzTwoLevel};
use lzphoton::model::{ChargeBasis, CpbParams, FluxParams};
use lzphoton::optimize::{
    fabrication_envelope, min_linewidth, optimize_cpb, optimize_flux, OptimizationProblem,
    OptimizationResult,
};
use lzphoton::pulse::{catapult, CatapultSequence, PulseSegment, PulseShape};
use lzphoton::rates::{spectral_leakage, LeakageSource, PulseEnvelope};
use lzphoton::Result;

const TR: f64 = 300e-12;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn check(
    id: &'static str,
    title: &'static str,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let detail = format!("{detail} [{:.1} s]", start.elapsed().as_secs_f64());
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

fn eight_level_cpb() -> CpbParams {
    CpbParams::from_charging_energy(1e9, 19.27e9)
}

fn cpb_run(shape: PulseShape, t_r: f64) -> Result<SimulationResult> {
    let fam = CpbFamily::new(eight_level_cpb(), ChargeBasis::default())?;
    propagate_from_ground(
        &fam,
        &cpb_sweep(shape, 0.1, t_r)?,
        &SolverOptions::default(),
    )
}

fn flux_problem(lw_hz: f64) -> OptimizationProblem {
    OptimizationProblem::flux(FluxParams::reference(), TR, Some(lw_hz))
}

fn lz_agreement() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let (mut beta_lo, mut beta_hi) = (f64::INFINITY, 0.0f64);
    let gaps = [0.1e9, 0.25e9, 0.63e9, 1.6e9, 4e9];
    let targets: [f64; 4] = [0.05, 0.3, 0.7, 0.95];
    for &d in &gaps {
        for &p in &targets {
            let w = 2.0 * PI * d;
            let beta = -PI * w * w / (2.0 * p.ln());
            beta_lo = beta_lo.min(beta);
            beta_hi = beta_hi.max(beta);
            let rate = beta / (2.0 * PI);
            let x = 60.0 * d.max(rate.sqrt());
            let seg = PulseSegment::new(PulseShape::Linear, -x, x, 2.0 * x / rate)?;
            let r = propagate_from_ground(
                &TwoLevelFamily { d_hz: d },
                &seg,
                &SolverOptions::default(),
            )?;
            let exact = lz_probability(&LzTwoLevel::new(d, beta)?)?;
            worst = worst.max((r.p_excited_final - exact).abs());
        }
    }
    let decades = (beta_hi / beta_lo).log10();
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-3 && decades >= 4.0 && secs <= 120.0,
        format!("20 pairs, beta spans {decades:.1} decades, max |dP| = {worst:.2e} (bound 1e-3)"),
    ))
}

fn diabatic_saturation() -> Result<(bool, String)> {
    let limit = cpb_diabatic_limit(&eight_level_cpb(), &ChargeBasis::default(), 0.1, 0.9)?;
    let floor = 1.0 - limit;
    let gaps: Vec<f64> = [10e-12, 3e-12, 1e-12]
        .iter()
        .map(|&t| cpb_run(PulseShape::Linear, t).map(|r| ((1.0 - r.p_excited_final) - floor).abs()))
        .collect::<Result<_>>()?;
    let converging = gaps.windows(2).all(|w| w[1] < w[0]) && gaps[2] < 0.05 * floor;
    Ok((
        (0.003..=0.005).contains(&floor) && converging,
        format!(
            "limit 1 - P = {:.3}%, distance at 10/3/1 ps = {:.1e}/{:.1e}/{:.1e}",
            100.0 * floor,
            gaps[0],
            gaps[1],
            gaps[2]
        ),
    ))
}

fn rise_time_collapse() -> Result<(bool, String)> {
    let n = 13;
    let t_eff: Vec<f64> = (0..n)
        .map(|i| 50e-12 * 100f64.powf(i as f64 / (n - 1) as f64))
        .collect();
    let p = eight_level_cpb();
    let basis = ChargeBasis::default();
    let mut curves = Vec::new();
    for shape in PulseShape::ALL {
        let ratio = cpb_sweep(shape, 0.1, 1.0)?.effective_rise_time(0.0)?;
        let values = t_eff.iter().map(|t| t / ratio).collect();
        let axis = ScanAxis::RiseTime {
            values,
            ng_min: 0.1,
        };
        let pts = leakage_scan(&p, &basis, shape, &axis, &SolverOptions::default())?;
        if let Some(e) = pts.iter().find_map(|q| q.error.clone()) {
            return Ok((false, format!("{}: {e}", shape.name())));
        }
        curves.push(pts.iter().map(|q| q.p_excited).collect::<Vec<_>>());
    }
    let (mut worst, mut at) = (0.0f64, 0.0);
    for (i, &t) in t_eff.iter().enumerate() {
        let col: Vec<f64> = curves.iter().map(|c| c[i]).collect();
        let spread = col.iter().cloned().fold(f64::MIN, f64::max)
            - col.iter().cloned().fold(f64::MAX, f64::min);
        if spread > worst {
            worst = spread;
            at = t;
        }
    }
    Ok((
        worst <= 5e-3,
        format!(
            "max spread {worst:.2e} at t_eff = {:.0} ps (bound 5e-3)",
            at * 1e12
        ),
    ))
}

fn leakage_bounds() -> Result<(bool, String)> {
    let slow: Vec<f64> = [100e-12, 300e-12, 1e-9, 3e-9, 10e-9]
        .iter()
        .map(|&t| cpb_run(PulseShape::Linear, t).map(|r| r.leakage_final))
        .collect::<Result<_>>()?;
    let slow_max = slow.iter().cloned().fold(0.0, f64::max);
    let fast = cpb_run(PulseShape::Linear, 1e-12)?.leakage_final;
    let faster = cpb_run(PulseShape::Linear, 0.5e-12)?.leakage_final;
    let saturated = ((faster - fast) / fast).abs() < 0.05;
    Ok((
        slow_max <= 1e-5 && (0.5e-4..=3e-4).contains(&fast) && saturated,
        format!(
            "max leakage for t_r >= 100 ps = {slow_max:.2e} (bound 1e-5), 1 ps = {fast:.2e}, 0.5 ps = {faster:.2e}"
        ),
    ))
}

fn cpb_operating_point() -> Result<(bool, String)> {
    let r = optimize_cpb(&OptimizationProblem::cpb(CpbParams::reference(), TR))?;
    let rep = r.report.expect("feasible");
    let pass = (rep.eta - 0.906).abs() <= 0.02
        && (r.co - 2.3e-15).abs() <= 0.5e-15
        && (rep.t1 - 33.8e-9).abs() <= 5e-9
        && (rep.rep_rate_hz - 5.9e6).abs() <= 1e6;
    Ok((
        pass,
        format!(
            "eta = {:.4}, C_o = {:.3} fF, T1 = {:.2} ns, rep rate = {:.3} MHz",
            rep.eta,
            r.co * 1e15,
            rep.t1 * 1e9,
            rep.rep_rate_hz * 1e-6
        ),
    ))
}

fn flux_bands() -> Result<(bool, String)> {
    let mut pass = true;
    let mut parts = Vec::new();
    for lw in [5e6, 10e6, 50e6] {
        let r = optimize_flux(&flux_problem(lw))?;
        let Some(rep) = r.report else {
            pass = false;
            parts.push(format!("L = {} MHz infeasible", lw * 1e-6));
            continue;
        };
        pass &= (0.85..=0.94).contains(&rep.eta)
            && (1e-9..=30e-9).contains(&rep.t1)
            && (1e-15..=6e-15).contains(&r.co);
        parts.push(format!(
            "L = {} MHz: eta {:.3}, T1 {:.2} ns, C_o {:.2} fF",
            lw * 1e-6,
            rep.eta,
            rep.t1 * 1e9,
            r.co * 1e15
        ));
    }
    let lw_min = min_linewidth(&flux_problem(1e9), 250e9, true)?;
    pass &= (2e6..=3e6).contains(&lw_min);
    parts.push(format!("min linewidth at 250 GHz {:.3} MHz", lw_min * 1e-6));
    Ok((pass, parts.join("; ")))
}

fn envelope_width(prob: &OptimizationProblem, r: &OptimizationResult) -> Result<f64> {
    Ok(fabrication_envelope(prob, r, 0.1)?.width())
}

fn fabrication() -> Result<(bool, String)> {
    let cpb = OptimizationProblem::cpb(CpbParams::reference(), TR);
    let w_cpb = envelope_width(&cpb, &optimize_cpb(&cpb)?)?;
    let flux = flux_problem(10e6);
    let w_flux = envelope_width(&flux, &optimize_flux(&flux)?)?;
    Ok((
        w_cpb <= 0.04 && w_flux <= 0.04,
        format!(
            "eta spread under 10% errors: charge {:.2} pp, flux (10 MHz) {:.2} pp (bound 4 pp)",
            100.0 * w_cpb,
            100.0 * w_flux
        ),
    ))
}

fn charge_line_leakage() -> Result<(bool, String)> {
    let prob = OptimizationProblem::cpb(CpbParams::reference(), TR);
    let r = optimize_cpb(&prob)?;
    let rep = r.report.expect("feasible");
    let src = LeakageSource::Charge {
        cg: CpbParams::reference().cg,
    };
    let l = spectral_leakage(
        PulseEnvelope::Triangle,
        src,
        TR,
        prob.omega(),
        rep.gamma2,
        1.0,
    )?;
    Ok((
        (0.04..=0.10).contains(&l),
        format!("triangle, beta_c = 1: {l:.4} (band [0.04, 0.10])"),
    ))
}

fn flux_line_leakage() -> Result<(bool, String)> {
    let prob = flux_problem(10e6);
    let r = optimize_flux(&prob)?;
    let rep = r.report.expect("feasible");
    let p = FluxParams::reference();
    let src = LeakageSource::Flux {
        ej_hz: r.ej_hz,
        m_coupling: p.m_coupling,
    };
    let l = spectral_leakage(
        PulseEnvelope::Triangle,
        src,
        TR,
        prob.omega(),
        rep.gamma2,
        1.0,
    )?;
    Ok((
        (0.6..=1.3).contains(&l),
        format!(
            "triangle, beta_c = 1, M = {:.1} fH: {l:.4e} (band [0.6, 1.3])",
            p.m_coupling * 1e15
        ),
    ))
}

fn max_hermiticity_error(fam: &dyn HamiltonianFamily, chis: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &chi in chis {
        let h = fam.at(chi)?;
        let m = h.entries();
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(
            (m - m.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
                / scale,
        );
    }
    Ok(worst)
}

fn property_suite() -> Result<(bool, String)> {
    let opts = SolverOptions::default();
    let mut drift = 0.0f64;
    for shape in PulseShape::ALL {
        for t_r in [10e-12, 300e-12, 3e-9] {
            drift = drift.max(cpb_run(shape, t_r)?.norm_drift);
        }
    }
    let flux = FluxFamily::new(FluxParams::reference())?;
    let seg = PulseSegment::new(PulseShape::Linear, -0.005, 0.005, TR)?;
    drift = drift.max(propagate_from_ground(&flux, &seg, &opts)?.norm_drift);
    let cat = catapult(-0.1, 0.175, 0.5, TR, PulseShape::Linear)?;
    let fam = CpbFamily::new(eight_level_cpb(), ChargeBasis::default())?;
    drift = drift.max(propagate_from_ground(&fam, &cat, &opts)?.norm_drift);

    let mut basis_change = 0.0f64;
    let wide = CpbFamily::new(eight_level_cpb(), ChargeBasis::new(-6, 7)?)?;
    for t_r in [1e-12, 100e-12, 1e-9] {
        let seg = cpb_sweep(PulseShape::Linear, 0.1, t_r)?;
        let a = propagate_from_ground(&fam, &seg, &opts)?.p_excited_final;
        let b = propagate_from_ground(&wide, &seg, &opts)?.p_excited_final;
        basis_change = basis_change.max(((a - b) / b).abs());
    }

    let chis: Vec<f64> = (0..41).map(|i| -0.5 + i as f64 / 40.0).collect();
    let phis: Vec<f64> = (0..41).map(|i| -0.1 + 0.2 * i as f64 / 40.0).collect();
    let herm = max_hermiticity_error(&fam, &chis)?.max(max_hermiticity_error(&flux, &phis)?);

    let prob = OptimizationProblem::cpb(CpbParams::reference(), TR);
    let a = optimize_cpb(&prob)?;
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .expect("thread pool")
        .install(|| optimize_cpb(&prob))?;
    let fp = flux_problem(10e6);
    let c = optimize_flux(&fp)?;
    let d = optimize_flux(&fp)?;
    let deterministic = a == b && c == d && a.co.to_bits() == b.co.to_bits();

    let mut slew = 0.0f64;
    for (ci, cf) in [(-0.1, 0.175), (0.0, 0.0), (0.2, -0.3), (-0.45, 0.45)] {
        let s = CatapultSequence::new(ci, cf, 1.0, TR, PulseShape::Linear, 1.0, 0.0)?;
        slew = slew.max((s.middle_slew_rate() - 1.0 / TR).abs() * TR);
    }

    let pass =
        drift <= 1e-9 && basis_change <= 1e-9 && herm <= 1e-12 && deterministic && slew <= 1e-12;
    Ok((
        pass,
        format!(
            "norm drift {drift:.1e}, basis change {basis_change:.1e}, hermiticity {herm:.1e}, \
             deterministic {deterministic}, catapult slew error {slew:.1e}"
        ),
    ))
}

fn main() {
    let outcomes = [
        check("1", "two-level sweep agrees with closed form", lz_agreement),
        check(
            "2",
            "diabatic saturation of the eight-level box",
            diabatic_saturation,
        ),
        check(
            "3",
            "effective rise time collapses pulse shapes",
            rise_time_collapse,
        ),
        check("4", "leakage out of the qubit subspace", leakage_bounds),
        check(
            "5",
            "charge-qubit operating point at 300 ps",
            cpb_operating_point,
        ),
        check("6", "flux-qubit designs across linewidth caps", flux_bands),
        check("7", "fabrication envelope", fabrication),
        check(
            "8a",
            "drive-line photon leakage, charge qubit",
            charge_line_leakage,
        ),
        check(
            "8b",
            "drive-line photon leakage, flux qubit",
            flux_line_leakage,
        ),
        check("9", "property suite", property_suite),
    ];
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:<3} {}: {}", o.id, o.title, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
