use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use lzphoton::config::{Architecture, Format, Pulse, RunConfig, SweepAxis, SweepKind};
use lzphoton::dynamics::{
    cpb_sweep, diabatic_limit, leakage_scan, propagate_from_ground, CpbFamily, FluxFamily,
    HamiltonianFamily, ScanAxis,
};
use lzphoton::lz::{cpb_excitation_probability, flux_excitation_probability};
use lzphoton::optimize::{fabrication_envelope, min_linewidth, optimize, risetime_sweep, Status};
use lzphoton::output::{
    envelope_table, optimization_table, push_scan_rows, scan_table, simulation_table, trace_table,
    trajectory_table, write_json, Cell, RunDir, Table, REPORT_COLUMNS,
};
use lzphoton::pulse::Drive;
use lzphoton::rates::{protocol_decay_bound, spectral_leakage, thermal_population, LeakageSource};
use lzphoton::{Error, Result};

pub struct Outcome {
    pub code: u8,
    pub message: String,
}

/// Reads a TOML config, or the `config` member of a JSON run summary.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let bad = |e: serde_json::Error| Error::Config(format!("{}: {e}", path.display()));
        let v: Value = serde_json::from_str(&text).map_err(bad)?;
        let cfg = v.get("config").cloned().unwrap_or(v);
        let cfg: RunConfig = serde_json::from_value(cfg).map_err(bad)?;
        cfg.validate()?;
        Ok(cfg)
    } else {
        RunConfig::from_toml_str(&text)
    }
}

struct Ctx {
    cfg: RunConfig,
    dir: RunDir,
    command: &'static str,
    seed: Option<u64>,
}

impl Ctx {
    fn csv(&self, name: &str, t: &Table) -> Result<()> {
        if self.cfg.output.formats.contains(&Format::Csv) {
            t.write(&self.dir.path(name))?;
        }
        Ok(())
    }

    fn summary(&self, result: Value) -> Result<()> {
        if self.cfg.output.formats.contains(&Format::Json) {
            let v = json!({
                "command": self.command,
                "version": env!("CARGO_PKG_VERSION"),
                "seed": self.seed,
                "config": self.cfg,
                "result": result,
            });
            write_json(&self.dir.path("summary.json"), &v)?;
        }
        Ok(())
    }
}

pub fn run(command: &str, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<Outcome> {
    let cfg = load_config(config)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lzphoton-runs").join(command));
    let dir = RunDir::create(&dir)?;
    std::fs::write(dir.path("config.toml"), cfg.to_toml_string()?)?;
    let command: &'static str = match command {
        "simulate" => "simulate",
        "sweep" => "sweep",
        "optimize" => "optimize",
        "catapult" => "catapult",
        "leakage" => "leakage",
        "spectrum" => "spectrum",
        other => return Err(Error::Config(format!("unknown command `{other}`"))),
    };
    let ctx = Ctx {
        cfg,
        dir,
        command,
        seed,
    };
    let outcome = match command {
        "simulate" => simulate(&ctx),
        "sweep" => sweep(&ctx),
        "optimize" => cmd_optimize(&ctx),
        "catapult" => catapult(&ctx),
        "leakage" => leakage(&ctx),
        _ => spectrum(&ctx),
    }?;
    Ok(Outcome {
        message: format!(
            "{} (output in {})",
            outcome.message,
            ctx.dir.root().display()
        ),
        ..outcome
    })
}

fn family(cfg: &RunConfig) -> Result<Box<dyn HamiltonianFamily>> {
    Ok(match cfg.architecture {
        Architecture::Cpb => Box::new(CpbFamily::new(cfg.cpb()?, cfg.basis()?)?),
        Architecture::Flux => Box::new(FluxFamily::new(cfg.flux()?)?),
    })
}

fn simulate(ctx: &Ctx) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let fam = family(cfg)?;
    let pulse = cfg.pulse()?;
    let drive = pulse.as_drive();
    let r = propagate_from_ground(fam.as_ref(), drive, &cfg.solver)?;
    let h0 = fam.at(drive.value(0.0))?;
    let h1 = fam.at(drive.value(drive.duration()))?;
    let limit = diabatic_limit(&h0, &h1).ok();
    let crossing = match &pulse {
        Pulse::Segment(s) => s.effective_rise_time(0.0).ok().map(|t| s.span().abs() / t),
        Pulse::Catapult(c) => c
            .middle()
            .effective_rise_time(0.0)
            .ok()
            .map(|t| c.middle().span().abs() / t),
    };
    let lz_estimate = match (crossing, cfg.architecture) {
        (Some(rate), Architecture::Cpb) => cpb_excitation_probability(&cfg.cpb()?, rate).ok(),
        (Some(rate), Architecture::Flux) => {
            flux_excitation_probability(&cfg.flux()?, 2.0 * std::f64::consts::PI * rate).ok()
        }
        _ => None,
    };
    ctx.csv("timeseries.csv", &simulation_table(&r))?;
    ctx.summary(json!({
        "p_ground_final": r.p_ground_final,
        "p_excited_final": r.p_excited_final,
        "leakage_final": r.leakage_final,
        "norm_drift": r.norm_drift,
        "steps": r.steps,
        "duration": drive.duration(),
        "diabatic_limit": limit,
        "crossing_rate": crossing,
        "lz_estimate": lz_estimate,
    }))?;
    Ok(Outcome {
        code: 0,
        message: format!(
            "P_e = {:.10}, leakage = {:.3e}, norm drift = {:.1e}",
            r.p_excited_final, r.leakage_final, r.norm_drift
        ),
    })
}

fn sweep(ctx: &Ctx) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    let grid = s.grid()?;
    if s.kind == SweepKind::Optimize {
        let base = cfg.problem(grid[0])?;
        let results = risetime_sweep(&base, &grid)?;
        let rel = cfg
            .optimization
            .as_ref()
            .map_or(0.1, |o| o.envelope_rel_err);
        let mut rows = Vec::with_capacity(results.len());
        for r in results {
            let env = if r.is_feasible() {
                let mut p = base.clone();
                p.rise_time = r.rise_time;
                Some(fabrication_envelope(&p, &r, rel)?)
            } else {
                None
            };
            rows.push((r, env));
        }
        let infeasible = rows.iter().filter(|(r, _)| !r.is_feasible()).count();
        ctx.csv("sweep.csv", &optimization_table(&rows))?;
        ctx.summary(json!({ "points": rows.len(), "infeasible": infeasible }))?;
        return Ok(Outcome {
            code: 0,
            message: format!(
                "{} rise times optimised, {infeasible} infeasible",
                rows.len()
            ),
        });
    }
    let p = cfg.cpb()?;
    let basis = cfg.basis()?;
    let mut table = scan_table("", &[]);
    let mut failures = 0usize;
    let mut n = 0usize;
    for &shape in &s.shapes {
        let axis = match s.axis {
            SweepAxis::RiseTime => {
                let values = if s.effective {
                    let ratio = cpb_sweep(shape, s.ng_min, 1.0)?.effective_rise_time(0.0)?;
                    grid.iter().map(|t| t / ratio).collect()
                } else {
                    grid.clone()
                };
                ScanAxis::RiseTime {
                    values,
                    ng_min: s.ng_min,
                }
            }
            SweepAxis::NgMin => ScanAxis::NgMin {
                values: grid.clone(),
                rise_time: s.rise_time.expect("validated"),
            },
            SweepAxis::Shape => ScanAxis::RiseTime {
                values: vec![s.rise_time.expect("validated")],
                ng_min: s.ng_min,
            },
        };
        let pts = leakage_scan(&p, &basis, shape, &axis, &cfg.solver)?;
        failures += pts.iter().filter(|p| p.error.is_some()).count();
        n += pts.len();
        push_scan_rows(&mut table, shape.name(), &pts);
    }
    ctx.csv("sweep.csv", &table)?;
    ctx.summary(json!({ "points": n, "failures": failures }))?;
    Ok(Outcome {
        code: if failures > 0 { 3 } else { 0 },
        message: format!("{n} grid points, {failures} failed"),
    })
}

fn rise_time_of(cfg: &RunConfig) -> Result<f64> {
    cfg.optimization
        .as_ref()
        .and_then(|o| o.rise_time)
        .or_else(|| cfg.pulse.as_ref().map(|p| p.rise_time))
        .ok_or_else(|| Error::Config("set optimization.rise_time or pulse.rise_time".into()))
}

fn cmd_optimize(ctx: &Ctx) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let prob = cfg.problem(rise_time_of(cfg)?)?;
    let r = optimize(&prob)?;
    ctx.csv("trace.csv", &trace_table(&r.trace))?;
    let rel = cfg
        .optimization
        .as_ref()
        .map_or(0.1, |o| o.envelope_rel_err);
    let env = if r.is_feasible() {
        let e = fabrication_envelope(&prob, &r, rel)?;
        ctx.csv("envelope.csv", &envelope_table(&e))?;
        Some(e)
    } else {
        None
    };
    ctx.csv(
        "result.csv",
        &optimization_table(&[(r.clone(), env.clone())]),
    )?;
    let min_lw = min_linewidth(&prob, r.ej_hz, true)
        .ok()
        .filter(|_| r.is_feasible());
    ctx.summary(json!({
        "status": r.status,
        "rise_time": r.rise_time,
        "sweep_rate": r.sweep_rate,
        "co": r.co,
        "ej_hz": r.ej_hz,
        "report": r.report,
        "slack": r.slack,
        "linewidth_limit_hz": r.linewidth_limit_hz,
        "min_linewidth_hz": min_lw,
        "envelope": env.as_ref().map(|e| json!({
            "rel_err": e.rel_err,
            "eta_min": e.eta_min,
            "eta_max": e.eta_max,
            "width": e.width(),
        })),
    }))?;
    Ok(match r.status {
        Status::Optimal => Outcome {
            code: 0,
            message: format!(
                "eta = {:.4}, C_o = {:.4e} F, E_J/h = {:.4e} Hz, T1 = {:.4e} s",
                r.eta(),
                r.co,
                r.ej_hz,
                r.report.map_or(f64::NAN, |x| x.t1)
            ),
        },
        Status::Infeasible => Outcome {
            code: 4,
            message: "infeasible: no design point satisfies the constraints".into(),
        },
    })
}

fn catapult(ctx: &Ctx) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let block = cfg
        .pulse
        .as_ref()
        .ok_or_else(|| Error::Config("missing [pulse] section".into()))?;
    let Pulse::Catapult(c) = cfg.pulse()? else {
        return Err(Error::Config(
            "catapult needs pulse.kind = \"catapult\"".into(),
        ));
    };
    let dt = block.sample_step()?;
    ctx.csv("trajectory.csv", &trajectory_table(&c, dt))?;
    ctx.csv("reverse.csv", &trajectory_table(&c.reverse(), dt))?;
    let segs = |s: &lzphoton::pulse::CatapultSequence| {
        s.segments
            .iter()
            .map(|g| json!({ "chi_start": g.chi_start, "chi_end": g.chi_end, "rise_time": g.rise_time }))
            .collect::<Vec<_>>()
    };
    ctx.summary(json!({
        "duration": c.duration(),
        "middle_slew_rate": c.middle_slew_rate(),
        "max_slew_rate": c.max_slew_rate(),
        "segments": segs(&c),
        "reverse_segments": segs(&c.reverse()),
    }))?;
    Ok(Outcome {
        code: 0,
        message: format!(
            "catapult of {:.4e} s, crossing slew {:.4e} /s",
            c.duration(),
            c.middle_slew_rate()
        ),
    })
}

fn leakage(ctx: &Ctx) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let l = cfg.leakage.clone().unwrap_or_default();
    let t_r = match l.rise_time {
        Some(t) => t,
        None => rise_time_of(cfg)?,
    };
    let prob = cfg.problem(t_r)?;
    let (co, ej, source) = match cfg.architecture {
        Architecture::Cpb => {
            let p = cfg.cpb()?;
            (p.co, p.ej_hz, LeakageSource::Charge { cg: p.cg })
        }
        Architecture::Flux => {
            let p = cfg.flux()?;
            (
                p.co,
                p.ej_hz,
                LeakageSource::Flux {
                    ej_hz: p.ej_hz,
                    m_coupling: p.m_coupling,
                },
            )
        }
    };
    let report = prob.evaluate(co, ej)?;
    let leak = spectral_leakage(
        l.envelope,
        source,
        t_r,
        prob.omega(),
        report.gamma2,
        l.beta_c,
    )?;
    let thermal = thermal_population(prob.emission_hz, l.temperature)?;
    let decay = protocol_decay_bound(t_r, report.t1)?;
    let mut header = vec![
        "rise_time",
        "photon_leakage",
        "thermal_population",
        "protocol_decay_bound",
    ];
    header.extend(REPORT_COLUMNS);
    let mut t = Table::new(&header);
    let mut row: Vec<Cell> = vec![t_r.into(), leak.into(), thermal.into(), decay.into()];
    row.extend(lzphoton::output::report_cells(Some(&report)));
    t.push(row);
    ctx.csv("leakage.csv", &t)?;
    ctx.summary(json!({
        "rise_time": t_r,
        "photon_leakage": leak,
        "thermal_population": thermal,
        "protocol_decay_bound": decay,
        "report": report,
    }))?;
    Ok(Outcome {
        code: 0,
        message: format!(
            "photon leakage {leak:.4e}, thermal {thermal:.3e}, decay bound {decay:.3e}"
        ),
    })
}

fn spectrum(ctx: &Ctx) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let s = cfg
        .spectrum
        .as_ref()
        .ok_or_else(|| Error::Config("missing [spectrum] section".into()))?;
    let fam = family(cfg)?;
    let n = fam.dim();
    let mut header = vec!["chi".to_string()];
    header.extend((0..n).map(|k| format!("e_{k}")));
    header.push("f_01".into());
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for i in 0..s.points {
        let chi = s.chi_min + (s.chi_max - s.chi_min) * i as f64 / (s.points - 1) as f64;
        let e = fam.at(chi)?.eigenvalues();
        let mut row = vec![Cell::Num(chi)];
        row.extend(e.iter().map(|&x| Cell::Num(x)));
        row.push(Cell::Num(e[1] - e[0]));
        t.push(row);
    }
    ctx.csv("spectrum.csv", &t)?;
    ctx.summary(json!({ "points": s.points, "levels": n }))?;
    Ok(Outcome {
        code: 0,
        message: format!("{} points, {n} levels", s.points),
    })
}
