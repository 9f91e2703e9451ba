//! CSV and JSON emitters.
//!
//! Every CSV starts with a header row and keeps a fixed column order. Floats
//! are written in scientific notation with 17 significant digits so that
//! they parse back to the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::{ScanPoint, SimulationResult};
use crate::error::Result;
use crate::optimize::{Envelope, OptimizationResult, TracePoint};
use crate::pulse::Drive;
use crate::rates::EfficiencyReport;

/// `{:.16e}`; NaN and infinities are written as `nan`, `inf`, `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Header plus rows, all of the same width.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn write_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r.iter().map(Cell::render))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(fs::File::create(path)?)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Output directory of one run.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(RunDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

/// One row per output time: t, χ, P_g, P_e, leakage, then every level.
pub fn simulation_table(r: &SimulationResult) -> Table {
    let levels = r.populations.first().map_or(0, Vec::len);
    let mut header: Vec<String> = ["t", "chi", "p_ground", "p_excited", "leakage"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..levels).map(|k| format!("p_{k}")));
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for (i, pops) in r.populations.iter().enumerate() {
        let mut row = vec![
            Cell::Num(r.times[i]),
            Cell::Num(r.chi[i]),
            Cell::Num(pops[0]),
            Cell::Num(pops.get(1).copied().unwrap_or(0.0)),
            Cell::Num(r.leakage(i)),
        ];
        row.extend(pops.iter().map(|&p| Cell::Num(p)));
        t.push(row);
    }
    t
}

/// (t, χ) every `dt` seconds.
pub fn trajectory_table(drive: &dyn Drive, dt: f64) -> Table {
    let mut t = Table::new(&["t", "chi"]);
    for (time, chi) in drive.trajectory(dt) {
        t.push(vec![time.into(), chi.into()]);
    }
    t
}

pub fn scan_table(shape: &str, points: &[ScanPoint]) -> Table {
    let mut t = Table::new(&[
        "shape",
        "rise_time",
        "effective_rise_time",
        "ng_min",
        "ng_max",
        "p_excited",
        "leakage",
        "norm_drift",
        "error",
    ]);
    push_scan_rows(&mut t, shape, points);
    t
}

pub fn push_scan_rows(t: &mut Table, shape: &str, points: &[ScanPoint]) {
    for p in points {
        t.push(vec![
            shape.into(),
            p.rise_time.into(),
            p.effective_rise_time.into(),
            p.ng_min.into(),
            p.ng_max.into(),
            p.p_excited.into(),
            p.leakage.into(),
            p.norm_drift.into(),
            p.error.as_deref().map_or(Cell::Empty, Cell::from),
        ]);
    }
}

pub const REPORT_COLUMNS: [&str; 12] = [
    "p_ex",
    "gamma_o",
    "gamma_other",
    "gamma_nr",
    "eta",
    "t1",
    "gamma_phi",
    "gamma2",
    "fwhm_hz",
    "linewidth_hz",
    "rep_rate_hz",
    "gamma1",
];

pub fn report_cells(r: Option<&EfficiencyReport>) -> Vec<Cell> {
    match r {
        Some(r) => vec![
            r.p_ex.into(),
            r.gamma_o.into(),
            r.gamma_other.into(),
            r.gamma_nr.into(),
            r.eta.into(),
            r.t1.into(),
            r.gamma_phi.into(),
            r.gamma2.into(),
            r.fwhm_hz.into(),
            r.linewidth_hz.into(),
            r.rep_rate_hz.into(),
            r.gamma1().into(),
        ],
        None => vec![Cell::Empty; REPORT_COLUMNS.len()],
    }
}

pub fn trace_table(points: &[TracePoint]) -> Table {
    let mut t = Table::new(&["co", "ej_hz", "eta", "t1", "linewidth_hz", "feasible"]);
    for p in points {
        t.push(vec![
            p.co.into(),
            p.ej_hz.into(),
            p.eta.into(),
            p.t1.into(),
            p.linewidth_hz.into(),
            p.feasible.into(),
        ]);
    }
    t
}

pub fn envelope_table(e: &Envelope) -> Table {
    let mut t = trace_table(&e.points);
    t.header.push("rel_err".into());
    for r in &mut t.rows {
        r.push(e.rel_err.into());
    }
    t
}

/// One row per optimised rise time: t_r, status, design, report, envelope.
pub fn optimization_table(rows: &[(OptimizationResult, Option<Envelope>)]) -> Table {
    let mut header = vec!["rise_time", "status", "co", "ej_hz"];
    header.extend(REPORT_COLUMNS);
    header.extend(["eta_min", "eta_max"]);
    let mut t = Table::new(&header);
    for (r, env) in rows {
        let mut row = vec![
            r.rise_time.into(),
            Cell::Text(format!("{:?}", r.status).to_lowercase()),
            r.co.into(),
            r.ej_hz.into(),
        ];
        row.extend(report_cells(r.report.as_ref()));
        row.push(env.as_ref().map(|e| e.eta_min).into());
        row.push(env.as_ref().map(|e| e.eta_max).into());
        t.push(row);
    }
    t
}
