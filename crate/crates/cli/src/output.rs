//! Table emission (CSV or JSON) and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use slowcav::{PulseEnvelope, SlowLightReport};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::run::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Floats use the shortest exponent form that round-trips exactly.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(v) => format!("{v:e}"),
                    Cell::Int(v) => v.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Array of records; empty cells become `null`.
    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (col, c) in self.columns.iter().zip(row) {
                    let v = match c {
                        Cell::Float(v) => Value::from(*v),
                        Cell::Int(v) => Value::from(*v),
                        Cell::Empty => Value::Null,
                    };
                    m.insert((*col).to_string(), v);
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&records).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Grid indices selected by the export window and stride.
fn exported(outcome: &Outcome) -> Vec<usize> {
    let e = &outcome.config.export;
    let g = &outcome.grid;
    (0..g.len())
        .step_by(e.stride.max(1))
        .filter(|&i| match e.window_hz {
            Some([lo, hi]) => (lo..=hi).contains(&g.point(i)),
            None => true,
        })
        .collect()
}

pub fn profile_table(o: &Outcome) -> Table {
    let mut t = Table::new("profile", &["detuning_Hz", "alpha_per_m"]);
    for i in exported(o) {
        t.push(vec![o.grid.point(i).into(), o.alpha[i].into()]);
    }
    t
}

pub fn dispersion_table(o: &Outcome) -> Option<Table> {
    let d = o.dispersion.as_ref()?;
    let mut t = Table::new("dispersion", &["detuning_Hz", "delta_n", "group_index"]);
    for i in exported(o) {
        t.push(vec![o.grid.point(i).into(), d.delta_n[i].into(), d.group_index[i].into()]);
    }
    Some(t)
}

pub fn transmission_table(o: &Outcome) -> Option<Table> {
    let ft = o.transfer.as_ref()?;
    let mut t = Table::new("transmission", &["detuning_Hz", "T", "re_t", "im_t"]);
    for i in exported(o) {
        t.push(vec![
            o.grid.point(i).into(),
            ft.transmission[i].into(),
            ft.t[i].re.into(),
            ft.t[i].im.into(),
        ]);
    }
    Some(t)
}

pub fn modes_table(o: &Outcome) -> Option<Table> {
    let sim = o.simulation.as_ref()?;
    let mut t = Table::new(
        "modes",
        &["center_Hz", "fwhm_Hz", "peak_T", "spacing_Hz", "mode_number"],
    );
    for r in &sim.modes.rows {
        t.push(vec![
            r.center.into(),
            r.fwhm.into(),
            r.peak_t.into(),
            r.spacing_to_next.into(),
            r.mode_number.into(),
        ]);
    }
    Some(t)
}

const REPORT_COLUMNS: [&str; 12] = [
    "gamma_Hz",
    "alpha_eff_per_m",
    "v_g_eq5_m_per_s",
    "v_g_kk_m_per_s",
    "group_index",
    "mode_spacing_Hz",
    "linewidth_Hz",
    "narrowing_factor",
    "spacing_reduction_factor",
    "tb_product",
    "tb_delay",
    "hole",
];

fn report_row(r: &SlowLightReport, hole: i64) -> Vec<Cell> {
    vec![
        r.gamma.into(),
        r.alpha_eff.into(),
        r.v_g_eq5.into(),
        r.v_g_kk.into(),
        r.group_index.into(),
        r.mode_spacing.into(),
        r.linewidth.into(),
        r.narrowing_factor.into(),
        r.spacing_reduction_factor.into(),
        r.tb_product.into(),
        r.tb_delay.into(),
        hole.into(),
    ]
}

pub fn report_table(o: &Outcome) -> Option<Table> {
    if o.reports.iter().all(|r| r.is_err()) {
        return None;
    }
    let mut t = Table::new("report", &REPORT_COLUMNS);
    for (i, r) in o.reports.iter().enumerate() {
        if let Ok(r) = r {
            t.push(report_row(r, i as i64));
        }
    }
    Some(t)
}

pub fn sweep_table(o: &Outcome) -> Option<Table> {
    let rows = o.sweep.as_ref()?;
    let mut t = Table::new("sweep", &REPORT_COLUMNS[..11]);
    for r in rows {
        let mut row = report_row(r, 0);
        row.pop();
        t.push(row);
    }
    Some(t)
}

fn pulse_table(name: &'static str, p: &PulseEnvelope, normalize: bool, stride: usize) -> Table {
    let mut t = Table::new(name, &["time_s", "intensity", "re_field", "im_field"]);
    let intensity = p.intensity();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let (si, sf) = if normalize && peak > 0.0 {
        (1.0 / peak, 1.0 / peak.sqrt())
    } else {
        (1.0, 1.0)
    };
    for k in (0..p.len()).step_by(stride.max(1)) {
        t.push(vec![
            p.time(k).into(),
            (intensity[k] * si).into(),
            (p.field[k].re * sf).into(),
            (p.field[k].im * sf).into(),
        ]);
    }
    t
}

pub fn pulse_tables(o: &Outcome, normalize: bool) -> Vec<Table> {
    let Some(p) = &o.pulse else {
        return Vec::new();
    };
    let stride = o.config.export.stride;
    let mut peaks = Table::new("ringdown", &["peak_time_s", "peak_intensity"]);
    for (t, y) in p.ring_down.peak_times.iter().zip(&p.ring_down.peak_intensities) {
        peaks.push(vec![(*t).into(), (*y).into()]);
    }
    vec![
        pulse_table("pulse_input", &p.input, normalize, stride),
        pulse_table("pulse_output", &p.output, normalize, stride),
        peaks,
    ]
}

/// SHA-256 of the canonical (re-serialized) config.
pub fn config_hash(config: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(config.to_json().as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub config_hash: String,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

/// Writes artifacts into one directory and records them for the manifest.
pub struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

impl Writer {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Self {
            dir,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write(&mut self, file: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(file);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.files.push(file.to_string());
        Ok(())
    }

    pub fn table(&mut self, table: &Table, format: Format) -> Result<(), CliError> {
        let file = format!("{}.{}", table.name, format.extension());
        self.write(&file, &table.render(format))
    }

    /// Writes `manifest.json`; it lists every file written before it.
    pub fn finish(self, config: &ScenarioConfig, wall_time_s: f64) -> Result<Manifest, CliError> {
        let manifest = Manifest {
            scenario: config.name.clone(),
            config_hash: config_hash(config),
            files: self.files.clone(),
            wall_time_s,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
        Ok(manifest)
    }
}
