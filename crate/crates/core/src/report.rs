//! Output files: CSV tables, run manifests, solve records and SVG charts.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so the
//! same result always produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioFile;
use crate::error::{Error, Result};
use crate::experiments::SweepResult;
use crate::solver::{Diagnostics, Solution};

pub const MANIFEST_VERSION: u32 = 1;

pub const REGION_HEADER: [&str; 7] = [
    "epsilon_mw",
    "scenario",
    "mean_rate_bpshz",
    "stderr_rate",
    "mean_eh_mw",
    "feasible_frac",
    "n_feasible",
];

pub const CSI_HEADER: [&str; 5] = [
    "p0_dbm",
    "psi",
    "mean_rate_bpshz",
    "stderr_rate",
    "feasible_frac",
];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn region_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REGION_HEADER)?;
    for r in &result.rows {
        w.write_record([
            num(r.axis),
            r.scenario.clone(),
            opt(r.stats.mean_rate_bpshz),
            opt(r.stats.stderr_rate),
            opt(r.stats.mean_eh_mw),
            num(r.stats.feasible_frac),
            r.stats.n_feasible.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))
}

pub fn csi_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSI_HEADER)?;
    for r in &result.rows {
        w.write_record([
            num(r.axis),
            num(r.psi),
            opt(r.stats.mean_rate_bpshz),
            opt(r.stats.stderr_rate),
            num(r.stats.feasible_frac),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to reproduce a sweep, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    /// Effective scenario, including grids, seed and realization count.
    pub scenario: ScenarioFile,
    pub units: BTreeMap<String, String>,
    pub outputs: Vec<OutputRecord>,
}

fn units() -> BTreeMap<String, String> {
    [
        ("*_dbm", "dBm"),
        ("*_mw", "mW"),
        ("*_bpshz / stderr_rate", "bps/Hz"),
        ("a_per_mw", "1/mW"),
        ("distance_m", "m"),
        ("rician_k_db", "dB"),
        ("psi, feasible_frac", "dimensionless"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl RunManifest {
    pub fn new(command: &str, scenario: &ScenarioFile) -> Self {
        RunManifest {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario: scenario.clone(),
            units: units(),
            outputs: Vec::new(),
        }
    }

    /// Writes `bytes` to `dir/file` and records its checksum.
    pub fn write_output(&mut self, dir: &Path, file: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(OutputRecord {
            file: file.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Files in `dir` whose checksum differs from the manifest (or are missing).
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|o| match fs::read(dir.join(&o.file)) {
                Ok(bytes) => sha256_hex(&bytes) != o.sha256,
                Err(_) => true,
            })
            .map(|o| o.file.clone())
            .collect()
    }
}

/// Which sweep a set of outputs came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Region,
    CsiSweep,
}

impl SweepKind {
    pub fn command(self) -> &'static str {
        match self {
            SweepKind::Region => "region",
            SweepKind::CsiSweep => "csi-sweep",
        }
    }

    fn stem(self) -> &'static str {
        match self {
            SweepKind::Region => "region",
            SweepKind::CsiSweep => "csi_sweep",
        }
    }
}

/// Writes the CSV (and optionally an SVG chart) for a sweep into `out_dir`,
/// followed by `<stem>.manifest.json`. Returns the manifest path.
pub fn write_sweep(
    out_dir: &Path,
    kind: SweepKind,
    scenario: &ScenarioFile,
    result: &SweepResult,
    plot: bool,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = RunManifest::new(kind.command(), scenario);
    let stem = kind.stem();
    let csv = match kind {
        SweepKind::Region => region_csv(result)?,
        SweepKind::CsiSweep => csi_csv(result)?,
    };
    manifest.write_output(out_dir, &format!("{stem}.csv"), &csv)?;
    if plot {
        let svg = sweep_chart(kind, result);
        manifest.write_output(out_dir, &format!("{stem}.svg"), svg.as_bytes())?;
    }
    let path = out_dir.join(format!("{stem}.manifest.json"));
    manifest.save(&path)?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct AntennaWeight {
    pub magnitude: f64,
    pub phase_rad: f64,
}

/// Machine-readable form of a [`Solution`].
#[derive(Debug, Clone, Serialize)]
pub struct SolveRecord {
    pub feasible: bool,
    pub w: Vec<AntennaWeight>,
    pub radiated_mw: f64,
    pub rho: f64,
    pub phi: f64,
    pub gamma_mw: f64,
    pub epsilon_bar_mw: f64,
    pub rate_bpshz: Option<f64>,
    pub sp_ac_mw: Option<f64>,
    pub eh_dc_mw: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl From<&Solution> for SolveRecord {
    fn from(s: &Solution) -> Self {
        SolveRecord {
            feasible: s.feasible,
            w: s.w
                .iter()
                .map(|z| AntennaWeight {
                    magnitude: z.norm(),
                    phase_rad: z.arg(),
                })
                .collect(),
            radiated_mw: crate::channel::norm_sq(&s.w),
            rho: s.rho,
            phi: s.phi,
            gamma_mw: s.gamma_mw,
            epsilon_bar_mw: s.epsilon_bar_mw,
            rate_bpshz: s.metrics.map(|m| m.rate_bpshz),
            sp_ac_mw: s.metrics.map(|m| m.sp_ac_mw),
            eh_dc_mw: s.metrics.map(|m| m.eh_dc_mw),
            diagnostics: s.diagnostics.clone(),
        }
    }
}

impl SolveRecord {
    /// Plain-text summary for terminals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "feasible        {}", self.feasible);
        for (k, w) in self.w.iter().enumerate() {
            let _ = writeln!(
                out,
                "w[{k}]            |w| = {:.6e} mW^0.5, arg = {:+.6} rad",
                w.magnitude, w.phase_rad
            );
        }
        let _ = writeln!(out, "|w|^2           {:.6e} mW", self.radiated_mw);
        let _ = writeln!(out, "rho*            {:.9}", self.rho);
        let _ = writeln!(out, "phi*            {:.9}", self.phi);
        let _ = writeln!(out, "Gamma           {:.6e} mW", self.gamma_mw);
        let _ = writeln!(out, "eps_bar         {:.6e} mW", self.epsilon_bar_mw);
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        let _ = writeln!(out, "rate (worst)    {} bps/Hz", show(self.rate_bpshz));
        let _ = writeln!(out, "SP_AC (worst)   {} mW", show(self.sp_ac_mw));
        let _ = writeln!(out, "EH_DC (worst)   {} mW", show(self.eh_dc_mw));
        if !self.diagnostics.clamped.is_empty() {
            let _ = writeln!(out, "clamped         {:?}", self.diagnostics.clamped);
        }
        if let Some(why) = &self.diagnostics.infeasibility {
            let _ = writeln!(out, "infeasible      {why:?}");
        }
        out
    }
}

/// One named line in a chart.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Minimal SVG line chart. Non-finite points are skipped.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    series: &[Series],
) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 60.0);
    let fx = |x: f64| if log_x { x.log10() } else { x };
    let pts = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(fx(x));
        x1 = x1.max(fx(x));
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + y0.abs().max(1e-12);
    }
    let px = |x: f64| left + (fx(x) - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let xs = left + t * (w - left - right);
        let ys = h - bottom - t * (h - top - bottom);
        let xt = if log_x { 10f64.powf(xv) } else { xv };
        let _ = writeln!(
            s,
            r#"<text x="{xs}" y="{}" text-anchor="middle">{xt:.3e}</text>"#,
            h - bottom + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ys}" text-anchor="end">{yv:.3e}</text>"#,
            left - 6.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (left + w - right) / 2.0,
        h - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 16.0 * (k as f64 + 1.0);
        let lx = w - right + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn sweep_chart(kind: SweepKind, result: &SweepResult) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for r in &result.rows {
        if !labels.contains(&r.scenario.as_str()) {
            labels.push(&r.scenario);
        }
    }
    let series: Vec<Series> = labels
        .iter()
        .map(|label| Series {
            label: match kind {
                SweepKind::Region => format!("{label} computing"),
                SweepKind::CsiSweep => format!("psi = {label}"),
            },
            points: result
                .series(label)
                .iter()
                .filter_map(|r| r.stats.mean_rate_bpshz.map(|y| (r.axis, y)))
                .collect(),
        })
        .collect();
    match kind {
        SweepKind::Region => line_chart(
            "Rate-energy region",
            "harvest threshold epsilon (mW)",
            "mean worst-case rate (bps/Hz)",
            true,
            &series,
        ),
        SweepKind::CsiSweep => line_chart(
            "Impact of channel uncertainty",
            "radiated power P0 (dBm)",
            "mean worst-case rate (bps/Hz)",
            false,
            &series,
        ),
    }
}
