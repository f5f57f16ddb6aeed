use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::currents::{Current, PshKind};
use crate::error::{Error, Result};
use crate::holo::HoloKind;
use crate::mass::grid::{fmt17, RadialGrid};

/// Frame bookkeeping for slice-based experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameStats {
    pub sampled: usize,
    pub degenerate: usize,
}

impl FrameStats {
    pub fn degenerate_fraction(&self) -> f64 {
        if self.sampled == 0 {
            0.0
        } else {
            self.degenerate as f64 / self.sampled as f64
        }
    }
}

/// Outcome of one verification run. Everything except `wall_time_s` is a
/// function of the inputs and the seed.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub inputs: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(String, String)>,
    /// `None` when there is no verdict: exploratory runs and plain tabulations.
    pub passed: Option<bool>,
    pub frames: Option<FrameStats>,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.into(),
            inputs: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            summary: Vec::new(),
            passed: None,
            frames: None,
            wall_time_s: 0.0,
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.push((key.into(), value.to_string()));
        self
    }

    pub fn stat(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.summary.push((key.into(), value.to_string()));
        self
    }

    pub fn stat_f(&mut self, key: &str, value: f64) -> &mut Self {
        self.stat(key, fmt17(value))
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Field-for-field equality ignoring the wall time.
    pub fn same_content(&self, other: &ExperimentReport) -> bool {
        self.name == other.name
            && self.inputs == other.inputs
            && self.columns == other.columns
            && self.summary == other.summary
            && self.passed == other.passed
            && self.frames == other.frames
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().map(|x| x.to_bits()).eq(b.iter().map(|x| x.to_bits())))
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment={}", self.name);
        let verdict = match self.passed {
            Some(true) => "true",
            Some(false) => "false",
            None => "none",
        };
        let _ = writeln!(s, "pass={verdict}");
        if let Some(f) = self.frames {
            let _ = writeln!(s, "frames_sampled={}", f.sampled);
            let _ = writeln!(s, "frames_degenerate={}", f.degenerate);
        }
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn meta_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment={}", self.name);
        for (k, v) in &self.inputs {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "wall_time_s={:.3}", self.wall_time_s);
        s
    }

    /// Writes `report.csv`, `summary.txt` and `meta.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::config(format!("cannot write report to {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.csv"), self.to_csv()).map_err(io)?;
        fs::write(dir.join("summary.txt"), self.summary_text()).map_err(io)?;
        fs::write(dir.join("meta.txt"), self.meta_text()).map_err(io)?;
        Ok(())
    }

    pub fn grid_inputs(&mut self, grid: &RadialGrid) -> &mut Self {
        self.input("grid_r_min", fmt17(grid.r_min()))
            .input("grid_r_max", fmt17(grid.r_max()))
            .input("grid_points", grid.len())
    }
}

/// Short human-readable description of a current.
pub fn describe_current(t: &Current) -> String {
    match t {
        Current::ZeroSet { f } => {
            let kind = match f.kind() {
                HoloKind::Polynomial(p) => format!("polynomial(degree {})", p.degree()),
                HoloKind::ExpGraph { .. } => "exp_graph".into(),
                HoloKind::SinGraph { .. } => "sin_graph".into(),
                HoloKind::AffineProduct(a) => format!("affine_product({} factors)", a.len()),
                HoloKind::Custom { .. } => "custom".into(),
            };
            format!("zero_set[{kind}] on C^{}", f.n_vars())
        }
        Current::Potential { u } => {
            let kind = match u.kind() {
                PshKind::LogNormSq => "log_norm_sq",
                PshKind::NormSq => "norm_sq",
                PshKind::SmoothedLogMax { .. } => "smoothed_log",
                PshKind::LogModulus(_) => "log_modulus",
                PshKind::Custom(_) => "custom",
            };
            format!("potential[{kind}] on C^{}", u.n_vars())
        }
        Current::ConstForm(c) => format!("const_form(bidegree ({k},{k}), trace {}) on C^{}", fmt17(c.trace()), c.n(), k = c.k()),
        Current::NonnegSum(m) => {
            let parts: Vec<String> = m.iter().map(|(w, s)| format!("{}*{}", fmt17(*w), describe_current(s))).collect();
            format!("sum({})", parts.join(" + "))
        }
    }
}

pub(crate) fn timer() -> std::time::Instant {
    std::time::Instant::now()
}
