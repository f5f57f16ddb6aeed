use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use plurikit_core::experiments::{describe_current, frame_mean, FrameStats};
use plurikit_core::mass::grid::fmt17;
use plurikit_core::orders::probe_grid;
use plurikit_core::rng;
use plurikit_core::{
    build_chi, check_proximate_order, crofton_check, crofton_check_frames, directional_order_check, estimate_order,
    estimate_type, nu_profile, ratio_degeneracy_check, sample_grassmannian, slice_order_survey, slice_profile,
    theorem1_check, Error, ExperimentReport, OrderResult, ProximateOrder, RadialProfile, Result, TypeThresholds,
};

use crate::config::RunConfig;

pub const COMMANDS: [&str; 10] = [
    "profile",
    "slice",
    "order",
    "chi",
    "crofton",
    "theorem1",
    "ratios",
    "directional",
    "survey",
    "plot",
];

/// Frames above this degenerate fraction make the run exit with code 3.
pub const SATURATION: f64 = 0.5;

const FRAME_TAG: u64 = 0x434c_4946;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        Error::Numeric { .. } | Error::Domain(_) => 2,
        Error::DegenerateSlice(_) => 3,
    }
}

/// Runs `command` and writes its files into `out`. Returns the exit code.
pub fn run(command: &str, cfg: &RunConfig, out: &Path) -> Result<i32> {
    let start = Instant::now();
    let mut rep = match command {
        "profile" => profile(cfg)?,
        "slice" => slice(cfg, out)?,
        "order" => order(cfg)?,
        "chi" => chi(cfg)?,
        "crofton" => crofton(cfg)?,
        "theorem1" => {
            let g = cfg.grassmannian()?;
            theorem1_check(&cfg.current()?, &cfg.cap()?, &cfg.radial_grid()?, g.frames, cfg.mc.budget, cfg.mc.seed)?
        }
        "ratios" => {
            let seq = cfg
                .r_sequence
                .as_ref()
                .ok_or_else(|| Error::config("ratios needs r_sequence"))?;
            let alphas = cfg
                .alpha_set
                .as_ref()
                .ok_or_else(|| Error::config("ratios needs alpha_set"))?;
            let g = cfg.grassmannian()?;
            ratio_degeneracy_check(&cfg.current()?, seq, g.frames, alphas, cfg.mc.budget, cfg.mc.seed)?
        }
        "directional" => {
            let (d, d_prime) = cfg.regions()?;
            directional_order_check(
                &cfg.current()?,
                cfg.product_space()?,
                &d,
                &d_prime,
                &cfg.radial_grid()?,
                cfg.mc.budget,
                cfg.mc.seed,
            )?
        }
        "survey" => {
            let g = cfg.grassmannian()?;
            slice_order_survey(&cfg.current()?, g.q, g.frames, &cfg.radial_grid()?, cfg.mc.budget, cfg.mc.seed)?
        }
        "plot" => return plot(out).map(|_| 0),
        other => return Err(Error::config(format!("unknown command '{other}'"))),
    };
    if rep.wall_time_s == 0.0 {
        rep.wall_time_s = start.elapsed().as_secs_f64();
    }
    rep.write_dir(out)?;
    write_file(&out.join("config.json"), &cfg.to_json())?;
    Ok(match rep.frames {
        Some(f) if f.degenerate_fraction() > SATURATION => 3,
        _ => 0,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::config(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
}

fn base_report(name: &str, cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(name);
    rep.input("current", describe_current(&cfg.current()?))
        .input("budget", cfg.mc.budget)
        .input("seed", cfg.mc.seed)
        .grid_inputs(&cfg.radial_grid()?);
    Ok(rep)
}

fn profile_rows(rep: &mut ExperimentReport, p: &RadialProfile) {
    rep.columns = ["r", "value", "stderr"].map(String::from).to_vec();
    rep.rows = (0..p.len()).map(|i| vec![p.radii()[i], p.values[i], p.stderr[i]]).collect();
}

fn profile(cfg: &RunConfig) -> Result<ExperimentReport> {
    let p = nu_profile(&cfg.current()?, &cfg.radial_grid()?, cfg.mc.budget, cfg.mc.seed)?;
    let mut rep = base_report("profile", cfg)?;
    profile_rows(&mut rep, &p);
    rep.stat("method", p.method.tag())
        .stat_f("value_min", p.values.iter().copied().fold(f64::INFINITY, f64::min))
        .stat_f("value_max", p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    Ok(rep)
}

/// Per-frame slice profiles under `out/slices/` and their frame average in
/// the report.
fn slice(cfg: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    let t = cfg.current()?;
    let grid = cfg.radial_grid()?;
    let g = cfg.grassmannian()?;
    let frames = match cfg.fixed_frames()? {
        Some(f) => f,
        None => sample_grassmannian(g.q, t.dim(), g.frames, rng::derive(cfg.mc.seed, FRAME_TAG))?,
    };
    let mut ok = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        match slice_profile(&t, f, &grid, cfg.mc.budget, rng::derive(cfg.mc.seed, i as u64)) {
            Ok(p) => {
                write_file(&out.join("slices").join(format!("slice_{i:04}.csv")), &p.to_csv())?;
                ok.push(p);
            }
            Err(e) if e.is_degenerate() => {}
            Err(e) => return Err(e),
        }
    }
    let refs: Vec<&RadialProfile> = ok.iter().collect();
    let (mean, se) = frame_mean(&refs, grid.len());
    let mut rep = base_report("slice", cfg)?;
    rep.input("q", frames[0].sub_dim()).input("frames", frames.len());
    rep.columns = ["r", "mean", "stderr"].map(String::from).to_vec();
    rep.rows = (0..grid.len()).map(|i| vec![grid.points()[i], mean[i], se[i]]).collect();
    rep.frames = Some(FrameStats {
        sampled: frames.len(),
        degenerate: frames.len() - ok.len(),
    });
    Ok(rep)
}

fn order(cfg: &RunConfig) -> Result<ExperimentReport> {
    let p = nu_profile(&cfg.current()?, &cfg.radial_grid()?, cfg.mc.budget, cfg.mc.seed)?;
    let mut rep = base_report("order", cfg)?;
    profile_rows(&mut rep, &p);
    let est = estimate_order(&p)?;
    for (k, v) in est.key_values() {
        rep.stat(&k, v);
    }
    match est {
        OrderResult::Finite(e) => {
            let ty = estimate_type(&p, &ProximateOrder::constant(e.rho)?, TypeThresholds::default())?;
            for (k, v) in ty.key_values() {
                rep.stat(&k, v);
            }
        }
        OrderResult::EmptyCurrent => {
            rep.stat("type", "not_applicable");
        }
    }
    Ok(rep)
}

/// Tabulates `chi` built from `rho + decay / (1 + r)` and checks that it is
/// a proximate order.
fn chi(cfg: &RunConfig) -> Result<ExperimentReport> {
    let spec = cfg.chi.as_ref().ok_or_else(|| Error::config("chi needs a chi block"))?;
    let (r0, k) = (spec.rho, spec.decay);
    let rho = ProximateOrder::new(
        Arc::new(move |r: f64| r0 + k / (1.0 + r)),
        Some(Arc::new(move |r: f64| -k / (1.0 + r).powi(2))),
        r0,
    )?;
    let chi = build_chi(&rho);
    let grid = cfg.radial_grid()?;
    let probe_max = spec.probe_max.unwrap_or(grid.r_max());
    let probes = probe_grid(grid.r_min(), probe_max, grid.len().max(2))?;
    let check = check_proximate_order(&chi, &probes)?;

    let mut rep = ExperimentReport::new("chi");
    rep.input("rho", fmt17(r0))
        .input("decay", fmt17(k))
        .input("probe_max", fmt17(probe_max))
        .grid_inputs(&grid);
    rep.columns = ["r", "chi", "chi_derivative", "r_log_r_chi_derivative"]
        .map(String::from)
        .to_vec();
    for &r in grid.points() {
        rep.rows
            .push(vec![r, chi.value(r)?, chi.derivative(r)?, chi.log_derivative(r)?]);
    }
    rep.stat_f("chi_at_1", chi.value(1.0)?)
        .stat_f("rho_at_1_plus_inv_e", rho.value(1.0)? + (-1.0f64).exp())
        .stat_f("gap_end", check.gap_end)
        .stat_f("log_derivative_end", check.log_derivative_end)
        .stat("probes_outside_tolerance", check.failing.len());
    rep.passed = Some(check.passed);
    Ok(rep)
}

fn crofton(cfg: &RunConfig) -> Result<ExperimentReport> {
    let t = cfg.current()?;
    let grid = cfg.radial_grid()?;
    match cfg.fixed_frames()? {
        Some(frames) => crofton_check_frames(&t, &frames, &grid, cfg.mc.budget, cfg.mc.seed, cfg.exploratory),
        None => {
            let g = cfg.grassmannian()?;
            crofton_check(&t, g.q, &grid, g.frames, cfg.mc.budget, cfg.mc.seed, cfg.exploratory)
        }
    }
}

/// Writes `plot.py` next to the CSVs already in `out`. The script draws
/// every numeric column against the first one and saves one PNG per CSV.
fn plot(out: &Path) -> Result<()> {
    let mut csvs = Vec::new();
    collect_csvs(out, out, &mut csvs);
    csvs.sort();
    if csvs.is_empty() {
        csvs.push("report.csv".to_string());
    }
    let mut s = String::from(PLOT_HEADER);
    s.push_str("CSVS = [\n");
    for c in &csvs {
        let _ = writeln!(s, "    {c:?},");
    }
    s.push_str("]\n");
    s.push_str(PLOT_BODY);
    write_file(&out.join("plot.py"), &s)
}

fn collect_csvs(root: &Path, dir: &Path, acc: &mut Vec<String>) {
    let Ok(entries) = fs::read_dir(dir) else { return };
    for e in entries.flatten() {
        let p = e.path();
        if p.is_dir() {
            collect_csvs(root, &p, acc);
        } else if p.extension().is_some_and(|x| x == "csv") {
            if let Ok(rel) = p.strip_prefix(root) {
                acc.push(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
}

const PLOT_HEADER: &str = "\
# Plots every CSV below: numeric columns against the first column, log-log
# where all values are positive. Run from this directory.
import csv
import os

import matplotlib

matplotlib.use(\"Agg\")
import matplotlib.pyplot as plt

";

const PLOT_BODY: &str = "

def load(path):
    with open(path, newline=\"\") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = [float(r[j]) for r in data]
        except ValueError:
            pass
    return header, cols


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    for rel in CSVS:
        path = os.path.join(here, rel)
        if not os.path.exists(path):
            continue
        header, cols = load(path)
        x = cols.get(header[0])
        if x is None:
            continue
        fig, ax = plt.subplots()
        for name in header[1:]:
            if name in cols and not name.endswith(\"stderr\"):
                ax.plot(x, cols[name], marker=\".\", label=name)
        values = [v for name in header[1:] if name in cols for v in cols[name]]
        if all(v > 0 for v in x):
            ax.set_xscale(\"log\")
        if values and all(v > 0 for v in values):
            ax.set_yscale(\"log\")
        ax.set_xlabel(header[0])
        ax.legend()
        ax.set_title(rel)
        fig.savefig(os.path.splitext(path)[0] + \".png\", dpi=120)
        plt.close(fig)


if __name__ == \"__main__\":
    main()
";
