use crate::currents::Current;
use crate::error::{Error, Result};
use crate::experiments::report::{describe_current, timer, ExperimentReport, FrameStats};
use crate::experiments::{frame_mean, slice_profiles, tag, ROUNDOFF_SLACK};
use crate::geometry::{sample_grassmannian, Frame};
use crate::mass::grid::{fmt17, RadialGrid};
use crate::mass::profile::nu_profile;
use crate::rng;

/// Frames above this degenerate fraction mark the instance as suspicious.
const SUSPICIOUS_FRACTION: f64 = 0.01;

/// Compares `nu_T(r)` with the average of `nu_{T|L}(r)` over `n_frames`
/// random `q`-planes `L`. Exploratory runs report residuals without a
/// verdict.
pub fn crofton_check(
    t: &Current,
    q: usize,
    grid: &RadialGrid,
    n_frames: usize,
    budget: usize,
    seed: u64,
    exploratory: bool,
) -> Result<ExperimentReport> {
    if n_frames == 0 {
        return Err(Error::config("need at least one frame"));
    }
    let frames = sample_grassmannian(q, t.dim(), n_frames, rng::derive(seed, tag::FRAMES))?;
    crofton_check_frames(t, &frames, grid, budget, seed, exploratory)
}

/// [`crofton_check`] over explicitly given frames.
pub fn crofton_check_frames(
    t: &Current,
    frames: &[Frame],
    grid: &RadialGrid,
    budget: usize,
    seed: u64,
    exploratory: bool,
) -> Result<ExperimentReport> {
    let start = timer();
    if frames.is_empty() {
        return Err(Error::config("need at least one frame"));
    }
    let q = frames[0].sub_dim();
    if frames.iter().any(|f| f.sub_dim() != q || f.ambient_dim() != t.dim()) {
        return Err(Error::config("frames must share the same dimensions as the current"));
    }
    let lhs = nu_profile(t, grid, budget, rng::derive(seed, tag::AMBIENT))?;
    let slices = slice_profiles(t, frames, &vec![true; frames.len()], grid, budget, seed)?;
    let ok: Vec<_> = slices.iter().flatten().collect();
    let stats = FrameStats {
        sampled: frames.len(),
        degenerate: frames.len() - ok.len(),
    };
    let (rhs, rhs_se) = frame_mean(&ok, grid.len());

    let mut rep = ExperimentReport::new("crofton");
    rep.input("current", describe_current(t))
        .input("q", q)
        .input("frames", frames.len())
        .input("budget", budget)
        .input("seed", seed)
        .input("exploratory", exploratory)
        .grid_inputs(grid);
    rep.columns = ["r", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "residual", "stderr"]
        .map(String::from)
        .to_vec();
    let mut all_within = !ok.is_empty();
    let (mut max_res, mut max_z) = (0.0f64, 0.0f64);
    for (j, &r) in grid.points().iter().enumerate() {
        let res = lhs.values[j] - rhs[j];
        let se = (lhs.stderr[j].powi(2) + rhs_se[j].powi(2)).sqrt();
        if !(res.abs() <= 3.0 * se + ROUNDOFF_SLACK) {
            all_within = false;
        }
        max_res = max_res.max(res.abs());
        if se > 0.0 {
            max_z = max_z.max(res.abs() / se);
        }
        rep.rows.push(vec![r, lhs.values[j], lhs.stderr[j], rhs[j], rhs_se[j], res, se]);
    }
    rep.stat_f("max_abs_residual", max_res)
        .stat_f("max_residual_over_stderr", max_z)
        .stat_f("degenerate_fraction", stats.degenerate_fraction())
        .stat("suspicious", stats.degenerate_fraction() > SUSPICIOUS_FRACTION)
        .stat("lhs_method", lhs.method.tag())
        .stat("flagged_points", lhs.flagged.len())
        .stat("tolerance", format!("3 sigma + {}", fmt17(ROUNDOFF_SLACK)));
    rep.passed = if exploratory { None } else { Some(all_within) };
    rep.frames = Some(stats);
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}
