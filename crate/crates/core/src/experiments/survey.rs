use crate::currents::Current;
use crate::error::{Error, Result};
use crate::experiments::report::{describe_current, timer, ExperimentReport, FrameStats};
use crate::experiments::{slice_profiles, tag};
use crate::geometry::sample_grassmannian;
use crate::mass::grid::{fmt17, RadialGrid};
use crate::mass::profile::nu_profile;
use crate::orders::{estimate_order, OrderResult};
use crate::rng;

const MEDIAN_TOL: f64 = 0.2;
const FRAME_TOL: f64 = 0.3;
const FRAME_FRACTION: f64 = 0.9;

/// Distribution of slice orders `rho_L` against the order of `T`.
/// Degenerate slices and slices with an identically zero profile are
/// skipped and counted.
pub fn slice_order_survey(
    t: &Current,
    q: usize,
    n_frames: usize,
    grid: &RadialGrid,
    budget: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = timer();
    if n_frames == 0 {
        return Err(Error::config("need at least one frame"));
    }
    let ambient = nu_profile(t, grid, budget, rng::derive(seed, tag::AMBIENT))?;
    let rho = match estimate_order(&ambient)? {
        OrderResult::Finite(e) => e.rho,
        OrderResult::EmptyCurrent => return Err(Error::config("the current has an identically zero profile")),
    };
    let frames = sample_grassmannian(q, t.dim(), n_frames, rng::derive(seed, tag::FRAMES))?;
    let slices = slice_profiles(t, &frames, &vec![true; n_frames], grid, budget, seed)?;

    let mut rep = ExperimentReport::new("slice_order_survey");
    rep.input("current", describe_current(t))
        .input("q", q)
        .input("frames", n_frames)
        .input("budget", budget)
        .input("seed", seed)
        .grid_inputs(grid);
    rep.columns = ["frame", "rho_L", "deviation"].map(String::from).to_vec();
    let (mut degenerate, mut empty) = (0, 0);
    let mut devs = Vec::new();
    for (i, s) in slices.iter().enumerate() {
        let Some(p) = s else {
            degenerate += 1;
            continue;
        };
        match estimate_order(p)? {
            OrderResult::EmptyCurrent => empty += 1,
            OrderResult::Finite(e) => {
                let d = (e.rho - rho).abs();
                devs.push(d);
                rep.rows.push(vec![i as f64, e.rho, d]);
            }
        }
    }
    let used = devs.len();
    let (median, within) = if used == 0 {
        (f64::NAN, 0.0)
    } else {
        let mut sorted = devs.clone();
        sorted.sort_by(f64::total_cmp);
        let med = if used % 2 == 1 {
            sorted[used / 2]
        } else {
            0.5 * (sorted[used / 2 - 1] + sorted[used / 2])
        };
        (med, devs.iter().filter(|&&d| d <= FRAME_TOL).count() as f64 / used as f64)
    };
    rep.stat_f("rho", rho)
        .stat("frames_used", used)
        .stat("empty_slices", empty)
        .stat_f("median_deviation", median)
        .stat_f("fraction_within_0.3", within)
        .stat("rule", format!("median <= {} and fraction >= {}", fmt17(MEDIAN_TOL), fmt17(FRAME_FRACTION)));
    rep.passed = Some(used > 0 && median <= MEDIAN_TOL && within >= FRAME_FRACTION);
    rep.frames = Some(FrameStats {
        sampled: n_frames,
        degenerate,
    });
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}
