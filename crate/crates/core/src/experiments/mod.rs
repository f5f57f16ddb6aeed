//! Batch verification runs on concrete currents, each producing an
//! [`ExperimentReport`].

mod crofton;
mod directional;
mod ratios;
pub mod report;
mod survey;
mod theorem1;

pub use crofton::{crofton_check, crofton_check_frames};
pub use directional::directional_order_check;
pub use ratios::ratio_degeneracy_check;
pub use report::{describe_current, ExperimentReport, FrameStats};
pub use survey::slice_order_survey;
pub use theorem1::{theorem1_check, CapSpec};

use rayon::prelude::*;

use crate::currents::Current;
use crate::error::Result;
use crate::geometry::Frame;
use crate::mass::grid::{RadialGrid, RadialProfile};
use crate::mass::profile::slice_profile;
use crate::rng;

/// Seed domains shared by the experiments, so that runs with equal seeds
/// reuse the same ambient profile, frames and slice streams.
pub(crate) mod tag {
    pub const AMBIENT: u64 = 0x414d_4249;
    pub const FRAMES: u64 = 0x4652_414d;
    pub const SLICES: u64 = 0x534c_4943;
}

/// Absolute slack added to `3 sigma` comparisons so that exact instances
/// (zero standard error) pass despite round-off.
pub(crate) const ROUNDOFF_SLACK: f64 = 1e-9;

/// Slice profiles for the selected frames, in frame order; `None` marks a
/// degenerate slice. Frame `i` always uses the slice stream `(seed, i)`.
pub(crate) fn slice_profiles(
    t: &Current,
    frames: &[Frame],
    selected: &[bool],
    grid: &RadialGrid,
    budget: usize,
    seed: u64,
) -> Result<Vec<Option<RadialProfile>>> {
    let slice_seed = rng::derive(seed, tag::SLICES);
    let out: Vec<Result<Option<RadialProfile>>> = frames
        .par_iter()
        .zip(selected)
        .enumerate()
        .map(|(i, (f, &sel))| {
            if !sel {
                return Ok(None);
            }
            match slice_profile(t, f, grid, budget, rng::derive(slice_seed, i as u64)) {
                Ok(p) => Ok(Some(p)),
                Err(e) if e.is_degenerate() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    out.into_iter().collect()
}

/// Pointwise mean over frames and its standard error: the larger of the
/// between-frame spread `sd / sqrt(N)` and the pooled within-slice error.
pub fn frame_mean(profiles: &[&RadialProfile], len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = profiles.len() as f64;
    let mut mean = vec![f64::NAN; len];
    let mut se = vec![f64::NAN; len];
    if profiles.is_empty() {
        return (mean, se);
    }
    for j in 0..len {
        let m = profiles.iter().map(|p| p.values[j]).sum::<f64>() / n;
        let within = profiles.iter().map(|p| p.stderr[j].powi(2)).sum::<f64>().sqrt() / n;
        let between = if profiles.len() > 1 {
            (profiles.iter().map(|p| (p.values[j] - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        mean[j] = m;
        se[j] = within.max(between);
    }
    (mean, se)
}
