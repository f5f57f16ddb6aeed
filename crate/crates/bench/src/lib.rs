//! Fixed workloads for the kernel benchmarks in `benches/kernels.rs`.

use plurikit_core::{bundled, Current, Frame, RadialGrid, Result};

pub const SEED: u64 = 0x6265_6e63;

/// Grid used by every profile benchmark.
pub fn grid() -> Result<RadialGrid> {
    RadialGrid::new(1.0, 100.0, 9)
}

/// Named currents on `C^2` covering each profile method.
pub fn currents() -> Result<Vec<(&'static str, Current)>> {
    Ok(vec![
        ("hyperplane", bundled::hyperplane(2)?),
        ("cubic", bundled::cubic_curve()?),
        ("exp_curve", bundled::exp_curve()?),
        ("kahler", bundled::kahler(2)?),
        ("smoothed_potential", bundled::smoothed_hyperplane_potential(2)?),
    ])
}

/// A line in general position for slice benchmarks.
pub fn generic_line() -> Result<Frame> {
    Ok(plurikit_core::sample_grassmannian(1, 2, 1, SEED)?.remove(0))
}
