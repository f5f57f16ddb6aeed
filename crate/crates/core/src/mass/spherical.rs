//! Spherical means and the Lelong-Jensen derivative engine.
//!
//! For a plurisubharmonic `u` with spherical mean `lambda(r)` over `S(r)`,
//! the normalized mass of `dd^c u` in the ball is `nu(r) = (r/2) lambda'(r)`,
//! i.e. half the slope of `lambda` against `log r`. The slope at each grid
//! radius is taken from a 5-point stencil in `log r` evaluated on a shared
//! set of random directions, so per-direction differences `u_k - u_0` form
//! i.i.d. samples of the estimator and its standard error is honest.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{unit_direction, C64};
use crate::mass::grid::{ProfileMethod, RadialGrid, RadialProfile};
use crate::rng;
use crate::stats::{mc_moments_with, Moments};

/// Largest ambient dimension handled by the stack scratch buffers.
pub const MAX_DIM: usize = 16;

/// Log-radius offsets of the stencil, in units of [`STENCIL_STEP`].
const STENCIL: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
pub const STENCIL_STEP: f64 = 0.02;

/// Smallest Monte Carlo budget accepted by profile routines.
pub const MIN_BUDGET: usize = 1000;

pub(crate) fn check_budget(budget: usize) -> Result<()> {
    if budget < MIN_BUDGET {
        return Err(Error::config(format!("budget must be at least {MIN_BUDGET}, got {budget}")));
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::config(format!("dimension must be in 1..={MAX_DIM}, got {n}")));
    }
    Ok(())
}

/// Monte Carlo mean of `u` over the sphere of radius `r` in `C^n`, with its
/// standard error.
pub fn spherical_mean<U>(u: U, n: usize, r: f64, budget: usize, seed: u64) -> Result<(f64, f64)>
where
    U: Fn(&[C64]) -> f64 + Sync,
{
    check_budget(budget)?;
    check_dim(n)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::config(format!("radius must be positive, got {r}")));
    }
    let m = mc_moments_with(
        budget,
        rng::derive(seed, rng::tag::SPHERE),
        || [C64::new(0.0, 0.0); MAX_DIM],
        |g, buf| {
            let z = &mut buf[..n];
            unit_direction(g, z);
            z.iter_mut().for_each(|c| *c *= r);
            let v = u(z);
            if !v.is_finite() {
                return Err(Error::numeric("non-finite potential value", format!("|z| = {r}")));
            }
            Ok(v)
        },
    )?;
    Ok((m.mean, m.stderr()))
}

/// Per-sample state drawn once and re-evaluated at every stencil radius.
pub(crate) trait SlopeSampler: Sync {
    /// Length of the state vector.
    fn state_dim(&self) -> usize;
    fn draw(&self, g: &mut ChaCha8Rng, state: &mut [C64]);
    /// `u` at the point described by `state` with radial scale `rho`.
    fn eval(&self, state: &[C64], rho: f64, scratch: &mut [C64]) -> f64;
}

/// Weighted least-squares slope coefficients `c_k` in `log r`, with
/// `sum c_k = 0`, from per-stencil-point variances.
fn slope_coefficients(var: &[f64; 5], scale: f64) -> [f64; 5] {
    // variances at round-off level carry no information and would give
    // arbitrary, asymmetric weights
    let floor = 1e-20 * scale.max(f64::MIN_POSITIVE);
    let w: [f64; 5] = if var.iter().all(|&v| v > floor && v.is_finite()) {
        var.map(|v| 1.0 / v)
    } else {
        [1.0; 5]
    };
    let t = STENCIL.map(|s| s * STENCIL_STEP);
    let sw: f64 = w.iter().sum();
    let tbar: f64 = w.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&t).map(|(a, b)| a * (b - tbar).powi(2)).sum();
    let mut c = [0.0; 5];
    for k in 0..5 {
        c[k] = w[k] * (t[k] - tbar) / sxx;
    }
    c
}

fn stencil_values<S: SlopeSampler + ?Sized>(
    s: &S,
    state: &[C64],
    r: f64,
    scratch: &mut [C64],
) -> Result<[f64; 5]> {
    let mut u = [0.0; 5];
    for k in 0..5 {
        let rho = r * (STENCIL[k] * STENCIL_STEP).exp();
        u[k] = s.eval(state, rho, scratch);
        if !u[k].is_finite() {
            return Err(Error::numeric(
                "non-finite potential value (evaluator overflow or exact zero)",
                format!("r = {rho}"),
            ));
        }
    }
    Ok(u)
}

/// Estimates `(r/2) lambda'(r)` at every radius: `(mean, stderr)` pairs.
pub(crate) fn slope_estimates<S: SlopeSampler + ?Sized>(
    sampler: &S,
    radii: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_budget(budget)?;
    let dim = sampler.state_dim();
    check_dim(dim)?;
    let main = rng::derive(seed, rng::tag::RADIUS);
    let pilot = rng::derive(seed, rng::tag::PILOT);
    radii
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            // pilot pass for the regression weights
            let mut g = rng::stream(pilot, i as u64);
            let mut state = [C64::new(0.0, 0.0); MAX_DIM];
            let mut scratch = [C64::new(0.0, 0.0); MAX_DIM];
            let mut mom = [Moments::default(); 5];
            for _ in 0..rng::CHUNK.min(budget) {
                sampler.draw(&mut g, &mut state[..dim]);
                let u = stencil_values(sampler, &state[..dim], r, &mut scratch)?;
                for k in 0..5 {
                    mom[k].push(u[k]);
                }
            }
            let scale = mom.iter().map(|m| m.mean * m.mean).fold(0.0, f64::max);
            let c = slope_coefficients(&mom.map(|m| m.variance()), scale);
            let m = mc_moments_with(
                budget,
                rng::derive(main, i as u64),
                || ([C64::new(0.0, 0.0); MAX_DIM], [C64::new(0.0, 0.0); MAX_DIM]),
                |g, (state, scratch)| {
                    sampler.draw(g, &mut state[..dim]);
                    let u = stencil_values(sampler, &state[..dim], r, scratch)?;
                    Ok(0.5 * (0..5).map(|k| c[k] * (u[k] - u[2])).sum::<f64>())
                },
            )?;
            Ok((m.mean, m.stderr()))
        })
        .collect()
}

/// Clamps negative estimates to zero, flagging those beyond `3 sigma`.
pub(crate) fn profile_from_estimates(
    grid: &RadialGrid,
    est: &[(f64, f64)],
    scale: f64,
    method: ProfileMethod,
) -> Result<RadialProfile> {
    let mut flagged = Vec::new();
    let mut values = Vec::with_capacity(est.len());
    let mut stderr = Vec::with_capacity(est.len());
    for (i, &(m, s)) in est.iter().enumerate() {
        let (m, s) = (m * scale, s * scale);
        if m < -3.0 * s {
            flagged.push(i);
        }
        values.push(m.max(0.0));
        stderr.push(s);
    }
    RadialProfile::with_flags(grid.clone(), values, stderr, method, flagged)
}

/// Uniform directions on `S^{2n-1}`, evaluating `u(rho * omega)`.
pub(crate) struct SphereSampler<U> {
    pub n: usize,
    pub u: U,
}

impl<U: Fn(&[C64]) -> f64 + Sync> SlopeSampler for SphereSampler<U> {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn draw(&self, g: &mut ChaCha8Rng, state: &mut [C64]) {
        unit_direction(g, state);
    }

    fn eval(&self, state: &[C64], rho: f64, scratch: &mut [C64]) -> f64 {
        let z = &mut scratch[..self.n];
        for (a, b) in z.iter_mut().zip(state) {
            *a = b * rho;
        }
        (self.u)(z)
    }
}

/// `nu(r) = (r/2) lambda'(r)` for the potential `u` on `C^n`.
pub fn lelong_jensen_profile<U>(u: U, n: usize, grid: &RadialGrid, budget: usize, seed: u64) -> Result<RadialProfile>
where
    U: Fn(&[C64]) -> f64 + Sync,
{
    let s = SphereSampler { n, u };
    let est = slope_estimates(&s, grid.points(), budget, seed)?;
    profile_from_estimates(grid, &est, 1.0, ProfileMethod::SphericalMean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm_sqr;

    #[test]
    fn mean_of_log_norm_is_exact() {
        let (m, s) = spherical_mean(|z| norm_sqr(z).ln(), 3, 2.5, 2000, 1).unwrap();
        assert!((m - 2.0 * 2.5f64.ln()).abs() < 1e-12);
        assert!(s < 1e-12);
    }

    #[test]
    fn mean_of_real_part_vanishes() {
        let (m, s) = spherical_mean(|z| z[0].re, 2, 3.0, 20_000, 2).unwrap();
        assert!(m.abs() <= 3.0 * s, "{m} {s}");
    }

    #[test]
    fn mean_of_norm_squared_is_constant() {
        let (m, _) = spherical_mean(norm_sqr, 2, 1.7, 1000, 3).unwrap();
        assert!((m - 1.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn budget_and_radius_validation() {
        assert!(spherical_mean(norm_sqr, 2, 1.0, 10, 3).is_err());
        assert!(spherical_mean(norm_sqr, 2, -1.0, 1000, 3).is_err());
    }

    #[test]
    fn slope_coefficients_differentiate_linear_data() {
        let c = slope_coefficients(&[1.0, 2.0, 0.5, 1.0, 3.0], 1.0);
        let t = STENCIL.map(|s| s * STENCIL_STEP);
        let slope: f64 = (0..5).map(|k| c[k] * (7.0 + 3.0 * t[k])).sum();
        assert!((slope - 3.0).abs() < 1e-10);
        assert!(c.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn calibration_potential_has_unit_mass() {
        let g = RadialGrid::new(1.0, 100.0, 6).unwrap();
        let p = lelong_jensen_profile(|z| norm_sqr(z).ln(), 2, &g, 1000, 4).unwrap();
        for v in &p.values {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn norm_squared_potential_has_mass_r_squared() {
        // dd^c |z|^2 = beta, nu(r) = r^2
        let g = RadialGrid::new(0.5, 4.0, 5).unwrap();
        let p = lelong_jensen_profile(norm_sqr, 2, &g, 1000, 5).unwrap();
        for (v, r) in p.values.iter().zip(g.points()) {
            // stencil bias for r^2 is about (68/45) h^2 relative
            assert!((v / (r * r) - 1.0).abs() < 2e-3, "{v} {r}");
        }
    }
}
