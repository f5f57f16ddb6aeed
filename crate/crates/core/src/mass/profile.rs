use rand::Rng;
use rayon::prelude::*;

use crate::currents::{restrict_current, ConstForm, Current};
use crate::error::Result;
use crate::forms::{CMatrix, WedgeBasis};
use crate::geometry::Frame;
use crate::mass::grid::{ProfileMethod, RadialGrid, RadialProfile};
use crate::mass::spherical::{check_budget, lelong_jensen_profile};
use crate::mass::zeros::zero_count_profile;
use crate::rng;
use crate::stats::mc_moments;

/// `nu_T(r) = r^{-2p} int_{B(r)} T ^ beta^p` on the grid.
///
/// Zero sets and potentials use the spherical-mean form of the
/// Lelong-Jensen identity (exact root counting for zero sets in `C^1`);
/// constant forms use a hit-or-miss volume integral; sums are combined
/// member-wise.
pub fn nu_profile(t: &Current, grid: &RadialGrid, budget: usize, seed: u64) -> Result<RadialProfile> {
    check_budget(budget)?;
    match t {
        Current::ZeroSet { f } if f.n_vars() == 1 => zero_count_profile(f, grid),
        Current::ZeroSet { f } => lelong_jensen_profile(|z| f.log_abs_sq(z), f.n_vars(), grid, budget, seed),
        Current::Potential { u } => lelong_jensen_profile(|z| u.value(z), u.n_vars(), grid, budget, seed),
        Current::ConstForm(c) => const_form_mc_profile(c, grid, budget, seed),
        Current::NonnegSum(members) => {
            let parts = members
                .iter()
                .enumerate()
                .map(|(i, (w, s))| {
                    let member_seed = rng::derive(rng::derive(seed, rng::tag::MEMBER), i as u64);
                    Ok((*w, nu_profile(s, grid, budget, member_seed)?))
                })
                .collect::<Result<Vec<_>>>()?;
            RadialProfile::weighted_sum(&parts)
        }
    }
}

/// `nu_{T|L}` for the subspace spanned by `frame`.
pub fn slice_profile(t: &Current, frame: &Frame, grid: &RadialGrid, budget: usize, seed: u64) -> Result<RadialProfile> {
    nu_profile(&restrict_current(t, frame)?, grid, budget, seed)
}

/// Closed form `tr(H) (n-k)!/n! r^{2k}`.
pub fn const_form_exact_profile(c: &ConstForm, grid: &RadialGrid) -> Result<RadialProfile> {
    RadialProfile::from_fn(grid.clone(), |r| c.nu_exact(r))
}

/// Coefficient `c` of `T ^ beta^{n-k} = c vol`.
pub(crate) fn beta_pairing(c: &ConstForm) -> f64 {
    let n = c.n();
    let basis = WedgeBasis::new(n, c.k());
    let id = CMatrix::identity(n, n);
    let factors: Vec<&CMatrix> = (0..n - c.k()).map(|_| &id).collect();
    basis.top_coefficient(c.coefficients(), &factors)
}

/// Hit-or-miss estimate of `int_{B(r)} c vol` from uniform points of the
/// cube `[-r, r]^{2n}`, where `vol = Lebesgue / pi^n`.
fn const_form_mc_profile(c: &ConstForm, grid: &RadialGrid, budget: usize, seed: u64) -> Result<RadialProfile> {
    let n = c.n();
    let coef = beta_pairing(c);
    let base = rng::derive(seed, rng::tag::CUBE);
    let est: Vec<Result<(f64, f64)>> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let m = mc_moments(budget, rng::derive(base, i as u64), |g| {
                let mut s = 0.0;
                for _ in 0..2 * n {
                    let x: f64 = g.random_range(-1.0..1.0);
                    s += x * x;
                }
                Ok(if s < 1.0 { 1.0 } else { 0.0 })
            })?;
            // (2r)^{2n} / pi^n / r^{2(n-k)} = 4^n r^{2k} / pi^n
            let scale = coef * 4f64.powi(n as i32) * r.powi(2 * c.k() as i32) / std::f64::consts::PI.powi(n as i32);
            Ok((m.mean * scale, m.stderr() * scale.abs()))
        })
        .collect();
    let est = est.into_iter().collect::<Result<Vec<_>>>()?;
    let values = est.iter().map(|e| e.0.max(0.0)).collect();
    let stderr = est.iter().map(|e| e.1).collect();
    RadialProfile::new(grid.clone(), values, stderr, ProfileMethod::McVolume)
}
