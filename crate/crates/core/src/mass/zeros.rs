//! Zero counting in discs by the argument principle.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::C64;
use crate::holo::{HoloFunction, ScaledEval};
use crate::mass::grid::{ProfileMethod, RadialGrid, RadialProfile};

/// Default cap on contour evaluations per winding pass.
pub const DEFAULT_CONTOUR_BUDGET: usize = 1 << 24;

const INITIAL_POINTS: usize = 64;
const MAX_PERTURBATIONS: usize = 8;
const NEAR_ZERO: f64 = 1e-9;
/// Profiles are evaluated just outside each grid radius so that a zero
/// sitting exactly on `|w| = r` is counted (right-continuity).
pub const RIGHT_CONTINUITY: f64 = 1e-9;

#[derive(Clone, Copy)]
struct ContourPoint {
    theta: f64,
    phase: f64,
    /// d(arg f)/d(theta)
    dphase: f64,
}

enum Pass {
    Winding(f64),
    /// A zero lies (numerically) on the contour.
    NearZero,
}

fn wrap(d: f64) -> f64 {
    let mut d = d % TAU;
    if d > PI {
        d -= TAU;
    } else if d < -PI {
        d += TAU;
    }
    d
}

fn contour_point<F: Fn(C64) -> ScaledEval>(f: &F, r: f64, theta: f64) -> Option<ContourPoint> {
    let w = C64::from_polar(r, theta);
    let e = f(w);
    let v = e.value;
    let g = e.grad[0];
    let local = v.norm().max(r * g.norm());
    if !(v.norm() > NEAR_ZERO * local) || !local.is_finite() {
        return None;
    }
    Some(ContourPoint {
        theta,
        phase: v.arg(),
        dphase: (w * g / v).re,
    })
}

/// Total change of `arg f` around `|w| = r` with segments accepted once the
/// phase step and the derivative bound are both below `thr`.
fn winding_pass<F: Fn(C64) -> ScaledEval>(f: &F, r: f64, thr: f64, cap: usize) -> Result<Pass> {
    let mut first = Vec::with_capacity(INITIAL_POINTS + 1);
    for j in 0..=INITIAL_POINTS {
        let theta = TAU * j as f64 / INITIAL_POINTS as f64;
        match contour_point(f, r, theta) {
            Some(p) => first.push(p),
            None => return Ok(Pass::NearZero),
        }
    }
    let mut evals = first.len();
    let mut total = 0.0;
    let mut stack: Vec<(ContourPoint, ContourPoint)> = Vec::new();
    for pair in first.windows(2).rev() {
        stack.push((pair[0], pair[1]));
    }
    while let Some((a, b)) = stack.pop() {
        let d = wrap(b.phase - a.phase);
        let width = b.theta - a.theta;
        if d.abs() <= thr && a.dphase.abs().max(b.dphase.abs()) * width <= 2.0 * thr {
            total += d;
            continue;
        }
        if evals >= cap || width < 1e-14 {
            return Err(Error::numeric(
                "winding number did not stabilize within the contour budget",
                format!("r = {r}"),
            ));
        }
        let m = match contour_point(f, r, 0.5 * (a.theta + b.theta)) {
            Some(m) => m,
            None => return Ok(Pass::NearZero),
        };
        evals += 1;
        stack.push((m, b));
        stack.push((a, m));
    }
    Ok(Pass::Winding(total / TAU))
}

/// Winding number at radius `r`, refined until two successive thresholds
/// agree on the same integer. `None` when a zero sits on the contour.
fn stable_winding<F: Fn(C64) -> ScaledEval>(f: &F, r: f64, cap: usize) -> Result<Option<i64>> {
    let mut thr = PI / 4.0;
    let mut prev: Option<i64> = None;
    loop {
        let w = match winding_pass(f, r, thr, cap)? {
            Pass::NearZero => return Ok(None),
            Pass::Winding(w) => w,
        };
        let k = w.round();
        let integral = (w - k).abs() < 0.05;
        if integral && prev == Some(k as i64) {
            return Ok(Some(k as i64));
        }
        prev = if integral { Some(k as i64) } else { None };
        thr *= 0.5;
        if thr < 1e-4 {
            return Err(Error::numeric(
                "winding number did not stabilize under refinement",
                format!("r = {r}"),
            ));
        }
    }
}

/// Zeros (with multiplicity) of a one-variable function given by its
/// log-scaled evaluator, inside `|w| < r`.
pub(crate) fn count_zeros_with<F: Fn(C64) -> ScaledEval>(f: F, r: f64, contour_budget: usize) -> Result<usize> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::config(format!("radius must be positive, got {r}")));
    }
    let mut rr = r;
    for _ in 0..=MAX_PERTURBATIONS {
        if let Some(k) = stable_winding(&f, rr, contour_budget.max(2 * INITIAL_POINTS))? {
            if k < 0 {
                return Err(Error::numeric("negative winding for an entire function", format!("r = {r}")));
            }
            return Ok(k as usize);
        }
        rr *= 1.0 + 1e-6;
    }
    Err(Error::numeric(
        "zero stays on the contour after radius perturbations",
        format!("r = {r}"),
    ))
}

/// Zeros of `f` (with multiplicity) in the open disc `|w| < r`.
pub fn count_zeros_disc(f: &HoloFunction, r: f64, contour_budget: usize) -> Result<usize> {
    if f.n_vars() != 1 {
        return Err(Error::config(format!(
            "zero counting needs a function of one variable, got {}",
            f.n_vars()
        )));
    }
    count_zeros_with(|w| f.eval_scaled(&[w]), r, contour_budget)
}

/// Root-count profile: `nu(r)` for the zero set of a one-variable function.
pub fn zero_count_profile(f: &HoloFunction, grid: &RadialGrid) -> Result<RadialProfile> {
    let counts: Vec<Result<f64>> = grid
        .points()
        .par_iter()
        .map(|&r| count_zeros_disc(f, r * (1.0 + RIGHT_CONTINUITY), DEFAULT_CONTOUR_BUDGET).map(|k| k as f64))
        .collect();
    let values = counts.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = values.len();
    RadialProfile::new(grid.clone(), values, vec![0.0; n], ProfileMethod::ExactCount)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::{AffineForm, PolynomialMap};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn monomial(d: u32) -> HoloFunction {
        HoloFunction::polynomial(PolynomialMap::new(1, vec![(vec![d], c(1.0, 0.0))]).unwrap()).unwrap()
    }

    #[test]
    fn powers_have_full_multiplicity() {
        for d in 0..6 {
            for r in [0.1, 1.0, 50.0] {
                assert_eq!(count_zeros_disc(&monomial(d), r, DEFAULT_CONTOUR_BUDGET).unwrap(), d as usize);
            }
        }
    }

    #[test]
    fn two_roots_split_by_radius() {
        let f = HoloFunction::affine_product(vec![
            AffineForm { coeffs: vec![c(1.0, 0.0)], constant: c(-1.0, 0.0) },
            AffineForm { coeffs: vec![c(1.0, 0.0)], constant: c(2.0, 0.0) },
        ])
        .unwrap();
        assert_eq!(count_zeros_disc(&f, 1.5, DEFAULT_CONTOUR_BUDGET).unwrap(), 1);
        assert_eq!(count_zeros_disc(&f, 2.5, DEFAULT_CONTOUR_BUDGET).unwrap(), 2);
    }

    #[test]
    fn exponential_lattice() {
        // e^w - 1 through a user evaluator; zeros at 2 pi i k
        let f = HoloFunction::custom(
            1,
            std::sync::Arc::new(|w: &[C64]| (w[0].exp() - 1.0, vec![w[0].exp()])),
        )
        .unwrap();
        assert_eq!(count_zeros_disc(&f, 7.0, DEFAULT_CONTOUR_BUDGET).unwrap(), 3);
        assert_eq!(count_zeros_disc(&f, 13.0, DEFAULT_CONTOUR_BUDGET).unwrap(), 5);
    }

    #[test]
    fn zero_on_contour_is_handled_by_perturbation() {
        let f = HoloFunction::affine_product(vec![AffineForm { coeffs: vec![c(1.0, 0.0)], constant: c(-1.0, 0.0) }])
            .unwrap();
        // the root w = 1 sits on |w| = 1; the perturbed radius counts it
        assert_eq!(count_zeros_disc(&f, 1.0, DEFAULT_CONTOUR_BUDGET).unwrap(), 1);
    }

    #[test]
    fn exponential_graph_slices() {
        // z2 - e^{z1} on span{(1,0)} is -e^w: no zeros
        let f = HoloFunction::exp_graph(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let g = RadialGrid::new(0.5, 200.0, 8).unwrap();
        let p = zero_count_profile(&f, &g).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        // on span{(0,1)} it is w - 1: one zero from r = 1 on
        let h = HoloFunction::exp_graph(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).unwrap();
        let g = RadialGrid::new(0.25, 4.0, 5).unwrap();
        let p = zero_count_profile(&h, &g).unwrap();
        assert_eq!(p.values, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn large_radius_exponential_slice_matches_zero_density() {
        // a w - e^{w}: zeros near Re w = log|a w|, spaced 2 pi apart in Im w;
        // in |w| < r roughly r / pi of them
        let f = HoloFunction::exp_graph(vec![c(0.5, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let k = count_zeros_disc(&f, 1000.0, DEFAULT_CONTOUR_BUDGET).unwrap() as f64;
        assert!((k - 1000.0 / PI).abs() < 6.0, "{k}");
    }

    #[test]
    fn budget_exhaustion_is_a_numeric_failure() {
        let f = HoloFunction::exp_graph(vec![c(0.5, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        assert!(matches!(count_zeros_disc(&f, 1000.0, 200), Err(Error::Numeric { .. })));
    }
}
