//! Directional mass profiles on `C^n x C^m`:
//!
//! `N(r) = r^{-2(n-k)} int_{B_n(r) x D} T ^ beta_z^{n-k} ^ beta_t^m` and
//! `M(r) = r^{-2(m-k)} int_{B x B_m(r)} T ^ beta_z^n ^ beta_t^{m-k}`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::currents::{ConstForm, Current, ProductSpace, PshFunction};
use crate::error::{Error, Result};
use crate::forms::{CMatrix, WedgeBasis};
use crate::geometry::{unit_direction, C64};
use crate::holo::HoloFunction;
use crate::mass::grid::{DirectionalProfile, Direction, ProfileMethod, RadialGrid, RadialProfile};
use crate::mass::region::RegionSpec;
use crate::mass::spherical::{check_budget, slope_estimates, SlopeSampler, MAX_DIM};
use crate::mass::zeros::{count_zeros_with, DEFAULT_CONTOUR_BUDGET, RIGHT_CONTINUITY};
use crate::rng;
use crate::stats::mc_moments_with;

const ZERO: C64 = C64::new(0.0, 0.0);
const PI: f64 = std::f64::consts::PI;

/// Coordinates of the block where the ball grows (`radial`) and of the block
/// carrying the fixed region.
#[derive(Debug, Clone)]
struct Blocks {
    total: usize,
    radial: Vec<usize>,
    fixed: Vec<usize>,
}

impl Blocks {
    fn new(space: ProductSpace, dir: Direction) -> Self {
        let (radial, fixed) = match dir {
            Direction::ZBlock => (space.z_coords(), space.t_coords()),
            Direction::TBlock => (space.t_coords(), space.z_coords()),
        };
        Blocks {
            total: space.total(),
            radial,
            fixed,
        }
    }

    fn a(&self) -> usize {
        self.radial.len()
    }

    fn b(&self) -> usize {
        self.fixed.len()
    }

    fn place(&self, radial: &[C64], fixed: &[C64], out: &mut [C64]) {
        for (&i, v) in self.radial.iter().zip(radial) {
            out[i] = *v;
        }
        for (&i, v) in self.fixed.iter().zip(fixed) {
            out[i] = *v;
        }
    }

    fn kahler(&self, coords: &[usize]) -> CMatrix {
        let mut m = CMatrix::zeros(self.total, self.total);
        for &i in coords {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `dd^c log |x_R|^2` on the radial block.
    fn log_kahler(&self, x: &[C64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.total, self.total);
        let s: f64 = self.radial.iter().map(|&i| x[i].norm_sqr()).sum();
        for &j in &self.radial {
            for &k in &self.radial {
                let d = if j == k { 1.0 / s } else { 0.0 };
                m[(j, k)] = C64::new(d, 0.0) - x[j].conj() * x[k] / (s * s);
            }
        }
        m
    }
}

/// Uniform point of the cube `[-r, r]^{2a}`; returns `|x|^2`.
fn cube_point(g: &mut ChaCha8Rng, r: f64, out: &mut [C64]) -> f64 {
    let mut s = 0.0;
    for o in out.iter_mut() {
        let x: f64 = g.random_range(-r..r);
        let y: f64 = g.random_range(-r..r);
        *o = C64::new(x, y);
        s += x * x + y * y;
    }
    s
}

struct Setup<'a> {
    blocks: Blocks,
    region: &'a RegionSpec,
    k: usize,
    /// Wedge of the constant factors `beta_R^{a-k} ^ beta_F^b`.
    constant_factors: CMatrix,
    basis: WedgeBasis,
}

impl<'a> Setup<'a> {
    fn new(t: &Current, space: ProductSpace, dir: Direction, region: &'a RegionSpec) -> Result<Self> {
        let blocks = Blocks::new(space, dir);
        if t.dim() != space.total() {
            return Err(Error::config(format!(
                "current lives on C^{} but the product space is C^{}",
                t.dim(),
                space.total()
            )));
        }
        if region.dim() != blocks.b() {
            return Err(Error::config(format!(
                "region lives in C^{} but the fixed block is C^{}",
                region.dim(),
                blocks.b()
            )));
        }
        if space.total() > MAX_DIM {
            return Err(Error::config(format!("product dimension above {MAX_DIM}")));
        }
        let k = t.bidegree();
        if k > blocks.a() {
            return Err(Error::config(format!(
                "bidegree ({k},{k}) exceeds the dimension {} of the radial block",
                blocks.a()
            )));
        }
        let br = blocks.kahler(&blocks.radial);
        let bf = blocks.kahler(&blocks.fixed);
        let mut factors: Vec<&CMatrix> = Vec::new();
        factors.extend((0..blocks.a() - k).map(|_| &br));
        factors.extend((0..blocks.b()).map(|_| &bf));
        let basis = WedgeBasis::new(space.total(), k);
        let constant_factors = basis.wedge_ones(&factors);
        Ok(Setup {
            blocks,
            region,
            k,
            constant_factors,
            basis,
        })
    }

    /// `(2r)^{2a} Leb(D) / pi^N / r^{2(a-k)}`.
    fn volume_scale(&self, r: f64) -> f64 {
        let a = self.blocks.a() as i32;
        (2.0 * r).powi(2 * a) * self.region.lebesgue()
            / PI.powi(self.blocks.total as i32)
            / r.powi(2 * (a - self.k as i32))
    }

    fn value(&self, t: &Current, r: f64, budget: usize, seed: u64) -> Result<(f64, f64)> {
        match t {
            Current::ConstForm(c) => self.const_form(c, r, budget, seed),
            Current::Potential { u } => self.potential(u, r, budget, seed),
            Current::ZeroSet { f } => self.zero_set(f, r, budget, seed),
            Current::NonnegSum(members) => {
                let mut v = 0.0;
                let mut var = 0.0;
                for (i, (w, s)) in members.iter().enumerate() {
                    let (mv, ms) = self.value(s, r, budget, rng::derive(rng::derive(seed, rng::tag::MEMBER), i as u64))?;
                    v += w * mv;
                    var += (w * ms).powi(2);
                }
                Ok((v, var.sqrt()))
            }
        }
    }

    fn const_form(&self, c: &ConstForm, r: f64, budget: usize, seed: u64) -> Result<(f64, f64)> {
        let coef = self.basis.pair(c.coefficients(), &self.constant_factors);
        if coef == 0.0 {
            return Ok((0.0, 0.0));
        }
        let a = self.blocks.a();
        let m = mc_moments_with(
            budget,
            rng::derive(seed, rng::tag::PRODUCT),
            || [ZERO; MAX_DIM],
            |g, buf| Ok(if cube_point(g, 1.0, &mut buf[..a]) < 1.0 { 1.0 } else { 0.0 }),
        )?;
        let s = coef * self.volume_scale(r);
        Ok((m.mean * s, m.stderr() * s.abs()))
    }

    fn potential(&self, u: &PshFunction, r: f64, budget: usize, seed: u64) -> Result<(f64, f64)> {
        let (a, b, n) = (self.blocks.a(), self.blocks.b(), self.blocks.total);
        let m = mc_moments_with(
            budget,
            rng::derive(seed, rng::tag::PRODUCT),
            || ([ZERO; MAX_DIM], [ZERO; MAX_DIM], [ZERO; MAX_DIM]),
            |g, (xr, xf, x)| {
                let inside = cube_point(g, r, &mut xr[..a]) < r * r;
                self.region.sample(g, &mut xf[..b]);
                if !inside {
                    return Ok(0.0);
                }
                self.blocks.place(&xr[..a], &xf[..b], &mut x[..n]);
                let h = u.complex_hessian(&x[..n]);
                let v = self.basis.pair(&h, &self.constant_factors);
                if !v.is_finite() {
                    return Err(Error::numeric("non-finite Hessian", format!("r = {r}")));
                }
                Ok(v)
            },
        )?;
        let s = self.volume_scale(r);
        Ok((m.mean * s, m.stderr() * s))
    }

    /// Slice-wise Lelong-Jensen: for fixed `x_F`, the radial slice of
    /// `[f = 0]` has mass `(r/2) d/dr` of the spherical mean of `log |f|^2`
    /// (or its zero count when the radial block is one-dimensional), and
    /// `x_F` is averaged uniformly over the region.
    fn zero_set(&self, f: &HoloFunction, r: f64, budget: usize, seed: u64) -> Result<(f64, f64)> {
        let weight = self.region.beta_measure();
        if self.blocks.a() == 1 {
            let b = self.blocks.b();
            let radial = self.blocks.radial[0];
            let rr = r * (1.0 + RIGHT_CONTINUITY);
            let m = mc_moments_with(
                budget,
                rng::derive(seed, rng::tag::PRODUCT),
                || [ZERO; MAX_DIM],
                |g, xf| {
                    self.region.sample(g, &mut xf[..b]);
                    let mut base = [ZERO; MAX_DIM];
                    self.blocks.place(&[ZERO], &xf[..b], &mut base[..self.blocks.total]);
                    let count = count_zeros_with(
                        |w| {
                            let mut p = base;
                            p[radial] = w;
                            let mut e = f.eval_scaled(&p[..self.blocks.total]);
                            e.grad = vec![e.grad[radial]];
                            e
                        },
                        rr,
                        DEFAULT_CONTOUR_BUDGET,
                    )?;
                    Ok(count as f64)
                },
            )?;
            return Ok((m.mean * weight, m.stderr() * weight));
        }
        let sampler = SliceSampler { f, setup: self };
        let est = slope_estimates(&sampler, &[r], budget, seed)?;
        Ok((est[0].0 * weight, est[0].1 * weight))
    }
}

struct SliceSampler<'a, 'b> {
    f: &'a HoloFunction,
    setup: &'a Setup<'b>,
}

impl SlopeSampler for SliceSampler<'_, '_> {
    fn state_dim(&self) -> usize {
        self.setup.blocks.total
    }

    /// State layout: radial unit direction, then the fixed-block point.
    fn draw(&self, g: &mut ChaCha8Rng, state: &mut [C64]) {
        let a = self.setup.blocks.a();
        let (dir, fixed) = state.split_at_mut(a);
        unit_direction(g, dir);
        self.setup.region.sample(g, fixed);
    }

    fn eval(&self, state: &[C64], rho: f64, scratch: &mut [C64]) -> f64 {
        let a = self.setup.blocks.a();
        let mut radial = [ZERO; MAX_DIM];
        for (o, s) in radial.iter_mut().zip(&state[..a]) {
            *o = s * rho;
        }
        let n = self.setup.blocks.total;
        self.setup.blocks.place(&radial[..a], &state[a..], &mut scratch[..n]);
        self.f.log_abs_sq(&scratch[..n])
    }
}

fn directional_profile(
    t: &Current,
    space: ProductSpace,
    dir: Direction,
    region: &RegionSpec,
    grid: &RadialGrid,
    budget: usize,
    seed: u64,
) -> Result<DirectionalProfile> {
    check_budget(budget)?;
    let setup = Setup::new(t, space, dir, region)?;
    let base = rng::derive(seed, if dir == Direction::ZBlock { 0x4e } else { 0x4d });
    let est: Vec<Result<(f64, f64)>> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, &r)| setup.value(t, r, budget, rng::derive(base, i as u64)))
        .collect();
    let est = est.into_iter().collect::<Result<Vec<_>>>()?;
    let method = match t {
        Current::ZeroSet { .. } if setup.blocks.a() == 1 => ProfileMethod::ExactCount,
        Current::ZeroSet { .. } => ProfileMethod::SphericalMean,
        Current::NonnegSum(_) => ProfileMethod::Mixed,
        _ => ProfileMethod::McVolume,
    };
    let mut flagged = Vec::new();
    let mut values = Vec::with_capacity(est.len());
    let mut stderr = Vec::with_capacity(est.len());
    for (i, (v, s)) in est.into_iter().enumerate() {
        if v < -3.0 * s {
            flagged.push(i);
        }
        values.push(v.max(0.0));
        stderr.push(s);
    }
    Ok(DirectionalProfile {
        profile: RadialProfile::with_flags(grid.clone(), values, stderr, method, flagged)?,
        direction: dir,
    })
}

/// `N_(T,D)(r)` for `D` in the `t` block; requires `k < n`.
pub fn directional_n_profile(
    t: &Current,
    space: ProductSpace,
    d: &RegionSpec,
    grid: &RadialGrid,
    budget: usize,
    seed: u64,
) -> Result<DirectionalProfile> {
    if t.bidegree() >= space.n {
        return Err(Error::config(format!(
            "directional profile along C^n needs k < n (k={}, n={})",
            t.bidegree(),
            space.n
        )));
    }
    directional_profile(t, space, Direction::ZBlock, d, grid, budget, seed)
}

/// `M_(B,T)(r)` for `B` in the `z` block; requires `k <= m` (for `k = m`
/// there is no radial normalization and the mass is count-like).
pub fn directional_m_profile(
    t: &Current,
    space: ProductSpace,
    b: &RegionSpec,
    grid: &RadialGrid,
    budget: usize,
    seed: u64,
) -> Result<DirectionalProfile> {
    directional_profile(t, space, Direction::TBlock, b, grid, budget, seed)
}

/// Both sides of the directional Lelong-Jensen identity for a closed
/// current, where the `dd^c T` correction terms vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct LelongJensenReport {
    pub r1: f64,
    pub r2: f64,
    /// `N(r2) - N(r1)`.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// `int_{B_n(r1, r2) x D} T ^ alpha_z^{n-k} ^ beta_t^m`.
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub residual: f64,
    pub stderr: f64,
}

impl LelongJensenReport {
    pub fn within(&self, sigmas: f64) -> bool {
        self.residual.abs() <= sigmas * self.stderr + 1e-12 * self.lhs.abs().max(self.rhs.abs())
    }
}

pub fn lelong_jensen_check(
    t: &Current,
    space: ProductSpace,
    r1: f64,
    r2: f64,
    d: &RegionSpec,
    budget: usize,
    seed: u64,
) -> Result<LelongJensenReport> {
    check_budget(budget)?;
    if !(r1 > 0.0) || !r1.is_finite() || !r2.is_finite() || r1 > r2 {
        return Err(Error::config(format!("need 0 < r1 <= r2, got r1={r1}, r2={r2}")));
    }
    if t.is_zero_set() {
        return Err(Error::config(
            "the balance check needs a current with a bounded density (constant form or smooth potential)",
        ));
    }
    if t.bidegree() >= space.n {
        return Err(Error::config("the balance check needs k < n"));
    }
    let setup = Setup::new(t, space, Direction::ZBlock, d)?;
    if r1 == r2 {
        return Ok(LelongJensenReport {
            r1,
            r2,
            lhs: 0.0,
            lhs_stderr: 0.0,
            rhs: 0.0,
            rhs_stderr: 0.0,
            residual: 0.0,
            stderr: 0.0,
        });
    }
    let base = rng::derive(seed, 0x4c4a);
    let (n2, s2) = setup.value(t, r2, budget, rng::derive(base, 2))?;
    let (n1, s1) = setup.value(t, r1, budget, rng::derive(base, 1))?;
    let (rhs, rhs_stderr) = shell_integral(&setup, t, r1, r2, budget, rng::derive(base, 3))?;
    let lhs = n2 - n1;
    let lhs_stderr = (s1 * s1 + s2 * s2).sqrt();
    Ok(LelongJensenReport {
        r1,
        r2,
        lhs,
        lhs_stderr,
        rhs,
        rhs_stderr,
        residual: lhs - rhs,
        stderr: (lhs_stderr.powi(2) + rhs_stderr.powi(2)).sqrt(),
    })
}

fn shell_integral(setup: &Setup, t: &Current, r1: f64, r2: f64, budget: usize, seed: u64) -> Result<(f64, f64)> {
    if let Current::NonnegSum(members) = t {
        let mut v = 0.0;
        let mut var = 0.0;
        for (i, (w, s)) in members.iter().enumerate() {
            let (mv, ms) = shell_integral(setup, s, r1, r2, budget, rng::derive(seed, i as u64))?;
            v += w * mv;
            var += (w * ms).powi(2);
        }
        return Ok((v, var.sqrt()));
    }
    let blocks = &setup.blocks;
    let (a, b, n) = (blocks.a(), blocks.b(), blocks.total);
    let beta_f = blocks.kahler(&blocks.fixed);
    let m = mc_moments_with(
        budget,
        rng::derive(seed, rng::tag::PRODUCT),
        || ([ZERO; MAX_DIM], [ZERO; MAX_DIM], [ZERO; MAX_DIM]),
        |g, (xr, xf, x)| {
            let s = cube_point(g, r2, &mut xr[..a]);
            setup.region.sample(g, &mut xf[..b]);
            if !(s > r1 * r1 && s < r2 * r2) {
                return Ok(0.0);
            }
            blocks.place(&xr[..a], &xf[..b], &mut x[..n]);
            let alpha = blocks.log_kahler(&x[..n]);
            let mut factors: Vec<&CMatrix> = (0..a - setup.k).map(|_| &alpha).collect();
            factors.extend((0..b).map(|_| &beta_f));
            let p = setup.basis.wedge_ones(&factors);
            let v = match t {
                Current::ConstForm(c) => setup.basis.pair(c.coefficients(), &p),
                Current::Potential { u } => setup.basis.pair(&u.complex_hessian(&x[..n]), &p),
                _ => unreachable!("zero sets and sums are handled above"),
            };
            Ok(v)
        },
    )?;
    let scale = (2.0 * r2).powi(2 * a as i32) * setup.region.lebesgue() / PI.powi(n as i32);
    Ok((m.mean * scale, m.stderr() * scale))
}
