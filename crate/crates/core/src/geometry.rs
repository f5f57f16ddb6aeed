//! Complex vectors, orthonormal frames, and seeded sampling of spheres, balls
//! and complex Grassmannians.
//!
//! The Grassmannian `G(q, n)` carries its unitarily invariant probability
//! measure: a frame is drawn by orthonormalizing the columns of an `n x q`
//! matrix of i.i.d. standard complex Gaussians.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex64;

/// Orthonormality tolerance for frames.
pub const FRAME_TOL: f64 = 1e-12;

/// A point of `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("vector must have at least one entry"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::config("vector entries must be finite"));
        }
        Ok(CVector(entries))
    }

    pub fn from_real(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); n.max(1)])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Hermitian inner product `<self, other> = sum self_i * conj(other_i)`.
    pub fn inner(&self, other: &CVector) -> C64 {
        inner(&self.0, &other.0)
    }
}

impl std::ops::Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    norm_sqr(v).sqrt()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Orthonormal basis of a `q`-dimensional subspace of `C^n`, stored column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    ambient_dim: usize,
    sub_dim: usize,
    data: Vec<C64>,
}

impl Frame {
    /// Builds a frame from columns that are already orthonormal within [`FRAME_TOL`].
    pub fn new(columns: Vec<CVector>) -> Result<Self> {
        let frame = Self::from_columns_unchecked(columns)?;
        let err = frame.gram_error();
        if err > FRAME_TOL {
            return Err(Error::config(format!(
                "frame columns are not orthonormal (Gram deviation {err:.3e})"
            )));
        }
        Ok(frame)
    }

    /// Orthonormalizes the given columns (modified Gram-Schmidt with one
    /// re-orthogonalization pass). Fails if they are numerically dependent.
    pub fn orthonormalize(columns: Vec<CVector>) -> Result<Self> {
        let mut frame = Self::from_columns_unchecked(columns)?;
        if !gram_schmidt(&mut frame.data, frame.ambient_dim, frame.sub_dim) {
            return Err(Error::config("frame columns are linearly dependent"));
        }
        Ok(frame)
    }

    fn from_columns_unchecked(columns: Vec<CVector>) -> Result<Self> {
        let q = columns.len();
        if q == 0 {
            return Err(Error::config("frame needs at least one column"));
        }
        let n = columns[0].dim();
        if q > n {
            return Err(Error::config(format!("frame has {q} columns in C^{n}")));
        }
        if columns.iter().any(|c| c.dim() != n) {
            return Err(Error::config("frame columns have different lengths"));
        }
        let data = columns.into_iter().flat_map(CVector::into_inner).collect();
        Ok(Frame {
            ambient_dim: n,
            sub_dim: q,
            data,
        })
    }

    /// The first `q` standard basis vectors of `C^n`.
    pub fn standard(n: usize, q: usize) -> Result<Self> {
        if q == 0 || q > n {
            return Err(Error::config(format!("need 1 <= q <= n, got q={q}, n={n}")));
        }
        Self::new((0..q).map(|j| CVector::basis(n, j)).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim
    }

    pub fn column(&self, j: usize) -> &[C64] {
        &self.data[j * self.ambient_dim..(j + 1) * self.ambient_dim]
    }

    pub fn columns(&self) -> Vec<CVector> {
        (0..self.sub_dim)
            .map(|j| CVector(self.column(j).to_vec()))
            .collect()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[j * self.ambient_dim + i]
    }

    /// Largest entry of `|F^* F - I|`.
    pub fn gram_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.sub_dim {
            for b in 0..self.sub_dim {
                let g = inner(self.column(b), self.column(a));
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// `z = sum_j w_j F_j`; writes into `out` (length `ambient_dim`).
    #[inline]
    pub fn embed_into(&self, w: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (j, wj) in w.iter().enumerate() {
            for (z, f) in out.iter_mut().zip(self.column(j)) {
                *z += wj * f;
            }
        }
    }

    /// The composite frame `self * inner`, for `inner` a frame of a subspace of `C^q`.
    pub fn compose(&self, inner_frame: &Frame) -> Result<Frame> {
        if inner_frame.ambient_dim != self.sub_dim {
            return Err(Error::config(format!(
                "cannot compose frame of C^{} with a frame in C^{}",
                self.sub_dim, inner_frame.ambient_dim
            )));
        }
        let mut data = vec![C64::new(0.0, 0.0); self.ambient_dim * inner_frame.sub_dim];
        for j in 0..inner_frame.sub_dim {
            self.embed_into(
                inner_frame.column(j),
                &mut data[j * self.ambient_dim..(j + 1) * self.ambient_dim],
            );
        }
        Ok(Frame {
            ambient_dim: self.ambient_dim,
            sub_dim: inner_frame.sub_dim,
            data,
        })
    }

    /// The `q x q` matrix `self^* other` (row-major).
    pub fn adjoint_product(&self, other: &Frame) -> Vec<C64> {
        let q = self.sub_dim;
        let mut m = Vec::with_capacity(q * other.sub_dim);
        for a in 0..q {
            for b in 0..other.sub_dim {
                m.push(inner(other.column(b), self.column(a)));
            }
        }
        m
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass, in place on
/// column-major data. Returns false when a column collapses.
fn gram_schmidt(data: &mut [C64], n: usize, q: usize) -> bool {
    for j in 0..q {
        let original = norm(&data[j * n..(j + 1) * n]);
        if original == 0.0 || !original.is_finite() {
            return false;
        }
        for _pass in 0..2 {
            for k in 0..j {
                let (head, tail) = data.split_at_mut(j * n);
                let prev = &head[k * n..(k + 1) * n];
                let col = &mut tail[..n];
                let proj = inner(col, prev);
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= proj * p;
                }
            }
        }
        let col = &mut data[j * n..(j + 1) * n];
        let nrm = norm(col);
        if nrm <= 1e-10 * original {
            return false;
        }
        col.iter_mut().for_each(|c| *c /= nrm);
    }
    true
}

/// `z = sum_j w_j F_j`.
pub fn frame_embed(frame: &Frame, w: &CVector) -> Result<CVector> {
    if w.dim() != frame.sub_dim {
        return Err(Error::config(format!(
            "frame_embed: vector in C^{} but frame spans a {}-dimensional subspace",
            w.dim(),
            frame.sub_dim
        )));
    }
    let mut out = vec![C64::new(0.0, 0.0); frame.ambient_dim];
    frame.embed_into(w.as_slice(), &mut out);
    Ok(CVector(out))
}

#[inline]
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Fills `out` with a uniform point of the unit sphere `S^{2n-1}`.
#[inline]
pub(crate) fn unit_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [C64]) {
    loop {
        out.iter_mut().for_each(|z| *z = complex_gaussian(rng));
        let nrm = norm(out);
        if nrm > 1e-300 {
            out.iter_mut().for_each(|z| *z /= nrm);
            return;
        }
    }
}

/// Fills `out` with a uniform point of the open ball of radius `radius`.
#[inline]
pub(crate) fn ball_point<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [C64]) {
    unit_direction(rng, out);
    let u: f64 = rng.random();
    let rho = radius * u.powf(1.0 / (2 * out.len()) as f64);
    out.iter_mut().for_each(|z| *z *= rho);
}

fn random_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, q: usize) -> Frame {
    loop {
        let mut data: Vec<C64> = (0..n * q).map(|_| complex_gaussian(rng)).collect();
        if gram_schmidt(&mut data, n, q) {
            return Frame {
                ambient_dim: n,
                sub_dim: q,
                data,
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleDomain {
    Sphere { n: usize, radius: f64 },
    Ball { n: usize, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<CVector>,
    pub seed: u64,
    pub domain: SampleDomain,
}

fn validate(n: usize, r: f64, count: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::config(format!("radius must be positive and finite, got {r}")));
    }
    if count == 0 {
        return Err(Error::config("sample count must be positive"));
    }
    Ok(())
}

fn chunked_points<F>(count: usize, seed: u64, n: usize, draw: F) -> Vec<CVector>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [C64]) + Sync,
{
    (0..rng::chunks(count))
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            rng::chunk_range(c, count)
                .map(|_| {
                    let mut z = vec![C64::new(0.0, 0.0); n];
                    draw(&mut r, &mut z);
                    CVector(z)
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `count` uniform points on the sphere of radius `r` in `C^n`.
pub fn sample_sphere(n: usize, r: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    validate(n, r, count)?;
    let s = rng::derive(seed, rng::tag::SPHERE);
    let points = chunked_points(count, s, n, |g, z| {
        unit_direction(g, z);
        z.iter_mut().for_each(|c| *c *= r);
    });
    Ok(SampleBatch {
        points,
        seed,
        domain: SampleDomain::Sphere { n, radius: r },
    })
}

/// `count` uniform points in the open ball of radius `r` in `C^n`.
pub fn sample_ball(n: usize, r: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    validate(n, r, count)?;
    let s = rng::derive(seed, rng::tag::BALL);
    let points = chunked_points(count, s, n, |g, z| loop {
        ball_point(g, r, z);
        // u^(1/2n) can round up to exactly 1
        if norm(z) < r {
            break;
        }
    });
    Ok(SampleBatch {
        points,
        seed,
        domain: SampleDomain::Ball { n, radius: r },
    })
}

/// Frames drawn from the unitarily invariant probability measure on `G(q, n)`.
/// Frame `i` depends only on `(seed, i)`.
pub fn sample_grassmannian(q: usize, n: usize, count: usize, seed: u64) -> Result<Vec<Frame>> {
    if q == 0 || q > n {
        return Err(Error::config(format!("need 1 <= q <= n, got q={q}, n={n}")));
    }
    let s = rng::derive(seed, rng::tag::GRASSMANNIAN);
    Ok((0..count)
        .into_par_iter()
        .map(|i| random_frame(&mut rng::stream(s, i as u64), n, q))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sphere_points_have_exact_radius() {
        let b = sample_sphere(2, 3.0, 1000, 7).unwrap();
        assert_eq!(b.points.len(), 1000);
        for p in &b.points {
            assert!((p.norm() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_mean_is_near_zero() {
        let b = sample_sphere(2, 1.0, 10_000, 11).unwrap();
        let mut mean = [c(0.0, 0.0); 2];
        for p in &b.points {
            mean[0] += p[0];
            mean[1] += p[1];
        }
        let m = norm(&mean) / 10_000.0;
        assert!(m <= 4.0 / 100.0, "mean norm {m}");
    }

    #[test]
    fn ball_points_are_inside() {
        let b = sample_ball(3, 2.0, 5000, 1).unwrap();
        assert!(b.points.iter().all(|p| p.norm() < 2.0));
    }

    #[test]
    fn ball_second_moment_on_unit_disc() {
        let b = sample_ball(1, 1.0, 20_000, 5).unwrap();
        let xs: Vec<f64> = b.points.iter().map(|p| p[0].norm_sqr()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((mean - 0.5).abs() <= 3.0 * (var / xs.len() as f64).sqrt());
    }

    #[test]
    fn ball_volume_ratio() {
        let count = 40_000;
        let b = sample_ball(2, 2.0, count, 9).unwrap();
        let inside = b.points.iter().filter(|p| p.norm() <= 1.0).count() as f64 / count as f64;
        let p = 0.0625;
        let sigma = (p * (1.0 - p) / count as f64).sqrt();
        assert!((inside - p).abs() <= 3.0 * sigma, "fraction {inside}");
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(sample_sphere(0, 1.0, 10, 0).is_err());
        assert!(sample_sphere(2, -1.0, 10, 0).is_err());
        assert!(sample_ball(2, 1.0, 0, 0).is_err());
        assert!(sample_grassmannian(3, 2, 1, 0).is_err());
        assert!(sample_grassmannian(0, 2, 1, 0).is_err());
    }

    #[test]
    fn batches_are_deterministic() {
        let a = sample_sphere(3, 1.5, 3000, 42).unwrap();
        let b = sample_sphere(3, 1.5, 3000, 42).unwrap();
        assert_eq!(a, b);
        let fa = sample_grassmannian(2, 4, 50, 3).unwrap();
        let fb = sample_grassmannian(2, 4, 50, 3).unwrap();
        assert_eq!(fa, fb);
    }

    #[test]
    fn grassmannian_frames_are_orthonormal() {
        for f in sample_grassmannian(1, 2, 500, 1).unwrap() {
            assert!((norm(f.column(0)) - 1.0).abs() < 1e-12);
        }
        for f in sample_grassmannian(4, 4, 100, 2).unwrap() {
            assert!(f.gram_error() < 1e-12);
        }
    }

    #[test]
    fn grassmannian_trace_identity() {
        // E |<F e, e_1>|^2 = q / n for the invariant measure
        let count = 20_000;
        let frames = sample_grassmannian(1, 3, count, 17).unwrap();
        let xs: Vec<f64> = frames.iter().map(|f| f.entry(0, 0).norm_sqr()).collect();
        let mean = xs.iter().sum::<f64>() / count as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        assert!((mean - 1.0 / 3.0).abs() <= 4.0 * (var / count as f64).sqrt());
    }

    #[test]
    fn embed_with_standard_frame_pads_with_zeros() {
        let f = Frame::standard(4, 2).unwrap();
        let w = CVector::new(vec![c(1.0, 2.0), c(-3.0, 0.5)]).unwrap();
        let z = frame_embed(&f, &w).unwrap();
        assert_eq!(z.as_slice(), &[c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn embed_preserves_norm_and_matches_naive_product() {
        let frames = sample_grassmannian(2, 5, 20, 8).unwrap();
        let ws = sample_sphere(2, 1.7, 20, 4).unwrap();
        for (f, w) in frames.iter().zip(&ws.points) {
            let z = frame_embed(f, w).unwrap();
            assert!((z.norm() - w.norm()).abs() < 1e-12);
            for i in 0..5 {
                let naive = f.entry(i, 0) * w[0] + f.entry(i, 1) * w[1];
                assert!((naive - z[i]).norm() < 1e-12);
            }
        }
        let bad = CVector::new(vec![c(1.0, 0.0); 3]).unwrap();
        assert!(frame_embed(&frames[0], &bad).is_err());
    }

    #[test]
    fn frame_validation() {
        let v = CVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(Frame::new(vec![v.clone()]).is_err());
        let f = Frame::orthonormalize(vec![v.clone()]).unwrap();
        assert!(f.gram_error() < 1e-15);
        assert!(Frame::orthonormalize(vec![v.clone(), v]).is_err());
    }

    #[test]
    fn composition_is_orthonormal() {
        let outer = sample_grassmannian(3, 5, 1, 1).unwrap().remove(0);
        let inner_frame = sample_grassmannian(2, 3, 1, 2).unwrap().remove(0);
        let comp = outer.compose(&inner_frame).unwrap();
        assert_eq!(comp.ambient_dim(), 5);
        assert_eq!(comp.sub_dim(), 2);
        assert!(comp.gram_error() < 1e-12);
    }
}
