//! Positive currents with computable Lelong data, and their restriction to
//! linear subspaces.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::forms::{self, hermitian_form, min_hermitian_eigenvalue, CMatrix, WedgeBasis};
use crate::geometry::{self, complex_gaussian, CVector, Frame, C64};
use crate::holo::HoloFunction;
use crate::rng;

const ZERO: C64 = C64::new(0.0, 0.0);

pub type PshEvaluator = Arc<dyn Fn(&[C64]) -> f64 + Send + Sync>;

/// Named plurisubharmonic functions.
#[derive(Clone)]
pub enum PshKind {
    /// `log |z|^2`
    LogNormSq,
    /// `|z|^2`
    NormSq,
    /// `log(|a . z|^2 + floor^2)`, a smoothed `max(log |a.z|^2, log floor^2)`.
    SmoothedLogMax { coeffs: Vec<C64>, floor: f64 },
    /// `log |f|^2` for an entire `f`.
    LogModulus(HoloFunction),
    Custom(PshEvaluator),
}

impl fmt::Debug for PshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PshKind::LogNormSq => write!(f, "LogNormSq"),
            PshKind::NormSq => write!(f, "NormSq"),
            PshKind::SmoothedLogMax { coeffs, floor } => f
                .debug_struct("SmoothedLogMax")
                .field("coeffs", coeffs)
                .field("floor", floor)
                .finish(),
            PshKind::LogModulus(h) => f.debug_tuple("LogModulus").field(h).finish(),
            PshKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A real plurisubharmonic function on `C^n`, optionally precomposed with a
/// frame `z = F w`.
#[derive(Debug, Clone)]
pub struct PshFunction {
    n_vars: usize,
    inner_dim: usize,
    frame: Option<Frame>,
    kind: PshKind,
}

impl PshFunction {
    pub fn log_norm_sq(n: usize) -> Result<Self> {
        Self::build(n, PshKind::LogNormSq)
    }

    pub fn norm_sq(n: usize) -> Result<Self> {
        Self::build(n, PshKind::NormSq)
    }

    pub fn smoothed_log_max(coeffs: Vec<C64>, floor: f64) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::config("smoothed_log_max floor must be positive"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::config("smoothed_log_max coefficients must be finite"));
        }
        Self::build(coeffs.len(), PshKind::SmoothedLogMax { coeffs, floor })
    }

    pub fn log_modulus(f: HoloFunction) -> Result<Self> {
        Self::build(f.n_vars(), PshKind::LogModulus(f))
    }

    /// User evaluator; it must be plurisubharmonic and thread-safe.
    pub fn custom(n: usize, u: PshEvaluator) -> Result<Self> {
        Self::build(n, PshKind::Custom(u))
    }

    fn build(n: usize, kind: PshKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("potential needs at least one variable"));
        }
        Ok(PshFunction {
            n_vars: n,
            inner_dim: n,
            frame: None,
            kind,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn kind(&self) -> &PshKind {
        &self.kind
    }

    fn value_inner(&self, z: &[C64]) -> f64 {
        match &self.kind {
            PshKind::LogNormSq => geometry::norm_sqr(z).ln(),
            PshKind::NormSq => geometry::norm_sqr(z),
            PshKind::SmoothedLogMax { coeffs, floor } => {
                let h: C64 = coeffs.iter().zip(z).map(|(a, b)| a * b).sum();
                (h.norm_sqr() + floor * floor).ln()
            }
            PshKind::LogModulus(f) => f.log_abs_sq(z),
            PshKind::Custom(u) => u(z),
        }
    }

    /// `u(z)`.
    pub fn value(&self, z: &[C64]) -> f64 {
        match &self.frame {
            None => self.value_inner(z),
            Some(fr) => {
                let mut zz = vec![ZERO; self.inner_dim];
                fr.embed_into(z, &mut zz);
                self.value_inner(&zz)
            }
        }
    }

    /// `u o F`.
    pub fn pullback(&self, frame: &Frame) -> Result<PshFunction> {
        if frame.ambient_dim() != self.n_vars {
            return Err(Error::config("potential pullback: dimension mismatch"));
        }
        let composed = match &self.frame {
            None => frame.clone(),
            Some(f0) => f0.compose(frame)?,
        };
        Ok(PshFunction {
            n_vars: frame.sub_dim(),
            inner_dim: self.inner_dim,
            frame: Some(composed),
            kind: self.kind.clone(),
        })
    }

    /// Complex Hessian `u_{j kbar}` by central differences in the `2n` real
    /// coordinates.
    pub fn complex_hessian(&self, z: &[C64]) -> CMatrix {
        let n = self.n_vars;
        let h = 1e-4 * (1.0 + geometry::norm(z));
        let mut p: Vec<C64> = z.to_vec();
        let real_coord = |p: &mut Vec<C64>, idx: usize, delta: f64| {
            let (j, imag) = (idx / 2, idx % 2 == 1);
            if imag {
                p[j].im += delta;
            } else {
                p[j].re += delta;
            }
        };
        let u0 = self.value(z);
        let dim = 2 * n;
        let mut r = vec![0.0; dim * dim];
        for a in 0..dim {
            real_coord(&mut p, a, h);
            let up = self.value(&p);
            real_coord(&mut p, a, -2.0 * h);
            let um = self.value(&p);
            p.copy_from_slice(z);
            r[a * dim + a] = (up - 2.0 * u0 + um) / (h * h);
            for b in a + 1..dim {
                let corner = |sa: f64, sb: f64, p: &mut Vec<C64>| {
                    real_coord(p, a, sa * h);
                    real_coord(p, b, sb * h);
                    let v = self.value(p);
                    p.copy_from_slice(z);
                    v
                };
                let v = (corner(1.0, 1.0, &mut p) - corner(1.0, -1.0, &mut p)
                    - corner(-1.0, 1.0, &mut p)
                    + corner(-1.0, -1.0, &mut p))
                    / (4.0 * h * h);
                r[a * dim + b] = v;
                r[b * dim + a] = v;
            }
        }
        let x = |j: usize| 2 * j;
        let y = |j: usize| 2 * j + 1;
        CMatrix::from_fn(n, n, |j, k| {
            C64::new(
                0.25 * (r[x(j) * dim + x(k)] + r[y(j) * dim + y(k)]),
                0.25 * (r[x(j) * dim + y(k)] - r[y(j) * dim + x(k)]),
            )
        })
    }
}

/// A constant-coefficient positive `(k,k)` form on `C^n`; see [`crate::forms`]
/// for the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstForm {
    n: usize,
    k: usize,
    h: CMatrix,
}

impl ConstForm {
    pub fn new(n: usize, k: usize, h: CMatrix) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::config(format!("bidegree ({k},{k}) impossible on C^{n}")));
        }
        let size = forms::binomial(n, k);
        if h.nrows() != size || h.ncols() != size {
            return Err(Error::config(format!(
                "coefficient matrix must be {size}x{size} for bidegree ({k},{k}) on C^{n}"
            )));
        }
        if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::config("coefficient matrix must be finite"));
        }
        let skew = (&h - h.adjoint()).norm();
        if skew > 1e-12 * h.norm().max(1.0) {
            return Err(Error::config("coefficient matrix must be Hermitian"));
        }
        Ok(ConstForm { n, k, h })
    }

    /// `beta = dd^c |z|^2`.
    pub fn kahler(n: usize) -> Result<Self> {
        Self::new(n, 1, CMatrix::identity(n, n))
    }

    /// `beta^k`, whose coefficient matrix is `k! I`.
    pub fn kahler_power(n: usize, k: usize) -> Result<Self> {
        let size = forms::binomial(n, k);
        Self::new(n, k, CMatrix::identity(size, size) * C64::new(forms::factorial(k), 0.0))
    }

    /// `sum_{j in coords} e_jj`, e.g. the Kahler form of one factor of a product.
    pub fn partial_kahler(n: usize, coords: &[usize]) -> Result<Self> {
        if coords.iter().any(|&j| j >= n) {
            return Err(Error::config("coordinate index out of range"));
        }
        let mut h = CMatrix::zeros(n, n);
        for &j in coords {
            h[(j, j)] = C64::new(1.0, 0.0);
        }
        Self::new(n, 1, h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &CMatrix {
        &self.h
    }

    pub fn trace(&self) -> f64 {
        self.h.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn scaled(&self, w: f64) -> ConstForm {
        ConstForm {
            n: self.n,
            k: self.k,
            h: &self.h * C64::new(w, 0.0),
        }
    }

    pub fn pullback(&self, frame: &Frame) -> Result<ConstForm> {
        if frame.ambient_dim() != self.n {
            return Err(Error::config("form pullback: dimension mismatch"));
        }
        let q = frame.sub_dim();
        if q < self.k {
            return Err(Error::config(format!(
                "cannot restrict a ({0},{0}) form to a {q}-dimensional subspace",
                self.k
            )));
        }
        let h = forms::pullback_coefficients(&self.h, frame, self.k);
        // restore exact Hermitian symmetry lost to rounding
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        Ok(ConstForm { n: q, k: self.k, h })
    }

    /// `ν(r) = tr(H) (n-k)! / n! · r^{2k}`.
    pub fn nu_exact(&self, r: f64) -> f64 {
        self.trace() * forms::factorial(self.n - self.k) / forms::factorial(self.n)
            * r.powi(2 * self.k as i32)
    }
}

#[derive(Debug, Clone)]
pub enum Current {
    /// Integration current `[f = 0] = dd^c log |f|^2`.
    ZeroSet { f: HoloFunction },
    /// `dd^c u`.
    Potential { u: PshFunction },
    ConstForm(ConstForm),
    /// `sum w_i T_i` with `w_i >= 0`.
    NonnegSum(Vec<(f64, Current)>),
}

impl Current {
    pub fn zero_set(f: HoloFunction) -> Self {
        Current::ZeroSet { f }
    }

    pub fn potential(u: PshFunction) -> Self {
        Current::Potential { u }
    }

    pub fn nonneg_sum(members: Vec<(f64, Current)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::config("sum needs at least one member"))?;
        let (n, k) = (first.1.dim(), first.1.bidegree());
        for (w, t) in &members {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::config("sum weights must be finite and nonnegative"));
            }
            if t.dim() != n || t.bidegree() != k {
                return Err(Error::config("sum members must share dimension and bidegree"));
            }
        }
        Ok(Current::NonnegSum(members))
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        match self {
            Current::ZeroSet { f } => f.n_vars(),
            Current::Potential { u } => u.n_vars(),
            Current::ConstForm(c) => c.n(),
            Current::NonnegSum(m) => m[0].1.dim(),
        }
    }

    /// `k` for a current of bidegree `(k,k)`.
    pub fn bidegree(&self) -> usize {
        match self {
            Current::ZeroSet { .. } | Current::Potential { .. } => 1,
            Current::ConstForm(c) => c.k(),
            Current::NonnegSum(m) => m[0].1.bidegree(),
        }
    }

    /// `p = n - k`.
    pub fn bidimension(&self) -> usize {
        self.dim() - self.bidegree()
    }

    pub fn is_zero_set(&self) -> bool {
        match self {
            Current::ZeroSet { .. } => true,
            Current::NonnegSum(m) => m.iter().any(|(_, t)| t.is_zero_set()),
            _ => false,
        }
    }
}

/// `T|L` for `L` spanned by the columns of `frame`.
pub fn restrict_current(t: &Current, frame: &Frame) -> Result<Current> {
    if frame.ambient_dim() != t.dim() {
        return Err(Error::config(format!(
            "frame lives in C^{} but the current is on C^{}",
            frame.ambient_dim(),
            t.dim()
        )));
    }
    if t.bidimension() + frame.sub_dim() < t.dim() {
        return Err(Error::config(format!(
            "restriction needs p + q >= n (p={}, q={}, n={})",
            t.bidimension(),
            frame.sub_dim(),
            t.dim()
        )));
    }
    Ok(match t {
        Current::ZeroSet { f } => Current::ZeroSet { f: f.pullback(frame)? },
        Current::Potential { u } => Current::Potential { u: u.pullback(frame)? },
        Current::ConstForm(c) => Current::ConstForm(c.pullback(frame)?),
        Current::NonnegSum(m) => Current::NonnegSum(
            m.iter()
                .map(|(w, s)| Ok((*w, restrict_current(s, frame)?)))
                .collect::<Result<_>>()?,
        ),
    })
}

/// Where and how positivity failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityWitness {
    pub description: String,
    /// The negative value found.
    pub value: f64,
    pub point: Option<CVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub samples: usize,
    pub witness: Option<PositivityWitness>,
}

const HESSIAN_TOL: f64 = 1e-6;
const POSITIVITY_PROBE_RADIUS: f64 = 4.0;

/// Randomized positivity test. Constant forms are paired with random simple
/// `(1,1)` covector products; potentials are tested for a positive
/// semidefinite complex Hessian at random points; zero sets always pass.
pub fn positivity_check(t: &Current, sample_count: usize, seed: u64) -> PositivityReport {
    match t {
        Current::ZeroSet { .. } => PositivityReport {
            positive: true,
            samples: 0,
            witness: None,
        },
        Current::ConstForm(c) => const_form_positivity(c, sample_count, seed),
        Current::Potential { u } => potential_positivity(u, sample_count, seed),
        Current::NonnegSum(m) => {
            let mut total = 0;
            for (i, (_, s)) in m.iter().enumerate() {
                let rep = positivity_check(s, sample_count, rng::derive(seed, i as u64));
                total += rep.samples;
                if !rep.positive {
                    let mut w = rep.witness;
                    if let Some(w) = w.as_mut() {
                        w.description = format!("member {i}: {}", w.description);
                    }
                    return PositivityReport {
                        positive: false,
                        samples: total,
                        witness: w,
                    };
                }
            }
            PositivityReport {
                positive: true,
                samples: total,
                witness: None,
            }
        }
    }
}

fn const_form_positivity(c: &ConstForm, sample_count: usize, seed: u64) -> PositivityReport {
    let n = c.n();
    let p = n - c.k();
    let basis = WedgeBasis::new(n, c.k());
    let scale = c.coefficients().norm().max(f64::MIN_POSITIVE);
    let mut g = rng::stream(rng::derive(seed, rng::tag::POSITIVITY), 0);
    for s in 0..sample_count {
        let a = CMatrix::from_fn(n, p, |_, _| complex_gaussian(&mut g));
        let u = basis.decomposable_vector(&a);
        let un: f64 = u.iter().map(|x| x.norm_sqr()).sum();
        let v = hermitian_form(c.coefficients(), &u);
        if v < -1e-12 * scale * un {
            return PositivityReport {
                positive: false,
                samples: s + 1,
                witness: Some(PositivityWitness {
                    description: format!(
                        "negative pairing with simple covectors (columns, row-major): {:?}",
                        a.transpose().iter().collect::<Vec<_>>()
                    ),
                    value: v / un,
                    point: None,
                }),
            };
        }
    }
    // when every k-vector is decomposable the eigenvalue test is exact
    if c.k() <= 1 || c.k() + 1 >= n {
        let lam = min_hermitian_eigenvalue(c.coefficients());
        if lam < -1e-12 * scale {
            return PositivityReport {
                positive: false,
                samples: sample_count,
                witness: Some(PositivityWitness {
                    description: "coefficient matrix has a negative eigenvalue".into(),
                    value: lam,
                    point: None,
                }),
            };
        }
    }
    PositivityReport {
        positive: true,
        samples: sample_count,
        witness: None,
    }
}

fn potential_positivity(u: &PshFunction, sample_count: usize, seed: u64) -> PositivityReport {
    let n = u.n_vars();
    let mut g = rng::stream(rng::derive(seed, rng::tag::POSITIVITY), 1);
    let mut z = vec![ZERO; n];
    for s in 0..sample_count {
        // stay off the origin, where log singularities defeat finite differences
        let radius = POSITIVITY_PROBE_RADIUS * g.random::<f64>().max(0.05);
        geometry::ball_point(&mut g, radius, &mut z);
        let hess = u.complex_hessian(&z);
        let lam = min_hermitian_eigenvalue(&hess);
        if lam < -HESSIAN_TOL * hess.camax().max(1.0) || lam.is_nan() {
            return PositivityReport {
                positive: false,
                samples: s + 1,
                witness: Some(PositivityWitness {
                    description: "complex Hessian has a negative eigenvalue".into(),
                    value: lam,
                    point: CVector::new(z.clone()).ok(),
                }),
            };
        }
    }
    PositivityReport {
        positive: true,
        samples: sample_count,
        witness: None,
    }
}

/// `C^N = C^n x C^m`, coordinates `z` first and `t` after.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductSpace {
    pub n: usize,
    pub m: usize,
}

impl ProductSpace {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::config("product space needs n >= 1 and m >= 1"));
        }
        Ok(ProductSpace { n, m })
    }

    pub fn total(&self) -> usize {
        self.n + self.m
    }

    pub fn z_coords(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn t_coords(&self) -> Vec<usize> {
        (self.n..self.n + self.m).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_grassmannian;
    use crate::holo::PolynomialMap;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parabola_restricts_to_double_root() {
        let f = HoloFunction::polynomial(
            PolynomialMap::new(2, vec![(vec![0, 1], c(1.0, 0.0)), (vec![2, 0], c(-1.0, 0.0))]).unwrap(),
        )
        .unwrap();
        let t = Current::zero_set(f);
        let s = restrict_current(&t, &Frame::standard(2, 1).unwrap()).unwrap();
        match s {
            Current::ZeroSet { f } => {
                let (v, _) = f.evaluate(&CVector::from_real(&[2.0]).unwrap()).unwrap();
                assert!((v - c(-4.0, 0.0)).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kahler_restricts_to_kahler() {
        let t = Current::ConstForm(ConstForm::kahler(2).unwrap());
        for f in sample_grassmannian(1, 2, 20, 9).unwrap() {
            match restrict_current(&t, &f).unwrap() {
                Current::ConstForm(cf) => {
                    assert!((cf.coefficients()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn line_inside_hyperplane_is_degenerate() {
        let f = HoloFunction::polynomial(PolynomialMap::new(2, vec![(vec![1, 0], c(1.0, 0.0))]).unwrap()).unwrap();
        let t = Current::zero_set(f);
        let line = Frame::new(vec![CVector::basis(2, 1)]).unwrap();
        assert!(restrict_current(&t, &line).unwrap_err().is_degenerate());
    }

    #[test]
    fn restriction_checks_bidimension() {
        let t = Current::ConstForm(ConstForm::kahler_power(3, 2).unwrap());
        let line = Frame::standard(3, 1).unwrap();
        assert!(matches!(restrict_current(&t, &line), Err(Error::Config(_))));
    }

    #[test]
    fn positivity_of_basic_forms() {
        let beta = Current::ConstForm(ConstForm::kahler(2).unwrap());
        assert!(positivity_check(&beta, 200, 1).positive);
        let neg = Current::ConstForm(ConstForm::kahler(2).unwrap().scaled(-1.0));
        let rep = positivity_check(&neg, 200, 1);
        assert!(!rep.positive);
        assert!(rep.witness.unwrap().value < 0.0);
        let swap = ConstForm::new(
            2,
            1,
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        assert!(!positivity_check(&Current::ConstForm(swap), 200, 1).positive);
    }

    #[test]
    fn potentials_are_psh_and_hessians_are_accurate() {
        let u = PshFunction::norm_sq(2).unwrap();
        let h = u.complex_hessian(&[c(0.3, -1.0), c(2.0, 0.5)]);
        assert!((h - CMatrix::identity(2, 2)).norm() < 1e-6);
        // log(|z1|^2 + 1): u_{1 1bar} = 1 / (|z1|^2 + 1)^2
        let v = PshFunction::smoothed_log_max(vec![c(1.0, 0.0), c(0.0, 0.0)], 1.0).unwrap();
        let z = [c(0.7, 0.4), c(-1.0, 0.0)];
        let hv = v.complex_hessian(&z);
        let expect = 1.0 / (z[0].norm_sqr() + 1.0).powi(2);
        assert!((hv[(0, 0)].re - expect).abs() < 1e-6);
        assert!(hv[(1, 1)].norm() < 1e-6);
        for p in [Current::potential(u), Current::potential(v)] {
            assert!(positivity_check(&p, 100, 3).positive);
        }
        let bad = PshFunction::custom(1, Arc::new(|z: &[C64]| -z[0].norm_sqr())).unwrap();
        let rep = positivity_check(&Current::potential(bad), 10, 3);
        assert!(!rep.positive);
        assert!(rep.witness.unwrap().point.is_some());
    }

    #[test]
    fn potential_pullback_composes() {
        let u = PshFunction::smoothed_log_max(vec![c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 2.0)], 0.7).unwrap();
        let f1 = &sample_grassmannian(2, 3, 1, 1).unwrap()[0];
        let f2 = &sample_grassmannian(1, 2, 1, 2).unwrap()[0];
        let a = u.pullback(f1).unwrap().pullback(f2).unwrap();
        let b = u.pullback(&f1.compose(f2).unwrap()).unwrap();
        for w in [c(0.3, 0.1), c(-2.0, 1.0), c(5.0, -4.0)] {
            assert!((a.value(&[w]) - b.value(&[w])).abs() < 1e-10);
        }
    }

    #[test]
    fn nonneg_sum_validates_members() {
        let a = Current::ConstForm(ConstForm::kahler(2).unwrap());
        let b = Current::ConstForm(ConstForm::kahler_power(2, 2).unwrap());
        assert!(Current::nonneg_sum(vec![(1.0, a.clone()), (1.0, b)]).is_err());
        assert!(Current::nonneg_sum(vec![(-1.0, a.clone())]).is_err());
        assert!(Current::nonneg_sum(vec![(0.5, a.clone()), (2.0, a)]).is_ok());
    }

    #[test]
    fn exact_nu_for_kahler_powers() {
        // beta^k on C^n has nu(r) = r^{2k}
        for n in 1..4 {
            for k in 0..=n {
                let f = ConstForm::kahler_power(n, k).unwrap();
                assert!((f.nu_exact(2.0) - 2f64.powi(2 * k as i32)).abs() < 1e-12);
            }
        }
    }
}
