//! Entire functions on `C^n` used to build zero-set currents.
//!
//! Evaluation is log-scaled: `f(z) = exp(log_scale) * value`, so exponential
//! families can be handled on contours and spheres where `|f|` itself would
//! overflow an `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{CVector, Frame, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance below which pulled-back coefficients count as zero.
const PRUNE_TOL: f64 = 1e-12;

/// Multivariate polynomial as a list of `(exponent vector, coefficient)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMap {
    n_vars: usize,
    terms: Vec<(Vec<u32>, C64)>,
}

impl PolynomialMap {
    /// Merges duplicate monomials and drops exact zeros.
    pub fn new(n_vars: usize, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::config("polynomial needs at least one variable"));
        }
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (exp, c) in terms {
            if exp.len() != n_vars {
                return Err(Error::config(format!(
                    "exponent vector {exp:?} does not have {n_vars} entries"
                )));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::config("polynomial coefficients must be finite"));
            }
            *map.entry(exp).or_insert(ZERO) += c;
        }
        Ok(Self::from_map(n_vars, map))
    }

    fn from_map(n_vars: usize, map: BTreeMap<Vec<u32>, C64>) -> Self {
        PolynomialMap {
            n_vars,
            terms: map.into_iter().filter(|(_, c)| *c != ZERO).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[(Vec<u32>, C64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn coefficient_mass(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    fn eval(&self, z: &[C64], grad: Option<&mut [C64]>) -> C64 {
        let mut value = ZERO;
        let want_grad = grad.is_some();
        let mut g = vec![ZERO; if want_grad { self.n_vars } else { 0 }];
        for (exp, c) in &self.terms {
            let mut mono = *c;
            for (zi, &e) in z.iter().zip(exp) {
                if e > 0 {
                    mono *= zi.powu(e);
                }
            }
            value += mono;
            if want_grad {
                for i in 0..self.n_vars {
                    let e = exp[i];
                    if e == 0 {
                        continue;
                    }
                    let mut d = *c * e as f64;
                    for (k, (zk, &ek)) in z.iter().zip(exp).enumerate() {
                        let p = if k == i { ek - 1 } else { ek };
                        if p > 0 {
                            d *= zk.powu(p);
                        }
                    }
                    g[i] += d;
                }
            }
        }
        if let Some(out) = grad {
            out.copy_from_slice(&g);
        }
        value
    }

    fn mul(&self, other: &PolynomialMap) -> PolynomialMap {
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *map.entry(e).or_insert(ZERO) += ca * cb;
            }
        }
        Self::from_map(self.n_vars, map)
    }

    fn constant(n_vars: usize, c: C64) -> PolynomialMap {
        Self::from_map(n_vars, BTreeMap::from([(vec![0; n_vars], c)]))
    }

    /// `p(F w)` expanded as a polynomial in `w`. Coefficients below
    /// `1e-12 * sum |c|` are pruned.
    pub fn pullback(&self, frame: &Frame) -> Result<PolynomialMap> {
        if frame.ambient_dim() != self.n_vars {
            return Err(Error::config("polynomial pullback: dimension mismatch"));
        }
        let q = frame.sub_dim();
        // z_i as linear polynomials in w
        let linear: Vec<PolynomialMap> = (0..self.n_vars)
            .map(|i| {
                let mut map = BTreeMap::new();
                for j in 0..q {
                    let mut e = vec![0u32; q];
                    e[j] = 1;
                    map.insert(e, frame.entry(i, j));
                }
                Self::from_map(q, map)
            })
            .collect();
        let mut acc: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (exp, c) in &self.terms {
            let mut prod = Self::constant(q, *c);
            for (i, &e) in exp.iter().enumerate() {
                for _ in 0..e {
                    prod = prod.mul(&linear[i]);
                }
            }
            for (e, v) in prod.terms {
                *acc.entry(e).or_insert(ZERO) += v;
            }
        }
        let tol = PRUNE_TOL * self.coefficient_mass();
        Ok(Self::from_map(
            q,
            acc.into_iter().filter(|(_, c)| c.norm() > tol).collect(),
        ))
    }
}

/// An affine form `coeffs . z + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vec<C64>,
    pub constant: C64,
}

impl AffineForm {
    fn eval(&self, z: &[C64]) -> C64 {
        dot(&self.coeffs, z) + self.constant
    }
}

pub type CustomEvaluator = Arc<dyn Fn(&[C64]) -> (C64, Vec<C64>) + Send + Sync>;

#[derive(Clone)]
pub enum HoloKind {
    Polynomial(PolynomialMap),
    /// `linear . z - exp(exponent . z)`
    ExpGraph { linear: Vec<C64>, exponent: Vec<C64> },
    /// `linear . z - sin(argument . z)`
    SinGraph { linear: Vec<C64>, argument: Vec<C64> },
    /// Product of affine forms.
    AffineProduct(Vec<AffineForm>),
    /// User-supplied entire function returning value and holomorphic gradient,
    /// optionally precomposed with a frame.
    Custom {
        n_inner: usize,
        evaluator: CustomEvaluator,
        frame: Option<Frame>,
    },
}

impl fmt::Debug for HoloKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloKind::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            HoloKind::ExpGraph { linear, exponent } => f
                .debug_struct("ExpGraph")
                .field("linear", linear)
                .field("exponent", exponent)
                .finish(),
            HoloKind::SinGraph { linear, argument } => f
                .debug_struct("SinGraph")
                .field("linear", linear)
                .field("argument", argument)
                .finish(),
            HoloKind::AffineProduct(v) => f.debug_tuple("AffineProduct").field(v).finish(),
            HoloKind::Custom { n_inner, frame, .. } => f
                .debug_struct("Custom")
                .field("n_inner", n_inner)
                .field("frame", frame)
                .finish_non_exhaustive(),
        }
    }
}

/// Log-scaled evaluation: the true value is `exp(log_scale) * value`, and
/// likewise for every gradient entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledEval {
    pub log_scale: f64,
    pub value: C64,
    pub grad: Vec<C64>,
}

impl ScaledEval {
    /// `log |f|^2`; `-inf` at an exact zero.
    pub fn log_abs_sq(&self) -> f64 {
        2.0 * self.log_scale + self.value.norm_sqr().ln()
    }
}

/// An entire function on `C^n`, times a nonzero constant factor.
#[derive(Debug, Clone)]
pub struct HoloFunction {
    n_vars: usize,
    factor: C64,
    kind: HoloKind,
}

fn dot(a: &[C64], z: &[C64]) -> C64 {
    a.iter().zip(z).map(|(x, y)| x * y).sum()
}

fn check_len(v: &[C64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::config(format!("{what} has {} entries, expected {n}", v.len())));
    }
    if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::config(format!("{what} must be finite")));
    }
    Ok(())
}

/// Coefficients of the linear form `a . (F w)` in `w`.
fn pull_linear(a: &[C64], frame: &Frame) -> Vec<C64> {
    (0..frame.sub_dim())
        .map(|j| (0..frame.ambient_dim()).map(|i| a[i] * frame.entry(i, j)).sum())
        .collect()
}

fn prune(v: Vec<C64>, reference: f64) -> Vec<C64> {
    let tol = PRUNE_TOL * reference;
    v.into_iter()
        .map(|c| if c.norm() <= tol { ZERO } else { c })
        .collect()
}

fn l1(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

impl HoloFunction {
    pub fn polynomial(p: PolynomialMap) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::config("polynomial is identically zero"));
        }
        Ok(HoloFunction {
            n_vars: p.n_vars,
            factor: ONE,
            kind: HoloKind::Polynomial(p),
        })
    }

    /// `linear . z - exp(exponent . z)`.
    pub fn exp_graph(linear: Vec<C64>, exponent: Vec<C64>) -> Result<Self> {
        let n = linear.len();
        if n == 0 {
            return Err(Error::config("exp_graph needs at least one variable"));
        }
        check_len(&linear, n, "exp_graph linear part")?;
        check_len(&exponent, n, "exp_graph exponent")?;
        Ok(HoloFunction {
            n_vars: n,
            factor: ONE,
            kind: HoloKind::ExpGraph { linear, exponent },
        })
    }

    /// `linear . z - sin(argument . z)`.
    pub fn sin_graph(linear: Vec<C64>, argument: Vec<C64>) -> Result<Self> {
        let n = linear.len();
        if n == 0 {
            return Err(Error::config("sin_graph needs at least one variable"));
        }
        check_len(&linear, n, "sin_graph linear part")?;
        check_len(&argument, n, "sin_graph argument")?;
        if l1(&linear) == 0.0 && l1(&argument) == 0.0 {
            return Err(Error::config("sin_graph is identically zero"));
        }
        Ok(HoloFunction {
            n_vars: n,
            factor: ONE,
            kind: HoloKind::SinGraph { linear, argument },
        })
    }

    pub fn affine_product(factors: Vec<AffineForm>) -> Result<Self> {
        let n = factors
            .first()
            .map(|f| f.coeffs.len())
            .ok_or_else(|| Error::config("affine product needs at least one factor"))?;
        if n == 0 {
            return Err(Error::config("affine forms need at least one variable"));
        }
        for f in &factors {
            check_len(&f.coeffs, n, "affine form")?;
            if l1(&f.coeffs) == 0.0 && f.constant == ZERO {
                return Err(Error::config("affine factor is identically zero"));
            }
        }
        Ok(HoloFunction {
            n_vars: n,
            factor: ONE,
            kind: HoloKind::AffineProduct(factors),
        })
    }

    /// Wraps a user evaluator. It must be entire, return the holomorphic
    /// gradient, and be safe to call from many threads.
    pub fn custom(n_vars: usize, evaluator: CustomEvaluator) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::config("custom function needs at least one variable"));
        }
        Ok(HoloFunction {
            n_vars,
            factor: ONE,
            kind: HoloKind::Custom {
                n_inner: n_vars,
                evaluator,
                frame: None,
            },
        })
    }

    /// `c * f` for a nonzero constant `c`.
    pub fn scaled(mut self, c: C64) -> Result<Self> {
        if c == ZERO || !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::config("scale factor must be finite and nonzero"));
        }
        self.factor *= c;
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn kind(&self) -> &HoloKind {
        &self.kind
    }

    pub fn factor(&self) -> C64 {
        self.factor
    }

    /// Log-scaled value and gradient at `z`.
    pub fn eval_scaled(&self, z: &[C64]) -> ScaledEval {
        let mut out = self.eval_scaled_inner(z, true);
        out.value *= self.factor;
        out.grad.iter_mut().for_each(|g| *g *= self.factor);
        out
    }

    /// Log-scaled value only, as `(log_scale, mantissa)`.
    pub fn value_scaled(&self, z: &[C64]) -> (f64, C64) {
        let out = self.eval_scaled_inner(z, false);
        (out.log_scale, out.value * self.factor)
    }

    /// `log |f(z)|^2`, overflow-free.
    #[inline]
    pub fn log_abs_sq(&self, z: &[C64]) -> f64 {
        let (s, v) = self.value_scaled(z);
        2.0 * s + v.norm_sqr().ln()
    }

    fn eval_scaled_inner(&self, z: &[C64], with_grad: bool) -> ScaledEval {
        let n = self.n_vars;
        match &self.kind {
            HoloKind::Polynomial(p) => {
                let mut grad = vec![ZERO; if with_grad { n } else { 0 }];
                let value = p.eval(z, if with_grad { Some(&mut grad) } else { None });
                ScaledEval {
                    log_scale: 0.0,
                    value,
                    grad,
                }
            }
            HoloKind::ExpGraph { linear, exponent } => {
                let w = dot(exponent, z);
                let s = w.re.max(0.0);
                let damp = (-s).exp();
                let e = (w - s).exp();
                let value = dot(linear, z) * damp - e;
                let grad = if with_grad {
                    linear
                        .iter()
                        .zip(exponent)
                        .map(|(l, a)| l * damp - a * e)
                        .collect()
                } else {
                    Vec::new()
                };
                ScaledEval {
                    log_scale: s,
                    value,
                    grad,
                }
            }
            HoloKind::SinGraph { linear, argument } => {
                let w = dot(argument, z);
                let s = w.im.abs();
                let damp = (-s).exp();
                // e^{iw - s} and e^{-iw - s}
                let a = C64::new(-w.im - s, w.re).exp();
                let b = C64::new(w.im - s, -w.re).exp();
                let sin_m = (a - b) / C64::new(0.0, 2.0);
                let value = dot(linear, z) * damp - sin_m;
                let grad = if with_grad {
                    let cos_m = (a + b) * 0.5;
                    linear
                        .iter()
                        .zip(argument)
                        .map(|(l, c)| l * damp - c * cos_m)
                        .collect()
                } else {
                    Vec::new()
                };
                ScaledEval {
                    log_scale: s,
                    value,
                    grad,
                }
            }
            HoloKind::AffineProduct(factors) => {
                let vals: Vec<C64> = factors.iter().map(|f| f.eval(z)).collect();
                let value = vals.iter().product();
                let grad = if with_grad {
                    let k = vals.len();
                    let mut prefix = vec![ONE; k + 1];
                    for i in 0..k {
                        prefix[i + 1] = prefix[i] * vals[i];
                    }
                    let mut g = vec![ZERO; n];
                    let mut suffix = ONE;
                    for i in (0..k).rev() {
                        let others = prefix[i] * suffix;
                        for (gj, c) in g.iter_mut().zip(&factors[i].coeffs) {
                            *gj += others * c;
                        }
                        suffix *= vals[i];
                    }
                    g
                } else {
                    Vec::new()
                };
                ScaledEval {
                    log_scale: 0.0,
                    value,
                    grad,
                }
            }
            HoloKind::Custom {
                n_inner,
                evaluator,
                frame,
            } => match frame {
                None => {
                    let (value, grad) = evaluator(z);
                    ScaledEval {
                        log_scale: 0.0,
                        value,
                        grad: if with_grad { grad } else { Vec::new() },
                    }
                }
                Some(fr) => {
                    let mut zz = vec![ZERO; *n_inner];
                    fr.embed_into(z, &mut zz);
                    let (value, g_inner) = evaluator(&zz);
                    let grad = if with_grad {
                        (0..fr.sub_dim())
                            .map(|j| (0..*n_inner).map(|i| g_inner[i] * fr.entry(i, j)).sum())
                            .collect()
                    } else {
                        Vec::new()
                    };
                    ScaledEval {
                        log_scale: 0.0,
                        value,
                        grad,
                    }
                }
            },
        }
    }

    /// Plain value and holomorphic gradient. Fails if the true value is not
    /// representable in `f64`.
    pub fn evaluate(&self, z: &CVector) -> Result<(C64, Vec<C64>)> {
        if z.dim() != self.n_vars {
            return Err(Error::config(format!(
                "point in C^{} passed to a function on C^{}",
                z.dim(),
                self.n_vars
            )));
        }
        let e = self.eval_scaled(z.as_slice());
        let scale = e.log_scale.exp();
        let value = e.value * scale;
        let grad: Vec<C64> = e.grad.iter().map(|g| g * scale).collect();
        let finite = |c: &C64| c.re.is_finite() && c.im.is_finite();
        if !finite(&value) || !grad.iter().all(finite) {
            return Err(Error::numeric(
                "evaluator overflow",
                format!("z = {:?}", z.as_slice()),
            ));
        }
        Ok((value, grad))
    }

    /// `f o F` as a function on `C^q`. Fails with [`Error::DegenerateSlice`]
    /// when the composite vanishes identically.
    pub fn pullback(&self, frame: &Frame) -> Result<HoloFunction> {
        if frame.ambient_dim() != self.n_vars {
            return Err(Error::config(format!(
                "frame lives in C^{} but the function is on C^{}",
                frame.ambient_dim(),
                self.n_vars
            )));
        }
        let q = frame.sub_dim();
        let degenerate = || Error::DegenerateSlice("function vanishes identically on the subspace".into());
        let kind = match &self.kind {
            HoloKind::Polynomial(p) => {
                let pulled = p.pullback(frame)?;
                if pulled.is_zero() {
                    return Err(degenerate());
                }
                HoloKind::Polynomial(pulled)
            }
            HoloKind::ExpGraph { linear, exponent } => {
                let scale = l1(linear) + l1(exponent);
                HoloKind::ExpGraph {
                    linear: prune(pull_linear(linear, frame), scale),
                    exponent: prune(pull_linear(exponent, frame), scale),
                }
            }
            HoloKind::SinGraph { linear, argument } => {
                let scale = l1(linear) + l1(argument);
                let linear = prune(pull_linear(linear, frame), scale);
                let argument = prune(pull_linear(argument, frame), scale);
                if l1(&linear) == 0.0 && l1(&argument) == 0.0 {
                    return Err(degenerate());
                }
                HoloKind::SinGraph { linear, argument }
            }
            HoloKind::AffineProduct(factors) => {
                let mut out = Vec::with_capacity(factors.len());
                for f in factors {
                    let scale = l1(&f.coeffs) + f.constant.norm();
                    let coeffs = prune(pull_linear(&f.coeffs, frame), scale);
                    let constant = if f.constant.norm() <= PRUNE_TOL * scale {
                        ZERO
                    } else {
                        f.constant
                    };
                    if l1(&coeffs) == 0.0 && constant == ZERO {
                        return Err(degenerate());
                    }
                    out.push(AffineForm { coeffs, constant });
                }
                HoloKind::AffineProduct(out)
            }
            HoloKind::Custom {
                n_inner,
                evaluator,
                frame: inner,
            } => {
                let composed = match inner {
                    None => frame.clone(),
                    Some(f0) => f0.compose(frame)?,
                };
                let pulled = HoloFunction {
                    n_vars: q,
                    factor: self.factor,
                    kind: HoloKind::Custom {
                        n_inner: *n_inner,
                        evaluator: evaluator.clone(),
                        frame: Some(composed),
                    },
                };
                if pulled.vanishes_on_probes() {
                    return Err(degenerate());
                }
                return Ok(pulled);
            }
        };
        Ok(HoloFunction {
            n_vars: q,
            factor: self.factor,
            kind,
        })
    }

    fn vanishes_on_probes(&self) -> bool {
        // deterministic probe points spread over the unit polydisc
        (0..16).all(|k| {
            let z: Vec<C64> = (0..self.n_vars)
                .map(|i| {
                    let t = 0.37 + 1.618 * (k * self.n_vars + i) as f64;
                    C64::from_polar(0.3 + 0.6 * (t.sin() * 0.5 + 0.5), 2.399 * t)
                })
                .collect();
            self.value_scaled(&z).1 == ZERO
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_grassmannian;
    use crate::geometry::sample_sphere;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn poly(n: usize, terms: &[(&[u32], C64)]) -> HoloFunction {
        HoloFunction::polynomial(
            PolynomialMap::new(n, terms.iter().map(|(e, c)| (e.to_vec(), *c)).collect()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn square_value_and_gradient() {
        let f = poly(1, &[(&[2], c(1.0, 0.0))]);
        let (v, g) = f.evaluate(&CVector::from_real(&[3.0]).unwrap()).unwrap();
        assert_eq!(v, c(9.0, 0.0));
        assert_eq!(g, vec![c(6.0, 0.0)]);
    }

    #[test]
    fn exp_graph_value_and_gradient() {
        // z2 - e^{z1} at (0, 1)
        let f = HoloFunction::exp_graph(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let (v, g) = f.evaluate(&CVector::from_real(&[0.0, 1.0]).unwrap()).unwrap();
        assert!(v.norm() < 1e-15);
        assert!((g[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((g[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_graph_overflow_is_reported_but_log_modulus_is_finite() {
        let f = HoloFunction::exp_graph(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let z = CVector::from_real(&[2000.0, 0.0]).unwrap();
        assert!(matches!(f.evaluate(&z), Err(Error::Numeric { .. })));
        let l = f.log_abs_sq(z.as_slice());
        assert!((l - 4000.0).abs() < 1e-9);
    }

    fn fd_check(f: &HoloFunction, seed: u64) {
        let n = f.n_vars();
        let h = 1e-5;
        for p in sample_sphere(n, 1.3, 20, seed).unwrap().points {
            let (_, g) = f.evaluate(&p).unwrap();
            for i in 0..n {
                let mut zp = p.clone().into_inner();
                let mut zm = zp.clone();
                zp[i] += h;
                zm[i] -= h;
                let fp = f.evaluate(&CVector::new(zp).unwrap()).unwrap().0;
                let fm = f.evaluate(&CVector::new(zm).unwrap()).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                let rel = (fd - g[i]).norm() / g[i].norm().max(1.0);
                assert!(rel <= 1e-6, "{:?}: rel err {rel}", f.kind());
            }
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        fd_check(
            &poly(3, &[(&[2, 1, 0], c(1.0, -0.5)), (&[0, 0, 3], c(0.3, 0.2)), (&[1, 1, 1], c(-2.0, 0.0))]),
            1,
        );
        fd_check(
            &HoloFunction::exp_graph(vec![c(0.2, 0.1), c(1.0, 0.0)], vec![c(0.7, -0.4), c(0.1, 0.3)]).unwrap(),
            2,
        );
        fd_check(
            &HoloFunction::sin_graph(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.1, 0.2), c(0.0, 0.5)]).unwrap(),
            3,
        );
        fd_check(
            &HoloFunction::affine_product(vec![
                AffineForm { coeffs: vec![c(1.0, 0.0), c(-0.5, 0.2)], constant: c(0.1, 0.0) },
                AffineForm { coeffs: vec![c(0.3, 0.3), c(1.0, 0.0)], constant: c(0.0, -0.2) },
                AffineForm { coeffs: vec![c(-1.0, 0.4), c(1.0, 0.0)], constant: c(0.25, 0.0) },
            ])
            .unwrap(),
            4,
        );
    }

    #[test]
    fn pullback_of_parabola_to_first_axis() {
        // z2 - z1^2 restricted to span{(1,0)} is -w^2
        let f = poly(2, &[(&[0, 1], c(1.0, 0.0)), (&[2, 0], c(-1.0, 0.0))]);
        let g = f.pullback(&Frame::standard(2, 1).unwrap()).unwrap();
        match g.kind() {
            HoloKind::Polynomial(p) => assert_eq!(p.terms(), &[(vec![2], c(-1.0, 0.0))]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pullback_into_zero_set_is_degenerate() {
        let f = poly(2, &[(&[1, 0], c(1.0, 0.0))]);
        let line = Frame::new(vec![CVector::basis(2, 1)]).unwrap();
        assert!(f.pullback(&line).unwrap_err().is_degenerate());
        let g = HoloFunction::affine_product(vec![AffineForm {
            coeffs: vec![c(1.0, 0.0), c(0.0, 0.0)],
            constant: c(0.0, 0.0),
        }])
        .unwrap();
        assert!(g.pullback(&line).unwrap_err().is_degenerate());
    }

    #[test]
    fn pullback_agrees_with_composition() {
        let fs = vec![
            poly(3, &[(&[1, 2, 0], c(1.0, 0.5)), (&[0, 0, 2], c(-0.7, 0.0)), (&[0, 0, 0], c(0.2, 0.0))]),
            HoloFunction::exp_graph(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0)])
                .unwrap(),
            HoloFunction::custom(
                3,
                Arc::new(|z: &[C64]| (z[0] * z[1] - z[2], vec![z[1], z[0], c(-1.0, 0.0)])),
            )
            .unwrap(),
        ];
        let frames = sample_grassmannian(2, 3, 5, 21).unwrap();
        let ws = sample_sphere(2, 0.8, 5, 22).unwrap();
        for f in &fs {
            for (fr, w) in frames.iter().zip(&ws.points) {
                let g = f.pullback(fr).unwrap();
                let z = crate::geometry::frame_embed(fr, w).unwrap();
                let (a, ga) = g.evaluate(w).unwrap();
                let (b, gb) = f.evaluate(&z).unwrap();
                assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
                // chain rule: d(f o F)/dw_j = sum_i df/dz_i F_ij
                for j in 0..2 {
                    let expect: C64 = (0..3).map(|i| gb[i] * fr.entry(i, j)).sum();
                    assert!((ga[j] - expect).norm() < 1e-10 * expect.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn scaling_shifts_log_modulus() {
        let f = poly(2, &[(&[1, 1], c(1.0, 0.0)), (&[0, 0], c(-1.0, 0.0))]);
        let g = f.clone().scaled(c(5.0, 0.0)).unwrap();
        let z = [c(0.3, 1.0), c(-2.0, 0.1)];
        assert!((g.log_abs_sq(&z) - f.log_abs_sq(&z) - 25f64.ln()).abs() < 1e-12);
        assert!(f.scaled(c(0.0, 0.0)).is_err());
    }
}
