//! Growth orders of mass profiles: order of algebraicity, algebraicity,
//! proximate orders and types.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mass::grid::{fmt17, RadialProfile};

const LN10: f64 = std::f64::consts::LN_10;

/// Default flatness tolerance for [`is_algebraic`].
pub const DEFAULT_FLATNESS_TOL: f64 = 0.05;

/// One least-squares fit of `log nu` against `log r`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSlope {
    pub r_lo: f64,
    pub r_hi: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub rho: f64,
    /// Window `[r_lo, r_hi]` realizing the maximum slope.
    pub window: (f64, f64),
    /// RMS residual of the log-log fit in that window.
    pub fit_residual: f64,
    pub slope_series: Vec<WindowSlope>,
    /// Monte Carlo error of the slope, propagated from the profile errors.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderResult {
    Finite(OrderEstimate),
    /// The profile vanishes identically; the order is undefined.
    EmptyCurrent,
}

impl OrderResult {
    pub fn rho(&self) -> Option<f64> {
        match self {
            OrderResult::Finite(e) => Some(e.rho),
            OrderResult::EmptyCurrent => None,
        }
    }

    /// Order with the empty current counted as order 0.
    pub fn rho_or_zero(&self) -> f64 {
        self.rho().unwrap_or(0.0)
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        match self {
            OrderResult::EmptyCurrent => vec![("order".into(), "empty".into())],
            OrderResult::Finite(e) => vec![
                ("rho".into(), fmt17(e.rho)),
                ("rho_stderr".into(), fmt17(e.stderr)),
                ("window_lo".into(), fmt17(e.window.0)),
                ("window_hi".into(), fmt17(e.window.1)),
                ("fit_residual".into(), fmt17(e.fit_residual)),
                ("windows".into(), e.slope_series.len().to_string()),
            ],
        }
    }
}

struct Fit {
    slope: f64,
    rms: f64,
    stderr: f64,
}

/// Least squares of `y` on `x`; `rel_err` are the relative errors of the
/// profile values (errors of `log nu`).
fn fit(x: &[f64], y: &[f64], rel_err: &[f64]) -> Fit {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - ym - slope * (a - xm)).powi(2)).sum::<f64>() / n).sqrt();
    let stderr = x
        .iter()
        .zip(rel_err)
        .map(|(a, e)| ((a - xm) / sxx * e).powi(2))
        .sum::<f64>()
        .sqrt();
    Fit { slope, rms, stderr }
}

/// `limsup log nu / log r` as the largest one-decade least-squares slope in
/// the upper half (in `log r`) of the grid. Zero values are left out of the
/// regression and windows start after the last zero.
pub fn estimate_order(profile: &RadialProfile) -> Result<OrderResult> {
    let r = profile.radii();
    if profile.grid.decades() < 2.0 - 1e-9 {
        return Err(Error::config(format!(
            "order estimation needs at least 2 decades of radii, got {:.3}",
            profile.grid.decades()
        )));
    }
    if profile.is_identically_zero() {
        return Ok(OrderResult::EmptyCurrent);
    }
    let x: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let x_max = x[x.len() - 1];
    let mid = 0.5 * (x[0] + x_max);
    let after_zero = profile.values.iter().rposition(|&v| v <= 0.0).map_or(0, |i| i + 1);
    let first = after_zero.max(x.iter().position(|&v| v >= mid - 1e-12).unwrap_or(0));
    let y: Vec<f64> = profile.values.iter().map(|v| v.ln()).collect();
    let rel: Vec<f64> = profile.values.iter().zip(&profile.stderr).map(|(v, s)| s / v).collect();

    let mut windows: Vec<(usize, usize)> = Vec::new();
    for i in first..x.len() {
        if x[i] + LN10 > x_max + 1e-9 {
            break;
        }
        let j = (i..x.len()).take_while(|&j| x[j] <= x[i] + LN10 + 1e-9).last().unwrap_or(i);
        if j > i {
            windows.push((i, j));
        }
    }
    if windows.is_empty() {
        // positive data shorter than a decade: fit what is left
        if x.len() - first < 2 {
            return Err(Error::Domain(format!(
                "fewer than two positive values after r = {:e}; order undefined",
                r[first.min(r.len() - 1)]
            )));
        }
        windows.push((first, x.len() - 1));
    }

    let mut best: Option<(f64, (usize, usize), Fit)> = None;
    let mut series = Vec::with_capacity(windows.len());
    for (i, j) in windows {
        let f = fit(&x[i..=j], &y[i..=j], &rel[i..=j]);
        series.push(WindowSlope { r_lo: r[i], r_hi: r[j], slope: f.slope });
        if best.as_ref().is_none_or(|b| f.slope > b.0) {
            best = Some((f.slope, (i, j), f));
        }
    }
    let (slope, (i, j), f) = best.expect("at least one window");
    Ok(OrderResult::Finite(OrderEstimate {
        rho: slope.max(0.0),
        window: (r[i], r[j]),
        fit_residual: f.rms,
        slope_series: series,
        stderr: f.stderr,
    }))
}

/// Values over the top decade `[r_max / 10, r_max]`.
fn top_decade(profile: &RadialProfile) -> impl Iterator<Item = (f64, f64)> + '_ {
    let lo = profile.grid.r_max() / 10.0 * (1.0 - 1e-12);
    profile.radii().iter().zip(&profile.values).filter(move |(r, _)| **r >= lo).map(|(r, v)| (*r, *v))
}

/// Bounded profile test: the top decade varies by at most `tol` relative
/// to its largest value and the estimated order is at most `tol`.
pub fn is_algebraic(profile: &RadialProfile, tol: f64) -> Result<bool> {
    let order = estimate_order(profile)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (_, v) in top_decade(profile) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let flat = hi == 0.0 || (hi - lo) / hi <= tol;
    Ok(flat && order.rho_or_zero() <= tol)
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A candidate proximate order `rho(r)` with limit `rho_inf`.
#[derive(Clone)]
pub struct ProximateOrder {
    value: ScalarFn,
    derivative: Option<ScalarFn>,
    limit: f64,
}

impl std::fmt::Debug for ProximateOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProximateOrder")
            .field("limit", &self.limit)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl ProximateOrder {
    pub fn new(value: ScalarFn, derivative: Option<ScalarFn>, limit: f64) -> Result<Self> {
        if !limit.is_finite() || limit < 0.0 {
            return Err(Error::config(format!("limit order must be finite and nonnegative, got {limit}")));
        }
        Ok(ProximateOrder { value, derivative, limit })
    }

    pub fn constant(rho: f64) -> Result<Self> {
        Self::new(Arc::new(move |_| rho), Some(Arc::new(|_| 0.0)), rho)
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    fn check(r: f64) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("proximate orders live on r > 0, got {r}")));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        Self::check(r)?;
        Ok((self.value)(r))
    }

    /// `rho'(r)`, by central differences when no derivative was supplied.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        Self::check(r)?;
        Ok(match &self.derivative {
            Some(d) => d(r),
            None => {
                let h = 1e-6 * r;
                ((self.value)(r + h) - (self.value)(r - h)) / (2.0 * h)
            }
        })
    }

    /// `r log r rho'(r)`.
    pub fn log_derivative(&self, r: f64) -> Result<f64> {
        Ok(r * r.ln() * self.derivative(r)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    pub r: f64,
    pub value: f64,
    /// `|rho(r) - rho_inf|`
    pub gap: f64,
    /// `r log r rho'(r)`
    pub log_derivative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximateReport {
    pub passed: bool,
    pub gap_end: f64,
    pub log_derivative_end: f64,
    /// Probes breaking either tolerance.
    pub failing: Vec<ProbePoint>,
}

pub const PROXIMATE_GAP_TOL: f64 = 1e-2;
pub const PROXIMATE_DERIVATIVE_TOL: f64 = 5e-2;

/// Geometric probe grid `[r_min, r_max]` with `n` points.
pub fn probe_grid(r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() || n < 2 {
        return Err(Error::config("probe grid needs 0 < r_min < r_max and at least 2 points"));
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// Checks the proximate-order conditions at the end of the probe grid:
/// the gap to the limit has come down and is below `1e-2`, and
/// `|r log r rho'(r)|` is below `5e-2`.
pub fn check_proximate_order(rho: &ProximateOrder, probes: &[f64]) -> Result<ProximateReport> {
    if probes.len() < 2 {
        return Err(Error::config("need at least two probe radii"));
    }
    let mut points = Vec::with_capacity(probes.len());
    for &r in probes {
        let v = rho.value(r)?;
        points.push(ProbePoint {
            r,
            value: v,
            gap: (v - rho.limit).abs(),
            log_derivative: rho.log_derivative(r)?,
        });
    }
    let last = points.last().expect("non-empty");
    let max_gap = points.iter().map(|p| p.gap).fold(0.0, f64::max);
    let passed = last.gap < PROXIMATE_GAP_TOL
        && last.gap <= max_gap
        && last.log_derivative.abs() < PROXIMATE_DERIVATIVE_TOL
        && last.value.is_finite();
    let (gap_end, log_derivative_end) = (last.gap, last.log_derivative);
    let failing = points
        .into_iter()
        .filter(|p| !(p.gap < PROXIMATE_GAP_TOL) || !(p.log_derivative.abs() < PROXIMATE_DERIVATIVE_TOL))
        .collect();
    Ok(ProximateReport {
        passed,
        gap_end,
        log_derivative_end,
        failing,
    })
}

fn chi_shift(r: f64) -> f64 {
    if r == 1.0 {
        return (-1.0f64).exp();
    }
    (std::f64::consts::E - 1.0 + r).ln().ln() / r.ln()
}

fn chi_shift_derivative(r: f64) -> f64 {
    if (r - 1.0).abs() < 1e-4 {
        // removable singularity at r = 1
        let h = 2e-4;
        return (chi_shift(r + h) - chi_shift(r - h)) / (2.0 * h);
    }
    let s = std::f64::consts::E - 1.0 + r;
    let (l, lr) = (s.ln(), r.ln());
    1.0 / (s * l * lr) - l.ln() / (r * lr * lr)
}

/// `chi(r) = rho(r) + log log(e - 1 + r) / log r`, with `chi(1) = rho(1) + 1/e`.
pub fn build_chi(rho: &ProximateOrder) -> ProximateOrder {
    let (v, inner) = (rho.value.clone(), rho.clone());
    ProximateOrder {
        value: Arc::new(move |r| v(r) + chi_shift(r)),
        derivative: Some(Arc::new(move |r| {
            inner.derivative(r).unwrap_or(f64::NAN) + chi_shift_derivative(r)
        })),
        limit: rho.limit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeClass {
    Minimal,
    Normal,
    Maximal,
}

impl TypeClass {
    pub fn tag(&self) -> &'static str {
        match self {
            TypeClass::Minimal => "minimal",
            TypeClass::Normal => "normal",
            TypeClass::Maximal => "maximal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeThresholds {
    pub eps_min: f64,
    pub sigma_max: f64,
    /// Slope of `log(nu / r^rho)` against `log r` beyond which a monotone
    /// top-decade sequence is read as tending to 0 or to infinity.
    pub slope_tol: f64,
}

impl Default for TypeThresholds {
    fn default() -> Self {
        TypeThresholds {
            eps_min: 1e-3,
            sigma_max: 1e3,
            slope_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeEstimate {
    pub sigma: f64,
    pub class: TypeClass,
    /// `(r, nu(r) / r^rho(r))` over the top decade.
    pub probes: Vec<(f64, f64)>,
    pub trend: f64,
}

impl TypeEstimate {
    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("sigma".into(), fmt17(self.sigma)),
            ("type".into(), self.class.tag().into()),
            ("type_trend".into(), fmt17(self.trend)),
        ]
    }
}

/// `sigma = max nu(r) / r^rho(r)` over the top decade, classified by the
/// thresholds.
pub fn estimate_type(profile: &RadialProfile, rho: &ProximateOrder, th: TypeThresholds) -> Result<TypeEstimate> {
    let mut probes = Vec::new();
    for (r, v) in top_decade(profile) {
        probes.push((r, v / r.powf(rho.value(r)?)));
    }
    if probes.len() < 2 {
        return Err(Error::config("type estimation needs at least two radii in the top decade"));
    }
    let sigma = probes.iter().map(|p| p.1).fold(0.0, f64::max);
    let increasing = probes.windows(2).all(|w| w[1].1 > w[0].1);
    let decreasing = probes.windows(2).all(|w| w[1].1 < w[0].1);
    let trend = if probes.iter().all(|p| p.1 > 0.0) {
        let x: Vec<f64> = probes.iter().map(|p| p.0.ln()).collect();
        let y: Vec<f64> = probes.iter().map(|p| p.1.ln()).collect();
        fit(&x, &y, &vec![0.0; x.len()]).slope
    } else {
        0.0
    };
    let class = if sigma < th.eps_min || (decreasing && trend < -th.slope_tol) {
        TypeClass::Minimal
    } else if increasing && (sigma > th.sigma_max || trend > th.slope_tol) {
        TypeClass::Maximal
    } else {
        TypeClass::Normal
    };
    Ok(TypeEstimate { sigma, class, probes, trend })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass::grid::{ProfileMethod, RadialGrid};

    fn exact(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> RadialProfile {
        RadialProfile::from_fn(RadialGrid::new(lo, hi, n).unwrap(), f).unwrap()
    }

    #[test]
    fn power_and_constant_orders() {
        let p = exact(|r| r * r, 1.0, 1e4, 41);
        let e = estimate_order(&p).unwrap();
        assert!((e.rho().unwrap() - 2.0).abs() < 1e-12);
        let c = exact(|_| 7.0, 1.0, 1e4, 41);
        assert!(estimate_order(&c).unwrap().rho().unwrap().abs() < 1e-12);
    }

    #[test]
    fn oscillating_power_reports_upper_rate() {
        // the windowed slope of r^1.5 (1 + 0.1 sin log r) is
        // 1.5 + avg of 0.1 cos(t) / (1 + 0.1 sin t), which lies in [1.4, 1.6]
        let p = exact(|r| r.powf(1.5) * (1.0 + 0.1 * r.ln().sin()), 1.0, 1e4, 81);
        let rho = estimate_order(&p).unwrap().rho().unwrap();
        let x: Vec<f64> = p.radii().iter().map(|r| r.ln()).collect();
        let direct = (p.values[80].ln() - p.values[60].ln()) / (x[80] - x[60]);
        assert!((rho - 1.5).abs() < 0.1, "{rho}");
        assert!(rho >= direct - 1e-9);
    }

    #[test]
    fn empty_profile_has_no_order() {
        let p = exact(|_| 0.0, 1.0, 100.0, 9);
        assert_eq!(estimate_order(&p).unwrap(), OrderResult::EmptyCurrent);
        assert!(is_algebraic(&p, DEFAULT_FLATNESS_TOL).unwrap());
    }

    #[test]
    fn leading_zeros_are_skipped() {
        let p = exact(|r| if r < 5.0 { 0.0 } else { r }, 1.0, 1e3, 31);
        let e = match estimate_order(&p).unwrap() {
            OrderResult::Finite(e) => e,
            _ => panic!(),
        };
        assert!((e.rho - 1.0).abs() < 1e-12);
        assert!(e.window.0 >= 5.0);
    }

    #[test]
    fn short_grid_is_rejected() {
        assert!(estimate_order(&exact(|r| r, 1.0, 50.0, 9)).is_err());
    }

    #[test]
    fn algebraicity() {
        assert!(is_algebraic(&exact(|_| 1.0, 1.0, 100.0, 9), 0.05).unwrap());
        assert!(!is_algebraic(&exact(|r| r * r, 1.0, 100.0, 9), 0.05).unwrap());
        assert!(is_algebraic(&exact(|r| 3.0 - 1.0 / r, 1.0, 100.0, 9), 0.05).unwrap());
    }

    #[test]
    fn chi_values() {
        let rho = ProximateOrder::constant(1.3).unwrap();
        let chi = build_chi(&rho);
        assert_eq!(chi.value(1.0).unwrap(), 1.3 + (-1.0f64).exp());
        // log log(2e - 1) to 30 digits: 0.398695664133468648852452612186
        let e = std::f64::consts::E;
        assert!((chi.value(e).unwrap() - 1.3 - 0.398_695_664_133_468_6).abs() < 1e-14);
        assert!(chi.value(0.0).is_err());
        assert!((chi.value(1e200).unwrap() - 1.3).abs() < 0.02);
    }

    #[test]
    fn chi_derivative_matches_differences() {
        let chi = build_chi(&ProximateOrder::constant(0.5).unwrap());
        for r in [0.3, 0.99999, 1.5, 10.0, 1e5] {
            let h = 1e-6 * r;
            let fd = (chi.value(r + h).unwrap() - chi.value(r - h).unwrap()) / (2.0 * h);
            assert!((chi.derivative(r).unwrap() - fd).abs() < 1e-5 * (1.0 + fd.abs()), "{r}");
        }
    }

    #[test]
    fn proximate_order_checks() {
        let probes = probe_grid(10.0, 1e6, 30).unwrap();
        assert!(check_proximate_order(&ProximateOrder::constant(2.0).unwrap(), &probes).unwrap().passed);
        let wobbly = ProximateOrder::new(Arc::new(|r: f64| 1.0 + r.sin() / r.ln()), None, 1.0).unwrap();
        let rep = check_proximate_order(&wobbly, &probes).unwrap();
        assert!(!rep.passed);
        assert!(!rep.failing.is_empty());
        let chi = build_chi(&ProximateOrder::constant(1.0).unwrap());
        assert!(check_proximate_order(&chi, &probe_grid(10.0, 1e300, 60).unwrap()).unwrap().passed);
    }

    #[test]
    fn type_classes() {
        let two = ProximateOrder::constant(2.0).unwrap();
        let t = estimate_type(&exact(|r| 5.0 * r * r, 1.0, 1e3, 31), &two, TypeThresholds::default()).unwrap();
        assert!((t.sigma - 5.0).abs() < 1e-9);
        assert_eq!(t.class, TypeClass::Normal);
        let t = estimate_type(&exact(|r| r * r / r.ln(), 2.0, 1e3, 31), &two, TypeThresholds::default()).unwrap();
        assert_eq!(t.class, TypeClass::Minimal);
        let t = estimate_type(&exact(|r| r * r * r.ln(), 2.0, 1e3, 31), &two, TypeThresholds::default()).unwrap();
        assert_eq!(t.class, TypeClass::Maximal);
        let p = RadialProfile::new(
            RadialGrid::new(1.0, 1e4, 4).unwrap(),
            vec![1.0; 4],
            vec![0.0; 4],
            ProfileMethod::ExactCount,
        )
        .unwrap();
        assert!(estimate_type(&p, &two, TypeThresholds::default()).is_err());
    }
}
