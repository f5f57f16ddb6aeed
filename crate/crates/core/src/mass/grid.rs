use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Increasing grid of radii, geometric unless built from explicit points.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    points: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min > 0.0) || !r_min.is_finite() || !r_max.is_finite() || !(r_max > r_min) {
            return Err(Error::config(format!(
                "grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n_points < 4 {
            return Err(Error::config(format!("grid needs at least 4 points, got {n_points}")));
        }
        let (a, b) = (r_min.ln(), r_max.ln());
        let step = (b - a) / (n_points - 1) as f64;
        let mut points: Vec<f64> = (0..n_points).map(|i| (a + step * i as f64).exp()).collect();
        // pin the endpoints exactly
        points[0] = r_min;
        points[n_points - 1] = r_max;
        Ok(RadialGrid { r_min, r_max, points })
    }

    /// Arbitrary strictly increasing positive radii.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::config("radius sequence needs at least 2 points"));
        }
        if !(points[0] > 0.0) || points.iter().any(|r| !r.is_finite()) || points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("radii must be finite, positive and strictly increasing"));
        }
        Ok(RadialGrid {
            r_min: points[0],
            r_max: points[points.len() - 1],
            points,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean ratio between consecutive points (exact for geometric grids).
    pub fn ratio(&self) -> f64 {
        (self.r_max / self.r_min).powf(1.0 / (self.points.len() - 1) as f64)
    }

    /// `log10(r_max / r_min)`.
    pub fn decades(&self) -> f64 {
        (self.r_max / self.r_min).log10()
    }

    /// The same grid dilated by `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<RadialGrid> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::config(format!("dilation factor must be positive, got {a}")));
        }
        RadialGrid::from_points(self.points.iter().map(|r| r * a).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileMethod {
    ExactCount,
    SphericalMean,
    McVolume,
    /// Closed form for constant-coefficient forms.
    ClosedForm,
    /// Weighted sum of members computed by different methods.
    Mixed,
}

impl ProfileMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            ProfileMethod::ExactCount => "exact-count",
            ProfileMethod::SphericalMean => "spherical-mean",
            ProfileMethod::McVolume => "mc-volume",
            ProfileMethod::ClosedForm => "closed-form",
            ProfileMethod::Mixed => "mixed",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ProfileMethod::ExactCount | ProfileMethod::ClosedForm)
    }
}

/// `r -> nu(r)` on a grid with Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub method: ProfileMethod,
    /// Grid indices whose raw estimate was negative by more than 3 standard
    /// errors before clamping; nonempty means the budget is too small.
    pub flagged: Vec<usize>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>, stderr: Vec<f64>, method: ProfileMethod) -> Result<Self> {
        Self::with_flags(grid, values, stderr, method, Vec::new())
    }

    pub fn with_flags(
        grid: RadialGrid,
        values: Vec<f64>,
        stderr: Vec<f64>,
        method: ProfileMethod,
        flagged: Vec<usize>,
    ) -> Result<Self> {
        if values.len() != grid.len() || stderr.len() != grid.len() {
            return Err(Error::config("profile length does not match its grid"));
        }
        if values.iter().chain(&stderr).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::numeric(
                "profile values must be finite and nonnegative",
                format!("grid [{}, {}]", grid.r_min(), grid.r_max()),
            ));
        }
        Ok(RadialProfile {
            grid,
            values,
            stderr,
            method,
            flagged,
        })
    }

    /// Profile of an explicit function, with zero error.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.points().iter().map(|&r| f(r)).collect();
        let stderr = vec![0.0; values.len()];
        Self::new(grid, values, stderr, ProfileMethod::ClosedForm)
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `sum w_i P_i` over profiles on the same grid; errors add in quadrature.
    pub fn weighted_sum(parts: &[(f64, RadialProfile)]) -> Result<RadialProfile> {
        let first = &parts
            .first()
            .ok_or_else(|| Error::config("empty weighted sum"))?
            .1;
        let len = first.len();
        let mut values = vec![0.0; len];
        let mut var = vec![0.0; len];
        let mut flagged = Vec::new();
        for (w, p) in parts {
            if p.grid != first.grid {
                return Err(Error::config("weighted sum of profiles on different grids"));
            }
            for i in 0..len {
                values[i] += w * p.values[i];
                var[i] += (w * p.stderr[i]).powi(2);
            }
            flagged.extend(&p.flagged);
        }
        flagged.sort_unstable();
        flagged.dedup();
        let method = if parts.iter().all(|(_, p)| p.method == first.method) {
            first.method
        } else {
            ProfileMethod::Mixed
        };
        Self::with_flags(
            first.grid.clone(),
            values,
            var.into_iter().map(f64::sqrt).collect(),
            method,
            flagged,
        )
    }

    /// CSV with header `r,value,stderr,method`, 17 significant digits, LF
    /// line endings.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,value,stderr,method\n");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt17(self.radii()[i]),
                fmt17(self.values[i]),
                fmt17(self.stderr[i]),
                self.method.tag()
            );
        }
        s
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Which block a directional profile integrates over at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `N(r)`: ball of radius `r` in the `z` block times a fixed region.
    ZBlock,
    /// `M(r)`: fixed region times a ball of radius `r` in the `t` block.
    TBlock,
}

impl Direction {
    pub fn tag(&self) -> &'static str {
        match self {
            Direction::ZBlock => "z-block",
            Direction::TBlock => "t-block",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalProfile {
    pub profile: RadialProfile,
    pub direction: Direction,
}

impl DirectionalProfile {
    pub fn values(&self) -> &[f64] {
        &self.profile.values
    }

    pub fn stderr(&self) -> &[f64] {
        &self.profile.stderr
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.profile.grid
    }

    /// Nondecreasing up to `k` combined standard errors between neighbours.
    pub fn is_nondecreasing_within(&self, k: f64) -> bool {
        is_nondecreasing_within(&self.profile, k)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,value,stderr,direction\n");
        for i in 0..self.profile.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt17(self.profile.radii()[i]),
                fmt17(self.profile.values[i]),
                fmt17(self.profile.stderr[i]),
                self.direction.tag()
            );
        }
        s
    }
}

pub fn is_nondecreasing_within(p: &RadialProfile, k: f64) -> bool {
    p.values.windows(2).zip(p.stderr.windows(2)).all(|(v, s)| {
        let tol = k * (s[0] * s[0] + s[1] * s[1]).sqrt();
        v[1] >= v[0] - tol - 1e-12 * v[0].abs()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric() {
        let g = RadialGrid::new(1.0, 100.0, 5).unwrap();
        let p = g.points();
        assert_eq!(p[0], 1.0);
        assert_eq!(p[4], 100.0);
        for w in p.windows(2) {
            assert!((w[1] / w[0] - g.ratio()).abs() < 1e-12);
        }
        assert!((g.decades() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(RadialGrid::new(0.0, 1.0, 5).is_err());
        assert!(RadialGrid::new(2.0, 1.0, 5).is_err());
        assert!(RadialGrid::new(1.0, 2.0, 3).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = RadialGrid::new(1.0, 8.0, 4).unwrap();
        let p = RadialProfile::from_fn(g, |r| r).unwrap();
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,value,stderr,method");
        assert_eq!(lines[1], "1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,closed-form");
        assert_eq!(lines.len(), 5);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn negative_values_are_rejected() {
        let g = RadialGrid::new(1.0, 8.0, 4).unwrap();
        assert!(RadialProfile::new(g, vec![1.0, -1.0, 1.0, 1.0], vec![0.0; 4], ProfileMethod::McVolume).is_err());
    }

    #[test]
    fn weighted_sum_adds_in_quadrature() {
        let g = RadialGrid::new(1.0, 8.0, 4).unwrap();
        let a = RadialProfile::new(g.clone(), vec![1.0; 4], vec![0.3; 4], ProfileMethod::McVolume).unwrap();
        let b = RadialProfile::new(g, vec![2.0; 4], vec![0.4; 4], ProfileMethod::SphericalMean).unwrap();
        let s = RadialProfile::weighted_sum(&[(1.0, a), (1.0, b)]).unwrap();
        assert_eq!(s.values, vec![3.0; 4]);
        assert!((s.stderr[0] - 0.5).abs() < 1e-15);
        assert_eq!(s.method, ProfileMethod::Mixed);
    }
}
