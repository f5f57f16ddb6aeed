use rand::Rng;

use crate::error::{Error, Result};
use crate::forms::factorial;
use crate::geometry::{ball_point, CVector, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum RegionShape {
    Ball { radius: f64 },
    /// Half-widths along the real coordinates `(Re w_1, Im w_1, Re w_2, ..)`.
    Box { half_widths: Vec<f64> },
}

/// A relatively compact region of positive measure in one block of a
/// product space.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    center: CVector,
    shape: RegionShape,
}

impl RegionSpec {
    pub fn ball(center: CVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::config(format!("region radius must be positive, got {radius}")));
        }
        Ok(RegionSpec {
            center,
            shape: RegionShape::Ball { radius },
        })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("region dimension must be positive"));
        }
        Self::ball(CVector::zeros(dim), 1.0)
    }

    pub fn cuboid(center: CVector, half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.len() != 2 * center.dim() {
            return Err(Error::config(format!(
                "box in C^{} needs {} half-widths, got {}",
                center.dim(),
                2 * center.dim(),
                half_widths.len()
            )));
        }
        if half_widths.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::config("box half-widths must be positive (zero-measure region)"));
        }
        Ok(RegionSpec {
            center,
            shape: RegionShape::Box { half_widths },
        })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &CVector {
        &self.center
    }

    pub fn shape(&self) -> &RegionShape {
        &self.shape
    }

    /// Lebesgue measure in `R^{2 dim}`.
    pub fn lebesgue(&self) -> f64 {
        let m = self.dim();
        match &self.shape {
            RegionShape::Ball { radius } => {
                std::f64::consts::PI.powi(m as i32) * radius.powi(2 * m as i32) / factorial(m)
            }
            RegionShape::Box { half_widths } => half_widths.iter().map(|h| 2.0 * h).product(),
        }
    }

    /// `int_D beta^m = m! Lebesgue(D) / pi^m`; 1 for the unit ball.
    pub fn beta_measure(&self) -> f64 {
        let m = self.dim();
        factorial(m) * self.lebesgue() / std::f64::consts::PI.powi(m as i32)
    }

    pub fn contains(&self, w: &[C64]) -> bool {
        let c = self.center.as_slice();
        match &self.shape {
            RegionShape::Ball { radius } => {
                w.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() < radius * radius
            }
            RegionShape::Box { half_widths } => w.iter().zip(c).enumerate().all(|(j, (a, b))| {
                let d = a - b;
                d.re.abs() < half_widths[2 * j] && d.im.abs() < half_widths[2 * j + 1]
            }),
        }
    }

    /// Uniform point of the region.
    pub fn sample<R: Rng + ?Sized>(&self, g: &mut R, out: &mut [C64]) {
        let c = self.center.as_slice();
        match &self.shape {
            RegionShape::Ball { radius } => {
                ball_point(g, *radius, out);
                out.iter_mut().zip(c).for_each(|(o, b)| *o += b);
            }
            RegionShape::Box { half_widths } => {
                for (j, (o, b)) in out.iter_mut().zip(c).enumerate() {
                    let x: f64 = g.random_range(-1.0..1.0);
                    let y: f64 = g.random_range(-1.0..1.0);
                    *o = b + C64::new(x * half_widths[2 * j], y * half_widths[2 * j + 1]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn unit_ball_has_unit_beta_measure() {
        for m in 1..4 {
            assert!((RegionSpec::unit_ball(m).unwrap().beta_measure() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn box_measure_and_membership() {
        let b = RegionSpec::cuboid(CVector::zeros(1), vec![1.0, 0.5]).unwrap();
        assert!((b.lebesgue() - 2.0).abs() < 1e-15);
        assert!(b.contains(&[C64::new(0.9, 0.4)]));
        assert!(!b.contains(&[C64::new(0.9, 0.6)]));
        assert!(RegionSpec::cuboid(CVector::zeros(1), vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn samples_stay_inside() {
        let regions = [
            RegionSpec::ball(CVector::from_real(&[1.0, -2.0]).unwrap(), 0.5).unwrap(),
            RegionSpec::cuboid(CVector::from_real(&[3.0]).unwrap(), vec![0.1, 2.0]).unwrap(),
        ];
        let mut g = rng::stream(1, 0);
        for d in &regions {
            let mut w = vec![C64::new(0.0, 0.0); d.dim()];
            for _ in 0..1000 {
                d.sample(&mut g, &mut w);
                assert!(d.contains(&w));
            }
        }
    }
}
