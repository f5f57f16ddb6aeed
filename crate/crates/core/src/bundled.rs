//! Concrete currents used by the experiments, the command line front-end
//! and the test suites.

use crate::currents::{ConstForm, Current, ProductSpace, PshFunction};
use crate::error::Result;
use crate::geometry::C64;
use crate::holo::{AffineForm, HoloFunction, PolynomialMap};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `[z_1 = 0]` in `C^n`.
pub fn hyperplane(n: usize) -> Result<Current> {
    let mut e = vec![0u32; n];
    e[0] = 1;
    Ok(Current::zero_set(HoloFunction::polynomial(PolynomialMap::new(n, vec![(e, c(1.0, 0.0))])?)?))
}

/// Slopes and offsets `(a_j, b_j)` of the lines `z_2 = a_j z_1 + b_j`
/// making up [`cubic_curve`].
pub const CUBIC_LINES: [((f64, f64), (f64, f64)); 3] = [
    ((0.5, 0.2), (0.1, 0.0)),
    ((-1.0, 0.3), (0.0, -0.2)),
    ((0.2, -0.7), (0.15, 0.1)),
];

/// Distances `|b_j| / sqrt(1 + |a_j|^2)` of the cubic's lines from 0.
pub fn cubic_offsets() -> Vec<f64> {
    CUBIC_LINES
        .iter()
        .map(|((ar, ai), (br, bi))| c(*br, *bi).norm() / (1.0 + c(*ar, *ai).norm_sqr()).sqrt())
        .collect()
}

/// A generic union of three lines in `C^2`, not through the origin.
pub fn cubic_curve() -> Result<Current> {
    let forms = CUBIC_LINES
        .iter()
        .map(|((ar, ai), (br, bi))| AffineForm {
            coeffs: vec![-c(*ar, *ai), c(1.0, 0.0)],
            constant: -c(*br, *bi),
        })
        .collect();
    Ok(Current::zero_set(HoloFunction::affine_product(forms)?))
}

/// `[z_2 = e^{z_1}]` in `C^2`.
pub fn exp_curve() -> Result<Current> {
    Ok(Current::zero_set(HoloFunction::exp_graph(
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    )?))
}

/// `[z_1 z_2 = 1]` in `C^2`.
pub fn hyperbola() -> Result<Current> {
    Ok(Current::zero_set(HoloFunction::polynomial(PolynomialMap::new(
        2,
        vec![(vec![1, 1], c(1.0, 0.0)), (vec![0, 0], c(-1.0, 0.0))],
    )?)?))
}

pub fn kahler(n: usize) -> Result<Current> {
    Ok(Current::ConstForm(ConstForm::kahler(n)?))
}

/// `dd^c log(|z_1|^2 + 1)`, a smooth closed positive current on `C^n`.
pub fn smoothed_hyperplane_potential(n: usize) -> Result<Current> {
    let mut a = vec![c(0.0, 0.0); n];
    a[0] = c(1.0, 0.0);
    Ok(Current::potential(PshFunction::smoothed_log_max(a, 1.0)?))
}

/// The product space `C^2 x C^1` of the directional instances.
pub fn product_space() -> ProductSpace {
    ProductSpace { n: 2, m: 1 }
}

/// `beta_z + beta_t`, `beta_z` and `[z_1 = 0]` on `C^2 x C^1`.
pub fn directional_instances() -> Result<Vec<(&'static str, Current)>> {
    Ok(vec![
        ("beta_z+beta_t", kahler(3)?),
        ("beta_z", Current::ConstForm(ConstForm::partial_kahler(3, &[0, 1])?)),
        ("hyperplane_z1", hyperplane(3)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_offsets_are_small() {
        let d = cubic_offsets();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|&x| x > 0.0 && x < 0.2));
    }

    #[test]
    fn instances_build() {
        assert_eq!(hyperplane(3).unwrap().dim(), 3);
        assert_eq!(exp_curve().unwrap().dim(), 2);
        assert_eq!(hyperbola().unwrap().dim(), 2);
        assert_eq!(directional_instances().unwrap().len(), 3);
        assert_eq!(product_space().total(), 3);
    }
}
