use crate::currents::Current;
use crate::error::{Error, Result};
use crate::experiments::report::{describe_current, timer, ExperimentReport, FrameStats};
use crate::experiments::{slice_profiles, tag};
use crate::geometry::sample_grassmannian;
use crate::mass::grid::{fmt17, RadialGrid};
use crate::mass::profile::nu_profile;
use crate::rng;

const MIN_TERMS: usize = 6;
const TREND: f64 = 0.01;
const MAX_FRACTION: f64 = 0.05;

/// A ratio sequence trends to 0 when its last three terms all fall below
/// `0.01x` its first term; an identically zero sequence counts as well.
fn trends_to_zero(ratios: &[f64]) -> bool {
    let r: Vec<f64> = ratios.iter().copied().filter(|v| v.is_finite()).collect();
    if r.len() < 4 {
        return false;
    }
    let tail = &r[r.len() - 3..];
    if r[0] == 0.0 {
        return r.iter().all(|&v| v == 0.0);
    }
    tail.iter().all(|&v| v < TREND * r[0])
}

/// Tail ratios `nu_{T|L}(alpha r_m) / nu_T(r_m)` for random hyperplane
/// slices; passes when at most 5% of frames trend to 0 for every `alpha`.
pub fn ratio_degeneracy_check(
    t: &Current,
    r_sequence: &[f64],
    n_frames: usize,
    alpha_set: &[f64],
    budget: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = timer();
    if r_sequence.len() < MIN_TERMS {
        return Err(Error::config(format!("radius sequence needs at least {MIN_TERMS} terms")));
    }
    if alpha_set.is_empty() || alpha_set.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::config("alpha values must be positive and finite"));
    }
    if n_frames == 0 {
        return Err(Error::config("need at least one frame"));
    }
    let seq = RadialGrid::from_points(r_sequence.to_vec())?;
    let q = t.dim() - 1;
    if q == 0 {
        return Err(Error::config("hyperplane slices need n >= 2"));
    }
    let ambient = nu_profile(t, &seq, budget, rng::derive(seed, tag::AMBIENT))?;
    let frames = sample_grassmannian(q, t.dim(), n_frames, rng::derive(seed, tag::FRAMES))?;

    let mut rep = ExperimentReport::new("ratio_degeneracy");
    rep.input("current", describe_current(t))
        .input("q", q)
        .input("frames", n_frames)
        .input("budget", budget)
        .input("seed", seed)
        .input("r_sequence", r_sequence.iter().map(|r| fmt17(*r)).collect::<Vec<_>>().join(" "))
        .input("alpha_set", alpha_set.iter().map(|a| fmt17(*a)).collect::<Vec<_>>().join(" "));
    rep.columns = ["alpha", "r", "nu_T", "ratio_mean", "ratio_min", "ratio_max"]
        .map(String::from)
        .to_vec();
    let mut passed = true;
    let mut degenerate = 0;
    for (ai, &alpha) in alpha_set.iter().enumerate() {
        let grid = seq.scaled(alpha)?;
        let slices = slice_profiles(t, &frames, &vec![true; n_frames], &grid, budget, rng::derive(seed, ai as u64))?;
        degenerate = degenerate.max(slices.iter().filter(|s| s.is_none()).count());
        let ratios: Vec<Vec<f64>> = slices
            .iter()
            .flatten()
            .map(|p| p.values.iter().zip(&ambient.values).map(|(a, b)| a / b).collect())
            .collect();
        let trending = ratios.iter().filter(|r| trends_to_zero(r)).count();
        let fraction = if ratios.is_empty() { 1.0 } else { trending as f64 / ratios.len() as f64 };
        passed &= fraction <= MAX_FRACTION;
        rep.stat_f(&format!("degenerate_fraction[alpha={alpha}]"), fraction);
        for (m, &r) in seq.points().iter().enumerate() {
            let col: Vec<f64> = ratios.iter().map(|x| x[m]).filter(|v| v.is_finite()).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rep.rows.push(vec![alpha, r, ambient.values[m], mean, lo, hi]);
        }
    }
    rep.stat("rule", format!("trend below {}x first term; fraction <= {}", fmt17(TREND), fmt17(MAX_FRACTION)));
    rep.passed = Some(passed);
    rep.frames = Some(FrameStats {
        sampled: n_frames,
        degenerate,
    });
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::C64;
    use crate::holo::{HoloFunction, PolynomialMap};

    #[test]
    fn trend_rule() {
        assert!(trends_to_zero(&[1.0, 0.5, 0.1, 0.005, 0.001, 0.0001]));
        assert!(!trends_to_zero(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]));
        assert!(!trends_to_zero(&[0.0, 0.0, 2.0, 2.0, 2.0, 2.0]));
        assert!(trends_to_zero(&[0.0; 6]));
    }

    #[test]
    fn hyperplane_ratios_are_one() {
        let t = Current::zero_set(
            HoloFunction::polynomial(PolynomialMap::new(2, vec![(vec![1, 0], C64::new(1.0, 0.0))]).unwrap()).unwrap(),
        );
        let seq: Vec<f64> = (1..=6).map(|m| 2f64.powi(m)).collect();
        let rep = ratio_degeneracy_check(&t, &seq, 20, &[1.0, 0.5], 1000, 1).unwrap();
        assert_eq!(rep.passed, Some(true));
        for row in &rep.rows {
            assert!((row[3] - 1.0).abs() < 1e-9 && (row[4] - 1.0).abs() < 1e-9);
        }
        assert!(ratio_degeneracy_check(&t, &seq[..5], 20, &[1.0], 1000, 1).is_err());
    }
}
