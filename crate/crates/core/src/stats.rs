//! Running moments and a chunked, order-stable Monte Carlo driver.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::rng;

/// Count, mean and centred second moment (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: f64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        if self.count == 0.0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count / n;
        self.m2 += other.m2 + d * d * self.count * other.count / n;
        self.count = n;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2.0 {
            0.0
        } else {
            (self.m2 / (self.count - 1.0)).max(0.0)
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 1.0 {
            0.0
        } else {
            self.sd() / self.count.sqrt()
        }
    }
}

/// Mean of `sample(rng)` over `count` draws. Draw `i` comes from chunk
/// `i / CHUNK` of `stream(seed, chunk)`, and chunk results are merged in
/// index order, so the result does not depend on thread scheduling.
pub fn mc_moments<F>(count: usize, seed: u64, sample: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let parts: Vec<Result<Moments>> = (0..rng::chunks(count))
        .into_par_iter()
        .map(|c| {
            let mut g = rng::stream(seed, c as u64);
            let mut m = Moments::default();
            for _ in rng::chunk_range(c, count) {
                m.push(sample(&mut g)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Like [`mc_moments`] but each draw carries a reusable scratch buffer.
pub fn mc_moments_with<F, S>(count: usize, seed: u64, init: impl Fn() -> S + Sync, sample: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut S) -> Result<f64> + Sync,
{
    let parts: Vec<Result<Moments>> = (0..rng::chunks(count))
        .into_par_iter()
        .map(|c| {
            let mut g = rng::stream(seed, c as u64);
            let mut scratch = init();
            let mut m = Moments::default();
            for _ in rng::chunk_range(c, count) {
                m.push(sample(&mut g, &mut scratch)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.5 - 3.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);
        let naive_mean = xs.iter().sum::<f64>() / 1000.0;
        assert!((all.mean - naive_mean).abs() < 1e-12);
    }

    #[test]
    fn driver_is_deterministic_and_unbiased() {
        let run = || mc_moments(50_000, 11, |g| Ok(g.random::<f64>())).unwrap();
        let a = run();
        let b = run();
        assert_eq!(a, b);
        assert!((a.mean - 0.5).abs() < 4.0 * a.stderr());
        assert!((a.variance() - 1.0 / 12.0).abs() < 2e-3);
    }
}
