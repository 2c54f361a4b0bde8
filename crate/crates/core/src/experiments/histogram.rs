use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One histogram bin `[left, right)` with its count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub left: f64,
    pub right: f64,
    pub count: f64,
}

/// Piecewise-constant error distribution: pick a bin with probability
/// proportional to its count, then a uniform point inside it.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    bins: Vec<Bin>,
    cumulative: Vec<f64>,
}

impl Histogram {
    pub fn new(bins: Vec<Bin>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::Invalid("histogram has no bins".into()));
        }
        for (i, b) in bins.iter().enumerate() {
            if !(b.left.is_finite() && b.right.is_finite() && b.count.is_finite()) {
                return Err(Error::Invalid(format!("histogram bin {i} has non-finite fields")));
            }
            if b.right < b.left {
                return Err(Error::Invalid(format!("histogram bin {i} has right < left")));
            }
            if b.count < 0.0 {
                return Err(Error::Invalid(format!("histogram bin {i} has negative count")));
            }
        }
        let mut total = 0.0;
        let cumulative: Vec<f64> = bins
            .iter()
            .map(|b| {
                total += b.count;
                total
            })
            .collect();
        if total <= 0.0 {
            return Err(Error::Invalid("histogram has zero total mass".into()));
        }
        Ok(Self { bins, cumulative })
    }

    /// Equal-width histogram of `samples` over their range.
    pub fn from_samples(samples: &[f64], n_bins: usize) -> Result<Self> {
        if samples.is_empty() || n_bins == 0 {
            return Err(Error::Invalid("need samples and at least one bin".into()));
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / n_bins as f64;
        let mut counts = vec![0.0; n_bins];
        for &s in samples {
            let idx = if width > 0.0 {
                (((s - lo) / width) as usize).min(n_bins - 1)
            } else {
                0
            };
            counts[idx] += 1.0;
        }
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| Bin {
                left: lo + i as f64 * width,
                right: if i + 1 == n_bins { hi } else { lo + (i + 1) as f64 * width },
                count,
            })
            .collect();
        Self::new(bins)
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().expect("non-empty");
        let target = rng.gen::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.bins.len() - 1);
        let b = self.bins[idx];
        b.left + rng.gen::<f64>() * (b.right - b.left)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeedStream;

    #[test]
    fn validation() {
        assert!(Histogram::new(vec![]).is_err());
        assert!(Histogram::new(vec![Bin { left: 0.0, right: 1.0, count: -1.0 }]).is_err());
        assert!(Histogram::new(vec![Bin { left: 0.0, right: 1.0, count: 0.0 }]).is_err());
        assert!(Histogram::new(vec![Bin { left: 1.0, right: 0.0, count: 1.0 }]).is_err());
    }

    #[test]
    fn point_mass() {
        let h = Histogram::new(vec![Bin { left: 0.0, right: 0.0, count: 3.0 }]).unwrap();
        let mut rng = SeedStream::new(1).rng();
        assert!((0..100).all(|_| h.sample(&mut rng) == 0.0));
    }

    #[test]
    fn empty_bins_never_sampled() {
        let h = Histogram::new(vec![
            Bin { left: 0.0, right: 1.0, count: 1.0 },
            Bin { left: 1.0, right: 2.0, count: 0.0 },
            Bin { left: 2.0, right: 3.0, count: 1.0 },
        ])
        .unwrap();
        let mut rng = SeedStream::new(2).rng();
        for _ in 0..10_000 {
            let x = h.sample(&mut rng);
            assert!(!(1.0..2.0).contains(&x));
        }
    }

    #[test]
    fn reproducible_and_mean_preserving() {
        let samples: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let h = Histogram::from_samples(&samples, 10).unwrap();
        let s = SeedStream::new(3);
        let draw = |n: usize| {
            let mut r = s.rng();
            (0..n).map(|_| h.sample(&mut r)).collect::<Vec<f64>>()
        };
        let (a, b) = (draw(50), draw(50));
        assert_eq!(a, b);
        let mut r = s.rng();
        let m = (0..100_000).map(|_| h.sample(&mut r)).sum::<f64>() / 1e5;
        assert!((m - 0.4995).abs() < 0.01);
    }
}
