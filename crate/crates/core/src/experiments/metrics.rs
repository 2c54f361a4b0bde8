use serde::{Deserialize, Serialize};

/// Summary statistics of an error sequence. `std` is the population
/// standard deviation, so `rmse² = mean² + std²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub rmse: f64,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
}

/// RMSE, mean, standard deviation and moment skewness `m₃ / m₂^{3/2}`
/// (zero when the sequence is constant).
pub fn error_stats(errors: &[f64]) -> ErrorStats {
    if errors.is_empty() {
        return ErrorStats {
            rmse: f64::NAN,
            mean: f64::NAN,
            std: f64::NAN,
            skewness: f64::NAN,
        };
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let (m2, m3) = errors.iter().fold((0.0, 0.0), |(m2, m3), &e| {
        let d = e - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let skewness = if m2 > f64::EPSILON * f64::EPSILON * mean.abs().max(1.0) {
        m3 / m2.powf(1.5)
    } else {
        0.0
    };
    ErrorStats {
        rmse,
        mean,
        std: m2.sqrt(),
        skewness,
    }
}

/// 5/25/50/75/95 % quantiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

impl QuantileSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            q05: quantile_sorted(&sorted, 0.05),
            q25: quantile_sorted(&sorted, 0.25),
            q50: quantile_sorted(&sorted, 0.50),
            q75: quantile_sorted(&sorted, 0.75),
            q95: quantile_sorted(&sorted, 0.95),
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.q05, self.q25, self.q50, self.q75, self.q95]
    }
}

/// Linear interpolation between order statistics at `h = (n - 1)·p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `100·(other - reference)/reference` elementwise.
pub fn percent_differences(other: &[f64], reference: &[f64]) -> Vec<f64> {
    other
        .iter()
        .zip(reference)
        .map(|(o, r)| 100.0 * (o - r) / r)
        .collect()
}
