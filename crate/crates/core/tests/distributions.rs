mod common;

use common::{integrate, integrate_below, integrate_real};
use skewt_core::distributions::{
    chi2_cdf, chi2_quantile, sample_skew_t, skew_t_moments, skew_t_pdf, student_t_cdf, student_t_pdf,
    trunc_normal_moments, SkewTParams,
};
use skewt_core::SeedStream;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

fn st(mu: f64, s2: f64, d: f64, nu: f64) -> SkewTParams<f64> {
    SkewTParams::new(mu, s2, d, nu).unwrap()
}

#[test]
fn skew_t_normalizes() {
    for &delta in &[0.0, 1.0, -1.0, 3.0, -3.0, 5.0] {
        for &nu in &[3.0, 4.0, 10.0] {
            for &(mu, s2) in &[(0.0, 1.0), (-2.0, 0.3)] {
                let p = st(mu, s2, delta, nu);
                let total = integrate_real(|z| skew_t_pdf(z, &p).unwrap(), 1e-12);
                assert!((total - 1.0).abs() < 1e-8, "delta={delta} nu={nu}: {total}");
            }
        }
    }
}

#[test]
fn skew_t_moments_match_quadrature() {
    for &(delta, nu) in &[(5.0, 4.5), (-2.0, 10.0), (1.0, 6.0)] {
        let p = st(0.7, 2.0, delta, nu);
        let (m, v) = skew_t_moments(&p).unwrap();
        let qm = integrate_real(|z| z * skew_t_pdf(z, &p).unwrap(), 1e-11);
        let qv = integrate_real(|z| (z - qm).powi(2) * skew_t_pdf(z, &p).unwrap(), 1e-10);
        assert!((m - qm).abs() < 1e-7 * (1.0 + m.abs()), "mean {m} vs {qm}");
        assert!((v - qv).abs() < 1e-6 * v, "var {v} vs {qv}");
    }
}

#[test]
fn student_t_cdf_matches_quadrature_and_statrs() {
    let q = integrate_below(|x| student_t_pdf(x, 0.0, 1.0, 5.0).unwrap(), 2.0, 1e-14);
    let c = student_t_cdf(2.0, 5.0).unwrap();
    assert!((c - q).abs() < 1e-11, "{c} vs {q}");
    assert!((c - 0.9490302605850709).abs() < 1e-14);
    for &nu in &[1.0, 2.5, 4.0, 30.0, 1e4] {
        let t = StudentsT::new(0.0, 1.0, nu).unwrap();
        for i in -40..=40 {
            let z = i as f64 * 0.25;
            let ours = student_t_cdf(z, nu).unwrap();
            assert!((ours - t.cdf(z)).abs() < 1e-12, "nu={nu} z={z}");
            assert!((ours + student_t_cdf(-z, nu).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn chi2_quantile_values() {
    assert!((chi2_quantile(0.99f64, 1).unwrap() - 6.634897).abs() < 1e-5);
    for dof in [1, 2, 5, 30] {
        let c = ChiSquared::new(dof as f64).unwrap();
        for &p in &[0.001f64, 0.1, 0.5, 0.9, 0.999] {
            let x = chi2_quantile(p, dof).unwrap();
            assert!((chi2_cdf(x, dof) - p).abs() < 1e-12);
            assert!((c.cdf(x) - p).abs() < 1e-10);
        }
    }
}

/// Moments of `N(m, s2)` truncated to `[0, ∞)` by quadrature, with the
/// density rescaled so that deep-tail cases do not underflow.
fn trunc_oracle(m: f64, s2: f64) -> (f64, f64) {
    let shift = if m < 0.0 { m * m / (2.0 * s2) } else { 0.0 };
    let g = |u: f64| (-(u - m).powi(2) / (2.0 * s2) + shift).exp();
    let s = s2.sqrt();
    let upper = m.max(0.0) + 40.0 * s;
    // split the decay region of the deep tail off from the rest
    let knee = if m < 0.0 { (20.0 * s2 / -m).min(upper) } else { upper };
    let int = |f: &dyn Fn(f64) -> f64| integrate(f, 0.0, knee, 1e-16) + integrate(f, knee, upper, 1e-16);
    let z0 = int(&g);
    let z1 = int(&|u| u * g(u));
    let z2 = int(&|u| u * u * g(u));
    (z1 / z0, z2 / z0)
}

#[test]
fn trunc_normal_matches_quadrature() {
    for &s2 in &[1.0, 0.25, 4.0] {
        for i in -60..=60 {
            let a = i as f64 * 0.5;
            let m = a * f64::sqrt(s2);
            let t = trunc_normal_moments(m, s2).unwrap();
            let (e1, e2) = trunc_oracle(m, s2);
            assert!(((t.mean - e1) / e1).abs() < 1e-9, "m={m} s2={s2}: {} vs {e1}", t.mean);
            assert!(((t.second_moment - e2) / e2).abs() < 1e-9, "m={m} s2={s2}: {} vs {e2}", t.second_moment);
            let var = t.second_moment - t.mean * t.mean;
            assert!(var > 0.0 && var <= s2 * (1.0 + 1e-12), "m={m}: var {var}");
        }
    }
}

#[test]
fn sampler_passes_chi2_goodness_of_fit() {
    let n = 100_000;
    for (seed, p) in [(1, st(0.0, 1.0, 5.0, 4.0)), (2, st(1.0, 2.0, -3.0, 10.0)), (3, st(0.0, 1.0, 0.0, 3.0))] {
        let stream = SeedStream::new(seed);
        // 49 interior edges at quantiles of an independent pilot sample
        let mut pilot = sample_skew_t(&p, 20_000, &mut stream.fork_named("pilot").rng()).unwrap();
        pilot.sort_by(f64::total_cmp);
        let edges: Vec<f64> = (1..50).map(|i| pilot[i * pilot.len() / 50]).collect();
        let pdf = |z: f64| skew_t_pdf(z, &p).unwrap();
        let mut probs = Vec::with_capacity(50);
        let mut cdf_prev = 0.0;
        let mut cdf = integrate_below(pdf, edges[0], 1e-13);
        probs.push(cdf);
        for w in edges.windows(2) {
            cdf_prev = cdf;
            cdf += integrate(pdf, w[0], w[1], 1e-13);
            probs.push(cdf - cdf_prev);
        }
        let _ = cdf_prev;
        probs.push(1.0 - cdf);

        let draws = sample_skew_t(&p, n, &mut stream.fork_named("draws").rng()).unwrap();
        let mut counts = vec![0usize; 50];
        for x in draws {
            counts[edges.partition_point(|&e| e <= x)] += 1;
        }
        let stat: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&o, &pr)| {
                let e = pr * n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        let p_value = 1.0 - chi2_cdf(stat, 49);
        assert!(p_value > 0.001, "seed {seed}: chi2 {stat}, p {p_value}");
    }
}

#[test]
fn sampler_passes_kolmogorov_smirnov() {
    let p = st(-1.0, 0.5, 2.0, 5.0);
    let mut xs = sample_skew_t(&p, 4000, &mut SeedStream::new(8).rng()).unwrap();
    xs.sort_by(f64::total_cmp);
    let pdf = |z: f64| skew_t_pdf(z, &p).unwrap();
    let mut cdf = integrate_below(pdf, xs[0], 1e-13);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, w) in xs.windows(2).enumerate() {
        d = d.max((cdf - i as f64 / n).abs()).max(((i + 1) as f64 / n - cdf).abs());
        cdf += integrate(pdf, w[0], w[1], 1e-13);
    }
    // 0.1 % critical value of the one-sample statistic
    assert!(d < 1.95 / n.sqrt(), "D = {d}");
}

#[test]
fn skew_t_sample_mean() {
    let xs = sample_skew_t(&st(0.0, 1.0, 5.0, 4.0), 1_000_000, &mut SeedStream::new(17).rng()).unwrap();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((m - 5.0).abs() < 0.05, "{m}");
}
