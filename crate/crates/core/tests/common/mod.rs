//! Independent numerical oracles: adaptive Gauss–Kronrod quadrature.
#![allow(dead_code, clippy::excessive_precision)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive quadrature: repeatedly bisects the panel with the
/// largest error estimate until the total estimate is below
/// `max(tol, 1e-14·|I|)` or the panel budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (est, err) = gk15(&f, a, b);
    let mut panels = vec![(a, b, est, err)];
    let (mut total, mut error) = (est, err);
    for _ in 0..2000 {
        if error <= tol.max(1e-14 * total.abs()) {
            break;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3))
            .expect("non-empty");
        let (lo, hi, e0, r0) = panels.swap_remove(worst);
        total -= e0;
        error -= r0;
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (e, r) = gk15(&f, l, h);
            total += e;
            error += r;
            panels.push((l, h, e, r));
        }
    }
    panels.iter().map(|p| p.2).sum()
}

/// Integral over the real line through `x = t / (1 - t²)`.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let g = |t: f64| {
        let d = 1.0 - t * t;
        f(t / d) * (1.0 + t * t) / (d * d)
    };
    // panels so that the bulk near the origin is resolved from the start
    let edges = [-1.0, -0.9, -0.5, 0.0, 0.5, 0.9, 1.0];
    edges.windows(2).map(|w| integrate(g, w[0], w[1], tol / 6.0)).sum()
}

/// Integral over `(-∞, b]`.
pub fn integrate_below<F: Fn(f64) -> f64>(f: F, b: f64, tol: f64) -> f64 {
    // x = b - s/(1-s), s ∈ [0, 1)
    let g = |s: f64| {
        let d = 1.0 - s;
        f(b - s / d) / (d * d)
    };
    [0.0, 0.5, 0.9, 1.0].windows(2).map(|w| integrate(g, w[0], w[1], tol / 3.0)).sum()
}

#[test]
fn oracle_self_check() {
    let gauss = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    assert!((integrate_real(gauss, 1e-13) - 1.0).abs() < 1e-12);
    assert!((integrate_below(gauss, 0.0, 1e-13) - 0.5).abs() < 1e-12);
    let cauchy = |x: f64| 1.0 / (std::f64::consts::PI * (1.0 + x * x));
    assert!((integrate_real(cauchy, 1e-12) - 1.0).abs() < 1e-10);
    assert!((integrate(|x| x * x, 0.0, 3.0, 1e-14) - 9.0).abs() < 1e-12);
}
