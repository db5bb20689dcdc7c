//! Test-only numerical oracles, independent of the library's estimators.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh (double exponential) quadrature on `[a, b]`. Tolerates
/// integrable endpoint singularities; interior kinks should be split out by
/// the caller.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let width = b - a;
    let half = 0.5 * width;
    let mid = 0.5 * (a + b);
    let mut prev = f64::NAN;
    for level in 0..12 {
        let h = 0.5f64.powi(level);
        let mut sum = 0.0;
        let kmax = (4.0 / h) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let cu = u.cosh();
            let w = FRAC_PI_2 * t.cosh() / (cu * cu);
            if w == 0.0 || !w.is_finite() {
                continue;
            }
            // Distance from the nearer endpoint, as a fraction of the width,
            // computed without cancellation.
            let s = (-2.0 * u.abs()).exp();
            let frac = s / (1.0 + s);
            let x = if t == 0.0 {
                mid
            } else if t > 0.0 {
                b - width * frac
            } else {
                a + width * frac
            };
            if x <= a || x >= b {
                continue;
            }
            sum += w * f(x);
        }
        let estimate = half * h * sum;
        if level >= 3 && (estimate - prev).abs() <= tol * estimate.abs().max(1.0) {
            return estimate;
        }
        prev = estimate;
    }
    prev
}

/// Integrates over `[a, b]`, splitting at each listed interior point.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, splits: &[f64], tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(splits.iter().copied().filter(|&s| s > a && s < b));
    points.push(b);
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    points
        .windows(2)
        .map(|w| tanh_sinh(&f, w[0], w[1], tol))
        .sum()
}

/// Sign changes of `g` on `[a, b]`, located on a uniform grid and refined by
/// bisection.
pub fn sign_changes<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, grid: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (b - a) / grid as f64;
    let mut x0 = a + 0.5 * step;
    let mut g0 = g(x0);
    for i in 1..grid {
        let x1 = a + (i as f64 + 0.5) * step;
        let g1 = g(x1);
        if g0.signum() != g1.signum() {
            let (mut lo, mut hi) = (x0, x1);
            let glo = g0;
            for _ in 0..100 {
                let m = 0.5 * (lo + hi);
                if g(m).signum() == glo.signum() {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    roots
}

/// Central difference of `f` at `x` with step `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Radical-inverse (Halton) sequence in base `b`.
pub fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    let v = samples.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
