mod common;

use common::{central_difference, halton, integrate_split, sign_changes, tanh_sinh};
use statrs::distribution::{Continuous, Exp, Gamma, Normal};
use weakgrad::{make_stream, ParametricDistribution, StreamSpec};

/// Integration window `[lo, hi]` that holds all but a negligible tail of `d`.
type Ctor = Box<dyn Fn(f64) -> ParametricDistribution>;

fn window(d: &ParametricDistribution) -> (f64, f64) {
    use weakgrad::Family::*;
    match d.family() {
        Exponential { mean } => (0.0, 80.0 * mean),
        Gamma { shape, scale } => (0.0, (80.0 + 10.0 * shape) * scale),
        Erlang { stages, scale } => (0.0, (80.0 + 10.0 * f64::from(stages)) * scale),
        Gaussian { mean, stddev } => (mean - 14.0 * stddev, mean + 14.0 * stddev),
        Weibull {
            rate,
            location,
            reflected,
        } => {
            let reach = (80.0 / rate).sqrt();
            if reflected {
                (location - reach, location)
            } else {
                (location, location + reach)
            }
        }
    }
}

fn fd_step(theta: f64) -> f64 {
    1e-6 * theta.abs().max(1.0)
}

fn density_derivative(d: &ParametricDistribution, x: f64) -> f64 {
    let theta = d.theta().unwrap();
    central_difference(
        |t| d.with_theta(t).unwrap().density(x),
        theta,
        fd_step(theta),
    )
}

fn families() -> Vec<(&'static str, Ctor)> {
    vec![
        (
            "exponential",
            Box::new(|t| ParametricDistribution::exponential(t).unwrap()),
        ),
        (
            "gamma(0.5)",
            Box::new(|t| ParametricDistribution::gamma(0.5, t).unwrap()),
        ),
        (
            "gamma(1)",
            Box::new(|t| ParametricDistribution::gamma(1.0, t).unwrap()),
        ),
        (
            "gamma(3)",
            Box::new(|t| ParametricDistribution::gamma(3.0, t).unwrap()),
        ),
        (
            "gaussian(0.5)",
            Box::new(|t| ParametricDistribution::gaussian(t, 0.5).unwrap()),
        ),
        (
            "gaussian(1)",
            Box::new(|t| ParametricDistribution::gaussian(t, 1.0).unwrap()),
        ),
        (
            "gaussian(2)",
            Box::new(|t| ParametricDistribution::gaussian(t, 2.0).unwrap()),
        ),
    ]
}

/// Quasi-random `(θ, x)` points: θ in [0.5, 3] for scale families and
/// [-2, 2] for the Gaussian mean; x spread over the bulk of the density.
fn grid(name: &str, build: &dyn Fn(f64) -> ParametricDistribution) -> Vec<(f64, f64)> {
    (1..=100u64)
        .map(|i| {
            let (u, v) = (halton(i, 2), halton(i, 3));
            if name.starts_with("gaussian") {
                let theta = -2.0 + 4.0 * u;
                let sd = match build(0.0).family() {
                    weakgrad::Family::Gaussian { stddev, .. } => stddev,
                    _ => unreachable!(),
                };
                (theta, theta + sd * (-4.0 + 8.0 * v))
            } else {
                let theta = 0.5 + 2.5 * u;
                let mean = build(theta).mean();
                (theta, 0.02 + 5.0 * mean * v)
            }
        })
        .collect()
}

#[test]
fn decomposition_identity_against_finite_differences() {
    for (name, build) in families() {
        for (theta, x) in grid(name, build.as_ref()) {
            let d = build(theta);
            let t = d.decomposition().unwrap();
            let lhs = density_derivative(&d, x);
            let rhs = t.c * (t.plus.density(x) - t.minus.density(x));
            assert!(
                (lhs - rhs).abs() <= 1e-6,
                "{name} θ={theta} x={x}: fd {lhs} vs decomposition {rhs}"
            );
        }
    }
}

#[test]
fn decomposition_parts_are_normalized() {
    for (name, build) in families() {
        for theta in [0.5, 1.0, 2.7] {
            let t = build(theta).decomposition().unwrap();
            for part in [t.plus, t.minus] {
                let (lo, hi) = window(&part);
                let mass = tanh_sinh(|x| part.density(x), lo, hi, 1e-13);
                assert!(
                    (mass - 1.0).abs() <= 1e-8,
                    "{name} θ={theta} {}: mass {mass}",
                    part.name()
                );
            }
        }
    }
}

#[test]
fn nominal_densities_are_normalized() {
    for (name, build) in families() {
        let d = build(1.3);
        let (lo, hi) = window(&d);
        let mass = tanh_sinh(|x| d.density(x), lo, hi, 1e-13);
        assert!((mass - 1.0).abs() <= 1e-8, "{name}: mass {mass}");
    }
    for d in [
        ParametricDistribution::erlang(2, 1.5).unwrap(),
        ParametricDistribution::weibull2(0.5).unwrap(),
    ] {
        let (lo, hi) = window(&d);
        let mass = tanh_sinh(|x| d.density(x), lo, hi, 1e-13);
        assert!((mass - 1.0).abs() <= 1e-8, "{}: mass {mass}", d.name());
    }
}

/// `∫(∂f/∂θ)⁺ dx` and `∫(f⁺ − f⁻)⁺ dx` by quadrature, split at the sign
/// changes of each integrand.
fn positive_masses(d: &ParametricDistribution) -> (f64, f64) {
    let (lo, hi) = window(d);
    let t = d.decomposition().unwrap();
    let (plo, phi) = window(&t.plus);
    let (mlo, mhi) = window(&t.minus);
    let (lo, hi) = (lo.min(plo).min(mlo), hi.max(phi).max(mhi));
    let deriv = |x: f64| density_derivative(d, x);
    let kinks = sign_changes(deriv, lo, hi, 4000);
    let deriv_mass = integrate_split(|x| deriv(x).max(0.0), lo, hi, &kinks, 1e-12);
    let diff = |x: f64| t.plus.density(x) - t.minus.density(x);
    let kinks = sign_changes(diff, lo, hi, 4000);
    let diff_mass = integrate_split(|x| diff(x).max(0.0), lo, hi, &kinks, 1e-12);
    (deriv_mass, diff_mass)
}

#[test]
fn c_normalizes_the_positive_derivative() {
    // Pointwise ∂f/∂θ = c(f⁺ − f⁻) forces ∫(∂f/∂θ)⁺ = c·∫(f⁺ − f⁻)⁺, which
    // pins c once f⁺ and f⁻ are fixed.
    for (name, build) in families() {
        for theta in [0.5, 1.0, 2.0] {
            let d = build(theta);
            let (deriv_mass, diff_mass) = positive_masses(&d);
            let c = d.decomposition().unwrap().c;
            assert!(
                (deriv_mass / diff_mass - c).abs() <= 1e-6,
                "{name} θ={theta}: ratio {} vs c = {c}",
                deriv_mass / diff_mass
            );
        }
    }
}

#[test]
fn gaussian_c_is_the_positive_derivative_mass() {
    // f⁺ and f⁻ have disjoint supports, so the split is the Jordan
    // decomposition and c is the positive mass itself.
    for sd in [0.5, 1.0, 2.0] {
        let d = ParametricDistribution::gaussian(0.4, sd).unwrap();
        let (deriv_mass, diff_mass) = positive_masses(&d);
        assert!((diff_mass - 1.0).abs() < 1e-8);
        assert!((deriv_mass - d.decomposition().unwrap().c).abs() <= 1e-6);
    }
}

#[test]
fn frozen_c_values() {
    // Values of ∫(∂f/∂θ)⁺ / ∫(f⁺ − f⁻)⁺ from the quadrature oracle:
    // exponential(2) → 0.5, gamma(3, 2) → 1.5, gaussian(0, 1) → 0.3989422804.
    let cases = [
        (ParametricDistribution::exponential(2.0).unwrap(), 0.5),
        (ParametricDistribution::gamma(3.0, 2.0).unwrap(), 1.5),
        (ParametricDistribution::gaussian(0.0, 1.0).unwrap(), 0.398_942_280_4),
    ];
    for (d, c) in cases {
        let (deriv_mass, diff_mass) = positive_masses(&d);
        assert!((deriv_mass / diff_mass - c).abs() < 1e-6);
        assert!((d.decomposition().unwrap().c - c).abs() < 1e-9);
    }
}

#[test]
fn densities_match_statrs() {
    let e = Exp::new(1.0 / 2.0).unwrap();
    let g = Gamma::new(3.0, 1.0 / 2.0).unwrap();
    let n = Normal::new(0.5, 2.0).unwrap();
    let ed = ParametricDistribution::exponential(2.0).unwrap();
    let gd = ParametricDistribution::gamma(3.0, 2.0).unwrap();
    let nd = ParametricDistribution::gaussian(0.5, 2.0).unwrap();
    for i in 1..50 {
        let x = 0.2 * i as f64;
        assert!((e.pdf(x) - ed.density(x)).abs() < 1e-14);
        assert!((g.pdf(x) - gd.density(x)).abs() < 1e-14);
        assert!((n.pdf(x - 4.0) - nd.density(x - 4.0)).abs() < 1e-14);
    }
}

#[test]
fn score_matches_log_density_finite_difference() {
    let cases = [
        (ParametricDistribution::exponential(2.0).unwrap(), 4.0, Some(0.5)),
        (ParametricDistribution::exponential(1.0).unwrap(), 1.0, Some(0.0)),
        (ParametricDistribution::gaussian(0.0, 1.0).unwrap(), 2.0, Some(2.0)),
        (ParametricDistribution::gamma(3.0, 2.0).unwrap(), 6.0, None),
        (ParametricDistribution::gamma(0.5, 1.2).unwrap(), 0.3, None),
        (ParametricDistribution::erlang(3, 0.7).unwrap(), 1.1, None),
    ];
    for (d, x, expected) in cases {
        let theta = d.theta().unwrap();
        let fd = central_difference(
            |t| d.with_theta(t).unwrap().ln_density(x),
            theta,
            fd_step(theta),
        );
        let s = d.score(x).unwrap();
        assert!((fd - s).abs() < 1e-6, "{}: fd {fd} vs score {s}", d.name());
        if let Some(e) = expected {
            assert!((s - e).abs() < 1e-12);
        }
    }
}

#[test]
fn weight_equals_score_at_random_points() {
    let mut u = make_stream(StreamSpec::new(2024, 0));
    for i in 0..3000 {
        let a = 0.5 + 4.5 * u.next_uniform();
        let theta = 0.5 + 2.5 * u.next_uniform();
        let d = match i % 3 {
            0 => ParametricDistribution::exponential(theta).unwrap(),
            1 => ParametricDistribution::gamma(a, theta).unwrap(),
            _ => ParametricDistribution::gaussian(theta - 1.5, 0.5 + 1.5 * u.next_uniform()).unwrap(),
        };
        let x = d.sample(&mut u);
        let w = d.likelihood_ratio_weight(x).unwrap();
        let s = d.score(x).unwrap();
        assert!((w - s).abs() <= 1e-10, "{:?} x={x}: {w} vs {s}", d.family());
    }
}

#[test]
fn rayleigh_mean_by_quadrature() {
    // σ = 1 ⇒ rate 1/2; mean σ·sqrt(π/2) = 1.2533141373155.
    let d = ParametricDistribution::weibull2(0.5).unwrap();
    let (lo, hi) = window(&d);
    let m = tanh_sinh(|x| x * d.density(x), lo, hi, 1e-13);
    assert!((m - 1.253_314_137_315_5).abs() < 1e-10);
    assert!((d.mean() - m).abs() < 1e-10);
}

#[test]
fn gaussian_plus_part_is_positive_derivative_shape() {
    // θ + W with W ~ Weibull(2, 1/(2σ²)) has density (t/σ²)·exp(−t²/2σ²),
    // which is σ√(2π) times the positive part of ∂φ/∂θ.
    let sd = 1.7;
    let d = ParametricDistribution::gaussian(0.3, sd).unwrap();
    let t = d.decomposition().unwrap();
    for k in 1..40 {
        let x = 0.3 + 0.15 * k as f64;
        let deriv = density_derivative(&d, x);
        assert!((deriv.max(0.0) - t.c * t.plus.density(x)).abs() < 1e-8);
        let y = 0.3 - 0.15 * k as f64;
        let deriv = density_derivative(&d, y);
        assert!(((-deriv).max(0.0) - t.c * t.minus.density(y)).abs() < 1e-8);
    }
}
