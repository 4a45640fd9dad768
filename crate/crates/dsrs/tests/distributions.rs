use dsrs::distributions::{Family, SmoothingSpec};
use dsrs::numerics::reg_gamma_cdf_inv;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

#[test]
fn sigma_prime_examples() {
    assert_eq!(SmoothingSpec::standard(784, 1.0).unwrap().sigma_prime(), 1.0);
    assert_eq!(SmoothingSpec::generalized(784, 1.0, 0).unwrap().sigma_prime(), 1.0);
    let v = SmoothingSpec::generalized(784, 0.5, 380).unwrap().sigma_prime();
    assert!((v - 0.5 * (784.0f64 / 24.0).sqrt()).abs() < 1e-14);
    assert!((v - 2.857738033247041).abs() < 1e-12);
    let v = SmoothingSpec::generalized(4, 2.0, 1).unwrap().sigma_prime();
    assert!((v - 2.0 * 2.0f64.sqrt()).abs() < 1e-14);
}

#[test]
fn spec_validation() {
    assert!(SmoothingSpec::generalized(10, 1.0, 5).is_err());
    assert!(SmoothingSpec::standard(10, 0.0).is_err());
    assert!(SmoothingSpec::standard(10, 1.0).unwrap().truncated(-1.0).is_err());
    let t = SmoothingSpec::generalized(10, 1.0, 2).unwrap().truncated(3.0).unwrap();
    assert_eq!(t.family, Family::TruncatedGeneralizedGaussian);
    assert_eq!(t.parent().family, Family::GeneralizedGaussian);
}

#[test]
fn ball_mass_examples() {
    let s = SmoothingSpec::standard(2, 1.0).unwrap();
    assert_eq!(s.ball_mass(0.0), 0.0);
    assert!((s.ball_mass(1.0) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
    let t = s.truncated(1.3).unwrap();
    assert_eq!(t.ball_mass(1.3), 1.0);
    assert!((t.ball_mass(1.0) - s.ball_mass(1.0) / s.ball_mass(1.3)).abs() < 1e-15);
}

#[test]
fn nu_examples() {
    let s = SmoothingSpec::standard(2, 1.0).unwrap();
    let nu = s.truncated(1.0).unwrap().nu();
    assert!((nu - 1.0 / (1.0 - (-0.5f64).exp())).abs() < 1e-13);
    assert!((nu - 2.541494082536798).abs() < 1e-12);

    let far = SmoothingSpec::standard(50, 1.0).unwrap();
    let big = far.truncated(1e6 * 50f64.sqrt()).unwrap();
    assert!((big.nu() - 1.0).abs() < 1e-9);

    let g = SmoothingSpec::generalized(784, 0.5, 380).unwrap();
    let half = g.radius_at(reg_gamma_cdf_inv(g.shape(), 0.5).unwrap());
    assert!((g.truncated(half).unwrap().nu() - 2.0).abs() < 1e-9);
}

#[test]
fn density_ratio_for_standard_gaussian() {
    let s = SmoothingSpec::standard(30, 0.7).unwrap();
    for (a, b) in [(0.5, 1.5), (2.0, 4.0), (3.3, 0.1)] {
        let ratio = s.log_radial_density(a).ln() - s.log_radial_density(b).ln();
        let want = (b * b - a * a) / (2.0 * 0.49);
        assert!((ratio - want).abs() < 1e-10);
    }
}

#[test]
fn truncated_density_is_nu_times_parent() {
    let g = SmoothingSpec::generalized(40, 1.2, 10).unwrap();
    let t = g.truncated(5.0).unwrap();
    for r in [0.3, 2.0, 4.99] {
        let diff = t.log_radial_density(r).ln() - g.log_radial_density(r).ln();
        assert!((diff - t.nu().ln()).abs() < 1e-10);
    }
    assert!(t.log_radial_density(5.01).is_zero());
}

// density times the sphere area, integrated over the radius by Simpson's rule
fn radial_integral(spec: &SmoothingSpec) -> f64 {
    let d = spec.d as f64;
    let ln_area = std::f64::consts::LN_2 + 0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d);
    let f = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let ld = spec.log_radial_density(r);
        if ld.is_zero() {
            return 0.0;
        }
        (ld.ln() + ln_area + (d - 1.0) * r.ln()).exp()
    };
    let top = spec.radius_cap().min(spec.sigma_prime() * (2.0 * (spec.shape() + 40.0 * spec.shape().sqrt() + 40.0)).sqrt());
    let n = 200_000;
    let h = top / n as f64;
    let mut sum = f(0.0) + f(top);
    for i in 1..n {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn density_integrates_to_one() {
    for spec in [
        SmoothingSpec::standard(3, 1.0).unwrap(),
        SmoothingSpec::generalized(20, 0.5, 2).unwrap(),
        SmoothingSpec::generalized(20, 0.5, 2).unwrap().truncated(1.2).unwrap(),
    ] {
        let v = radial_integral(&spec);
        assert!((v - 1.0).abs() < 1e-8, "{spec:?}: {v}");
    }
}

#[test]
fn empirical_ball_mass_matches() {
    let spec = SmoothingSpec::generalized(784, 0.5, 380).unwrap();
    let radius = spec.radius_at(spec.shape());
    let exact = spec.ball_mass(radius);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1_000_000;
    let hits = (0..n).filter(|_| spec.sample(&mut rng, false).radius <= radius).count();
    let est = hits as f64 / n as f64;
    let sd = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((est - exact).abs() <= 4.0 * sd, "{est} vs {exact}");
}

#[test]
fn truncated_draws_stay_inside() {
    let spec = SmoothingSpec::generalized(100, 1.0, 20).unwrap().truncated(6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100_000 {
        assert!(spec.sample(&mut rng, false).radius <= 6.0);
    }
}

#[test]
fn mean_square_norm_is_d_sigma_squared() {
    let spec = SmoothingSpec::generalized(784, 0.5, 380).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let mean = (0..n).map(|_| spec.sample(&mut rng, false).radius.powi(2)).sum::<f64>() / n as f64;
    // E|x|^2 = 2 sigma'^2 (d/2 - k) with sd 2 sigma'^2 sqrt(d/2 - k)
    let want = 784.0 * 0.25;
    let sp2 = spec.sigma_prime().powi(2);
    let sd = 2.0 * sp2 * spec.shape().sqrt() / (n as f64).sqrt();
    assert!((mean - want).abs() <= 4.0 * sd, "{mean} vs {want}");
}

#[test]
fn directions_are_unit_vectors() {
    let spec = SmoothingSpec::standard(64, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let dir = spec.sample(&mut rng, true).direction.unwrap();
        assert_eq!(dir.len(), 64);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sampling_is_deterministic() {
    let spec = SmoothingSpec::generalized(50, 1.0, 10).unwrap().truncated(4.0).unwrap();
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50).map(|_| spec.sample(&mut rng, false).radius).collect::<Vec<_>>()
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ball_mass_monotone(d in 3u64..5000, frac in 0.0f64..0.49, sigma in 0.1f64..3.0) {
        let k = (frac * d as f64) as u64;
        let spec = SmoothingSpec::generalized(d, sigma, k).unwrap();
        let top = spec.radius_at(spec.shape() + 30.0 * spec.shape().sqrt() + 30.0);
        let mut prev = 0.0;
        for i in 0..=400 {
            let v = spec.ball_mass(top * i as f64 / 400.0);
            prop_assert!(v >= prev);
            prev = v;
        }
        prop_assert!(prev > 1.0 - 1e-9);
    }

    #[test]
    fn nu_inverts_truncation_mass(d in 3u64..5000, frac in 0.0f64..0.49, mass in 0.01f64..0.99) {
        let k = (frac * d as f64) as u64;
        let spec = SmoothingSpec::generalized(d, 1.0, k).unwrap();
        let t = spec.radius_at(reg_gamma_cdf_inv(spec.shape(), mass).unwrap());
        let nu = spec.truncated(t).unwrap().nu();
        prop_assert!(nu > 1.0);
        prop_assert!((nu * spec.ball_mass(t) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn truncated_log_density_offset(d in 3u64..2000, frac in 0.0f64..0.49, u in 0.01f64..1.0) {
        let k = (frac * d as f64) as u64;
        let spec = SmoothingSpec::generalized(d, 1.0, k).unwrap();
        let t = spec.radius_at(spec.shape());
        let trunc = spec.truncated(t).unwrap();
        let r = u * t;
        let diff = trunc.log_radial_density(r).ln() - spec.log_radial_density(r).ln();
        prop_assert!((diff - trunc.nu().ln()).abs() <= 1e-10);
    }
}
