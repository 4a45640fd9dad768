use dsrs::distributions::SmoothingSpec;
use dsrs::heuristics::*;
use proptest::prelude::*;

#[test]
fn kink_point_gives_the_floor() {
    let cfg = HeuristicConfig::default();
    let pa = 1.0 - (-3.75f64).exp();
    assert!((cfg.target_mass(pa) - 0.5).abs() < 1e-12);
    // slightly above the kink the affine branch takes over
    assert!(cfg.target_mass(1.0 - (-4.0f64).exp()) > 0.5);
}

#[test]
fn large_pa_hits_the_ceiling() {
    let cfg = HeuristicConfig::default();
    assert_eq!(cfg.target_mass(1.0 - (-12.0f64).exp()), cfg.p_ceiling);
}

#[test]
fn radius_round_trips_through_ball_mass() {
    let cfg = HeuristicConfig::default();
    for (d, k) in [(784u64, 380u64), (3072, 1530), (100, 0), (40_000, 19_992)] {
        let spec = SmoothingSpec::generalized(d, 0.5, k).unwrap();
        for pa in [0.55, 0.9, 0.99, 0.99999] {
            let t = t_from_pa(pa, &spec, &cfg).unwrap();
            assert!((spec.ball_mass(t) - cfg.target_mass(pa)).abs() < 1e-9, "d={d} pa={pa}");
        }
    }
}

#[test]
fn default_k_examples() {
    assert_eq!(default_k(784).unwrap(), 380);
    assert_eq!(default_k(3072).unwrap(), 1530);
    assert_eq!(default_k(150_528).unwrap(), 75_260);
    assert_eq!(default_k(1000).unwrap(), 492);
    assert!(default_k(20).is_err());
}

#[test]
fn config_validation() {
    let bad = HeuristicConfig { p_floor: 0.9, p_ceiling: 0.5, ..HeuristicConfig::default() };
    assert!(bad.validated().is_err());
    let spec = SmoothingSpec::standard(10, 1.0).unwrap();
    assert!(t_from_pa(1.0, &spec, &HeuristicConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn radius_nondecreasing_in_pa(a in 0.01f64..0.999, b in 0.01f64..0.999, d in 26u64..4000) {
        let spec = SmoothingSpec::generalized(d, 1.0, default_k(d).unwrap()).unwrap();
        let cfg = HeuristicConfig::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = t_from_pa(lo, &spec, &cfg).unwrap();
        let t_hi = t_from_pa(hi, &spec, &cfg).unwrap();
        prop_assert!(t_lo <= t_hi * (1.0 + 1e-12));
        let nu = spec.truncated(t_hi).unwrap().nu();
        prop_assert!(nu > 1.0 && nu.is_finite());
    }
}
