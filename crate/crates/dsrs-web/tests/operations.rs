use dsrs_web::*;

#[test]
fn certify_counts_beats_np_with_full_q() {
    let c = certify_counts(784, 0.5, -1, true, f64::NAN, (50_000, 45_000), (50_000, 50_000), 0.001).unwrap();
    assert_eq!(c.k, 380);
    assert!(c.radius_dsrs > c.radius_np && !c.abstained);
    assert!(c.t.unwrap() > 0.0);
    assert!((c.radius_linf_dsrs - c.radius_dsrs / 28.0).abs() < 1e-12);
}

#[test]
fn certify_counts_without_q_is_np() {
    let c = certify_counts(784, 0.5, -1, false, 0.4, (1_000, 900), (0, 0), 0.001).unwrap();
    assert_eq!((c.q_lo, c.q_hi), (0.0, 1.0));
    assert!((c.radius_dsrs - c.radius_np).abs() <= 1e-4);
}

#[test]
fn bad_counts_are_errors() {
    assert!(certify_counts(784, 0.5, -1, true, f64::NAN, (10, 11), (10, 10), 0.001).is_err());
    assert!(certify_counts(784, 0.5, 400, true, f64::NAN, (10, 9), (10, 10), 0.001).is_err());
}

#[test]
fn curve_grows_with_draws() {
    let few = curve_point(1000, 1.0, 0.5, 0.6, 1_000, 0.001).unwrap();
    let many = curve_point(1000, 1.0, 0.5, 0.6, 10_000_000, 0.001).unwrap();
    assert!(many.radius_dsrs >= few.radius_dsrs && few.radius_dsrs > few.radius_np);
    let exact = curve_point(1000, 1.0, 0.5, 0.6, 0, 0.001).unwrap();
    assert_eq!(exact.q_lo, 1.0);
}

#[test]
fn truncation_matches_heuristic_mass() {
    let t = truncation(784, 0.5, -1, 0.999).unwrap();
    assert!(t.mass > 0.5 && t.mass < 0.999);
    assert!((t.nu * t.mass - 1.0).abs() < 1e-12);
}
