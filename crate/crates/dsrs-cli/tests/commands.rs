use dsrs::certify::{check_radius, CertContext, QFamily};
use dsrs::confidence::{ProbBound, SamplingRecord};
use dsrs::distributions::SmoothingSpec;
use dsrs::synthetic::{default_grid, GridConfig};
use dsrs_cli::certify::{certify_lines, certify_record, HEADER};
use dsrs_cli::format::sig10;
use dsrs_cli::oracle::oracle_check;
use dsrs_cli::record::{InputRecord, QFamilyArg};
use dsrs_cli::sample::{sample, SampleArgs};
use dsrs_cli::simulate::{simulate, Mode, SimulateArgs};
use dsrs_cli::RunConfig;

fn record(id: &str, p: (u64, u64), q: Option<(u64, u64)>) -> InputRecord {
    InputRecord {
        id: id.into(),
        d: 784,
        sigma: 0.5,
        k: None,
        q_family: QFamilyArg::Trunc,
        t: None,
        beta: None,
        p_count: SamplingRecord::new(p.0, p.1).unwrap(),
        q_count: q.map(|(n, s)| SamplingRecord::new(n, s).unwrap()),
    }
}

fn lines(recs: &[InputRecord]) -> Vec<String> {
    recs.iter().map(|r| serde_json::to_string(r).unwrap()).collect()
}

#[test]
fn header_order() {
    assert_eq!(HEADER, "id,p_lo,p_hi,q_lo,q_hi,T,radius_np,radius_dsrs,radius_linf_dsrs,abstained");
}

#[test]
fn ten_significant_digits() {
    assert_eq!(sig10(1.0), "1.000000000");
    assert_eq!(sig10(0.123456789012), "0.1234567890");
    assert_eq!(sig10(9.99999999999), "10.00000000");
    assert_eq!(sig10(1234.5), "1234.500000");
    assert_eq!(sig10(1.5e-8), "1.500000000e-8");
    assert_eq!(sig10(0.0), "0");
}

#[test]
fn record_round_trip_and_validation() {
    let r = record("a", (100, 90), Some((100, 100)));
    assert_eq!(InputRecord::parse(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    let line = r#"{"id":"x","d":20,"sigma":1,"q_family":"var","T":2,"beta":0.8,"p_count":{"trials":10,"successes":9},"q_count":{"trials":10,"successes":9}}"#;
    assert!(InputRecord::parse(line).is_err());
    let line = r#"{"id":"x","d":20,"sigma":1,"q_family":"trunc","p_count":{"trials":10,"successes":11}}"#;
    assert!(InputRecord::parse(line).is_err());
    assert!(InputRecord::parse("not json").is_err());
}

#[test]
fn emitted_radius_rechecks_true() {
    let cfg = RunConfig::default();
    let rec = record("a", (50_000, 45_000), Some((50_000, 50_000)));
    let row = certify_record(&rec, &cfg).unwrap();
    assert!(row.radius_dsrs > row.radius_np);
    let p = SmoothingSpec::generalized(784, 0.5, 380).unwrap();
    let ctx = CertContext::new(p, p.truncated(row.t.unwrap()).unwrap(), 0.0).unwrap();
    assert!(check_radius(row.radius_dsrs, &row.p_box, &row.q_box, &ctx).unwrap());
    assert!((row.radius_linf_dsrs - row.radius_dsrs / 28.0).abs() < 1e-12);
}

#[test]
fn full_q_count_certifies_the_concentration_bound() {
    // d = 40000 and sigma = 1 with T at the Gaussian median norm
    let d = 40_000u64;
    let t = (2.0 * dsrs::numerics::reg_gamma_cdf_inv(d as f64 / 2.0, 0.5).unwrap()).sqrt();
    let p = SmoothingSpec::generalized(d, 1.0, d / 2 - 8).unwrap();
    // enough all-success Q draws that the lower bound is 1 to within 1e-9;
    // at 1e7 draws sampling error alone caps the radius near 2.7
    let n = 1_000_000_000_000u64;
    let hits = (p.ball_mass(t) * n as f64).round() as u64;
    let rec = InputRecord {
        id: "ball".into(),
        d,
        sigma: 1.0,
        k: Some(d / 2 - 8),
        q_family: QFamilyArg::Trunc,
        t: Some(t),
        beta: None,
        p_count: SamplingRecord::new(n, hits).unwrap(),
        q_count: Some(SamplingRecord::new(n, n).unwrap()),
    };
    let row = certify_record(&rec, &RunConfig::default()).unwrap();
    assert!(row.radius_dsrs >= 0.02 * (d as f64).sqrt(), "{row:?}");
}

#[test]
fn uninformative_q_gives_np_radius() {
    let cfg = RunConfig::default();
    // q successes at half the trials give a box around 0.5, but no Q count
    // at all gives exactly [0, 1]
    let row = certify_record(&record("a", (50_000, 45_000), None), &cfg).unwrap();
    assert_eq!(row.q_box, ProbBound::vacuous());
    assert!((row.radius_dsrs - row.radius_np).abs() <= cfg.eps_radius);
}

#[test]
fn output_independent_of_workers_and_runs() {
    let recs = vec![
        record("a", (50_000, 45_000), Some((50_000, 50_000))),
        record("b", (50_000, 30_000), Some((50_000, 49_990))),
        record("c", (50_000, 20_000), Some((50_000, 40_000))),
        record("d", (1_000, 990), Some((1_000, 1_000))),
    ];
    let mut input = lines(&recs);
    input.insert(2, "{broken".into());
    let render = |workers| {
        let cfg = RunConfig { workers, ..RunConfig::default() };
        certify_lines(&input, &cfg)
            .unwrap()
            .into_iter()
            .map(|r| r.map(|row| row.to_csv()).map_err(|(id, _)| id))
            .collect::<Vec<_>>()
    };
    let one = render(1);
    assert_eq!(one, render(4));
    assert_eq!(one, render(1));
    assert_eq!(one.len(), 5);
    assert_eq!(one[2], Err("line 3".to_string()));
    assert!(one[0].as_ref().unwrap().starts_with("a,"));
    assert!(one[4].as_ref().unwrap().starts_with("d,"));
    // P_A below one half certifies nothing
    assert!(one[3].as_ref().unwrap().ends_with(",0,0,0,false"));
}

fn sample_args(n: u64) -> SampleArgs {
    SampleArgs {
        d: 784,
        sigma: 0.5,
        k: None,
        q_family: QFamilyArg::Trunc,
        t: None,
        beta: None,
        ball_mass: 0.9,
        n,
        records: 3,
        id_prefix: "s".into(),
    }
}

#[test]
fn sample_splits_draws_evenly() {
    let recs = sample(&sample_args(100_000), &RunConfig::default()).unwrap();
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert_eq!(r.p_count.trials, 50_000);
        assert_eq!(r.q_count.unwrap().trials, 50_000);
        assert!(r.t.is_some());
    }
    assert_eq!(recs[1].id, "s1");
}

#[test]
fn sample_is_deterministic_per_seed() {
    let cfg = RunConfig { seed: 3, ..RunConfig::default() };
    let a = sample(&sample_args(2_000), &cfg).unwrap();
    let b = sample(&sample_args(2_000), &RunConfig { workers: 3, ..cfg }).unwrap();
    assert_eq!(a, b);
    let c = sample(&sample_args(2_000), &RunConfig { seed: 4, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn fallback_merges_into_p() {
    let mut args = sample_args(1_000);
    // a ball holding nearly everything makes every P draw succeed
    args.ball_mass = 1.0 - 1e-12;
    let cfg = RunConfig { fallback: true, ..RunConfig::default() };
    let recs = sample(&args, &cfg).unwrap();
    for r in &recs {
        assert_eq!(r.p_count.trials, 1_000);
        assert_eq!(r.p_count.successes, 1_000);
        assert!(r.q_count.is_none());
    }
    let without = sample(&args, &RunConfig::default()).unwrap();
    assert!(without.iter().all(|r| r.q_count.is_some()));
}

#[test]
fn rescaled_sampling_needs_beta() {
    let mut args = sample_args(1_000);
    args.q_family = QFamilyArg::Var;
    assert!(sample(&args, &RunConfig::default()).is_err());
    args.beta = Some(0.4);
    let recs = sample(&args, &RunConfig::default()).unwrap();
    assert_eq!(recs[0].beta, Some(0.4));
    assert_eq!(recs[0].t, None);
}

#[test]
fn oracle_check_default_grid_truncated() {
    let grid = default_grid();
    let report = oracle_check(&grid, &[QFamily::Truncated], false, &RunConfig { workers: 4, ..RunConfig::default() }).unwrap();
    assert_eq!(report.lines.len(), grid.len());
    assert!(report.passed(), "{:?}", report);
}

#[test]
fn oracle_check_catches_injected_fault() {
    let grid = [GridConfig { d: 20, sigma: 1.0, k: 2, target_pa: 0.9 }, GridConfig { d: 784, sigma: 0.5, k: 380, target_pa: 0.6 }];
    let cfg = RunConfig::default();
    let clean = oracle_check(&grid, &[QFamily::Truncated], false, &cfg).unwrap();
    assert!(clean.passed());
    let faulty = oracle_check(&grid, &[QFamily::Truncated], true, &cfg).unwrap();
    assert_eq!(faulty.violations, 2);
    assert!(faulty.lines.iter().all(|l| l.ends_with("violation")));
}

#[test]
fn simulate_orders_rows_and_flags_nothing() {
    let args = SimulateArgs {
        mode: Mode::Concentration,
        dims: vec![1000, 10000],
        counts: vec![Some(1000), None],
        exponents: vec![],
        sigma: 1.0,
        p_con: 0.5,
        pa: 0.6,
    };
    let rows = simulate(&args, &RunConfig { workers: 3, ..RunConfig::default() }).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("concentration,1000,1000,"));
    assert!(rows[1].starts_with("concentration,1000,inf,"));
    assert!(rows[3].starts_with("concentration,10000,inf,"));
    assert!(rows.iter().all(|r| r.ends_with(',')), "{rows:?}");
}

#[test]
fn relaxed_rows_carry_projection() {
    let args = SimulateArgs {
        mode: Mode::Relaxed,
        dims: vec![1000],
        counts: vec![],
        exponents: vec![0.2],
        sigma: 1.0,
        p_con: 0.5,
        pa: 0.6,
    };
    let rows = simulate(&args, &RunConfig::default()).unwrap();
    let cols: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cols.len(), 11);
    let np: f64 = cols[7].parse().unwrap();
    let proj: f64 = cols[9].parse().unwrap();
    assert!((proj - np * 1000f64.powf(0.2 / 1.18)).abs() <= 1e-8 * proj);
    let q_lo: f64 = cols[6].parse().unwrap();
    assert!((q_lo - (-(1000f64).powf(0.2)).exp()).abs() <= 1e-10);
}
