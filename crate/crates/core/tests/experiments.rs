use anslab_core::bounds::{evaluate, Formula};
use anslab_core::dynamics::{BlowupProxyConfig, SimConfig, Trigger, ViscosityTriple};
use anslab_core::experiments::*;
use anslab_core::initial::{random_div_free, taylor_green, Amplitude, Generator, InitialData};
use anslab_core::{Error, Grid3};

fn spec(initial: InitialData, nu3: Vec<f64>, nonlinear: bool) -> SweepSpec {
    SweepSpec {
        initial,
        grid: 8,
        nu1: vec![0.5],
        nu2: vec![0.5],
        nu3,
        proxy: BlowupProxyConfig::default(),
        horizon: 0.5,
        dt: 0.05,
        seed: 0,
        formula: Formula::Thm1Infty,
        c: 1.0,
        s1: 2.5,
        sim: SimConfig { nonlinear, ..SimConfig::default() },
    }
}

fn random(seed: u64) -> InitialData {
    InitialData {
        generator: Generator::RandomDivFree { seed, k_lo: 1.0, k_hi: 3.0 },
        amplitude: Amplitude::Linf(1.0),
    }
}

fn csv(r: &SweepResult) -> String {
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn heat_flow_rows_are_censored_and_duplicates_agree() {
    let r = run_sweep(&spec(InitialData::taylor_green(1.0), vec![0.1, 0.3, 0.1], false), 3).unwrap();
    assert_eq!(r.rows.len(), 3);
    for row in &r.rows {
        assert!(row.censored());
        assert_eq!(row.trigger, Some(Trigger::Horizon));
        assert_eq!(row.t_proxy, f64::INFINITY);
        assert!(row.failure.is_none());
        assert_eq!(evaluate(&row.query).unwrap().value(), row.bound_value);
    }
    assert_eq!(r.rows[0], r.rows[2]);
    assert!(r.envelope_fit().is_none());
    assert!(matches!(
        fit_scaling_exponent(&r, Axis::Nu3, Some(&Formula::Thm1Infty)),
        Err(Error::InsufficientData(_))
    ));
    let text = csv(&r);
    assert!(text.starts_with(SWEEP_HEADER));
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(6), Some("inf"));
}

#[test]
fn sweep_seed_controls_random_data() {
    let mut a = spec(random(1), vec![0.1, 0.2], true);
    a.seed = 7;
    let first = run_sweep(&a, 2).unwrap();
    assert_eq!(csv(&first), csv(&run_sweep(&a, 1).unwrap()));
    assert!(first.rows.iter().all(|r| r.seed == 7));
    let mut b = a.clone();
    b.seed = 8;
    let other = run_sweep(&b, 2).unwrap();
    assert_ne!(first.rows[0].norms.l2, other.rows[0].norms.l2);
    let expected = random_div_free(Grid3::cubic(8).unwrap(), 7, 1.0, 3.0).unwrap();
    let linf = expected.scale(1.0 / expected.linf()).linf();
    assert!((first.rows[0].norms.linf - linf).abs() < 1e-12);
}

#[test]
fn rows_follow_spec_order() {
    let mut s = spec(InitialData::taylor_green(1.0), vec![0.2, 0.1], false);
    s.nu1 = vec![1.0, 0.8];
    let r = run_sweep(&s, 4).unwrap();
    let order: Vec<[f64; 3]> = r.rows.iter().map(|r| r.nu).collect();
    assert_eq!(order, s.points());
    assert_eq!(order.len(), 4);
}

#[test]
fn inapplicable_bound_is_recorded_not_fatal() {
    let mut s = spec(InitialData::taylor_green(1.0), vec![0.5], false);
    s.nu1 = vec![0.1];
    let r = run_sweep(&s, 1).unwrap();
    let row = &r.rows[0];
    assert!(row.bound_value.is_nan());
    assert!(row.failure.as_deref().unwrap().contains("nu3 <= nu2 <= nu1"));
    assert!(row.censored());
}

#[test]
fn invalid_specs_are_refused() {
    let base = spec(InitialData::taylor_green(1.0), vec![0.1], false);
    let mut s = base.clone();
    s.nu3.clear();
    assert!(run_sweep(&s, 1).is_err());
    let mut s = base.clone();
    s.formula = Formula::Cor12;
    assert!(matches!(run_sweep(&s, 1), Err(Error::Config(_))));
    let mut s = base.clone();
    s.formula = Formula::EulerInterp { alpha: 0.1 };
    assert!(s.validate().is_err());
    let mut s = base;
    s.horizon = -1.0;
    assert!(s.validate().is_err());
    assert!(serde_json::from_str::<SweepSpec>(r#"{"grid": 8}"#).is_err());
}

#[test]
fn scaling_covariance_holds_for_random_data() {
    let g = Grid3::cubic(8).unwrap();
    let u0 = random_div_free(g, 4, 1.0, 2.0).unwrap();
    let nu = ViscosityTriple::new(0.3, 0.2, 0.1).unwrap();
    let r = scaling_covariance_test(&u0, nu, 0.2, 2, 10, SimConfig::default()).unwrap();
    assert!(r.max_relative_error < 1e-12, "{:e}", r.max_relative_error);
    let unscaled = scaling_covariance_test(&u0, nu, 0.2, 1, 10, SimConfig::default()).unwrap();
    assert_eq!(unscaled.max_relative_error, 0.0);
}

#[test]
fn smallness_probe_respects_energy_inequality() {
    let g = Grid3::cubic(16).unwrap();
    let u0 = taylor_green(g, 1.0);
    let nu = ViscosityTriple::new(0.5, 0.3, 0.1).unwrap();
    let r = eventual_smallness_probe(&u0, nu, 2.0, 20.0, 0.05, SimConfig::default()).unwrap();
    assert!(r.energy_inequality_holds);
    assert!(r.budget_lhs <= r.initial_energy + r.slack);
    let t0 = r.t0.expect("product decays below the threshold");
    assert!(t0 > 0.0 && t0 <= 2.0);
    let first_below = r.products.iter().find(|p| p.1 < 20.0).unwrap().0;
    assert_eq!(first_below, t0);
    assert!(r.products.windows(2).all(|w| w[1].0 > w[0].0));
    assert!(eventual_smallness_probe(&u0, ViscosityTriple::new(0.5, 0.3, 0.0).unwrap(), 1.0, 1.0, 0.1, SimConfig::default()).is_err());
}
