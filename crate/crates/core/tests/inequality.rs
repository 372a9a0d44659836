use std::f64::consts::PI;

use anslab_core::inequality::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

fn field2(f: impl Fn(f64, f64) -> f64) -> PeriodicField {
    PeriodicField::from_fn(&[16, 16], |x| f(x[0], x[1])).unwrap()
}

fn field3(n3: usize, f: impl Fn(f64) -> f64) -> PeriodicField {
    PeriodicField::from_fn(&[8, 8, n3], |x| f(x[2])).unwrap()
}

#[test]
fn product_law_two_modes_and_periodic_dilation() {
    let law = ProductLaw::new(2, 0.5, 0.5);
    let r = product_law_ratio(&field2(|x, _| x.cos()), &field2(|_, y| y.cos()), &law).unwrap().unwrap();
    assert!(close(r, 1.0 / (2.0 * PI), 1e-12), "{r}");
    let dilated = product_law_ratio(&field2(|x, _| (2.0 * x).cos()), &field2(|_, y| (2.0 * y).cos()), &law)
        .unwrap()
        .unwrap();
    assert!(close(dilated, 1.0 / (4.0 * PI), 1e-12), "{dilated}");
}

#[test]
fn commutator_shear_and_mode() {
    let u = |k: f64| vec![field2(move |_, y| (k * y).cos()), field2(|_, _| 0.0)];
    let b = |k: f64| field2(move |x, _| (k * x).cos());
    let r1 = commutator_ratio(&u(1.0), &b(1.0), 2.0).unwrap().unwrap();
    assert!(close(r1, 1.0 / (8.0 * PI), 1e-12), "{r1}");
    let r2 = commutator_ratio(&u(2.0), &b(2.0), 2.0).unwrap().unwrap();
    assert!(close(r2, 2.0 / (25.0 * PI), 1e-12), "{r2}");
    assert!(commutator_ratio(&u(1.0), &b(1.0), 1.0).is_err());
}

#[test]
fn bernstein_closed_forms() {
    for ell in 1..=3 {
        let scale = 2f64.powi(ell);
        let constant = field3(16, |_| 1.0);
        let ball = BernsteinCase::Ball { alpha: 0, q1: f64::INFINITY, q2: 2.0, radius: 1.0 };
        let r = bernstein_ratio(&constant, ell, 2.0, ball, 4).unwrap().unwrap();
        assert!(close(r, (2.0 * PI).powf(-0.5) / scale.sqrt(), 1e-12), "ell {ell}: {r}");

        let mode = field3(32, |z| (4.0 * z).cos());
        let deriv = BernsteinCase::Ball { alpha: 1, q1: 2.0, q2: 2.0, radius: 4.0 };
        let r = bernstein_ratio(&mode, ell, 3.0, deriv, 4).unwrap().unwrap();
        assert!(close(r, 4.0 / scale, 1e-12), "ell {ell}: {r}");

        let ring_mode = field3(32, |z| (scale * z).sin());
        let ring = BernsteinCase::Ring { n: 2, q: 4.0 };
        let r = bernstein_ratio(&ring_mode, ell, 2.0, ring, 4).unwrap().unwrap();
        assert!(close(r, 1.0, 1e-12), "ell {ell}: {r}");
    }
}

#[test]
fn bernstein_support_violation_is_rejected() {
    let wide = field3(32, |z| (9.0 * z).cos());
    let ball = BernsteinCase::Ball { alpha: 1, q1: 2.0, q2: 2.0, radius: 1.0 };
    assert_eq!(bernstein_ratio(&wide, 2, 2.0, ball, 2).unwrap(), None);
    let ring = BernsteinCase::Ring { n: 1, q: 2.0 };
    assert_eq!(bernstein_ratio(&field3(32, |z| z.cos()), 2, 2.0, ring, 2).unwrap(), None);
}

#[test]
fn bernstein_sampler_stays_in_support() {
    let s = FieldSampler::new(11, Band::VerticalRing { ell: 2, horizontal_max: 3.0 });
    let r = check_bernstein(&s, 2, 2.0, BernsteinCase::Ring { n: 1, q: 4.0 }, &[8, 8, 32], 20).unwrap();
    assert_eq!(r.rejected, 0);
    assert!(r.bounded());
}

#[test]
fn reports_are_seed_reproducible() {
    let s = FieldSampler::new(5, Band::Radial { lo: 4.0, hi: 16.0 });
    let a = check_aniso_gn(&s, GnVariant::L42, &[32, 32], 12).unwrap();
    let b = check_aniso_gn(&s, GnVariant::L42, &[32, 32], 12).unwrap();
    assert_eq!(a, b);
    let other = check_aniso_gn(&FieldSampler::new(6, s.band), GnVariant::L42, &[32, 32], 12).unwrap();
    assert_ne!(a.max_ratio, other.max_ratio);
}

#[test]
fn suite_config_rejects_unknown_keys() {
    assert!(serde_json::from_str::<SuiteConfig>(r#"{"samples": 5, "bogus": 1}"#).is_err());
    let cfg: SuiteConfig = serde_json::from_str(r#"{"samples": 5}"#).unwrap();
    assert_eq!(cfg.seed, SuiteConfig::default().seed);
}
