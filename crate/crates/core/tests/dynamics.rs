use anslab_core::dynamics::*;
use anslab_core::{Grid3, VectorField3};

fn taylor_green(grid: Grid3, a: f64) -> VectorField3 {
    VectorField3::from_fns(
        grid,
        |x, y, z| a * x.sin() * y.cos() * z.cos(),
        |x, y, z| -a * x.cos() * y.sin() * z.cos(),
        |_, _, _| 0.0,
    )
}

#[test]
fn euler_taylor_green_conserves_energy() {
    let g = Grid3::cubic(32).unwrap();
    let mut s = SimState::new(&taylor_green(g, 1.0), ViscosityTriple::inviscid(), SimConfig::default()).unwrap();
    s.advance_to(1.0, 0.02).unwrap();
    let drift = s.budget.relative_residual();
    println!("euler drift {drift:e}");
    assert!(drift < 1e-8);
}

#[test]
fn viscous_budget_residual_order() {
    let g = Grid3::cubic(16).unwrap();
    let nu = ViscosityTriple::new(0.2, 0.1, 0.05).unwrap();
    let run = |dt: f64| {
        let mut s = SimState::new(&taylor_green(g, 1.0), nu, SimConfig::default()).unwrap();
        s.advance_to(1.0, dt).unwrap();
        s.budget.residual().abs()
    };
    for dt in [0.2, 0.1, 0.05] {
        let order = (run(dt) / run(dt / 2.0)).log2();
        assert!((3.5..=4.5).contains(&order), "dt {dt} order {order}");
    }
}

#[test]
fn heat_flow_decays_mode_by_mode() {
    let g = Grid3::cubic(16).unwrap();
    let nu = ViscosityTriple::new(0.3, 0.2, 0.1).unwrap();
    let config = SimConfig { nonlinear: false, ..SimConfig::default() };
    let u0 = taylor_green(g, 1.0);
    let mut s = SimState::new(&u0, nu, config).unwrap();
    s.advance_to(0.7, 0.1).unwrap();
    let decay = (-(0.3 + 0.2 + 0.1) * 0.7f64).exp();
    let err = s.u.sub(&u0.scale(decay)).linf();
    assert!(err < 1e-13, "{err:e}");
}

#[test]
fn semigroup_composes() {
    let g = Grid3::cubic(16).unwrap();
    let nu = ViscosityTriple::new(0.5, 0.2, 0.05).unwrap();
    let u0 = taylor_green(g, 1.0);
    let two_steps = semigroup_apply(&semigroup_apply(&u0, nu, 0.3).unwrap(), nu, 0.4).unwrap();
    let one_step = semigroup_apply(&u0, nu, 0.7).unwrap();
    assert!(two_steps.sub(&one_step).linf() < 1e-15);
}

#[test]
fn checkpoint_round_trip_and_corruption() {
    use anslab_core::field::{read_checkpoint, write_checkpoint};
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.ans");
    let g = Grid3::new([8, 12, 16], [1.0, 2.0, 3.0]).unwrap();
    let u = taylor_green(g, 0.7);
    let nu = ViscosityTriple::new(0.3, 0.2, 0.1).unwrap();
    write_checkpoint(&u, 1.25, nu, &path).unwrap();
    let (back, t, nu_back) = read_checkpoint(&path).unwrap();
    assert_eq!(back, u);
    assert_eq!(t, 1.25);
    assert_eq!(nu_back, nu);

    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(anslab_core::Error::Format { .. })));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    std::fs::write(&path, &bad).unwrap();
    assert!(matches!(read_checkpoint(&path), Err(anslab_core::Error::Format { .. })));
    assert!(matches!(read_checkpoint(dir.path().join("missing")), Err(anslab_core::Error::Io { .. })));
}
