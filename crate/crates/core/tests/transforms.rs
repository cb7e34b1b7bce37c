use markov_polling::{lst_moment, table2_config, BusyPeriod, Transform, TransformEngine};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn h1_mean_under_large_deterministic_switchovers() {
    for r in [1.0, 50.0] {
        let e = TransformEngine::new(&table2_config(r)).unwrap();
        let m = e.model();
        let closed = m.lambda_1 * (1.0 - m.rho_1) * r / (1.0 - m.rho);
        for t in [Transform::H1, Transform::H1Deterministic] {
            let got = lst_moment(&e.handle(t), 1).unwrap();
            assert!(rel(got, closed) < 1e-3, "r = {r}, {t:?}: {got} vs {closed}");
        }
    }
}

#[test]
fn k_mean_under_large_deterministic_switchovers() {
    let r = 50.0;
    let e = TransformEngine::new(&table2_config(r)).unwrap();
    let m = e.model();
    let closed = e.config().lambda_l * (1.0 - m.rho_lp) * r / (1.0 - m.rho);
    for t in [
        Transform::KDirect,
        Transform::KComposed,
        Transform::KDeterministic,
        Transform::KDeterministicComposed,
    ] {
        let got = lst_moment(&e.handle(t), 1).unwrap();
        assert!(rel(got, closed) < 1e-3, "{t:?}: {got} vs {closed}");
    }
}

#[test]
fn mm1_busy_period_and_kendall_residual() {
    let mut c = table2_config(1.0);
    c.lambda_h = 0.5;
    c.lambda_l = 1e-9;
    c.lambda_2 = 1e-9;
    let e = TransformEngine::new(&c).unwrap();
    let mean = lst_moment(&e.handle(Transform::BusyPeriod(BusyPeriod::H)), 1).unwrap();
    assert!(rel(mean, 0.85 / (1.0 - 0.425)) < 1e-8, "{mean}");
    for s in [0.0, 0.1, 1.0, 10.0] {
        assert!(e.kendall_residual(BusyPeriod::H, s).unwrap() <= 1e-13);
    }
}
