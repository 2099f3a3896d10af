use npsa_core::ode::{integrate_fixed, solve_ivp, SolverConfig};

fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
    dy[0] = y[1];
    dy[1] = -y[0];
}

#[test]
fn fixed_step_order_is_five() {
    let exact = [1f64.cos(), -1f64.sin()];
    let err = |steps| {
        let y = integrate_fixed(oscillator, (0.0, 1.0), &[1.0, 0.0], steps);
        (y[0] - exact[0]).abs().max((y[1] - exact[1]).abs())
    };
    let coarse = [8, 16, 32];
    for w in coarse.windows(2) {
        let order = (err(w[0]) / err(w[1])).log2();
        assert!(order >= 4.5, "observed order {order} between {} and {} steps", w[0], w[1]);
    }
}

#[test]
fn dense_output_accuracy() {
    let rtol = 1e-6;
    let config = SolverConfig::with_tolerances(rtol, 1e-10);
    let decay = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -2.0 * t * y[0];
    let sol = solve_ivp(decay, (0.0, 3.0), &[1.0], &config).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=3000 {
        let t = 3.0 * i as f64 / 3000.0;
        let exact = (-t * t).exp();
        worst = worst.max((sol.eval_component(t, 0) - exact).abs() / exact.max(1e-4));
    }
    assert!(worst < 100.0 * rtol, "dense error {worst}");
}

#[test]
fn dense_output_is_continuous_at_mesh_points() {
    let sol = solve_ivp(oscillator, (0.0, 20.0), &[1.0, 0.0], &SolverConfig::default()).unwrap();
    assert!(sol.steps() > 10);
    for i in 1..sol.mesh().len() {
        for j in 0..2 {
            let jump = (sol.left_limit(i, j) - sol.state_at_mesh(i)[j]).abs();
            assert!(jump < 1e-12, "jump {jump} at mesh point {i}");
        }
    }
}

#[test]
fn solutions_are_reproducible() {
    let a = solve_ivp(oscillator, (0.0, 5.0), &[1.0, 0.0], &SolverConfig::default()).unwrap();
    let b = solve_ivp(oscillator, (0.0, 5.0), &[1.0, 0.0], &SolverConfig::default()).unwrap();
    assert_eq!(a.mesh(), b.mesh());
    assert_eq!(a.final_state(), b.final_state());
}
