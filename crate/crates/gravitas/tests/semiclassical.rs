use gravitas::entanglement::*;
use gravitas::numeric::log_log_slope;
use gravitas::rng::RngStream;
use gravitas::semiclassical::*;
use gravitas::GravitasError;
use nalgebra::{Matrix4, Vector4};

fn free_cfg(gamma: f64, g: f64, trap: f64) -> FeedbackConfig {
    let circuit = Fig1Circuit { trap_frequency: trap, ..Fig1Circuit::default() };
    FeedbackConfig::matched(&circuit, Yukawa::newton(g), gamma, 1.0)
}

#[test]
fn heating_is_linear_in_gamma() {
    // Wide packets keep the information gained on p, and so the spread of the means, small.
    let init = GaussianState::product_minimal([100.0, 100.0], 1.0);
    let gammas = [1e-3, 1e-2, 1e-1];
    let rates: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            let stats = run_ensemble(&free_cfg(g, 0.0, 0.0), &init, 1000, 400, 0.05, 11).unwrap();
            let rate = stats.heating_rate();
            assert!((rate / g - 1.0).abs() < 0.1, "gamma {g}: rate {rate}");
            rate
        })
        .collect();
    let slope = log_log_slope(&gammas, &rates);
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn vanishing_measurement_recovers_free_motion() {
    let cfg = free_cfg(1e-12, 0.0, 0.0);
    let mut init = GaussianState::product_minimal([0.5, 2.0], 1.0);
    init.mean = Vector4::new(0.3, 0.2, -1.0, -0.4);
    let (n, dt) = (200, 0.05);
    let tr = run_trajectory(&cfg, &init, n, dt, RngStream::new(1, 1)).unwrap();
    let t = n as f64 * dt;
    let m = tr.means.last().unwrap();
    let c = tr.covs.last().unwrap();
    assert!((m[0] - (0.3 + 0.2 * t)).abs() < 1e-4);
    assert!((m[2] - (-1.0 - 0.4 * t)).abs() < 1e-4);
    let vx1 = init.cov[(0, 0)] + init.cov[(1, 1)] * t * t;
    let vx2 = init.cov[(2, 2)] + init.cov[(3, 3)] * t * t;
    assert!((c[(0, 0)] / vx1 - 1.0).abs() < 1e-6);
    assert!((c[(2, 2)] / vx2 - 1.0).abs() < 1e-6);
}

#[test]
fn conditional_covariance_forgets_initial_width() {
    let gamma = 0.1;
    let cfg = free_cfg(gamma, 1.0, 0.1);
    let dt = 0.01;
    let n = (10.0 / gamma / dt) as usize;
    let a = conditional_covariance_path(&cfg, &GaussianState::product_minimal([0.1, 0.1], 1.0).cov, n, dt).unwrap();
    let b = conditional_covariance_path(&cfg, &GaussianState::product_minimal([10.0, 10.0], 1.0).cov, n, dt).unwrap();
    let (ea, eb) = (a.last().unwrap(), b.last().unwrap());
    assert!((ea - eb).abs().max() < 1e-6 * ea.abs().max(), "{}", (ea - eb).abs().max());
    let prev = &a[a.len() - 2];
    assert!((ea - prev).abs().max() < 1e-6 * ea.abs().max());
}

#[test]
fn noiseless_step_applies_linearized_kick() {
    let cfg = free_cfg(1e-3, 1.0, 0.0);
    let mut init = GaussianState::product_minimal([1.0, 1.0], 1.0);
    let (x1, x2) = (0.2, -0.1);
    init.mean = Vector4::new(x1, 0.0, x2, 0.0);
    let dt = 0.01;
    let out = step_trajectory(&init, &cfg, dt, [0.0, 0.0]).unwrap();
    let (u1, u2) = cfg.feedback_gain();
    assert!((out.mean[1] - (u1 + u2 * (x2 - x1)) * dt).abs() < 1e-15);
    assert!((out.mean[3] - (-u1 + u2 * (x1 - x2)) * dt).abs() < 1e-15);
}

/// Velocity-Verlet integration of the linearized two-body force plus traps.
fn leapfrog(cfg: &FeedbackConfig, mut x: [f64; 2], mut v: [f64; 2], t: f64, n: usize) -> [f64; 2] {
    let (u1, u2) = cfg.feedback_gain();
    let [m1, m2] = cfg.masses;
    let w2 = cfg.trap_frequency.powi(2);
    let acc = |x: [f64; 2]| [(u1 + u2 * (x[1] - x[0])) / m1 - w2 * x[0], (-u1 + u2 * (x[0] - x[1])) / m2 - w2 * x[1]];
    let dt = t / n as f64;
    let mut a = acc(x);
    for _ in 0..n {
        for i in 0..2 {
            v[i] += 0.5 * dt * a[i];
            x[i] += dt * v[i];
        }
        a = acc(x);
        for i in 0..2 {
            v[i] += 0.5 * dt * a[i];
        }
    }
    x
}

#[test]
fn noiseless_means_follow_classical_orbit() {
    let cfg = FeedbackConfig::default();
    let mut state = GaussianState::ground_states(cfg.masses, cfg.trap_frequency, 1.0);
    state.mean = Vector4::new(0.5, 0.0, -0.2, 0.1);
    let dt = 0.05;
    let period = 2.0 * std::f64::consts::PI / cfg.trap_frequency;
    let n = (period / dt).round() as usize;
    let stepper = Stepper::new(&cfg, dt).unwrap();
    for _ in 0..n {
        state = stepper.step(&state, [0.0, 0.0]).unwrap().0;
    }
    let x = leapfrog(&cfg, [0.5, -0.2], [0.0, 0.1], n as f64 * dt, 100_000);
    let scale = x[0].abs().max(x[1].abs());
    assert!((state.mean[0] - x[0]).abs() < 1e-2 * scale, "{} vs {}", state.mean[0], x[0]);
    assert!((state.mean[2] - x[1]).abs() < 1e-2 * scale, "{} vs {}", state.mean[2], x[1]);
}

#[test]
fn feedback_map_is_local() {
    let cfg = FeedbackConfig::default();
    let s = feedback_symplectic(&cfg, 0.05);
    assert!(cross_block_norm(&s) < 1e-14);
    let o = omega();
    assert!((s.transpose() * o * s - o).abs().max() < 1e-14);
}

#[test]
fn wiener_increments_have_unit_rate() {
    let tr = run_trajectory(&FeedbackConfig::default(), &GaussianState::ground_states([1.0, 1.0], 0.1, 1.0), 20_000, 0.05, RngStream::new(4, 4)).unwrap();
    let (rates, tol) = tr.ito_consistency();
    for r in rates {
        assert!((r - 1.0).abs() < tol, "{r}");
    }
}

#[test]
fn ensembles_are_bit_identical_across_thread_counts() {
    let cfg = free_cfg(1e-2, 1.0, 0.1);
    let init = GaussianState::ground_states([1.0, 1.0], 0.1, 1.0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_ensemble(&cfg, &init, 64, 100, 0.05, 99).unwrap())
    };
    let (a, b) = (run(1), run(5));
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.duan.to_bits(), y.duan.to_bits());
        assert_eq!(x.mean_x1.to_bits(), y.mean_x1.to_bits());
        assert_eq!(x.var_p_mean.to_bits(), y.var_p_mean.to_bits());
    }
    let c = run_ensemble(&cfg, &init, 64, 100, 0.05, 100).unwrap();
    assert_ne!(a.rows[50].mean_x1, c.rows[50].mean_x1);
}

#[test]
fn oversized_steps_are_refused() {
    let cfg = free_cfg(2.0, 1.0, 0.1);
    assert!(matches!(Stepper::new(&cfg, 0.1), Err(GravitasError::StepSize { .. })));
    assert!(Stepper::new(&cfg, 0.05).is_ok());
    assert!(Stepper::new(&free_cfg(0.0, 1.0, 0.1), 0.05).is_err());
}

#[test]
fn mismatched_channels_are_refused() {
    let cfg = FeedbackConfig::default();
    let other = Fig1Circuit { d: 5.0, ..Fig1Circuit::default() };
    let init = other.default_initial(1.0);
    assert!(compare_channels(&cfg, &other, &init, 1.0, &EnsembleSettings::default()).is_err());
}

/// Unconditional covariance under `dV/dt = A V + V A^T + D`, RK4.
fn lindblad_cov(h: &QuadraticHamiltonian, v0: Matrix4<f64>, diffusion: f64, t: f64, n: usize) -> Matrix4<f64> {
    let a = omega() * h.hmat;
    let d = Matrix4::from_diagonal(&Vector4::new(0.0, diffusion, 0.0, diffusion));
    let f = |v: &Matrix4<f64>| a * v + v * a.transpose() + d;
    let dt = t / n as f64;
    let mut v = v0;
    for _ in 0..n {
        let k1 = f(&v);
        let k2 = f(&(v + k1 * (dt / 2.0)));
        let k3 = f(&(v + k2 * (dt / 2.0)));
        let k4 = f(&(v + k3 * dt));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    v
}

#[test]
fn uncoupled_channels_differ_only_by_backaction() {
    let gamma = 1e-3;
    let circuit = Fig1Circuit::default();
    let cfg = FeedbackConfig::matched(&circuit, Yukawa::newton(0.0), gamma, 1.0);
    let mut init = circuit.default_initial(1.0);
    init.mean = Vector4::new(1.0, 0.0, -1.0, 0.0);
    let settings = EnsembleSettings { n_traj: 400, dt: 0.05, master_seed: 8 };
    let rows = compare_channels(&cfg, &circuit, &init, 50.0, &settings).unwrap();
    let h = circuit.hamiltonian(&Yukawa::newton(0.0)).unwrap();
    for r in rows.iter().step_by(100).skip(1) {
        let dx1 = (r.mean_x1_semiclassical - r.mean_x1_unitary) / r.mean_x1_semiclassical_error;
        assert!(dx1.abs() < 3.0, "t {}: pull {dx1}", r.t);
        let v = lindblad_cov(&h, init.cov, gamma, r.t, 2000);
        let expected = duan_witness(&Readout::Facing.frame(&GaussianState { mean: Vector4::zeros(), cov: v, hbar: 1.0 }));
        let pull = (r.duan_semiclassical - expected) / r.duan_semiclassical_error;
        assert!(pull.abs() < 3.0, "t {}: duan {} expected {expected} pull {pull}", r.t, r.duan_semiclassical);
        assert!(r.duan_semiclassical > r.duan_unitary);
    }
}
