use gravitas::amplitudes::ModelParams;
use gravitas::rng::RngStream;
use gravitas::unitarity::*;
use gravitas::GravitasError;
use std::f64::consts::PI;

fn box_params() -> ModelParams {
    ModelParams { mu: 1e-3, epsilon: 1e-12, ..ModelParams::default() }
}

#[test]
fn tree_discontinuity_is_restored_by_radiated_states() {
    let params = ModelParams::default();
    let ladder = [1e-2, 1e-3, 1e-4];
    let path = PhotonEnergySweep::canonical(params.m);
    let w = BumpWeight::for_ladder(0.3, &ladder, params.m);
    let rep = optical_tree_check(&path, &w, &params, &ladder, 8).unwrap();
    let r = rep.ratio_restored.unwrap();
    assert!((r - 1.0).abs() < 1e-2, "ratio {r}");
    assert!(rep.ratio_elastic_only.is_none());
    assert_eq!(rep.relative_sign.abs(), 1.0);
    assert!(rep.provenance.independent());
    assert!(rep.pole_location > 0.25 && rep.pole_location < 0.35);
}

#[test]
fn tree_ladder_converges_linearly() {
    let params = ModelParams::default();
    let ladder = [1e-2, 1e-3, 1e-4];
    let path = PhotonEnergySweep::canonical(params.m);
    let w = BumpWeight::for_ladder(0.3, &ladder, params.m);
    let rep = optical_tree_check(&path, &w, &params, &ladder, 8).unwrap();
    let l: Vec<f64> = rep.eps_ladder.iter().map(|(_, v)| v - rep.extrapolated_lhs).collect();
    assert!(l[2].abs() < l[1].abs() && l[1].abs() < l[0].abs());
}

#[test]
fn free_theory_has_no_restoring_states() {
    let params = ModelParams { g_newton: 0.0, ..ModelParams::default() };
    let grid = ScanGrid::Tree { centers: vec![0.3], eps_ladder_rel: vec![1e-2, 1e-3], n_panels: 8 };
    match unitarity_violation_scan(&params, &grid) {
        Ok(rows) => {
            assert!(rows[0].ratio_restored.is_none());
            assert!(matches!(rows[0].status, RowStatus::Undefined(_)));
        }
        Err(e) => assert!(matches!(e, GravitasError::NoPoleCrossing { .. } | GravitasError::InvalidParams(_)), "{e}"),
    }

    let free_box = ModelParams { alpha_tilde: 0.0, ..box_params() };
    let grid = ScanGrid::Box { s_values: vec![5.0], n_samples: 1000, stream: RngStream::new(1, 0) };
    let rows = unitarity_violation_scan(&free_box, &grid).unwrap();
    assert!(rows[0].ratio_restored.is_none() && rows[0].ratio_elastic.is_none());
    assert!(matches!(rows[0].status, RowStatus::Undefined(_)));
}

#[test]
fn ladder_must_decrease() {
    let params = ModelParams::default();
    let path = PhotonEnergySweep::canonical(params.m);
    let w = BumpWeight::for_ladder(0.3, &[1e-2, 1e-3], params.m);
    assert!(optical_tree_check(&path, &w, &params, &[1e-3, 1e-2], 8).is_err());
    assert!(optical_tree_check(&path, &w, &params, &[1e-3], 8).is_err());
}

#[test]
fn elastic_side_matches_closed_form() {
    for s in [4.5, 6.0, 10.0] {
        let params = ModelParams { mu: 0.05, epsilon: 1e-12, ..ModelParams::default() };
        let p2 = s / 4.0 - 1.0;
        let mu2 = params.mu * params.mu;
        let angular = 2.0 / (mu2 * (4.0 * p2 + mu2));
        let expected = -PI * PI * PI * p2.sqrt() / s.sqrt() * 0.5 * angular;
        let (got, err) = elastic_rhs(s, &params).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-8, "s {s}: {got} vs {expected}");
        assert!(err <= 1e-8 * got.abs());
    }
}

#[test]
fn box_cut_matches_annihilation_and_not_elastic() {
    let params = box_params();
    for (i, s) in [5.0, 8.0].into_iter().enumerate() {
        let base = RngStream::new(77, i as u64);
        let lhs = box_cut_im_forward(s, &params, 200_000, base.derive(0)).unwrap();
        let rhs = annihilation_rhs(s, &params, 200_000, base.derive(1)).unwrap();
        let pull = (lhs.mean - rhs.mean) / lhs.std_error.hypot(rhs.std_error);
        assert!(pull.abs() < 4.0, "s {s}: pull {pull}");
        let (el, _) = elastic_rhs(s, &params).unwrap();
        assert!(el / lhs.mean > 1e2);
    }
}

#[test]
fn box_cut_is_frame_independent() {
    let params = box_params();
    let stream = RngStream::new(5, 5);
    let rest = box_cut_im_forward(6.0, &params, 100_000, stream).unwrap();
    let moving = box_cut_im_forward_boosted(6.0, &params, 100_000, stream, [0.3, -0.2, 0.6]).unwrap();
    assert!((rest.mean - moving.mean).abs() < 1e-9 * rest.mean.abs());
}

#[test]
fn denominator_bound_matches_extremes() {
    let (m, mu, s): (f64, f64, f64) = (1.0, 0.2, 6.0);
    let p = (s / 4.0 - m * m).sqrt();
    let k = (s / 4.0 - mu * mu).sqrt();
    // equal energies: (p1 - k1)^2 + m^2 is spatial only
    let d = |c: f64| p * p + k * k - 2.0 * p * k * c + m * m;
    let expected = d(1.0) * d(-1.0);
    assert!((forward_denominator_bound(s, m, mu) - expected).abs() < 1e-12 * expected.abs());
}

#[test]
fn below_threshold_rows_are_flagged() {
    let grid = ScanGrid::Box { s_values: vec![3.9, 5.0], n_samples: 2000, stream: RngStream::new(3, 0) };
    let rows = unitarity_violation_scan(&box_params(), &grid).unwrap();
    assert_eq!(rows[0].status, RowStatus::BelowThreshold);
    assert!(rows[0].ratio_restored.is_none());
    assert_eq!(rows[1].status, RowStatus::Ok);
    assert!(matches!(forward_pair(3.9, 1.0), Err(GravitasError::BelowThreshold { .. })));
}

#[test]
fn box_scan_is_deterministic_and_independent() {
    let grid = ScanGrid::Box { s_values: vec![5.0], n_samples: 5000, stream: RngStream::new(9, 1) };
    let a = unitarity_violation_scan(&box_params(), &grid).unwrap();
    let b = unitarity_violation_scan(&box_params(), &grid).unwrap();
    assert_eq!(a[0].lhs.to_bits(), b[0].lhs.to_bits());
    assert_eq!(a[0].rhs_restored.to_bits(), b[0].rhs_restored.to_bits());
    assert_ne!(a[0].lhs, a[0].rhs_restored);
}

#[test]
fn provenance_flags_shared_streams() {
    let s = RngStream::new(1, 2);
    let shared = Provenance { lhs: "a".into(), rhs: "b".into(), lhs_stream: Some(s), rhs_stream: Some(s) };
    assert!(!shared.independent());
    assert!(!Provenance::deterministic("a", "a").independent());
    assert!(Provenance::deterministic("a", "b").independent());
}
