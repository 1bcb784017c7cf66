use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use clusterfid_core::linalg::Matrix;
use clusterfid_core::refocus::{
    analyze, cp_phase_gate, gate_fidelity_2q, solve_timescale, u_ex, v_cp, v_xy, v_zz, RefocusParams,
    DEFAULT_EPS_GRID,
};
use clusterfid_core::{InteractionKind, C64};
use proptest::prelude::*;

fn diag(entries: [C64; 4]) -> clusterfid_core::Mat4 {
    let z = C64::new(0.0, 0.0);
    let mut m = [[z; 4]; 4];
    for (i, e) in entries.into_iter().enumerate() {
        m[i][i] = e;
    }
    Matrix(m)
}

#[test]
fn u_ex_is_ising_evolution_up_to_phase() {
    for theta in [0.3, 1.0, -2.0] {
        let e = |s: f64| C64::from_polar(1.0, s * theta);
        let ising = diag([e(-1.0), e(1.0), e(1.0), e(-1.0)]);
        let (u, seq) = u_ex(theta, 0.0);
        assert_abs_diff_eq!(gate_fidelity_2q(&u, &ising).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(seq.two_qubit_count(), 2);
    }
}

#[test]
fn v_cp_without_error_is_the_phase_gate() {
    for theta in [PI / 2.0, PI, 3.0] {
        let (v, seq) = v_cp(theta, 0.0, None).unwrap();
        let target = diag([C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::from_polar(1.0, -theta)]);
        assert_abs_diff_eq!(gate_fidelity_2q(&v, &target).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gate_fidelity_2q(&cp_phase_gate(theta, 0.0), &target).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(seq.two_qubit_count(), 6);
    }
}

#[test]
fn zero_error_sequences_are_exact() {
    for angle in [0.2, 0.7, 1.2] {
        for family in [InteractionKind::Zz, InteractionKind::Xy] {
            let p = RefocusParams::matched(family, angle);
            let (v, _) = match family {
                InteractionKind::Zz => v_zz(p.theta, 0.0, angle),
                _ => v_xy(p.theta, 0.0, angle),
            };
            assert!(v.max_abs_diff(&p.ideal()) < 1e-10);
        }
    }
}

#[test]
fn infidelity_coefficients_match_small_eps_limit() {
    let eps = 1e-3;
    let cases = [
        RefocusParams::matched(InteractionKind::Zz, 0.4),
        RefocusParams::matched(InteractionKind::Xy, 0.9),
        RefocusParams::cp(PI).unwrap(),
    ];
    for p in cases {
        let (raw, refocused) = p.infidelities(eps);
        assert_abs_diff_eq!(raw / eps.powi(2) / p.raw_coefficient(), 1.0, epsilon = 1e-2);
        let (_, r2) = p.infidelities(2.0 * eps);
        assert_abs_diff_eq!((r2 / refocused).log2(), 4.0, epsilon = 0.05);
        assert_abs_diff_eq!(refocused / eps.powi(4) / p.refocused_coefficient(), 1.0, epsilon = 2e-2);
    }
}

#[test]
fn delta_u_estimate_matches_closed_form() {
    for family in [InteractionKind::Zz, InteractionKind::Xy] {
        for angle in [0.3, 1.0] {
            let p = RefocusParams::matched(family, angle);
            let est = p.estimate_delta_u(1e-3);
            let exact = p.analytic_delta_u().unwrap();
            let scale = exact.0.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(est.max_abs_diff(&exact) < 1e-4 * scale.max(1.0));
        }
    }
}

#[test]
fn report_slopes() {
    for p in [RefocusParams::matched(InteractionKind::Zz, 0.5), RefocusParams::cp(2.0).unwrap()] {
        let rep = analyze(p, &DEFAULT_EPS_GRID).unwrap();
        assert_abs_diff_eq!(rep.raw_slope, 2.0, epsilon = 0.05);
        assert_abs_diff_eq!(rep.refocused_slope, 4.0, epsilon = 0.1);
    }
}

proptest! {
    #[test]
    fn timescale_root_is_a_root(j in -10.0..50.0f64) {
        prop_assume!(j.abs() > 1e-6);
        let x = solve_timescale(j, InteractionKind::Zz).unwrap();
        prop_assert!((8.0 * PI * x.cos() / x - j).abs() < 1e-8 * j.abs().max(1.0));
    }
}
