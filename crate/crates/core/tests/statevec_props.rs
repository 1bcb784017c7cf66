use std::f64::consts::PI;

use clusterfid_core::gates::{r_x, r_z, u_cp, u_xy, u_zz};
use clusterfid_core::linalg::{kron, swap, Mat4};
use clusterfid_core::{BlochOrientation, SingleQubitState, StateVector};
use proptest::prelude::*;

fn orientation() -> impl Strategy<Value = BlochOrientation> {
    (0.0..=PI, 0.0..(2.0 * PI)).prop_map(|(t, p)| BlochOrientation::new(t, p).unwrap())
}

fn register(max: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(orientation(), 2..=max).prop_map(|rs| {
        let states: Vec<_> = rs.into_iter().map(SingleQubitState::from_bloch).collect();
        StateVector::product(&states).unwrap()
    })
}

fn two_qubit_gate() -> impl Strategy<Value = Mat4> {
    (0usize..3, -4.0..4.0f64, -1.0..1.0f64, -3.0..3.0f64).prop_map(|(k, theta, eps, a)| {
        let g = match k {
            0 => u_cp(theta, eps),
            1 => u_zz(theta, eps),
            _ => u_xy(theta, eps),
        };
        g * kron(&r_x(a), &r_z(0.7 * a))
    })
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn norm_is_preserved(mut s in register(7), gates in prop::collection::vec((two_qubit_gate(), 0usize..7, 1usize..7, -3.0..3.0f64), 1..20)) {
        let n = s.num_qubits();
        for (g, i, d, a) in gates {
            let (qi, qj) = (i % n, (i + d) % n);
            if qi != qj {
                s.apply_2q(qi, qj, &g).unwrap();
            }
            s.apply_1q(i % n, &r_x(a)).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_pairs_commute(s in register(6), g in two_qubit_gate(), h in two_qubit_gate()) {
        prop_assume!(s.num_qubits() >= 4);
        let mut a = s.clone();
        a.apply_2q(0, 2, &g).unwrap();
        a.apply_2q(3, 1, &h).unwrap();
        let mut b = s;
        b.apply_2q(3, 1, &h).unwrap();
        b.apply_2q(0, 2, &g).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn swap_conjugation(s in register(6), g in two_qubit_gate(), i in 0usize..6, d in 1usize..6) {
        let n = s.num_qubits();
        let (qi, qj) = (i % n, (i + d) % n);
        prop_assume!(qi != qj);
        let mut a = s.clone();
        a.apply_2q(qi, qj, &g).unwrap();
        let mut b = s;
        b.apply_2q(qj, qi, &(swap() * g * swap())).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn x_outcome_probabilities_sum_to_one(mut s in register(6), g in two_qubit_gate(), q in 0usize..6) {
        s.apply_2q(0, 1, &g).unwrap();
        let q = q % s.num_qubits();
        let total = s.x_probability(q, 0).unwrap() + s.x_probability(q, 1).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_is_bounded(a in register(4), b in register(4)) {
        prop_assume!(a.num_qubits() == b.num_qubits());
        prop_assert!(a.overlap(&b).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn product_qubits_are_pure(s in register(6), q in 0usize..6) {
        let q = q % s.num_qubits();
        let b = s.reduced_qubit_state(q).unwrap().bloch;
        prop_assert!(((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() - 1.0).abs() < 1e-10);
    }
}
