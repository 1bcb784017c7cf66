//! Dense statevector engine.
//!
//! Qubit `0` is the most significant bit of the amplitude index, so the two-qubit
//! basis of a pair `(qi, qj)` is ordered `|00>, |01>, |10>, |11>` with `qi` first.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4, Matrix, C64, ONE, ZERO};

/// Practical memory bound on the register size.
pub const MAX_QUBITS: usize = 24;

const UNITARY_TOL: f64 = 1e-10;

/// Orientation `(theta0, phi0)` of a pure qubit on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochOrientation {
    pub theta0: f64,
    pub phi0: f64,
}

impl BlochOrientation {
    /// `theta0` must lie in `[0, pi]`; `phi0` is wrapped into `[0, 2 pi)`.
    pub fn new(theta0: f64, phi0: f64) -> Result<Self> {
        if !(theta0.is_finite() && phi0.is_finite()) || !(0.0..=PI).contains(&theta0) {
            return Err(Error::InvalidOrientation { theta0, phi0 });
        }
        let mut phi0 = phi0.rem_euclid(TAU);
        if phi0 >= TAU {
            phi0 = 0.0;
        }
        Ok(BlochOrientation { theta0, phi0 })
    }

    pub fn plus_x() -> Self {
        BlochOrientation { theta0: PI / 2.0, phi0: 0.0 }
    }

    pub fn plus_y() -> Self {
        BlochOrientation { theta0: PI / 2.0, phi0: PI / 2.0 }
    }

    pub fn minus_y() -> Self {
        BlochOrientation { theta0: PI / 2.0, phi0: 3.0 * PI / 2.0 }
    }

    pub fn plus_z() -> Self {
        BlochOrientation { theta0: 0.0, phi0: 0.0 }
    }

    /// Cartesian unit vector `(sin t cos p, sin t sin p, cos t)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta0.sin_cos();
        let (sp, cp) = self.phi0.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Normalised two-amplitude qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitState {
    amps: [C64; 2],
}

impl SingleQubitState {
    /// Normalises `(a0, a1)`; fails for a zero vector.
    pub fn new(a0: C64, a1: C64) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidOrientation { theta0: f64::NAN, phi0: f64::NAN });
        }
        Ok(SingleQubitState { amps: [a0 / norm, a1 / norm] })
    }

    pub fn zero() -> Self {
        SingleQubitState { amps: [ONE, ZERO] }
    }

    pub fn one() -> Self {
        SingleQubitState { amps: [ZERO, ONE] }
    }

    pub fn plus_x() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        SingleQubitState { amps: [h, h] }
    }

    pub fn minus_x() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        SingleQubitState { amps: [h, -h] }
    }

    pub fn plus_y() -> Self {
        SingleQubitState { amps: [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)] }
    }

    /// `cos(theta0/2)|0> + exp(i phi0) sin(theta0/2)|1>`.
    pub fn from_bloch(r: BlochOrientation) -> Self {
        let (s, c) = (r.theta0 / 2.0).sin_cos();
        SingleQubitState { amps: [C64::new(c, 0.0), C64::from_polar(s, r.phi0)] }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amps
    }

    pub fn density_matrix(&self) -> Mat2 {
        let [a, b] = self.amps;
        Matrix([[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]])
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        bloch_of(&self.density_matrix())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SingleQubitState) -> C64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    pub fn transformed(&self, u: &Mat2) -> SingleQubitState {
        SingleQubitState { amps: u.apply(&self.amps) }
    }
}

/// Bloch vector `(Tr rho X, Tr rho Y, Tr rho Z)` of a 2x2 density matrix.
pub fn bloch_of(rho: &Mat2) -> [f64; 3] {
    let off = rho.get(0, 1);
    [2.0 * off.re, -2.0 * off.im, (rho.get(0, 0) - rho.get(1, 1)).re]
}

/// Outcome of a projective `X` measurement; `outcome = 0` is the `|+>` branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XMeasurement {
    pub outcome: u8,
    /// Squared norm of the projected state before renormalisation.
    pub probability: f64,
}

/// Single-qubit marginal: density matrix and Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedQubit {
    pub rho: Mat2,
    pub bloch: [f64; 3],
}

/// `2^n` complex amplitudes of an `n`-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Tensor product in listed order; the first state is qubit 0.
    pub fn product(states: &[SingleQubitState]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyProduct);
        }
        if states.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits(states.len()));
        }
        let mut amps = vec![ONE];
        for s in states {
            amps = kron_vec(&amps, &s.amps);
        }
        Ok(StateVector { num_qubits: states.len(), amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1 within `1e-10`.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidAmplitudes(format!("length {len} is not a power of two >= 2")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidAmplitudes(format!("squared norm {norm} differs from 1")));
        }
        Ok(StateVector { num_qubits, amps })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    /// Applies `u` to qubit `q` in place.
    pub fn apply_1q(&mut self, q: usize, u: &Mat2) -> Result<()> {
        self.check_qubit(q)?;
        check_unitary(u)?;
        let m = self.mask(q);
        apply_1q_raw(&mut self.amps, m, u);
        Ok(())
    }

    /// Applies `u` to `(qi, qj)` with `qi` as the more significant factor.
    pub fn apply_2q(&mut self, qi: usize, qj: usize, u: &Mat4) -> Result<()> {
        self.check_qubit(qi)?;
        self.check_qubit(qj)?;
        if qi == qj {
            return Err(Error::QubitCollision(qi));
        }
        check_unitary(u)?;
        let (mi, mj) = (self.mask(qi), self.mask(qj));
        apply_2q_raw(&mut self.amps, mi, mj, u);
        Ok(())
    }

    /// Probability of `X` outcome `s` on qubit `q`, without collapsing.
    pub fn x_probability(&self, q: usize, s: u8) -> Result<f64> {
        self.check_qubit(q)?;
        let sign = outcome_sign(s)?;
        let m = self.mask(q);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m == 0)
            .map(|(i, a0)| (0.5 * (a0 + sign * self.amps[i | m])).norm_sqr() * 2.0)
            .sum())
    }

    /// Projects qubit `q` onto `|+>` (`s = 0`) or `|->` (`s = 1`) and renormalises.
    pub fn measure_x_forced(&mut self, q: usize, s: u8) -> Result<XMeasurement> {
        let probability = self.x_probability(q, s)?;
        if probability <= 1e-15 {
            return Err(Error::ImpossibleBranch { qubit: q, outcome: s, probability });
        }
        let sign = outcome_sign(s)?;
        let m = self.mask(q);
        let scale = 1.0 / probability.sqrt();
        for i in 0..self.amps.len() {
            if i & m != 0 {
                continue;
            }
            // <±|psi> placed back on |±>: both halves receive (a0 ± a1) / 2.
            let proj = 0.5 * (self.amps[i] + sign * self.amps[i | m]) * scale;
            self.amps[i] = proj;
            self.amps[i | m] = sign * proj;
        }
        Ok(XMeasurement { outcome: s, probability })
    }

    /// Samples an `X` outcome on qubit `q` and collapses onto it.
    pub fn measure_x<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<XMeasurement> {
        let p0 = self.x_probability(q, 0)?;
        let s = if rng.random::<f64>() < p0 { 0 } else { 1 };
        self.measure_x_forced(q, s)
    }

    /// Partial trace down to qubit `q`.
    pub fn reduced_qubit_state(&self, q: usize) -> Result<ReducedQubit> {
        self.check_qubit(q)?;
        let m = self.mask(q);
        let (mut r00, mut r11, mut r01) = (0.0, 0.0, ZERO);
        for (i, a0) in self.amps.iter().enumerate().filter(|(i, _)| i & m == 0) {
            let a1 = self.amps[i | m];
            r00 += a0.norm_sqr();
            r11 += a1.norm_sqr();
            r01 += a0 * a1.conj();
        }
        let rho = Matrix([[C64::new(r00, 0.0), r01], [r01.conj(), C64::new(r11, 0.0)]]);
        Ok(ReducedQubit { rho, bloch: bloch_of(&rho) })
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

fn outcome_sign(s: u8) -> Result<f64> {
    match s {
        0 => Ok(1.0),
        1 => Ok(-1.0),
        other => Err(Error::InvalidOutcome(other)),
    }
}

fn check_unitary<const D: usize>(u: &Matrix<D>) -> Result<()> {
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(())
}

pub(crate) fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

pub(crate) fn apply_1q_raw(amps: &mut [C64], mask: usize, u: &Mat2) {
    for i in 0..amps.len() {
        if i & mask != 0 {
            continue;
        }
        let (a0, a1) = (amps[i], amps[i | mask]);
        amps[i] = u.0[0][0] * a0 + u.0[0][1] * a1;
        amps[i | mask] = u.0[1][0] * a0 + u.0[1][1] * a1;
    }
}

pub(crate) fn apply_2q_raw(amps: &mut [C64], mi: usize, mj: usize, u: &Mat4) {
    for i in 0..amps.len() {
        if i & (mi | mj) != 0 {
            continue;
        }
        let idx = [i, i | mj, i | mi, i | mi | mj];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        let out = u.apply(&v);
        for (k, &j) in idx.iter().enumerate() {
            amps[j] = out[k];
        }
    }
}

/// Projects bit `mask` of an unnormalised register onto `<±|` and removes it.
pub(crate) fn project_out_x(amps: &[C64], mask: usize, s: u8) -> Vec<C64> {
    let sign = if s == 0 { 1.0 } else { -1.0 };
    let low = mask - 1;
    let mut out = Vec::with_capacity(amps.len() / 2);
    for k in 0..amps.len() / 2 {
        let i = ((k & !low) << 1) | (k & low);
        out.push((amps[i] + sign * amps[i | mask]) * FRAC_1_SQRT_2);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cz, iswap, r_z};
    use crate::linalg::{pauli_x, swap, I};

    const TOL: f64 = 1e-12;

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < TOL)
    }

    #[test]
    fn product_of_zeros() {
        let s = StateVector::product(&[SingleQubitState::zero(), SingleQubitState::zero()]).unwrap();
        assert!(close(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]));
    }

    #[test]
    fn product_of_plus_x() {
        let s = StateVector::product(&[SingleQubitState::plus_x(); 2]).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a - C64::new(0.5, 0.0)).norm() < TOL));
    }

    #[test]
    fn product_of_plus_y() {
        let s = StateVector::product(&[SingleQubitState::plus_y()]).unwrap();
        assert!(close(s.amplitudes(), &[C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)]));
    }

    #[test]
    fn empty_product_is_an_error() {
        assert_eq!(StateVector::product(&[]), Err(Error::EmptyProduct));
    }

    #[test]
    fn too_many_qubits() {
        let states = vec![SingleQubitState::zero(); MAX_QUBITS + 1];
        assert!(matches!(StateVector::product(&states), Err(Error::TooManyQubits(_))));
    }

    #[test]
    fn x_on_first_qubit_flips_msb() {
        let mut s = StateVector::product(&[SingleQubitState::zero(); 2]).unwrap();
        s.apply_1q(0, &pauli_x()).unwrap();
        assert!(close(s.amplitudes(), &[ZERO, ZERO, ONE, ZERO]));
        let before = s.clone();
        s.apply_1q(1, &Mat2::identity()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn rz_pi_maps_plus_to_minus() {
        let mut s = StateVector::product(&[SingleQubitState::plus_x()]).unwrap();
        s.apply_1q(0, &r_z(PI)).unwrap();
        let minus = StateVector::product(&[SingleQubitState::minus_x()]).unwrap();
        assert!((minus.overlap(&s).unwrap().norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn apply_rejects_bad_input() {
        let mut s = StateVector::product(&[SingleQubitState::zero(); 2]).unwrap();
        assert!(matches!(s.apply_1q(2, &pauli_x()), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(s.apply_1q(0, &pauli_x().scale(C64::new(2.0, 0.0))), Err(Error::NonUnitary { .. })));
        assert_eq!(s.apply_2q(1, 1, &cz()), Err(Error::QubitCollision(1)));
        assert!(matches!(s.apply_2q(0, 5, &cz()), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn cz_on_plus_plus() {
        let mut s = StateVector::product(&[SingleQubitState::plus_x(); 2]).unwrap();
        s.apply_2q(0, 1, &cz()).unwrap();
        let h = C64::new(0.5, 0.0);
        assert!(close(s.amplitudes(), &[h, h, h, -h]));
        let before = s.clone();
        s.apply_2q(0, 1, &Mat4::identity()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn iswap_on_01() {
        let mut s = StateVector::product(&[SingleQubitState::zero(), SingleQubitState::one()]).unwrap();
        s.apply_2q(0, 1, &iswap()).unwrap();
        assert!(close(s.amplitudes(), &[ZERO, ZERO, -I, ZERO]));
    }

    #[test]
    fn swap_conjugation_matches_reversed_qubits() {
        let u = crate::gates::u_xy(0.31, 0.2) * crate::linalg::kron(&r_z(0.4), &crate::gates::r_x(1.1));
        let base = StateVector::product(&[
            SingleQubitState::from_bloch(BlochOrientation::new(0.3, 1.2).unwrap()),
            SingleQubitState::plus_y(),
            SingleQubitState::from_bloch(BlochOrientation::new(2.1, 4.0).unwrap()),
        ])
        .unwrap();
        let mut a = base.clone();
        a.apply_2q(0, 2, &u).unwrap();
        let mut b = base;
        b.apply_2q(2, 0, &(swap() * u * swap())).unwrap();
        assert!(close(a.amplitudes(), b.amplitudes()));
    }

    #[test]
    fn measure_eigenstate_and_symmetric_state() {
        let mut s = StateVector::product(&[SingleQubitState::plus_x()]).unwrap();
        let m = s.measure_x_forced(0, 0).unwrap();
        assert!((m.probability - 1.0).abs() < TOL);
        assert!(matches!(s.measure_x_forced(0, 1), Err(Error::ImpossibleBranch { .. })));

        let z = StateVector::product(&[SingleQubitState::zero()]).unwrap();
        for o in [0, 1] {
            assert!((z.x_probability(0, o).unwrap() - 0.5).abs() < TOL);
        }
        assert_eq!(z.x_probability(0, 2), Err(Error::InvalidOutcome(2)));
    }

    #[test]
    fn measured_qubit_is_left_in_x_eigenstate() {
        let mut s = StateVector::product(&[
            SingleQubitState::from_bloch(BlochOrientation::new(1.0, 0.5).unwrap()),
            SingleQubitState::plus_x(),
        ])
        .unwrap();
        s.apply_2q(0, 1, &cz()).unwrap();
        s.measure_x_forced(0, 1).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < TOL);
        let b = s.reduced_qubit_state(0).unwrap().bloch;
        assert!((b[0] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn reduced_states() {
        let s = StateVector::product(&[SingleQubitState::zero(), SingleQubitState::plus_x()]).unwrap();
        let b = s.reduced_qubit_state(1).unwrap().bloch;
        assert!((b[0] - 1.0).abs() < TOL && b[1].abs() < TOL && b[2].abs() < TOL);

        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let bell = StateVector::from_amplitudes(vec![h, ZERO, ZERO, h]).unwrap();
        for q in 0..2 {
            let b = bell.reduced_qubit_state(q).unwrap().bloch;
            assert!(b.iter().all(|c| c.abs() < TOL));
        }
    }

    #[test]
    fn reduced_state_of_oriented_qubit_matches_density_matrix_oracle() {
        for &(t, p) in &[(0.0, 0.0), (0.7, 2.0), (PI / 2.0, PI / 2.0), (2.9, 5.5)] {
            let r = BlochOrientation::new(t, p).unwrap();
            let s = StateVector::product(&[SingleQubitState::from_bloch(r), SingleQubitState::zero()]).unwrap();
            let b = s.reduced_qubit_state(0).unwrap().bloch;
            let expect = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            for k in 0..3 {
                assert!((b[k] - expect[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn overlaps() {
        let zero = StateVector::product(&[SingleQubitState::zero()]).unwrap();
        let one = StateVector::product(&[SingleQubitState::one()]).unwrap();
        assert!((zero.overlap(&zero).unwrap() - ONE).norm() < TOL);
        assert!(zero.overlap(&one).unwrap().norm() < TOL);
        let two = StateVector::product(&[SingleQubitState::zero(); 2]).unwrap();
        assert!(matches!(zero.overlap(&two), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn orientation_validation() {
        assert!(BlochOrientation::new(-0.1, 0.0).is_err());
        assert!(BlochOrientation::new(3.5, 0.0).is_err());
        let r = BlochOrientation::new(1.0, -PI / 2.0).unwrap();
        assert!((r.phi0 - 3.0 * PI / 2.0).abs() < TOL);
    }

    #[test]
    fn project_out_matches_forced_measurement() {
        let r = BlochOrientation::new(1.1, 0.4).unwrap();
        let mut s = StateVector::product(&[SingleQubitState::from_bloch(r), SingleQubitState::plus_y(), SingleQubitState::plus_x()])
            .unwrap();
        s.apply_2q(0, 1, &crate::gates::u_xy(0.7, 0.1)).unwrap();
        s.apply_2q(1, 2, &cz()).unwrap();
        for q in 0..3 {
            for o in [0, 1] {
                let reduced = project_out_x(s.amplitudes(), s.mask(q), o);
                let p: f64 = reduced.iter().map(|a| a.norm_sqr()).sum();
                assert!((p - s.x_probability(q, o).unwrap()).abs() < TOL);
            }
        }
    }
}
