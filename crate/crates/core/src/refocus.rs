//! Composite pulse sequences that cancel the leading order of a static interaction-strength error.
//!
//! Single-qubit pulses act on qubit `1` of the pair unless stated otherwise. For the CP
//! family `theta` is the full conditional phase, so the target gate is `diag(1, 1, 1, e^{-i theta})`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{r_x, r_z, u_cp, u_xy, u_zz, InteractionKind};
use crate::linalg::{kron, Mat2, Mat4, C64};
use crate::numeric::{bisect, log_log_slope};

/// One primitive of a pulse sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pulse", rename_all = "snake_case")]
pub enum Pulse {
    /// Error-prone interaction gate in the convention of [`crate::gates`].
    TwoQubit { kind: InteractionKind, theta: f64, epsilon: f64 },
    /// `exp(-i delta X / 2)` on `target`.
    OneQubitX { target: usize, delta: f64 },
    /// `exp(-i alpha Z / 2)` on `target`.
    OneQubitZ { target: usize, alpha: f64 },
}

fn on_target(target: usize, u: Mat2) -> Mat4 {
    if target == 0 {
        kron(&u, &Mat2::identity())
    } else {
        kron(&Mat2::identity(), &u)
    }
}

impl Pulse {
    pub fn matrix(&self) -> Mat4 {
        match *self {
            Pulse::TwoQubit { kind, theta, epsilon } => match kind {
                InteractionKind::Cp => u_cp(theta, epsilon),
                InteractionKind::Zz => u_zz(theta, epsilon),
                InteractionKind::Xy => u_xy(theta, epsilon),
            },
            Pulse::OneQubitX { target, delta } => on_target(target, r_x(delta)),
            Pulse::OneQubitZ { target, alpha } => on_target(target, r_z(alpha)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Pulse::TwoQubit { .. })
    }
}

impl fmt::Display for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Pulse::TwoQubit { kind, theta, epsilon } => write!(f, "U_{kind}(theta={theta:.6}, eps={epsilon:e})"),
            Pulse::OneQubitX { target, delta } => write!(f, "X[q{target}]({delta:.6})"),
            Pulse::OneQubitZ { target, alpha } => write!(f, "Z[q{target}]({alpha:.6})"),
        }
    }
}

/// Pulses in matrix-product order: the last element acts first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
}

impl PulseSequence {
    fn of(pulses: Vec<Pulse>) -> Self {
        PulseSequence { pulses }
    }

    fn then_before(mut self, earlier: PulseSequence) -> Self {
        self.pulses.extend(earlier.pulses);
        self
    }

    pub fn unitary(&self) -> Mat4 {
        self.pulses.iter().fold(Mat4::identity(), |acc, p| acc * p.matrix())
    }

    pub fn in_order_of_action(&self) -> impl Iterator<Item = &Pulse> {
        self.pulses.iter().rev()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.pulses.iter().filter(|p| p.is_two_qubit()).count()
    }

    /// One line per pulse, first pulse applied first.
    pub fn dump(&self) -> Vec<String> {
        self.in_order_of_action().enumerate().map(|(i, p)| format!("{:>2}: {p}", i + 1)).collect()
    }
}

/// Gate family being refocused.
pub type Family = InteractionKind;

/// `|Tr(V U^dagger)| / 4`.
pub fn gate_fidelity_2q(v: &Mat4, u: &Mat4) -> Result<f64> {
    for m in [v, u] {
        let deviation = m.unitarity_deviation();
        if deviation > 1e-10 {
            return Err(Error::NonUnitary { deviation });
        }
    }
    Ok((*v * u.adjoint()).trace().norm() / 4.0)
}

/// A root `x` of `8 pi cos(x) / x = j_over_b`.
///
/// For `j_over_b > -8` the root lies in `(0, pi)`; otherwise a root is taken from `(-pi/2, 0)`.
pub fn solve_timescale(j_over_b: f64, _family: Family) -> Result<f64> {
    if !j_over_b.is_finite() {
        return Err(Error::InvalidSweep(format!("J/B must be finite, got {j_over_b}")));
    }
    let g = |x: f64| 8.0 * PI * x.cos() - j_over_b * x;
    let (lo, hi) = if j_over_b > -8.0 { (1e-300, PI) } else { (-PI / 2.0, -1e-300) };
    bisect(g, lo, hi, 0.0).ok_or_else(|| Error::InvalidSweep(format!("no bracketed root for J/B = {j_over_b}")))
}

/// Ising action that the `delta` pulses refocus: `theta = 4 pi cos(delta)`.
pub fn matched_theta(angle: f64) -> f64 {
    4.0 * PI * angle.cos()
}

/// Default CP X-pulse angle `arccos(theta / 16 pi)`.
pub fn default_gamma(theta: f64) -> Result<f64> {
    let r = theta / (16.0 * PI);
    if r.abs() > 1.0 {
        return Err(Error::GammaOutOfRange(r.abs()));
    }
    Ok(r.acos())
}

fn x1(delta: f64) -> Pulse {
    Pulse::OneQubitX { target: 1, delta }
}

fn z1(alpha: f64) -> Pulse {
    Pulse::OneQubitZ { target: 1, alpha }
}

/// `P(-a) W P(a) P(a) W P(-a) core` with `W` the `-2 pi` pulse of the same family.
fn refocus_shape(pulse: fn(f64) -> Pulse, a: f64, w: &PulseSequence, core: PulseSequence) -> PulseSequence {
    PulseSequence::of(vec![pulse(-a)])
        .then_before(w.clone())
        .then_before(PulseSequence::of(vec![pulse(a), pulse(a)]))
        .then_before(w.clone())
        .then_before(PulseSequence::of(vec![pulse(-a)]))
        .then_before(core)
}

fn two(kind: InteractionKind, theta: f64, epsilon: f64) -> PulseSequence {
    PulseSequence::of(vec![Pulse::TwoQubit { kind, theta, epsilon }])
}

/// Refocused Ising gate built around `u_zz(theta, epsilon)`.
pub fn v_zz(theta: f64, epsilon: f64, delta: f64) -> (Mat4, PulseSequence) {
    let w = two(InteractionKind::Zz, -2.0 * PI, epsilon);
    let seq = refocus_shape(x1, delta, &w, two(InteractionKind::Zz, theta, epsilon));
    (seq.unitary(), seq)
}

/// Refocused XY gate built around `u_xy(theta, epsilon)`, with Z pulses.
pub fn v_xy(theta: f64, epsilon: f64, alpha: f64) -> (Mat4, PulseSequence) {
    let w = two(InteractionKind::Xy, -2.0 * PI, epsilon);
    let seq = refocus_shape(z1, alpha, &w, two(InteractionKind::Xy, theta, epsilon));
    (seq.unitary(), seq)
}

/// Ising evolution `exp(-i theta Z Z)` extracted from two CP pulses, up to the phase `e^{-i theta}`.
pub fn u_ex(theta: f64, epsilon: f64) -> (Mat4, PulseSequence) {
    let flip = [Pulse::OneQubitX { target: 0, delta: PI }, Pulse::OneQubitX { target: 1, delta: PI }];
    let cp = Pulse::TwoQubit { kind: InteractionKind::Cp, theta: theta / 2.0, epsilon };
    let seq = PulseSequence::of(vec![flip[0], flip[1], cp, flip[0], flip[1], cp]);
    (seq.unitary(), seq)
}

/// Raw CP gate `diag(1, 1, 1, e^{-i theta (1 + epsilon)})`.
pub fn cp_phase_gate(theta: f64, epsilon: f64) -> Mat4 {
    u_cp(theta / 4.0, epsilon)
}

/// Refocused CP gate with conditional phase `theta`; `gamma` defaults to `arccos(theta / 16 pi)`.
pub fn v_cp(theta: f64, epsilon: f64, gamma: Option<f64>) -> Result<(Mat4, PulseSequence)> {
    let gamma = match gamma {
        Some(g) => g,
        None => default_gamma(theta)?,
    };
    let head = PulseSequence::of(vec![
        Pulse::OneQubitZ { target: 0, alpha: -theta / 2.0 },
        Pulse::OneQubitZ { target: 1, alpha: -theta / 2.0 },
    ]);
    let w = u_ex(-2.0 * PI, epsilon).1;
    let seq = head.then_before(refocus_shape(x1, gamma, &w, u_ex(theta / 4.0, epsilon).1));
    Ok((seq.unitary(), seq))
}

/// Parameters of one refocusing family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefocusParams {
    pub family: Family,
    /// Action of the target gate; conditional phase for CP.
    pub theta: f64,
    /// `delta` for ZZ, `alpha` for XY, `gamma` for CP.
    pub angle: f64,
}

impl RefocusParams {
    /// ZZ and XY with the action matched to the pulse angle.
    pub fn matched(family: Family, angle: f64) -> Self {
        RefocusParams { family, theta: matched_theta(angle), angle }
    }

    /// CP with `gamma = arccos(theta / 16 pi)`.
    pub fn cp(theta: f64) -> Result<Self> {
        Ok(RefocusParams { family: InteractionKind::Cp, theta, angle: default_gamma(theta)? })
    }

    pub fn ideal(&self) -> Mat4 {
        match self.family {
            InteractionKind::Zz => u_zz(self.theta, 0.0),
            InteractionKind::Xy => u_xy(self.theta, 0.0),
            InteractionKind::Cp => cp_phase_gate(self.theta, 0.0),
        }
    }

    pub fn raw(&self, epsilon: f64) -> Mat4 {
        match self.family {
            InteractionKind::Zz => u_zz(self.theta, epsilon),
            InteractionKind::Xy => u_xy(self.theta, epsilon),
            InteractionKind::Cp => cp_phase_gate(self.theta, epsilon),
        }
    }

    pub fn refocused(&self, epsilon: f64) -> (Mat4, PulseSequence) {
        match self.family {
            InteractionKind::Zz => v_zz(self.theta, epsilon, self.angle),
            InteractionKind::Xy => v_xy(self.theta, epsilon, self.angle),
            InteractionKind::Cp => v_cp(self.theta, epsilon, Some(self.angle)).expect("explicit gamma"),
        }
    }

    /// Coefficient of `epsilon^2` in `1 - F2` of the raw gate.
    pub fn raw_coefficient(&self) -> f64 {
        match self.family {
            InteractionKind::Zz => self.theta.powi(2) / 2.0,
            InteractionKind::Xy => self.theta.powi(2),
            InteractionKind::Cp => 3.0 * self.theta.powi(2) / 32.0,
        }
    }

    /// Coefficient of `epsilon^4` in `1 - F2` of the refocused gate.
    pub fn refocused_coefficient(&self) -> f64 {
        let p4 = PI.powi(4);
        match self.family {
            InteractionKind::Zz => 8.0 * p4 * (2.0 * self.angle).sin().powi(2),
            InteractionKind::Xy => 64.0 * p4 * (2.0 * self.angle).sin().powi(2),
            InteractionKind::Cp => -self.theta.powi(2) * (self.theta.powi(2) - 256.0 * PI * PI) / 2048.0,
        }
    }

    /// Limit of `(V(eps) - U) / eps^2` with the action matched to the angle.
    pub fn analytic_delta_u(&self) -> Option<Mat4> {
        let z = C64::new(0.0, 0.0);
        let a = self.angle;
        match self.family {
            InteractionKind::Zz => {
                let d = C64::new(0.0, -4.0 * PI * PI) * C64::from_polar(1.0, 4.0 * PI * a.cos()) * (2.0 * a).sin();
                Some(crate::linalg::Matrix([[z, d, z, z], [-d.conj(), z, z, z], [z, z, z, -d.conj()], [z, z, d, z]]))
            }
            InteractionKind::Xy => {
                let s = (2.0 * a).sin();
                let c = C64::new(0.0, 16.0 * PI * PI * (8.0 * PI * a.cos()).cos() * s);
                let cp = C64::new(-16.0 * PI * PI * (8.0 * PI * a.cos()).sin() * s, 0.0);
                Some(crate::linalg::Matrix([[z, z, z, z], [z, c, -cp, z], [z, cp, c.conj(), z], [z, z, z, z]]))
            }
            InteractionKind::Cp => None,
        }
    }

    /// Richardson-extrapolated symmetric estimate of `(V(eps) - U) / eps^2` using step `h`.
    pub fn estimate_delta_u(&self, h: f64) -> Mat4 {
        let u = self.ideal();
        let d = |h: f64| {
            let s = self.refocused(h).0 + self.refocused(-h).0 - u.scale(C64::new(2.0, 0.0));
            s.scale(C64::new(1.0 / (2.0 * h * h), 0.0))
        };
        (d(h).scale(C64::new(4.0, 0.0)) - d(2.0 * h)).scale(C64::new(1.0 / 3.0, 0.0))
    }

    /// `1 - F2` of the raw and refocused gates.
    pub fn infidelities(&self, epsilon: f64) -> (f64, f64) {
        let u = self.ideal();
        let raw = 1.0 - gate_fidelity_2q(&self.raw(epsilon), &u).expect("unitary");
        let refocused = 1.0 - gate_fidelity_2q(&self.refocused(epsilon).0, &u).expect("unitary");
        (raw, refocused)
    }
}

/// Raw versus refocused infidelities over an error grid, with fits and coefficient checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefocusReport {
    pub params: RefocusParams,
    pub epsilons: Vec<f64>,
    pub raw_infidelity: Vec<f64>,
    pub refocused_infidelity: Vec<f64>,
    pub raw_slope: f64,
    pub refocused_slope: f64,
    /// `(1 - F2) / eps^2` of the raw gate at the smallest error.
    pub raw_coefficient: f64,
    pub raw_coefficient_analytic: f64,
    /// `(1 - F2) / eps^4` of the refocused gate at the smallest error.
    pub refocused_coefficient: f64,
    pub refocused_coefficient_analytic: f64,
    pub refocused_ratio: f64,
    pub two_qubit_pulses: usize,
    /// Max entrywise deviation of the estimated error matrix from its closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_u_deviation: Option<f64>,
    pub sequence: Vec<String>,
    pub warnings: Vec<String>,
}

pub const DEFAULT_EPS_GRID: [f64; 4] = [1e-3, 2e-3, 5e-3, 1e-2];

pub fn analyze(params: RefocusParams, epsilons: &[f64]) -> Result<RefocusReport> {
    if epsilons.len() < 2 || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidSweep("need at least two positive error values".into()));
    }
    let (raw, refocused): (Vec<f64>, Vec<f64>) = epsilons.iter().map(|&e| params.infidelities(e)).unzip();
    let slope = |ys: &[f64]| log_log_slope(epsilons, ys).unwrap_or(f64::NAN);
    let k = epsilons
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let e = epsilons[k];
    let refocused_coefficient = refocused[k] / e.powi(4);
    let analytic = params.refocused_coefficient();
    let mut warnings = Vec::new();
    if analytic.abs() < 1e-9 {
        warnings.push("leading refocused coefficient vanishes; slope check skipped".into());
    }
    if params.raw_coefficient().abs() < 1e-9 {
        warnings.push("leading raw coefficient vanishes; slope check skipped".into());
    }
    let delta_u_deviation = params.analytic_delta_u().map(|d| params.estimate_delta_u(1e-3).max_abs_diff(&d));
    let sequence = params.refocused(e).1;
    Ok(RefocusReport {
        params,
        epsilons: epsilons.to_vec(),
        raw_slope: slope(&raw),
        refocused_slope: slope(&refocused),
        raw_coefficient: raw[k] / (e * e),
        raw_coefficient_analytic: params.raw_coefficient(),
        refocused_coefficient,
        refocused_coefficient_analytic: analytic,
        refocused_ratio: refocused_coefficient / analytic,
        two_qubit_pulses: sequence.two_qubit_count(),
        delta_u_deviation,
        sequence: sequence.dump(),
        raw_infidelity: raw,
        refocused_infidelity: refocused,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cz, iswap};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn f2(a: &Mat4, b: &Mat4) -> f64 {
        gate_fidelity_2q(a, b).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        assert!((f2(&cz(), &cz()) - 1.0).abs() < 1e-15);
        assert!((f2(&Mat4::identity(), &cz()) - 0.5).abs() < 1e-15);
        let bad = Mat4::identity().scale(C64::new(2.0, 0.0));
        assert!(matches!(gate_fidelity_2q(&bad, &cz()), Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn raw_ising_infidelity_is_quadratic() {
        let eps = [1e-3, 2e-3, 5e-3, 1e-2];
        let ys: Vec<f64> = eps.iter().map(|&e| 1.0 - f2(&u_zz(FRAC_PI_4, e), &u_zz(FRAC_PI_4, 0.0))).collect();
        assert!((log_log_slope(&eps, &ys).unwrap() - 2.0).abs() < 0.01);
    }

    #[test]
    fn timescale_roots() {
        let r = solve_timescale(8.0 * PI * 1f64.cos(), InteractionKind::Zz).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
        let r = solve_timescale(0.0, InteractionKind::Xy).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-10);
        for k in 0..=60 {
            let j = -10.0 + k as f64;
            let x = solve_timescale(j, InteractionKind::Zz).unwrap();
            assert!((8.0 * PI * x.cos() / x - j).abs() < 1e-10, "j = {j}, x = {x}");
        }
    }

    #[test]
    fn error_free_sequences_reduce_to_targets() {
        for th in [0.3, FRAC_PI_4, 2.0] {
            assert!((f2(&v_zz(th, 0.0, 0.7).0, &u_zz(th, 0.0)) - 1.0).abs() < 1e-12);
            assert!(v_zz(th, 0.0, 0.7).0.max_abs_diff(&u_zz(th, 0.0)) < 1e-12);
            assert!(v_xy(th, 0.0, 0.7).0.max_abs_diff(&u_xy(th, 0.0)) < 1e-12);
        }
        assert!(v_xy(FRAC_PI_4, 0.0, 1.1).0.max_abs_diff(&iswap()) < 1e-12);
    }

    #[test]
    fn extracted_ising() {
        assert!((f2(&u_ex(FRAC_PI_4, 0.0).0, &u_zz(FRAC_PI_4, 0.0)) - 1.0).abs() < 1e-12);
        assert!((f2(&u_ex(0.0, 0.0).0, &Mat4::identity()) - 1.0).abs() < 1e-12);
        assert!((f2(&u_ex(FRAC_PI_4, 0.1).0, &u_zz(FRAC_PI_4, 0.1)) - 1.0).abs() < 1e-12);
        assert_eq!(u_ex(1.0, 0.0).1.two_qubit_count(), 2);
    }

    #[test]
    fn cp_sequence() {
        for th in [FRAC_PI_4, PI, 3.0] {
            let (v, seq) = v_cp(th, 0.0, None).unwrap();
            assert!((f2(&v, &cp_phase_gate(th, 0.0)) - 1.0).abs() < 1e-12);
            assert_eq!(seq.two_qubit_count(), 6);
        }
        assert!(matches!(v_cp(17.0 * PI, 0.0, None), Err(Error::GammaOutOfRange(_))));
    }

    #[test]
    fn sequences_multiply_to_returned_matrix() {
        let (m, s) = v_zz(1.0, 0.03, 0.4);
        assert!(m.max_abs_diff(&s.unitary()) < 1e-12);
        let (m, s) = v_cp(1.0, 0.03, None).unwrap();
        assert!(m.max_abs_diff(&s.unitary()) < 1e-12);
        assert_eq!(v_zz(1.0, 0.0, 0.4).1.two_qubit_count(), 3);
        assert_eq!(v_xy(1.0, 0.0, 0.4).1.two_qubit_count(), 3);
    }

    #[test]
    fn dump_lists_core_pulse_first() {
        let (_, s) = v_zz(1.0, 0.0, 0.4);
        let d = s.dump();
        assert_eq!(d.len(), 7);
        assert!(d[0].contains("U_zz(theta=1.000000"));
    }

    #[test]
    fn ising_leading_term_at_pi_over_three() {
        let p = RefocusParams::matched(InteractionKind::Zz, FRAC_PI_3);
        let (_, refocused) = p.infidelities(0.01);
        let lead = 8.0 * (PI * 0.01f64).powi(4) * (2.0 * FRAC_PI_3).sin().powi(2);
        assert!((refocused / lead - 1.0).abs() < 0.05);
    }
}
