//! Assembly of the input-plus-cluster register for each interaction protocol.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{r_z, u_cp, u_xy, u_zz, InteractionKind};
use crate::linalg::{Mat2, Mat4};
use crate::statevec::{BlochOrientation, SingleQubitState, StateVector, MAX_QUBITS};

/// How the fractional error of each bond is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ErrorModel {
    /// Same `epsilon` on every bond.
    Uniform { epsilon: f64 },
    /// Independent `N(0, sigma^2)` draws, bond `b` taking the `b`-th draw of a generator seeded with `seed`.
    GaussianPerBond { sigma: f64, seed: u64 },
    /// One value per bond, in chain order.
    Explicit { epsilons: Vec<f64> },
}

impl ErrorModel {
    pub fn uniform(epsilon: f64) -> Self {
        ErrorModel::Uniform { epsilon }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        ErrorModel::GaussianPerBond { sigma, seed }
    }

    pub fn explicit(epsilons: Vec<f64>) -> Self {
        ErrorModel::Explicit { epsilons }
    }
}

/// Fractional errors actually used on bonds `(0,1), (1,2), ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BondErrors(pub Vec<f64>);

impl BondErrors {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A validated chain: odd length `n_total >= 3` including the input qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub kind: InteractionKind,
    pub n_total: usize,
    pub error_model: ErrorModel,
}

impl ChainSpec {
    pub fn new(kind: InteractionKind, n_total: usize, error_model: ErrorModel) -> Result<Self> {
        let spec = ChainSpec { kind, n_total, error_model };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_total;
        if n < 3 {
            return Err(Error::ChainTooShort(n));
        }
        if n.is_multiple_of(2) {
            return Err(Error::EvenChainLength(n));
        }
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        match &self.error_model {
            ErrorModel::Uniform { epsilon } if !epsilon.is_finite() => {
                Err(Error::InvalidErrorModel(format!("epsilon must be finite, got {epsilon}")))
            }
            ErrorModel::GaussianPerBond { sigma, .. } if !(sigma.is_finite() && *sigma >= 0.0) => {
                Err(Error::InvalidErrorModel(format!("sigma must be finite and non-negative, got {sigma}")))
            }
            ErrorModel::Explicit { epsilons } if epsilons.len() != n - 1 => {
                Err(Error::BondCountMismatch { expected: n - 1, found: epsilons.len() })
            }
            ErrorModel::Explicit { epsilons } if epsilons.iter().any(|e| !e.is_finite()) => {
                Err(Error::InvalidErrorModel("explicit epsilons must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn bond_count(&self) -> usize {
        self.n_total - 1
    }
}

/// Draws the per-bond errors of one realization.
pub fn realize_errors(spec: &ChainSpec) -> Result<BondErrors> {
    spec.validate()?;
    let bonds = spec.bond_count();
    let eps = match &spec.error_model {
        ErrorModel::Uniform { epsilon } => vec![*epsilon; bonds],
        ErrorModel::GaussianPerBond { sigma, seed } => {
            let normal = Normal::new(0.0, *sigma).map_err(|e| Error::InvalidErrorModel(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..bonds).map(|_| normal.sample(&mut rng)).collect()
        }
        ErrorModel::Explicit { epsilons } => epsilons.clone(),
    };
    Ok(BondErrors(eps))
}

/// One gate of a chain-building circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainOp {
    OneQubit { qubit: usize, gate: Mat2 },
    TwoQubit { first: usize, second: usize, gate: Mat4 },
}

impl ChainOp {
    pub fn touches(&self, q: usize) -> bool {
        match *self {
            ChainOp::OneQubit { qubit, .. } => qubit == q,
            ChainOp::TwoQubit { first, second, .. } => first == q || second == q,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            ChainOp::OneQubit { qubit, .. } => vec![qubit],
            ChainOp::TwoQubit { first, second, .. } => vec![first, second],
        }
    }
}

/// Order of the two XY entangling layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum XyLayerOrder {
    /// Bonds `(1,2), (3,4), ...` first, then `(0,1), (2,3), ...`.
    #[default]
    InteriorFirst,
    /// Bonds `(0,1), (2,3), ...` first.
    InputFirst,
}

/// Initial product state plus the ordered gate list that entangles it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainCircuit {
    pub initial: Vec<SingleQubitState>,
    pub ops: Vec<ChainOp>,
}

impl ChainCircuit {
    pub fn num_qubits(&self) -> usize {
        self.initial.len()
    }

    /// Runs the circuit on a fresh register.
    pub fn run(&self) -> Result<StateVector> {
        let mut state = StateVector::product(&self.initial)?;
        for op in &self.ops {
            match op {
                ChainOp::OneQubit { qubit, gate } => state.apply_1q(*qubit, gate)?,
                ChainOp::TwoQubit { first, second, gate } => state.apply_2q(*first, *second, gate)?,
            }
        }
        Ok(state)
    }

    pub fn reversed_ops(&self) -> ChainCircuit {
        ChainCircuit { initial: self.initial.clone(), ops: self.ops.iter().rev().cloned().collect() }
    }
}

fn initial_states(n: usize, input: BlochOrientation, fill: SingleQubitState) -> Vec<SingleQubitState> {
    let mut states = vec![fill; n];
    states[0] = SingleQubitState::from_bloch(input);
    states
}

/// `u_cp(pi/4, eps_b)` on every bond of `|psi_I> (x) |+>^(N-1)`.
pub fn cp_circuit(input: BlochOrientation, errors: &BondErrors) -> ChainCircuit {
    let n = errors.len() + 1;
    let ops = errors
        .0
        .iter()
        .enumerate()
        .map(|(b, &eps)| ChainOp::TwoQubit { first: b, second: b + 1, gate: u_cp(FRAC_PI_4, eps) })
        .collect();
    ChainCircuit { initial: initial_states(n, input, SingleQubitState::plus_x()), ops }
}

/// Per bond: `u_zz(pi/4, eps_b)` followed by `r_z(-pi/2)` on both ends.
pub fn zz_circuit(input: BlochOrientation, errors: &BondErrors) -> ChainCircuit {
    let n = errors.len() + 1;
    let rz = r_z(-FRAC_PI_2);
    let mut ops = Vec::with_capacity(3 * errors.len());
    for (b, &eps) in errors.0.iter().enumerate() {
        ops.push(ChainOp::TwoQubit { first: b, second: b + 1, gate: u_zz(FRAC_PI_4, eps) });
        ops.push(ChainOp::OneQubit { qubit: b, gate: rz });
        ops.push(ChainOp::OneQubit { qubit: b + 1, gate: rz });
    }
    ChainCircuit { initial: initial_states(n, input, SingleQubitState::plus_x()), ops }
}

/// Twisted cluster from `iSWAP`-like gates on `|psi_I> (x) |+y>^(N-1)`, followed by
/// `r_z(pi/2)` on every qubit except the output.
pub fn xy_circuit(input: BlochOrientation, errors: &BondErrors, order: XyLayerOrder) -> ChainCircuit {
    let n = errors.len() + 1;
    let layer = |start: usize| {
        (start..n - 1)
            .step_by(2)
            .map(|b| ChainOp::TwoQubit { first: b, second: b + 1, gate: u_xy(FRAC_PI_4, errors.0[b]) })
            .collect::<Vec<_>>()
    };
    let (first, second) = match order {
        XyLayerOrder::InteriorFirst => (layer(1), layer(0)),
        XyLayerOrder::InputFirst => (layer(0), layer(1)),
    };
    let rz = r_z(FRAC_PI_2);
    let mut ops = first;
    ops.extend(second);
    ops.extend((0..n - 1).map(|q| ChainOp::OneQubit { qubit: q, gate: rz }));
    ChainCircuit { initial: initial_states(n, input, SingleQubitState::plus_y()), ops }
}

/// The build circuit of `kind` for a given error realization.
pub fn chain_circuit(kind: InteractionKind, input: BlochOrientation, errors: &BondErrors) -> ChainCircuit {
    match kind {
        InteractionKind::Cp => cp_circuit(input, errors),
        InteractionKind::Zz => zz_circuit(input, errors),
        InteractionKind::Xy => xy_circuit(input, errors, XyLayerOrder::default()),
    }
}

fn build_checked(
    spec: &ChainSpec,
    expected: InteractionKind,
    input: BlochOrientation,
) -> Result<(StateVector, BondErrors)> {
    if spec.kind != expected {
        return Err(Error::KindMismatch { expected, found: spec.kind });
    }
    build(spec, input)
}

pub fn build_cp(spec: &ChainSpec, input: BlochOrientation) -> Result<(StateVector, BondErrors)> {
    build_checked(spec, InteractionKind::Cp, input)
}

pub fn build_zz(spec: &ChainSpec, input: BlochOrientation) -> Result<(StateVector, BondErrors)> {
    build_checked(spec, InteractionKind::Zz, input)
}

pub fn build_xy(spec: &ChainSpec, input: BlochOrientation) -> Result<(StateVector, BondErrors)> {
    build_checked(spec, InteractionKind::Xy, input)
}

/// Realizes the errors of `spec` and builds its chain.
pub fn build(spec: &ChainSpec, input: BlochOrientation) -> Result<(StateVector, BondErrors)> {
    let errors = realize_errors(spec)?;
    let state = build_with_errors(spec.kind, input, &errors)?;
    Ok((state, errors))
}

pub fn build_with_errors(kind: InteractionKind, input: BlochOrientation, errors: &BondErrors) -> Result<StateVector> {
    let n = errors.len() + 1;
    if n < 3 {
        return Err(Error::ChainTooShort(n));
    }
    chain_circuit(kind, input, errors).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn spec(kind: InteractionKind, n: usize, model: ErrorModel) -> ChainSpec {
        ChainSpec::new(kind, n, model).unwrap()
    }

    #[test]
    fn spec_validation() {
        use InteractionKind::*;
        assert_eq!(ChainSpec::new(Cp, 4, ErrorModel::uniform(0.0)), Err(Error::EvenChainLength(4)));
        assert_eq!(ChainSpec::new(Cp, 1, ErrorModel::uniform(0.0)), Err(Error::ChainTooShort(1)));
        assert!(matches!(ChainSpec::new(Cp, 3, ErrorModel::gaussian(-0.1, 0)), Err(Error::InvalidErrorModel(_))));
        assert_eq!(
            ChainSpec::new(Cp, 5, ErrorModel::explicit(vec![0.1; 3])),
            Err(Error::BondCountMismatch { expected: 4, found: 3 })
        );
    }

    #[test]
    fn uniform_errors() {
        let e = realize_errors(&spec(InteractionKind::Cp, 5, ErrorModel::uniform(0.1))).unwrap();
        assert_eq!(e.0, vec![0.1; 4]);
    }

    #[test]
    fn degenerate_gaussian_is_zero() {
        for seed in [0, 7, u64::MAX] {
            let e = realize_errors(&spec(InteractionKind::Zz, 7, ErrorModel::gaussian(0.0, seed))).unwrap();
            assert!(e.0.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gaussian_replay_is_identical() {
        let s = spec(InteractionKind::Xy, 9, ErrorModel::gaussian(0.1, 42));
        let a = realize_errors(&s).unwrap();
        assert_eq!(a, realize_errors(&s).unwrap());
        assert_ne!(a, realize_errors(&spec(InteractionKind::Xy, 9, ErrorModel::gaussian(0.1, 43))).unwrap());
        assert!(a.0.iter().any(|&x| x != 0.0));
    }

    #[test]
    fn builders_reject_wrong_kind() {
        let s = spec(InteractionKind::Zz, 3, ErrorModel::uniform(0.0));
        let r = BlochOrientation::plus_x();
        assert_eq!(
            build_cp(&s, r).unwrap_err(),
            Error::KindMismatch { expected: InteractionKind::Cp, found: InteractionKind::Zz }
        );
        assert!(build_xy(&s, r).is_err());
        assert!(build_zz(&s, r).is_ok());
    }

    #[test]
    fn cp_with_unit_error_is_unentangled() {
        let s = spec(InteractionKind::Cp, 3, ErrorModel::uniform(1.0));
        let (state, _) = build_cp(&s, BlochOrientation::plus_z()).unwrap();
        let expect = StateVector::product(&[SingleQubitState::zero(), SingleQubitState::plus_x(), SingleQubitState::plus_x()])
            .unwrap();
        assert!((expect.overlap(&state).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cp_n3_matches_direct_cluster_construction() {
        let r = BlochOrientation::new(1.2, 0.8).unwrap();
        let s = spec(InteractionKind::Cp, 3, ErrorModel::uniform(0.0));
        let (state, _) = build_cp(&s, r).unwrap();
        let [a0, a1] = SingleQubitState::from_bloch(r).amplitudes();
        let h = 0.5;
        // Phase (-1)^(b0 b1 + b1 b2) on the computational basis.
        let expect: Vec<C64> = (0..8)
            .map(|i| {
                let (b0, b1, b2) = (i >> 2 & 1, i >> 1 & 1, i & 1);
                let sign = if (b0 * b1 + b1 * b2) % 2 == 1 { -1.0 } else { 1.0 };
                (if b0 == 0 { a0 } else { a1 }) * h * sign
            })
            .collect();
        for (x, y) in state.amplitudes().iter().zip(&expect) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn cp_bond_order_is_irrelevant() {
        let r = BlochOrientation::new(0.4, 2.2).unwrap();
        let errors = BondErrors(vec![0.1, -0.3, 0.25, 0.05]);
        let c = cp_circuit(r, &errors);
        let a = c.run().unwrap();
        let b = c.reversed_ops().run().unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn zz_matches_cp_without_error() {
        let r = BlochOrientation::new(2.0, 4.1).unwrap();
        let (zz, _) = build_zz(&spec(InteractionKind::Zz, 3, ErrorModel::uniform(0.0)), r).unwrap();
        let (cp, _) = build_cp(&spec(InteractionKind::Cp, 3, ErrorModel::uniform(0.0)), r).unwrap();
        assert!((cp.overlap(&zz).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xy_layer_order_matters() {
        let r = BlochOrientation::new(0.3, 0.2).unwrap();
        let errors = BondErrors(vec![0.0; 4]);
        let a = xy_circuit(r, &errors, XyLayerOrder::InteriorFirst).run().unwrap();
        let b = xy_circuit(r, &errors, XyLayerOrder::InputFirst).run().unwrap();
        assert!(a.overlap(&b).unwrap().norm() < 1.0 - 1e-6);
    }

    #[test]
    fn explicit_errors_are_copied() {
        let eps = vec![0.1, 0.2, 0.3, 0.4];
        let (_, e) = build(&spec(InteractionKind::Xy, 5, ErrorModel::explicit(eps.clone())), BlochOrientation::plus_y()).unwrap();
        assert_eq!(e.0, eps);
    }
}
