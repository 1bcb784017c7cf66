//! X-basis measurement sequence, byproduct correction and teleportation fidelity.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builder::{self, chain_circuit, BondErrors, ChainOp, ChainSpec, ErrorModel};
use crate::error::{Error, Result};
use crate::gates::InteractionKind;
use crate::linalg::{pauli_x, pauli_z, Mat2, C64};
use crate::statevec::{
    apply_1q_raw, apply_2q_raw, bloch_of, kron_vec, project_out_x, BlochOrientation, SingleQubitState, StateVector,
};

/// Branches whose probability is at or below this carry no output state.
pub const NULL_BRANCH_PROBABILITY: f64 = 1e-15;

/// Outcomes `s_0 .. s_{N-2}` of the X measurements, indexed by chain qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementRecord(pub Vec<u8>);

impl fmt::Display for MeasurementRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// One outcome path of the measurement sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub record: MeasurementRecord,
    pub probability: f64,
    /// Normalised state of the last qubit; `None` for a null branch.
    pub output: Option<SingleQubitState>,
}

/// Which Pauli accumulates from the odd- and even-position outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByproductVariant {
    Standard,
    XZSwapped,
}

impl ByproductVariant {
    pub fn for_kind(kind: InteractionKind) -> Self {
        match kind {
            InteractionKind::Xy => ByproductVariant::XZSwapped,
            InteractionKind::Cp | InteractionKind::Zz => ByproductVariant::Standard,
        }
    }

    pub fn other(self) -> Self {
        match self {
            ByproductVariant::Standard => ByproductVariant::XZSwapped,
            ByproductVariant::XZSwapped => ByproductVariant::Standard,
        }
    }
}

/// Parities `(a, b)`: `a` over qubits 1, 3, 5, ..., `b` over qubits 0, 2, 4, ...
fn parities(record: &MeasurementRecord) -> Result<(u8, u8)> {
    let len = record.0.len();
    if len % 2 == 1 {
        return Err(Error::EvenChainLength(len + 1));
    }
    let (mut a, mut b) = (0u8, 0u8);
    for (j, &s) in record.0.iter().enumerate() {
        if s > 1 {
            return Err(Error::InvalidOutcome(s));
        }
        if j % 2 == 1 {
            a ^= s;
        } else {
            b ^= s;
        }
    }
    Ok((a, b))
}

fn pow(m: Mat2, e: u8) -> Mat2 {
    if e == 1 {
        m
    } else {
        Mat2::identity()
    }
}

/// Correction `X^a Z^b` (`Standard`) or `Z^a X^b` (`XZSwapped`) for the output qubit.
pub fn byproduct(record: &MeasurementRecord, variant: ByproductVariant) -> Result<Mat2> {
    let (a, b) = parities(record)?;
    Ok(match variant {
        ByproductVariant::Standard => pow(pauli_x(), a) * pow(pauli_z(), b),
        ByproductVariant::XZSwapped => pow(pauli_z(), a) * pow(pauli_x(), b),
    })
}

/// All `2^(N-1)` outcome paths of X measurements on qubits `0 .. N-2`.
pub fn enumerate_branches(state: &StateVector) -> Result<Vec<Branch>> {
    let n = state.num_qubits();
    if n < 3 {
        return Err(Error::ChainTooShort(n));
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    let mut record = Vec::with_capacity(n - 1);
    descend(state.amplitudes().to_vec(), n, &mut record, &mut out);
    Ok(out)
}

fn descend(amps: Vec<C64>, live: usize, record: &mut Vec<u8>, out: &mut Vec<Branch>) {
    if live == 1 {
        out.push(leaf(MeasurementRecord(record.clone()), [amps[0], amps[1]]));
        return;
    }
    // The leading live qubit is always the most significant bit.
    let mask = 1 << (live - 1);
    for s in 0..2u8 {
        let child = project_out_x(&amps, mask, s);
        record.push(s);
        descend(child, live - 1, record, out);
        record.pop();
    }
}

fn leaf(record: MeasurementRecord, amps: [C64; 2]) -> Branch {
    let probability = amps[0].norm_sqr() + amps[1].norm_sqr();
    let output = if probability > NULL_BRANCH_PROBABILITY { SingleQubitState::new(amps[0], amps[1]).ok() } else { None };
    Branch { record, probability, output }
}

/// Operational reading of a teleportation fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelClass {
    /// `F > 2/3`: no classical measure-and-prepare strategy reaches it.
    Quantum,
    /// `1/2 < F <= 2/3`.
    Indeterminate,
    /// `F <= 1/2`.
    Classical,
}

impl ChannelClass {
    pub fn of(fidelity: f64) -> Self {
        if fidelity > 2.0 / 3.0 {
            ChannelClass::Quantum
        } else if fidelity > 0.5 {
            ChannelClass::Indeterminate
        } else {
            ChannelClass::Classical
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchFidelity {
    pub record: MeasurementRecord,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub kind: InteractionKind,
    pub n_total: usize,
    pub error_model: ErrorModel,
    pub input: BlochOrientation,
    pub bond_errors: BondErrors,
    pub weighted_fidelity: f64,
    pub min_branch: f64,
    pub max_branch: f64,
    pub branch_spread: f64,
    /// Total probability of null branches left out of the average.
    pub excluded_mass: f64,
    pub channel: ChannelClass,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<BranchFidelity>,
}

impl FidelityReport {
    pub fn branch_fidelities(&self) -> impl Iterator<Item = f64> + '_ {
        self.branches.iter().map(|b| b.fidelity)
    }
}

/// Knobs used by the verification suite to perturb the correction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TeleportOptions {
    /// Overrides the variant implied by the interaction kind.
    pub variant: Option<ByproductVariant>,
    /// Toggles the `a` parity, flipping the sign of two Bloch components.
    pub flip_x_parity: bool,
}

impl TeleportOptions {
    fn correction(&self, kind: InteractionKind, record: &MeasurementRecord) -> Result<Mat2> {
        let variant = self.variant.unwrap_or_else(|| ByproductVariant::for_kind(kind));
        let u = byproduct(record, variant)?;
        if !self.flip_x_parity {
            return Ok(u);
        }
        let flip = match variant {
            ByproductVariant::Standard => pauli_x(),
            ByproductVariant::XZSwapped => pauli_z(),
        };
        Ok(flip * u)
    }
}

/// `|<psi_I| U |psi_O>|^2`.
pub fn branch_fidelity(input: &SingleQubitState, correction: &Mat2, output: &SingleQubitState) -> f64 {
    input.inner(&output.transformed(correction)).norm_sqr()
}

fn summarize(
    kind: InteractionKind,
    error_model: ErrorModel,
    input: BlochOrientation,
    bond_errors: BondErrors,
    branches: &[Branch],
    opts: &TeleportOptions,
) -> Result<FidelityReport> {
    let psi = SingleQubitState::from_bloch(input);
    let mut per_branch = Vec::with_capacity(branches.len());
    let (mut weighted, mut excluded) = (0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for b in branches {
        let Some(out) = &b.output else {
            excluded += b.probability;
            continue;
        };
        let f = branch_fidelity(&psi, &opts.correction(kind, &b.record)?, out);
        weighted += b.probability * f;
        lo = lo.min(f);
        hi = hi.max(f);
        per_branch.push(BranchFidelity { record: b.record.clone(), probability: b.probability, fidelity: f });
    }
    Ok(FidelityReport {
        kind,
        n_total: bond_errors.len() + 1,
        error_model,
        input,
        bond_errors,
        weighted_fidelity: weighted,
        min_branch: lo,
        max_branch: hi,
        branch_spread: hi - lo,
        excluded_mass: excluded,
        channel: ChannelClass::of(weighted),
        branches: per_branch,
    })
}

/// Builds the chain, enumerates every branch and averages the corrected fidelity.
pub fn teleport_fidelity(spec: &ChainSpec, input: BlochOrientation) -> Result<FidelityReport> {
    teleport_fidelity_with(spec, input, &TeleportOptions::default())
}

pub fn teleport_fidelity_with(spec: &ChainSpec, input: BlochOrientation, opts: &TeleportOptions) -> Result<FidelityReport> {
    let (state, errors) = builder::build(spec, input)?;
    let branches = enumerate_branches(&state)?;
    summarize(spec.kind, spec.error_model.clone(), input, errors, &branches, opts)
}

/// Fidelity for an already realized set of bond errors.
pub fn teleport_with_errors(
    kind: InteractionKind,
    input: BlochOrientation,
    errors: &BondErrors,
    opts: &TeleportOptions,
) -> Result<FidelityReport> {
    let spec = ChainSpec::new(kind, errors.len() + 1, ErrorModel::explicit(errors.0.clone()))?;
    teleport_fidelity_with(&spec, input, opts)
}

/// One randomized measurement trajectory; `seed` drives only the measurement outcomes.
pub fn sample_run(spec: &ChainSpec, input: BlochOrientation, seed: u64) -> Result<(MeasurementRecord, f64)> {
    let (mut state, _) = builder::build(spec, input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_total;
    let mut record = Vec::with_capacity(n - 1);
    for q in 0..n - 1 {
        record.push(state.measure_x(q, &mut rng)?.outcome);
    }
    let record = MeasurementRecord(record);
    let u = TeleportOptions::default().correction(spec.kind, &record)?;
    let rho = state.reduced_qubit_state(n - 1)?.rho;
    let psi = SingleQubitState::from_bloch(input).amplitudes();
    let v = u.adjoint().apply(&psi);
    let f = (v[0].conj() * (rho.get(0, 0) * v[0] + rho.get(0, 1) * v[1])
        + v[1].conj() * (rho.get(1, 0) * v[0] + rho.get(1, 1) * v[1]))
        .re;
    Ok((record, f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Add(usize),
    Apply(usize),
    Measure(usize),
}

/// Greedy execution order that never holds more than `window` live qubits.
fn schedule(ops: &[ChainOp], n: usize, window: usize, kind: InteractionKind) -> Result<Vec<Step>> {
    let mut done = vec![false; ops.len()];
    let mut live: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut steps = Vec::new();
    let mut measured = 0;
    while measured < n - 1 {
        let ready = (0..ops.len()).find(|&k| {
            !done[k]
                && ops[k].qubits().iter().all(|q| live.contains(q))
                && !(0..k).any(|e| !done[e] && ops[k].qubits().iter().any(|&q| ops[e].touches(q)))
        });
        if let Some(k) = ready {
            done[k] = true;
            steps.push(Step::Apply(k));
            continue;
        }
        let complete = live
            .iter()
            .copied()
            .find(|&q| q != n - 1 && (0..ops.len()).all(|k| done[k] || !ops[k].touches(q)));
        if let Some(q) = complete {
            live.retain(|&x| x != q);
            measured += 1;
            steps.push(Step::Measure(q));
            continue;
        }
        if next < n && live.len() < window {
            live.push(next);
            steps.push(Step::Add(next));
            next += 1;
            continue;
        }
        return Err(Error::WindowUnschedulable { window, kind });
    }
    Ok(steps)
}

/// Teleports along the chain while holding at most `window` qubits at once.
pub fn refresh_teleport(spec: &ChainSpec, input: BlochOrientation, window: usize) -> Result<FidelityReport> {
    if window < 3 {
        return Err(Error::WindowTooSmall(window));
    }
    let errors = builder::realize_errors(spec)?;
    let circuit = chain_circuit(spec.kind, input, &errors);
    let n = spec.n_total;
    let steps = schedule(&circuit.ops, n, window, spec.kind)?;
    let mut ctx = RefreshRun { circuit: &circuit, steps: &steps, record: vec![0; n - 1], out: Vec::new() };
    ctx.run(0, vec![C64::new(1.0, 0.0)], Vec::new());
    let branches = std::mem::take(&mut ctx.out);
    summarize(spec.kind, spec.error_model.clone(), input, errors, &branches, &TeleportOptions::default())
}

struct RefreshRun<'a> {
    circuit: &'a builder::ChainCircuit,
    steps: &'a [Step],
    record: Vec<u8>,
    out: Vec<Branch>,
}

impl RefreshRun<'_> {
    fn run(&mut self, mut at: usize, mut amps: Vec<C64>, mut live: Vec<usize>) {
        let mask = |live: &[usize], q: usize| {
            let pos = live.iter().position(|&x| x == q).expect("scheduled qubit is live");
            1usize << (live.len() - 1 - pos)
        };
        while at < self.steps.len() {
            match self.steps[at] {
                Step::Add(q) => {
                    amps = kron_vec(&amps, &self.circuit.initial[q].amplitudes());
                    live.push(q);
                }
                Step::Apply(k) => match &self.circuit.ops[k] {
                    ChainOp::OneQubit { qubit, gate } => apply_1q_raw(&mut amps, mask(&live, *qubit), gate),
                    ChainOp::TwoQubit { first, second, gate } => {
                        apply_2q_raw(&mut amps, mask(&live, *first), mask(&live, *second), gate)
                    }
                },
                Step::Measure(q) => {
                    let m = mask(&live, q);
                    let rest: Vec<usize> = live.iter().copied().filter(|&x| x != q).collect();
                    for s in 0..2u8 {
                        self.record[q] = s;
                        self.run(at + 1, project_out_x(&amps, m, s), rest.clone());
                    }
                    return;
                }
            }
            at += 1;
        }
        self.out.push(leaf(MeasurementRecord(self.record.clone()), [amps[0], amps[1]]));
    }
}

/// Affine action `r -> shift + matrix r` of the branch-averaged, corrected channel on Bloch vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochChannel {
    pub shift: [f64; 3],
    pub matrix: [[f64; 3]; 3],
}

impl BlochChannel {
    pub fn apply(&self, r: [f64; 3]) -> [f64; 3] {
        let mut out = self.shift;
        for (i, row) in self.matrix.iter().enumerate() {
            out[i] += row[0] * r[0] + row[1] * r[1] + row[2] * r[2];
        }
        out
    }

    /// Weighted fidelity for a pure input, `(1 + r . E(r)) / 2`.
    pub fn fidelity(&self, input: BlochOrientation) -> f64 {
        let r = input.unit_vector();
        let e = self.apply(r);
        0.5 * (1.0 + r[0] * e[0] + r[1] * e[1] + r[2] * e[2])
    }

    /// Minimum of [`Self::fidelity`] over the sphere: coarse grid, then local zoom.
    pub fn min_fidelity(&self) -> (f64, BlochOrientation) {
        use std::f64::consts::{PI, TAU};
        let at = |t: f64, p: f64| {
            let t = t.clamp(0.0, PI);
            let r = BlochOrientation { theta0: t, phi0: p.rem_euclid(TAU) };
            (self.fidelity(r), r)
        };
        let (nt, np) = (48, 96);
        let mut best = at(0.0, 0.0);
        for i in 0..=nt {
            for j in 0..np {
                let c = at(PI * i as f64 / nt as f64, TAU * j as f64 / np as f64);
                if c.0 < best.0 {
                    best = c;
                }
            }
        }
        let (mut dt, mut dp) = (PI / nt as f64, TAU / np as f64);
        for _ in 0..60 {
            let centre = best.1;
            for i in -2..=2 {
                for j in -2..=2 {
                    let c = at(centre.theta0 + i as f64 * dt, centre.phi0 + j as f64 * dp);
                    if c.0 < best.0 {
                        best = c;
                    }
                }
            }
            dt *= 0.5;
            dp *= 0.5;
        }
        best
    }
}

/// Corrected, branch-averaged Bloch vector of the output for one input.
fn averaged_output(kind: InteractionKind, input: BlochOrientation, errors: &BondErrors, opts: &TeleportOptions) -> Result<[f64; 3]> {
    let state = builder::build_with_errors(kind, input, errors)?;
    let mut avg = [0.0; 3];
    for b in enumerate_branches(&state)? {
        let Some(out) = b.output else { continue };
        let corrected = out.transformed(&opts.correction(kind, &b.record)?);
        let v = bloch_of(&corrected.density_matrix());
        for k in 0..3 {
            avg[k] += b.probability * v[k];
        }
    }
    Ok(avg)
}

/// Reconstructs the channel from the inputs `|0>, |1>, |+x>, |+y>`.
pub fn effective_channel(kind: InteractionKind, errors: &BondErrors) -> Result<BlochChannel> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let opts = TeleportOptions::default();
    let b0 = averaged_output(kind, BlochOrientation::plus_z(), errors, &opts)?;
    let b1 = averaged_output(kind, BlochOrientation { theta0: PI, phi0: 0.0 }, errors, &opts)?;
    let bx = averaged_output(kind, BlochOrientation::plus_x(), errors, &opts)?;
    let by = averaged_output(kind, BlochOrientation { theta0: FRAC_PI_2, phi0: FRAC_PI_2 }, errors, &opts)?;
    let mut shift = [0.0; 3];
    let mut matrix = [[0.0; 3]; 3];
    for i in 0..3 {
        shift[i] = 0.5 * (b0[i] + b1[i]);
        matrix[i][2] = 0.5 * (b0[i] - b1[i]);
        matrix[i][0] = bx[i] - shift[i];
        matrix[i][1] = by[i] - shift[i];
    }
    Ok(BlochChannel { shift, matrix })
}
