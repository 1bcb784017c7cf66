//! Error-prone two-qubit interaction gates and error-free single-qubit rotations.
//!
//! Two-qubit matrices use the basis `|q_i q_j>` = `{|00>, |01>, |10>, |11>}`; the
//! first listed qubit is the more significant tensor factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{Mat2, Mat4, Matrix, C64, ONE};

/// Physical interaction used to entangle neighbouring qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    /// Controlled phase, `J (1 - Z_i)(1 - Z_j)`.
    Cp,
    /// Ising, `J Z_i Z_j`.
    Zz,
    /// XY exchange, `J (X_i X_j + Y_i Y_j)`.
    Xy,
}

impl InteractionKind {
    pub const ALL: [InteractionKind; 3] = [InteractionKind::Cp, InteractionKind::Zz, InteractionKind::Xy];

    pub fn as_str(&self) -> &'static str {
        match self {
            InteractionKind::Cp => "cp",
            InteractionKind::Zz => "zz",
            InteractionKind::Xy => "xy",
        }
    }

    /// The error-prone two-qubit gate of this interaction.
    pub fn gate(&self, params: GateParams) -> Mat4 {
        match self {
            InteractionKind::Cp => u_cp(params.theta, params.epsilon),
            InteractionKind::Zz => u_zz(params.theta, params.epsilon),
            InteractionKind::Xy => u_xy(params.theta, params.epsilon),
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(InteractionKind::Cp),
            "zz" | "ising" => Ok(InteractionKind::Zz),
            "xy" => Ok(InteractionKind::Xy),
            other => Err(format!("unknown interaction kind '{other}' (expected cp, zz or xy)")),
        }
    }
}

/// Dimensionless action `theta = J t` and fractional strength error `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub theta: f64,
    pub epsilon: f64,
}

impl GateParams {
    pub fn new(theta: f64, epsilon: f64) -> Self {
        GateParams { theta, epsilon }
    }

    /// The action actually realised, `theta (1 + epsilon)`.
    #[inline]
    pub fn effective_theta(&self) -> f64 {
        self.theta * (1.0 + self.epsilon)
    }
}

/// `diag(1, 1, 1, exp(-4i theta (1 + epsilon)))`.
pub fn u_cp(theta: f64, epsilon: f64) -> Mat4 {
    let t = GateParams::new(theta, epsilon).effective_theta();
    Mat4::diagonal([ONE, ONE, ONE, C64::from_polar(1.0, -4.0 * t)])
}

/// `exp(-i theta (1 + epsilon) Z Z)`.
pub fn u_zz(theta: f64, epsilon: f64) -> Mat4 {
    let t = GateParams::new(theta, epsilon).effective_theta();
    let minus = C64::from_polar(1.0, -t);
    let plus = C64::from_polar(1.0, t);
    Mat4::diagonal([minus, plus, plus, minus])
}

/// `exp(-i theta (1 + epsilon) (X X + Y Y))`; iSWAP at `theta = pi/4, epsilon = 0`.
pub fn u_xy(theta: f64, epsilon: f64) -> Mat4 {
    let t = GateParams::new(theta, epsilon).effective_theta();
    let (s, c) = (2.0 * t).sin_cos();
    let mut m = Mat4::identity();
    m.0[1][1] = C64::new(c, 0.0);
    m.0[2][2] = C64::new(c, 0.0);
    m.0[1][2] = C64::new(0.0, -s);
    m.0[2][1] = C64::new(0.0, -s);
    m
}

/// `exp(-i phi Z / 2)`.
pub fn r_z(phi: f64) -> Mat2 {
    Mat2::diagonal([C64::from_polar(1.0, -phi / 2.0), C64::from_polar(1.0, phi / 2.0)])
}

/// `exp(-i delta X / 2)`.
pub fn r_x(delta: f64) -> Mat2 {
    let (s, c) = (delta / 2.0).sin_cos();
    Matrix([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]])
}

/// Error-free controlled-Z.
pub fn cz() -> Mat4 {
    Mat4::diagonal([ONE, ONE, ONE, -ONE])
}

/// iSWAP in the sign convention of [`u_xy`]: `|01> -> -i|10>`.
pub fn iswap() -> Mat4 {
    let mut m = Mat4::zeros();
    m.0[0][0] = ONE;
    m.0[3][3] = ONE;
    m.0[1][2] = C64::new(0.0, -1.0);
    m.0[2][1] = C64::new(0.0, -1.0);
    m
}
