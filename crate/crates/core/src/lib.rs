//! Statevector simulation of one-dimensional cluster-state teleportation built from
//! error-prone controlled-phase, Ising and XY interactions, plus composite refocusing
//! sequences for the underlying two-qubit gates.
//!
//! Qubit indices are 0-based throughout; qubit `0` is the input qubit and the most
//! significant bit of every amplitude index.

pub mod analytics;
pub mod bench;
pub mod builder;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod numeric;
pub mod refocus;
pub mod report;
pub mod statevec;
pub mod teleport;
pub mod verify;

pub use builder::{BondErrors, ChainSpec, ErrorModel};
pub use error::{Error, Result};
pub use gates::{GateParams, InteractionKind};
pub use linalg::{Mat2, Mat4, C64};
pub use statevec::{BlochOrientation, SingleQubitState, StateVector};
pub use teleport::{Branch, ByproductVariant, ChannelClass, FidelityReport, MeasurementRecord};
