//! Digital-analog variational quantum eigensolver for Rydberg atom arrays.
//!
//! The pipeline reads a qubit Hamiltonian ([`pauli`]), places atoms so their
//! interactions resemble it ([`register`]), evolves a register under
//! piecewise-constant drives ([`dynamics`]), estimates energies from sampled
//! Pauli measurements ([`measurement`]) and closes the loop with derivative
//! free optimizers ([`optimize`], [`vqe`]).
//!
//! Qubit `q` is bit `q` of a basis-state index. Bitstrings and dense Pauli
//! labels are written in ket order, so `"01"` has qubit 0 set.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fermion;
pub mod fixtures;
pub mod measurement;
pub mod optimize;
pub mod pauli;
pub mod register;
pub mod vqe;

pub use error::{Error, ErrorKind, Result};

use serde::{Deserialize, Serialize};

/// Size caps for the dense routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Dense Hamiltonian matrices and exact diagonalization.
    pub matrix_qubits: usize,
    /// Jordan-Wigner input modes.
    pub jw_modes: usize,
    /// Pulse evolution.
    pub dynamics_qubits: usize,
    /// Product-state warm-start scan.
    pub scan_qubits: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            matrix_qubits: 14,
            jw_modes: 16,
            dynamics_qubits: 12,
            scan_qubits: 10,
        }
    }
}
