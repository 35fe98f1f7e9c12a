//! Bundled molecular Hamiltonians.
//!
//! `lih` and `beh2` are six-qubit Bravyi-Kitaev Hamiltonians (STO-3G) at
//! 1.5 and 1.17 Angstrom. The two H2-class fixtures use project-chosen
//! coefficients of realistic magnitude. See `fixtures/manifest.json`.

use crate::pauli::{parse_hamiltonian, PauliHamiltonian};

pub const LIH_TEXT: &str = include_str!("../fixtures/lih_1p5.ham");
pub const BEH2_TEXT: &str = include_str!("../fixtures/beh2_1p17.ham");
pub const H2_JW_TEXT: &str = include_str!("../fixtures/h2_jw_0p74.ham");
pub const H2_BK_EFF_TEXT: &str = include_str!("../fixtures/h2_bk_eff_0p74.ham");
pub const MANIFEST_JSON: &str = include_str!("../fixtures/manifest.json");

fn load(text: &str) -> PauliHamiltonian {
    parse_hamiltonian(text).expect("bundled fixture parses")
}

pub fn lih() -> PauliHamiltonian {
    load(LIH_TEXT)
}

pub fn beh2() -> PauliHamiltonian {
    load(BEH2_TEXT)
}

/// Four-qubit Jordan-Wigner H2-class Hamiltonian; Hartree-Fock state `0011`.
pub fn h2_jw() -> PauliHamiltonian {
    load(H2_JW_TEXT)
}

/// Two-qubit effective H2-class Hamiltonian whose ground state lies in the
/// `{|01>, |10>}` block.
pub fn h2_bk_eff() -> PauliHamiltonian {
    load(H2_BK_EFF_TEXT)
}

/// Looks up a bundled fixture by manifest name.
pub fn by_name(name: &str) -> Option<PauliHamiltonian> {
    match name {
        "lih" => Some(lih()),
        "beh2" => Some(beh2()),
        "h2_jw" => Some(h2_jw()),
        "h2_bk_eff" => Some(h2_bk_eff()),
        _ => None,
    }
}
