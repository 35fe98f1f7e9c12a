//! Second-quantized electronic Hamiltonians and their Jordan-Wigner image.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{multiply, PauliHamiltonian, PauliLetter, PauliString, PauliTerm, PRUNE_THRESHOLD};
use crate::Limits;

/// `H = sum_pq h_pq a+_p a_q + 1/2 sum_pqrs h_pqrs a+_p a+_q a_r a_s`, in
/// Hartree, with raw (unhalved) two-body integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FermionFile", into = "FermionFile")]
pub struct FermionHamiltonian {
    n_modes: usize,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

/// On-disk layout: flat row-major arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FermionFile {
    n_modes: usize,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

impl TryFrom<FermionFile> for FermionHamiltonian {
    type Error = Error;

    fn try_from(f: FermionFile) -> Result<Self> {
        FermionHamiltonian::new(f.n_modes, f.one_body, f.two_body)
    }
}

impl From<FermionHamiltonian> for FermionFile {
    fn from(h: FermionHamiltonian) -> Self {
        FermionFile {
            n_modes: h.n_modes,
            one_body: h.one_body,
            two_body: h.two_body,
        }
    }
}

impl FermionHamiltonian {
    pub fn new(n_modes: usize, one_body: Vec<f64>, two_body: Vec<f64>) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Invalid("n_modes must be positive".into()));
        }
        let n2 = n_modes * n_modes;
        if one_body.len() != n2 {
            return Err(Error::DimensionMismatch {
                expected: n2,
                got: one_body.len(),
            });
        }
        if two_body.len() != n2 * n2 {
            return Err(Error::DimensionMismatch {
                expected: n2 * n2,
                got: two_body.len(),
            });
        }
        if one_body.iter().chain(&two_body).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fermion integrals".into()));
        }
        for p in 0..n_modes {
            for q in 0..p {
                let (a, b) = (one_body[p * n_modes + q], one_body[q * n_modes + p]);
                if (a - b).abs() > 1e-12 {
                    return Err(Error::Invalid(format!(
                        "one-body integrals not symmetric at ({p}, {q}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(FermionHamiltonian {
            n_modes,
            one_body,
            two_body,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn one_body(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_modes + q]
    }

    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_modes;
        self.two_body[((p * n + q) * n + r) * n + s]
    }
}

type PauliSum = HashMap<PauliString, Complex64>;

/// `a+_p` (creation) or `a_p` (annihilation) as a two-term Pauli sum:
/// `(X_p -/+ i Y_p)/2` times a Z chain on modes below `p`.
fn ladder(n: usize, p: usize, creation: bool) -> Vec<(Complex64, PauliString)> {
    let chain = (0..p).map(|q| (q, PauliLetter::Z));
    let x = PauliString::from_letters(n, chain.clone().chain([(p, PauliLetter::X)]))
        .expect("valid mode index");
    let y = PauliString::from_letters(n, chain.chain([(p, PauliLetter::Y)]))
        .expect("valid mode index");
    let y_coeff = if creation {
        Complex64::new(0.0, -0.5)
    } else {
        Complex64::new(0.0, 0.5)
    };
    vec![(Complex64::new(0.5, 0.0), x), (y_coeff, y)]
}

/// Accumulates `weight * op_1 * op_2 * ... ` into `acc`.
fn accumulate_product(
    acc: &mut PauliSum,
    weight: f64,
    ops: &[&[(Complex64, PauliString)]],
    identity: PauliString,
) {
    let mut partial: Vec<(Complex64, PauliString)> = vec![(Complex64::new(weight, 0.0), identity)];
    for op in ops {
        let mut next = Vec::with_capacity(partial.len() * op.len());
        for (c1, s1) in &partial {
            for (c2, s2) in op.iter() {
                let (phase, s) = multiply(s1, s2).expect("equal widths");
                next.push((c1 * c2 * phase, s));
            }
        }
        partial = next;
    }
    for (c, s) in partial {
        *acc.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
}

/// Maps a fermionic Hamiltonian onto qubits with the Jordan-Wigner encoding
/// (mode `p` on qubit `p`, occupied = `|1>`).
pub fn jordan_wigner(f: &FermionHamiltonian) -> Result<PauliHamiltonian> {
    jordan_wigner_within(f, &Limits::default())
}

pub fn jordan_wigner_within(f: &FermionHamiltonian, limits: &Limits) -> Result<PauliHamiltonian> {
    let n = f.n_modes;
    if n > limits.jw_modes {
        return Err(Error::CapExceeded {
            what: "Jordan-Wigner input",
            size: n,
            cap: limits.jw_modes,
        });
    }
    let create: Vec<_> = (0..n).map(|p| ladder(n, p, true)).collect();
    let annihilate: Vec<_> = (0..n).map(|p| ladder(n, p, false)).collect();
    let identity = PauliString::identity(n)?;
    let mut acc: PauliSum = HashMap::new();

    for p in 0..n {
        for q in 0..n {
            let h = f.one_body(p, q);
            if h != 0.0 {
                accumulate_product(&mut acc, h, &[&create[p], &annihilate[q]], identity);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let h = f.two_body(p, q, r, s);
                    if h != 0.0 {
                        accumulate_product(
                            &mut acc,
                            0.5 * h,
                            &[&create[p], &create[q], &annihilate[r], &annihilate[s]],
                            identity,
                        );
                    }
                }
            }
        }
    }

    let mut entries: Vec<(PauliString, Complex64)> = acc.into_iter().collect();
    entries.sort_by_key(|(s, _)| (s.weight(), *s));
    let mut terms = Vec::new();
    for (string, c) in entries {
        if c.norm() < PRUNE_THRESHOLD {
            continue;
        }
        if c.im.abs() > 1e-10 {
            return Err(Error::NonHermitian { residue: c.im });
        }
        terms.push(PauliTerm {
            coefficient: c.re,
            string,
        });
    }
    PauliHamiltonian::new(n, terms)
}
