mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use sha2::{Digest, Sha256};

use common::*;
use rydberg_vqe::dynamics::QuantumState;
use rydberg_vqe::fermion::{jordan_wigner, FermionHamiltonian};
use rydberg_vqe::fixtures;
use rydberg_vqe::pauli::{
    hits, multiply, parse_hamiltonian, PauliHamiltonian, PauliLetter, PauliString, PauliTerm,
};

fn letter() -> impl Strategy<Value = PauliLetter> {
    prop_oneof![
        Just(PauliLetter::I),
        Just(PauliLetter::X),
        Just(PauliLetter::Y),
        Just(PauliLetter::Z)
    ]
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(letter(), n)
        .prop_map(move |ls| PauliString::from_letters(n, ls.into_iter().enumerate()).unwrap())
}

fn hamiltonian(max_qubits: usize) -> impl Strategy<Value = PauliHamiltonian> {
    (1..=max_qubits).prop_flat_map(|n| {
        prop::collection::vec((-2.0f64..2.0, string(n)), 1..12).prop_map(move |terms| {
            PauliHamiltonian::new(
                n,
                terms.into_iter().map(|(coefficient, string)| PauliTerm { coefficient, string }),
            )
            .unwrap()
        })
    })
}

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<num_complex::Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << n).prop_filter_map(
        "zero vector",
        |v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| v.iter().map(|&(a, b)| c(a / norm, b / norm)).collect())
        },
    )
}

fn term_map(h: &PauliHamiltonian) -> BTreeMap<String, f64> {
    h.terms().iter().map(|t| (t.string.label(), t.coefficient)).collect()
}

proptest! {
    #[test]
    fn text_round_trip(h in hamiltonian(6)) {
        let again = parse_hamiltonian(&h.to_text()).unwrap();
        prop_assert_eq!(again.n_qubits(), h.n_qubits());
        let (a, b) = (term_map(&h), term_map(&again));
        prop_assert_eq!(a.len(), b.len());
        for (k, v) in &a {
            prop_assert!((b[k] - v).abs() <= 1e-15 * v.abs().max(1.0));
        }
    }

    #[test]
    fn multiply_is_associative_and_matches_matrices(
        (a, b, cc) in (1usize..=3).prop_flat_map(|n| (string(n), string(n), string(n)))
    ) {
        let (p_ab, ab) = multiply(&a, &b).unwrap();
        let (p_ab_c, ab_c) = multiply(&ab, &cc).unwrap();
        let (p_bc, bc) = multiply(&b, &cc).unwrap();
        let (p_a_bc, a_bc) = multiply(&a, &bc).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!((p_ab * p_ab_c - p_bc * p_a_bc).norm() < 1e-12);
        let product = string_matrix(&a) * string_matrix(&b);
        let expected = string_matrix(&ab).map(|x| x * p_ab);
        prop_assert!(frobenius(&product, &expected) < 1e-12);
    }

    #[test]
    fn expectation_matches_quadratic_form(
        (h, psi) in (1usize..=8).prop_flat_map(|n| {
            (prop::collection::vec((-2.0f64..2.0, string(n)), 1..10), amplitudes(n))
                .prop_map(move |(terms, psi)| {
                    let h = PauliHamiltonian::new(
                        n,
                        terms.into_iter().map(|(coefficient, string)| PauliTerm { coefficient, string }),
                    )
                    .unwrap();
                    (h, psi)
                })
        })
    ) {
        let got = h.expectation(&QuantumState::from_amplitudes(psi.clone()).unwrap()).unwrap();
        let oracle = quadratic_form(&kron_matrix(&h), &psi);
        prop_assert!((got - oracle.re).abs() < 1e-9);
        prop_assert!(oracle.im.abs() < 1e-9);
    }

    #[test]
    fn hits_is_monotone_under_restriction(
        (m, o, keep) in (1usize..=8).prop_flat_map(|n| {
            (
                prop::collection::vec(prop_oneof![Just(PauliLetter::X), Just(PauliLetter::Y), Just(PauliLetter::Z)], n),
                string(n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
    ) {
        let n = m.len();
        let m = PauliString::from_letters(n, m.into_iter().enumerate()).unwrap();
        let sub = PauliString::from_letters(n, o.iter().filter(|(q, _)| keep[*q])).unwrap();
        if hits(&m, &o).unwrap() {
            prop_assert!(hits(&m, &sub).unwrap());
        }
    }

    #[test]
    fn jordan_wigner_matches_fock_space(
        (n, one, two) in (1usize..=4).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(-1.0f64..1.0, n * n),
                prop::collection::vec(-1.0f64..1.0, n.pow(4)),
            )
        })
    ) {
        let mut one = one;
        for p in 0..n {
            for q in 0..p {
                one[q * n + p] = one[p * n + q];
            }
        }
        let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
        let mut two = two;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        if idx(p, q, r, s) > idx(s, r, q, p) {
                            two[idx(p, q, r, s)] = two[idx(s, r, q, p)];
                        }
                    }
                }
            }
        }
        let f = FermionHamiltonian::new(n, one.clone(), two.clone()).unwrap();
        let h = jordan_wigner(&f).unwrap();
        prop_assert!(frobenius(&kron_matrix(&h), &fock_matrix(n, &one, &two)) < 1e-9);
    }
}

#[test]
fn xz_times_yz() {
    let a = PauliString::from_label("ZX").unwrap();
    let b = PauliString::from_label("ZY").unwrap();
    let (phase, s) = multiply(&a, &b).unwrap();
    assert_eq!(s, PauliString::from_label("IZ").unwrap());
    assert!((phase - c(0.0, 1.0)).norm() < 1e-15);
    let product = string_matrix(&a) * string_matrix(&b);
    assert!(frobenius(&product, &string_matrix(&s).map(|x| x * phase)) < 1e-15);
}

#[test]
fn density_density_term_matches_fock_space() {
    let n = 2;
    let mut two = vec![0.0; 16];
    two[((0 * n + 1) * n + 1) * n] = 2.0;
    let f = FermionHamiltonian::new(n, vec![0.0; 4], two.clone()).unwrap();
    let h = jordan_wigner(&f).unwrap();
    assert!(frobenius(&kron_matrix(&h), &fock_matrix(n, &[0.0; 4], &two)) < 1e-12);
}

#[test]
fn lih_matrix_matches_kronecker_sum() {
    let h = fixtures::lih();
    let m = h.to_matrix().unwrap();
    assert_eq!(m.nrows(), 64);
    assert!(frobenius(&m, &m.adjoint()) < 1e-12);
    assert!(frobenius(&m, &kron_matrix(&h)) < 1e-10);
}

#[test]
fn lih_ground_energy_golden() {
    let e = fixtures::lih().ground_energy_exact().unwrap();
    assert!((e - (-1.099060562018)).abs() < 1e-9, "{e}");
    let oracle = kron_matrix(&fixtures::lih()).map(|x| x.re).symmetric_eigen();
    assert!((e - oracle.eigenvalues.min()).abs() < 1e-10);
}

#[test]
fn beh2_ground_vector_reproduces_energy() {
    let h = fixtures::beh2();
    let (e, psi) = h.ground_state().unwrap();
    assert!((h.expectation(&psi).unwrap() - e).abs() < 1e-8);
    assert!((quadratic_form(&kron_matrix(&h), psi.amplitudes()).re - e).abs() < 1e-8);
}

#[derive(serde::Deserialize)]
struct Entry {
    name: String,
    file: String,
    qubits: usize,
    term_count: usize,
    sha256: String,
}

#[derive(serde::Deserialize)]
struct Manifest {
    fixtures: Vec<Entry>,
}

#[test]
fn fixture_manifest_integrity() {
    let entries = serde_json::from_str::<Manifest>(fixtures::MANIFEST_JSON).unwrap().fixtures;
    assert_eq!(entries.len(), 4);
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for e in entries {
        let text = std::fs::read_to_string(dir.join(&e.file)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(text.as_bytes())), e.sha256, "{}", e.name);
        let h = fixtures::by_name(&e.name).unwrap();
        assert_eq!(h.n_qubits(), e.qubits);
        assert_eq!(h.len(), e.term_count, "{}", e.name);
        // Every fixture line is one distinct term, so nothing merges on ingestion.
        let lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#') && !l.starts_with("qubits"))
            .count();
        assert_eq!(lines, e.term_count, "{}", e.name);
    }
}

#[test]
fn appendix_leading_terms() {
    let lih = fixtures::lih();
    assert_eq!(lih.identity_coefficient(), -0.19975);
    assert_eq!(lih.coefficient_of(&PauliString::from_label("IIIIIZ").unwrap()), Some(0.05393));
    assert_eq!(lih.coefficient_of(&PauliString::from_label("IIIIZZ").unwrap()), Some(-0.31773));
    let beh2 = fixtures::beh2();
    assert_eq!(beh2.identity_coefficient(), -1.90305);
    assert_eq!(beh2.coefficient_of(&PauliString::from_label("IIIZIZ").unwrap()), Some(0.18326));
}
