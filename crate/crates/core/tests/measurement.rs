mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use rydberg_vqe::dynamics::QuantumState;
use rydberg_vqe::exec::Execution;
use rydberg_vqe::fixtures;
use rydberg_vqe::measurement::{
    allocate_shots, derandomize, derandomize_covering, derandomize_traced, empirical_average,
    estimate_energy, measure_plan, observables_of, sample, MeasurementBasis, ShotBatch,
};
use rydberg_vqe::pauli::{PauliHamiltonian, PauliLetter, PauliString};

const XYZ: [PauliLetter; 3] = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

fn basis(n: usize) -> impl Strategy<Value = MeasurementBasis> {
    prop::collection::vec(0usize..3, n).prop_map(move |ls| {
        MeasurementBasis::new(PauliString::from_letters(n, ls.into_iter().map(|k| XYZ[k]).enumerate()).unwrap())
            .unwrap()
    })
}

fn observables(n: usize) -> impl Strategy<Value = Vec<(PauliString, f64)>> {
    let term = (prop::collection::vec(0usize..4, n), -1.0f64..1.0).prop_filter_map("identity", move |(ls, w)| {
        let s = PauliString::from_letters(
            n,
            ls.into_iter().enumerate().filter(|&(_, k)| k < 3).map(|(q, k)| (q, XYZ[k])),
        )
        .unwrap();
        (!s.is_identity()).then_some((s, w))
    });
    prop::collection::vec(term, 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampling_is_reproducible(
        (psi, b) in (1usize..=5).prop_flat_map(|n| {
            (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << n), basis(n))
        }),
        seed in any::<u64>(),
    ) {
        let Ok(psi) = QuantumState::from_amplitudes(psi.into_iter().map(|(a, b)| c(a, b)).collect()) else {
            return Ok(());
        };
        let first = sample(&psi, &b, 200, seed).unwrap();
        prop_assert_eq!(&first, &sample(&psi, &b, 200, seed).unwrap());
    }

    #[test]
    fn derandomization_is_deterministic_and_cost_never_rises(
        (n, obs) in (1usize..=5).prop_flat_map(|n| (Just(n), observables(n))),
        m in 1usize..12,
    ) {
        let (plan, costs) = derandomize_traced(&obs, n, m, 0.1).unwrap();
        prop_assert_eq!(&plan, &derandomize(&obs, n, m, 0.1).unwrap());
        prop_assert_eq!(costs.len(), n * m);
        for w in costs.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn greedy_matches_reference_on_random_sets(
        (n, obs) in (1usize..=4).prop_flat_map(|n| (Just(n), observables(n))),
        m in 1usize..6,
    ) {
        check_against_oracle(&obs, n, m);
    }
}

fn to_chars(s: &PauliString) -> Vec<(usize, char)> {
    s.iter().map(|(q, l)| (q, l.as_char())).collect()
}

fn check_against_oracle(obs: &[(PauliString, f64)], n: usize, m: usize) {
    let plan = derandomize(obs, n, m, 0.1).unwrap();
    let oracle_in: Vec<_> = obs.iter().map(|(s, w)| (to_chars(s), *w)).collect();
    let mut merged: Vec<(String, usize)> = Vec::new();
    for label in greedy_oracle(&oracle_in, n, m, 0.1) {
        match merged.iter_mut().find(|(l, _)| *l == label) {
            Some(entry) => entry.1 += 1,
            None => merged.push((label, 1)),
        }
    }
    let got: Vec<(String, usize)> = plan
        .bases
        .iter()
        .zip(&plan.repetitions)
        .map(|(b, &r)| (b.letters().label(), r))
        .collect();
    assert_eq!(got, merged);
}

#[test]
fn lih_plan_matches_reference_greedy() {
    let obs = observables_of(&fixtures::lih());
    check_against_oracle(&obs, 6, 100);
}

#[test]
fn lih_covering_plan_hits_every_term() {
    let obs = observables_of(&fixtures::lih());
    let plan = derandomize_covering(&obs, 6, 64, 1 << 16, 0.1).unwrap();
    assert!(plan.covers(obs.iter().map(|(s, _)| s)));
    // Light terms are reached only after the heavy ones are hit many times.
    eprintln!("LiH covering plan: {} settings, {} distinct bases", plan.total_shots(), plan.n_distinct());
}

#[test]
fn x_basis_on_zero_is_fair_coin() {
    let b = MeasurementBasis::uniform(1, PauliLetter::X).unwrap();
    let batch = sample(&QuantumState::zero(1).unwrap(), &b, 100_000, 5).unwrap();
    let zeros = batch.outcomes.iter().filter(|&&o| o == 0).count() as f64;
    let sigma = (100_000.0 * 0.25f64).sqrt();
    assert!((zeros - 50_000.0).abs() < 5.0 * sigma, "{zeros}");
}

#[test]
fn plus_state_in_x_basis_always_reads_zero() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = QuantumState::from_amplitudes(vec![c(s, 0.0), c(s, 0.0)]).unwrap();
    let b = MeasurementBasis::uniform(1, PauliLetter::X).unwrap();
    assert!(sample(&plus, &b, 1000, 1).unwrap().outcomes.iter().all(|&o| o == 0));
}

#[test]
fn empirical_average_matches_enumeration() {
    let b = MeasurementBasis::from_label("ZXZ").unwrap();
    let outcomes = vec![0b000, 0b010, 0b111, 0b101, 0b011, 0b110, 0b000];
    let obs = PauliString::from_label("IXI").unwrap();
    let (omega, hits) = empirical_average(&[ShotBatch { basis: b, outcomes: outcomes.clone() }], &obs);
    let by_hand: f64 = outcomes.iter().map(|o| if o >> 1 & 1 == 0 { 1.0 } else { -1.0 }).sum::<f64>() / 7.0;
    assert_eq!(hits, 7);
    assert!((omega - by_hand).abs() < 1e-15);
}

#[test]
fn shot_averages_are_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let amps = random_state(&mut rng, 3);
        let psi = QuantumState::from_amplitudes(amps.clone()).unwrap();
        let letters: Vec<PauliLetter> = (0..3).map(|_| XYZ[rng.random_range(0..3)]).collect();
        let b = MeasurementBasis::new(PauliString::from_letters(3, letters.iter().copied().enumerate()).unwrap()).unwrap();
        // Observable: a random nonempty sub-support of the basis.
        let obs = loop {
            let s = PauliString::from_letters(3, (0..3).filter(|_| rng.random::<bool>()).map(|q| (q, letters[q]))).unwrap();
            if !s.is_identity() {
                break s;
            }
        };
        let exact = quadratic_form(&string_matrix(&obs), &amps).re;
        let (runs, shots) = (200u64, 100usize);
        let mean: f64 = (0..runs)
            .map(|seed| empirical_average(&[sample(&psi, &b, shots, seed).unwrap()], &obs).0)
            .sum::<f64>()
            / runs as f64;
        let sigma = ((1.0 - exact * exact) / (runs as f64 * shots as f64)).sqrt().max(1e-6);
        assert!((mean - exact).abs() < 5.0 * sigma, "{mean} vs {exact}");
    }
}

#[test]
fn allocation_matches_largest_remainder_reference() {
    let h = fixtures::lih();
    let obs = observables_of(&h);
    let plan = derandomize(&obs, 6, 1000, 0.1).unwrap();
    let alloc = allocate_shots(&plan, 10_000, &obs).unwrap();
    assert_eq!(alloc.total_shots(), 10_000);
    let total: f64 = obs.iter().map(|(_, w)| w.abs()).sum();
    let scores: Vec<f64> = plan
        .bases
        .iter()
        .map(|b| {
            obs.iter()
                .filter(|(s, _)| s.iter().all(|(q, l)| b.letters().letter(q) == l))
                .map(|(_, w)| w.abs() / total)
                .sum()
        })
        .collect();
    assert_eq!(alloc.repetitions, apportion_oracle(&scores, 10_000));
    let top = (0..alloc.n_distinct()).max_by_key(|&k| alloc.repetitions[k]).unwrap();
    assert_eq!(alloc.bases[top].letters().label(), "ZZZZZZ");
}

#[test]
fn disjoint_equal_sets_split_evenly() {
    let obs: Vec<(PauliString, f64)> = ["IZ", "ZI", "IX", "XI"]
        .iter()
        .map(|l| (PauliString::from_label(l).unwrap(), 0.25))
        .collect();
    let plan = rydberg_vqe::measurement::DerandomizedPlan::new(
        0.1,
        vec![MeasurementBasis::from_label("ZZ").unwrap(), MeasurementBasis::from_label("XX").unwrap()],
        vec![1, 1],
    )
    .unwrap();
    let alloc = allocate_shots(&plan, 1001, &obs).unwrap();
    assert!(alloc.repetitions[0].abs_diff(alloc.repetitions[1]) <= 1);
}

#[test]
fn estimates_converge_with_budget() {
    let h = fixtures::lih();
    let obs = observables_of(&h);
    let plan = derandomize_covering(&obs, 6, 64, 1 << 16, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = QuantumState::from_amplitudes(random_state(&mut rng, 6)).unwrap();
    let exact = h.expectation(&psi).unwrap();
    let mut errors = Vec::new();
    for budget in [1_000, 10_000, 100_000] {
        let alloc = allocate_shots(&plan, budget, &obs).unwrap();
        let mean_err: f64 = (0..10)
            .map(|seed| {
                let batches = measure_plan(&psi, &alloc, seed, Execution::Sequential).unwrap();
                let est = estimate_energy(&h, &batches).unwrap();
                assert!(est.uncovered.is_empty());
                (est.energy - exact).abs()
            })
            .sum::<f64>()
            / 10.0;
        errors.push(mean_err);
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn z_only_energy_on_zero_state_is_exact() {
    let h: PauliHamiltonian = rydberg_vqe::pauli::parse_hamiltonian("qubits: 3\n0.5 I\n0.2 Z0\n-0.4 Z1 Z2\n0.1 Z0 Z1 Z2").unwrap();
    let obs = observables_of(&h);
    let plan = allocate_shots(&derandomize(&obs, 3, 10, 0.1).unwrap(), 5000, &obs).unwrap();
    let batches = measure_plan(&QuantumState::zero(3).unwrap(), &plan, 0, Execution::default()).unwrap();
    let est = estimate_energy(&h, &batches).unwrap();
    assert!((est.energy - 0.4).abs() < 1e-12);
    assert!(est.hits.iter().all(|&k| k == 5000));
}
