mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::*;
use rydberg_vqe::dynamics::{
    evolve, ucc_xy_state, DriveSegment, Field, PulseSequence, QuantumState, ZConvention,
};
use rydberg_vqe::pauli::{PauliHamiltonian, PauliLetter, PauliString, PauliTerm};
use rydberg_vqe::register::{InteractionModel, Register, DEFAULT_C3};

fn register(n: usize, xy: bool) -> impl Strategy<Value = Register> {
    prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), n).prop_map(move |jitter| {
        let positions = jitter
            .into_iter()
            .enumerate()
            .map(|(i, (dx, dy))| [8.0 * (i % 3) as f64 + dx, 8.0 * (i / 3) as f64 + dy])
            .collect();
        let model = if xy { InteractionModel::xy() } else { InteractionModel::ising() };
        Register::new(positions, model).unwrap()
    })
}

fn field(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Field> {
    prop_oneof![
        (lo..hi).prop_map(Field::Global),
        prop::collection::vec(lo..hi, n).prop_map(Field::Local),
    ]
}

fn segment(n: usize) -> impl Strategy<Value = DriveSegment> {
    (
        0.01f64..0.5,
        field(n, 0.0, 4.0 * PI),
        field(n, -4.0 * PI, 4.0 * PI),
        -PI..PI,
        any::<bool>(),
    )
        .prop_map(|(duration_us, omega, delta, phase, half)| DriveSegment {
            duration_us,
            omega,
            delta,
            phase,
            z_convention: if half { ZConvention::HalfZ } else { ZConvention::Projector },
        })
}

fn state(n: usize) -> impl Strategy<Value = QuantumState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << n).prop_filter_map("zero", |v| {
        QuantumState::from_amplitudes(v.into_iter().map(|(a, b)| c(a, b)).collect()).ok()
    })
}

fn instance(max_n: usize, max_segments: usize) -> impl Strategy<Value = (Register, Vec<DriveSegment>, QuantumState)> {
    (1..=max_n, any::<bool>()).prop_flat_map(move |(n, xy)| {
        (register(n, xy), prop::collection::vec(segment(n), 1..=max_segments), state(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn evolution_preserves_norm((r, segs, psi) in instance(6, 3)) {
        let out = evolve(&psi, &r, &PulseSequence::new(segs)).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sequences_compose((r, segs, psi) in instance(5, 4)) {
        let whole = evolve(&psi, &r, &PulseSequence::new(segs.clone())).unwrap();
        let split = segs.len() / 2;
        let first = evolve(&psi, &r, &PulseSequence::new(segs[..split].to_vec())).unwrap();
        let second = if split == segs.len() {
            first
        } else {
            evolve(&first, &r, &PulseSequence::new(segs[split..].to_vec())).unwrap()
        };
        prop_assert!(1.0 - whole.fidelity(&second).unwrap() < 1e-10);
    }

    #[test]
    fn propagator_matches_integrator((r, segs, psi) in instance(4, 2)) {
        let out = evolve(&psi, &r, &PulseSequence::new(segs.clone())).unwrap();
        let mut oracle = psi.amplitudes().to_vec();
        for seg in &segs {
            oracle = integrate(&resource_matrix(&r, seg), &oracle, seg.duration_us, 1e-12);
        }
        prop_assert!(1.0 - fidelity(out.amplitudes(), &oracle) <= 1e-8);
    }

    #[test]
    fn xy_conserves_excitations(
        (r, segs, psi) in (2usize..=6).prop_flat_map(|n| {
            (register(n, true), prop::collection::vec(segment(n), 1..=4), state(n))
        })
    ) {
        let start = psi.excitation_number();
        let mut s = psi;
        for mut seg in segs {
            seg.omega = Field::Global(0.0);
            s = evolve(&s, &r, &PulseSequence::new(vec![seg])).unwrap();
            prop_assert!((s.excitation_number() - start).abs() < 1e-9);
        }
    }

    #[test]
    fn z_conventions_differ_by_global_phase(
        (r, psi) in (1usize..=5, any::<bool>()).prop_flat_map(|(n, xy)| (register(n, xy), state(n))),
        t in 0.01f64..1.0,
        omega in 0.0f64..4.0 * PI,
        delta in -4.0 * PI..4.0 * PI,
        phase in -PI..PI,
    ) {
        let seg = DriveSegment::global(t, omega, delta).with_phase(phase);
        let a = evolve(&psi, &r, &PulseSequence::new(vec![seg.clone()])).unwrap();
        let b = evolve(&psi, &r, &PulseSequence::new(vec![seg.with_convention(ZConvention::HalfZ)])).unwrap();
        prop_assert!(1.0 - a.fidelity(&b).unwrap() < 1e-10);
    }

    #[test]
    fn ucc_states_stay_in_single_excitation_block(
        d0 in -4.0 * PI..4.0 * PI,
        d1 in -4.0 * PI..4.0 * PI,
        t in 0.0f64..8.0,
        spacing in 5.0f64..40.0,
    ) {
        let r = Register::line(2, spacing, InteractionModel::xy()).unwrap();
        let psi = ucc_xy_state(d0, d1, t, &r).unwrap();
        let a = psi.amplitudes();
        prop_assert!(a[0].norm() < 1e-10 && a[3].norm() < 1e-10);
        let (up, down) = rabi_2x2(d1 - d0, 4.0 * DEFAULT_C3 / spacing.powi(3), t);
        prop_assert!((a[1] - up).norm() < 1e-9);
        prop_assert!((a[2] - down).norm() < 1e-9);
    }
}

#[test]
fn three_qubit_two_segment_pulse_matches_integrator() {
    let r = Register::new(vec![[0.0, 0.0], [7.0, 0.0], [3.0, 6.5]], InteractionModel::ising()).unwrap();
    let segs = vec![
        DriveSegment {
            duration_us: 0.3,
            omega: Field::Local(vec![2.0, 5.0, 9.0]),
            delta: Field::Global(-3.0),
            phase: 0.4,
            z_convention: ZConvention::Projector,
        },
        DriveSegment::global(0.45, 7.5, 6.0).with_phase(-1.1),
    ];
    let psi = QuantumState::zero(3).unwrap();
    let out = evolve(&psi, &r, &PulseSequence::new(segs.clone())).unwrap();
    let mut oracle = psi.amplitudes().to_vec();
    for seg in &segs {
        oracle = integrate(&resource_matrix(&r, seg), &oracle, seg.duration_us, 1e-13);
    }
    assert!(1.0 - fidelity(out.amplitudes(), &oracle) < 1e-9);
}

#[test]
fn xy_pair_matches_kronecker_construction() {
    let d = 9.0;
    let r = Register::line(2, d, InteractionModel::xy()).unwrap();
    let seg = DriveSegment::global(0.1, 0.0, 0.0);
    let h = rydberg_vqe::dynamics::build_hamiltonian(&r, &seg).unwrap();
    let oracle = resource_matrix(&r, &seg);
    assert!(frobenius(&h, &oracle) < 1e-12);
    assert!((h[(1, 2)].re - 4.0 * DEFAULT_C3 / d.powi(3)).abs() < 1e-12);
}

#[test]
fn detuning_keeps_ground_state_and_z_energies() {
    let r = Register::line(3, 6.0, InteractionModel::ising()).unwrap();
    let h = PauliHamiltonian::new(
        3,
        [(0.3, "IIZ"), (-0.7, "ZZI"), (0.2, "ZIZ")].map(|(coefficient, l)| PauliTerm {
            coefficient,
            string: PauliString::from_label(l).unwrap(),
        }),
    )
    .unwrap();
    let psi0 = QuantumState::zero(3).unwrap();
    let seg = DriveSegment {
        duration_us: 0.7,
        omega: Field::Global(0.0),
        delta: Field::Local(vec![3.0, -1.0, 2.5]),
        phase: 0.0,
        z_convention: ZConvention::Projector,
    };
    let out = evolve(&psi0, &r, &PulseSequence::new(vec![seg])).unwrap();
    assert!((out.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    assert!((h.expectation(&out).unwrap() - h.expectation(&psi0).unwrap()).abs() < 1e-12);
}

#[test]
fn equal_detunings_transfer_fully() {
    let d = 15.0;
    let r = Register::line(2, d, InteractionModel::xy()).unwrap();
    let j_eff = 4.0 * DEFAULT_C3 / d.powi(3);
    let psi = ucc_xy_state(1.3, 1.3, PI / (2.0 * j_eff), &r).unwrap();
    assert!((psi.amplitudes()[2].norm_sqr() - 1.0).abs() < 1e-12);
    let start = ucc_xy_state(0.5, -2.0, 0.0, &r).unwrap();
    assert_eq!(start.amplitudes()[1], c(1.0, 0.0));
}

#[test]
fn ucc_matches_kronecker_evolution() {
    let d = 11.0;
    let r = Register::line(2, d, InteractionModel::xy()).unwrap();
    let (d0, d1, t) = (0.8, -1.7, 1.3);
    let j = DEFAULT_C3 / d.powi(3);
    let xx = kron_chain(&[single(PauliLetter::X), single(PauliLetter::X)]);
    let yy = kron_chain(&[single(PauliLetter::Y), single(PauliLetter::Y)]);
    let h = embed(2, 0, &single(PauliLetter::Z)).map(|x| x * d0)
        + embed(2, 1, &single(PauliLetter::Z)).map(|x| x * d1)
        + (xx + yy).map(|x| x * (2.0 * j));
    let mut start = vec![c(0.0, 0.0); 4];
    start[1] = c(1.0, 0.0);
    let oracle = integrate(&h, &start, t, 1e-13);
    let psi = ucc_xy_state(d0, d1, t, &r).unwrap();
    assert!(1.0 - fidelity(psi.amplitudes(), &oracle) < 1e-10);
}
