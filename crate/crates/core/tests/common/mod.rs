//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's numerical kernels: matrices are
//! built from explicit Kronecker products, fermionic operators act on
//! occupation bit strings, and the Schrodinger equation is integrated with
//! an adaptive Dormand-Prince scheme.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use rydberg_vqe::dynamics::{DriveSegment, Field, ZConvention};
use rydberg_vqe::pauli::{PauliHamiltonian, PauliLetter, PauliString};
use rydberg_vqe::register::{InteractionModel, Register};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single(letter: PauliLetter) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match letter {
        PauliLetter::I => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        PauliLetter::X => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        PauliLetter::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        PauliLetter::Z => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// `|1><1|`.
pub fn occupation() -> CMat {
    let z = c(0.0, 0.0);
    CMat::from_row_slice(2, 2, &[z, z, z, c(1.0, 0.0)])
}

/// `ops[n-1] (x) ... (x) ops[0]`: qubit 0 is the least significant factor.
pub fn kron_chain(ops: &[CMat]) -> CMat {
    let mut m = CMat::from_element(1, 1, c(1.0, 0.0));
    for op in ops.iter().rev() {
        m = m.kronecker(op);
    }
    m
}

/// Operator acting as `op` on `qubit` and identity elsewhere.
pub fn embed(n: usize, qubit: usize, op: &CMat) -> CMat {
    let ops: Vec<CMat> = (0..n)
        .map(|q| if q == qubit { op.clone() } else { single(PauliLetter::I) })
        .collect();
    kron_chain(&ops)
}

pub fn string_matrix(s: &PauliString) -> CMat {
    let ops: Vec<CMat> = (0..s.n_qubits()).map(|q| single(s.letter(q))).collect();
    kron_chain(&ops)
}

pub fn kron_matrix(h: &PauliHamiltonian) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut m = CMat::zeros(dim, dim);
    for t in h.terms() {
        m += string_matrix(&t.string) * c(t.coefficient, 0.0);
    }
    m
}

pub fn quadratic_form(m: &CMat, psi: &[Complex64]) -> Complex64 {
    let v = nalgebra::DVector::from_column_slice(psi);
    (v.adjoint() * m * &v)[(0, 0)]
}

pub fn frobenius(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Fock-space matrix of `sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s`
/// with mode `p` stored as bit `p` and Jordan-Wigner sign
/// `(-1)^(number of occupied modes below p)`.
pub fn fock_matrix(n: usize, one_body: &[f64], two_body: &[f64]) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    let lower = |state: usize, p: usize| (state & ((1 << p) - 1)).count_ones();
    // Applies a (creation=false) or a+ (creation=true); None if it vanishes.
    let apply = |state: usize, p: usize, creation: bool| -> Option<(f64, usize)> {
        let occupied = state >> p & 1 == 1;
        if occupied == creation {
            return None;
        }
        let sign = if lower(state, p) % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, state ^ (1 << p)))
    };
    let chain = |state: usize, ops: &[(usize, bool)]| -> Option<(f64, usize)> {
        let mut s = state;
        let mut sign = 1.0;
        for &(p, creation) in ops.iter().rev() {
            let (g, next) = apply(s, p, creation)?;
            sign *= g;
            s = next;
        }
        Some((sign, s))
    };
    for col in 0..dim {
        for p in 0..n {
            for q in 0..n {
                let h = one_body[p * n + q];
                if h == 0.0 {
                    continue;
                }
                if let Some((sign, row)) = chain(col, &[(p, true), (q, false)]) {
                    m[(row, col)] += c(h * sign, 0.0);
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let h = two_body[((p * n + q) * n + r) * n + s];
                        if h == 0.0 {
                            continue;
                        }
                        let ops = [(p, true), (q, true), (r, false), (s, false)];
                        if let Some((sign, row)) = chain(col, &ops) {
                            m[(row, col)] += c(0.5 * h * sign, 0.0);
                        }
                    }
                }
            }
        }
    }
    m
}

/// Resource Hamiltonian assembled from Kronecker products.
pub fn resource_matrix(r: &Register, seg: &DriveSegment) -> CMat {
    let n = r.len();
    let dim = 1usize << n;
    let resolve = |f: &Field| match f {
        Field::Global(x) => vec![*x; n],
        Field::Local(v) => v.clone(),
    };
    let omega = resolve(&seg.omega);
    let delta = resolve(&seg.delta);
    let mut h = CMat::zeros(dim, dim);
    let drive = single(PauliLetter::X) * c(seg.phase.cos(), 0.0)
        + single(PauliLetter::Y) * c(seg.phase.sin(), 0.0);
    let n_op = occupation();
    for i in 0..n {
        h += embed(n, i, &drive) * c(omega[i] / 2.0, 0.0);
        match seg.z_convention {
            ZConvention::Projector => h -= embed(n, i, &n_op) * c(delta[i], 0.0),
            // -(delta/2)(2n - I)
            ZConvention::HalfZ => {
                let zt = n_op.clone() * c(2.0, 0.0) - single(PauliLetter::I);
                h -= embed(n, i, &zt) * c(delta[i] / 2.0, 0.0);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = r.positions();
            let d = ((p[i][0] - p[j][0]).powi(2) + (p[i][1] - p[j][1]).powi(2)).sqrt();
            match r.model() {
                InteractionModel::Ising { c6 } if i > j => {
                    h += embed(n, i, &n_op) * embed(n, j, &n_op) * c(c6 / d.powi(6), 0.0);
                }
                InteractionModel::Ising { .. } => {}
                InteractionModel::Xy { c3 } => {
                    let xx = embed(n, i, &single(PauliLetter::X)) * embed(n, j, &single(PauliLetter::X));
                    let yy = embed(n, i, &single(PauliLetter::Y)) * embed(n, j, &single(PauliLetter::Y));
                    h += (xx + yy) * c(c3 / d.powi(3), 0.0);
                }
            }
        }
    }
    h
}

/// Adaptive Dormand-Prince 5(4) integration of `psi' = -i H psi` over `t`.
pub fn integrate(h: &CMat, psi: &[Complex64], t: f64, tol: f64) -> Vec<Complex64> {
    let f = |y: &[Complex64]| -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(y);
        (h * v).iter().map(|z| z * c(0.0, -1.0)).collect()
    };
    let axpy = |y: &[Complex64], terms: &[(f64, &Vec<Complex64>)], dt: f64| -> Vec<Complex64> {
        let mut out = y.to_vec();
        for (a, k) in terms {
            for (o, kv) in out.iter_mut().zip(k.iter()) {
                *o += kv * (a * dt);
            }
        }
        out
    };
    let mut y = psi.to_vec();
    let mut time = 0.0;
    let mut dt = (t / 100.0).max(1e-6);
    let mut k1 = f(&y);
    while time < t {
        dt = dt.min(t - time);
        let k2 = f(&axpy(&y, &[(1.0 / 5.0, &k1)], dt));
        let k3 = f(&axpy(&y, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)], dt));
        let k4 = f(&axpy(&y, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)], dt));
        let k5 = f(&axpy(
            &y,
            &[
                (19372.0 / 6561.0, &k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
            dt,
        ));
        let k6 = f(&axpy(
            &y,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
            dt,
        ));
        let y5 = axpy(
            &y,
            &[
                (35.0 / 384.0, &k1),
                (500.0 / 1113.0, &k3),
                (125.0 / 192.0, &k4),
                (-2187.0 / 6784.0, &k5),
                (11.0 / 84.0, &k6),
            ],
            dt,
        );
        let k7 = f(&y5);
        let y4 = axpy(
            &y,
            &[
                (5179.0 / 57600.0, &k1),
                (7571.0 / 16695.0, &k3),
                (393.0 / 640.0, &k4),
                (-92097.0 / 339200.0, &k5),
                (187.0 / 2100.0, &k6),
                (1.0 / 40.0, &k7),
            ],
            dt,
        );
        let err = y5
            .iter()
            .zip(&y4)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if err <= tol {
            time += dt;
            y = y5;
            k1 = k7;
        }
        let factor = if err == 0.0 { 5.0 } else { 0.9 * (tol / err).powf(0.2) };
        dt *= factor.clamp(0.2, 5.0);
    }
    y
}

/// Lowest eigenvalue of the real symmetric 2x2 matrix `[[a, b], [b, d]]`.
pub fn min_eig_2x2(a: f64, b: f64, d: f64) -> f64 {
    (a + d) / 2.0 - (((a - d) / 2.0).powi(2) + b * b).sqrt()
}

/// `exp(-i t (a sz + b sx)) |up>` computed by diagonalizing the 2x2 block.
pub fn rabi_2x2(a: f64, b: f64, t: f64) -> (Complex64, Complex64) {
    let m = DMatrix::from_row_slice(2, 2, &[a, b, b, -a]);
    let eig = m.symmetric_eigen();
    let mut up = c(0.0, 0.0);
    let mut down = c(0.0, 0.0);
    for k in 0..2 {
        let v = eig.eigenvectors.column(k);
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        up += phase * v[0] * v[0];
        down += phase * v[1] * v[0];
    }
    (up, down)
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Straightforward greedy derandomizer: recomputes the full confidence cost
/// from the partially assigned bases for every candidate letter.
pub fn greedy_oracle(
    observables: &[(Vec<(usize, char)>, f64)],
    n: usize,
    m: usize,
    epsilon: f64,
) -> Vec<String> {
    let nu = 1.0 - (-epsilon * epsilon / 2.0).exp();
    let total: f64 = observables.iter().map(|(_, w)| w.abs()).sum();
    let mut bases: Vec<Vec<Option<char>>> = vec![vec![None; n]; m];
    let cost = |bases: &Vec<Vec<Option<char>>>| -> f64 {
        observables
            .iter()
            .map(|(letters, w)| {
                let mut prod = 1.0;
                for basis in bases {
                    let mut q = 1.0;
                    for &(j, l) in letters {
                        q *= match basis[j] {
                            None => 1.0 / 3.0,
                            Some(b) if b == l => 1.0,
                            Some(_) => 0.0,
                        };
                    }
                    prod *= 1.0 - nu * q;
                }
                w.abs() / total * prod
            })
            .sum()
    };
    for b in 0..m {
        for j in 0..n {
            let mut best = ('Z', f64::INFINITY);
            for l in ['Z', 'X', 'Y'] {
                bases[b][j] = Some(l);
                let v = cost(&bases);
                if v < best.1 {
                    best = (l, v);
                }
            }
            bases[b][j] = Some(best.0);
        }
    }
    // Ket order: qubit 0 is the last character.
    bases
        .into_iter()
        .map(|b| b.into_iter().rev().map(|l| l.unwrap()).collect())
        .collect()
}

/// Largest-remainder apportionment after one guaranteed shot per basis.
pub fn apportion_oracle(weights: &[f64], budget: usize) -> Vec<usize> {
    let k = weights.len();
    let spare = budget - k;
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w * spare as f64 / sum).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|e| *e as usize).collect();
    let mut left = spare - alloc.iter().sum::<usize>();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| {
        let fa = exact[a] - alloc[a] as f64;
        let fb = exact[b] - alloc[b] as f64;
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in idx {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }
    alloc.into_iter().map(|a| a + 1).collect()
}
