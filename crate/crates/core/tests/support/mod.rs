//! Dense reference computations for integration tests. Everything here is
//! built from scratch on full 4^n-dimensional vectors, sharing nothing with the
//! library's Bell-coordinate machinery.

#![allow(dead_code)]

use hamlocal::pauli::{random_hamiltonian, HamiltonianSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn letter_matrix(c: char) -> M {
    match c {
        'I' => M::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        'X' => M::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        'Y' => M::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        'Z' => M::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("bad letter {c}"),
    }
}

/// Leftmost letter is the most significant tensor factor.
pub fn pauli_matrix(word: &str) -> M {
    word.chars()
        .fold(M::identity(1, 1), |acc, c| acc.kronecker(&letter_matrix(c)))
}

pub fn weight(word: &str) -> usize {
    word.chars().filter(|&c| c != 'I').count()
}

/// All words of length n, in lexicographic I < X < Y < Z order.
pub fn all_words(n: usize) -> Vec<String> {
    let mut words = vec![String::new()];
    for _ in 0..n {
        words = words
            .into_iter()
            .flat_map(|w| "IXYZ".chars().map(move |c| format!("{w}{c}")))
            .collect();
    }
    words
}

pub fn hamiltonian_matrix(h: &HamiltonianSpec) -> M {
    let d = 1 << h.num_qubits();
    let mut m = M::zeros(d, d);
    for (p, c) in h.terms().terms() {
        m += pauli_matrix(&p.to_string()) * Complex64::new(c, 0.0);
    }
    m
}

/// `exp(-i t m)` by scaling and squaring on a truncated Taylor series.
pub fn expm(m: &M, t: f64) -> M {
    let a = m * Complex64::new(0.0, -t);
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale /= 2.0;
        squarings += 1;
    }
    let a = a * Complex64::new(scale, 0.0);
    let n = m.nrows();
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for j in 1..=24 {
        term = &term * &a / Complex64::new(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i t m) v` by a Taylor series on the vector, in small time slices.
pub fn expm_apply(m: &M, t: f64, v: &V) -> V {
    let slices = (t.abs() * 8.0).ceil().max(1.0) as usize;
    let dt = t / slices as f64;
    let mut out = v.clone();
    for _ in 0..slices {
        let mut term = out.clone();
        let mut acc = out.clone();
        for j in 1..=30 {
            term = (m * &term) * Complex64::new(0.0, -dt / j as f64);
            acc += &term;
        }
        out = acc;
    }
    out
}

/// Largest singular value, with the same stall guard as the library: unit max
/// entry, capped iterations, Frobenius upper bound on failure.
pub fn spectral_norm(m: &M) -> f64 {
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let unit = m.map(|z| z / scale);
    match unit.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        Some(svd) => scale * svd.singular_values.max(),
        None => scale * unit.norm(),
    }
}

/// `(I (x) P)|Phi>` with `|Phi> = sum_i |i>|i> / sqrt(d)`; index `a d + b`
/// has `a` on the left factor.
pub fn bell_vector(word: &str) -> V {
    let p = pauli_matrix(word);
    let d = p.nrows();
    let mut v = V::zeros(d * d);
    let norm = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        for b in 0..d {
            v[a * d + b] = p[(b, a)] * norm;
        }
    }
    v
}

/// `I (x) u` on the doubled space.
pub fn lift(u: &M) -> M {
    M::identity(u.nrows(), u.nrows()).kronecker(u)
}

/// Orthonormal columns spanning the identity and every string of weight above k.
pub fn d_basis(n: usize, k: usize) -> M {
    let cols: Vec<V> = all_words(n)
        .iter()
        .filter(|w| weight(w) == 0 || weight(w) > k)
        .map(|w| bell_vector(w))
        .collect();
    M::from_columns(&cols)
}

pub struct DensePrimitive {
    pub p_abort: f64,
    pub conditional_one: f64,
    /// Normalized final state on the doubled space.
    pub final_state: V,
}

/// `m` steps of `exp(-i step H)` each followed by projection onto D, then a
/// Bell measurement where any non-identity outcome counts as one.
pub fn dense_primitive(h: &HamiltonianSpec, k: usize, m: u64, step: f64) -> DensePrimitive {
    let n = h.num_qubits();
    let basis = d_basis(n, k);
    let pi = &basis * basis.adjoint();
    let w = &pi * lift(&expm(&hamiltonian_matrix(h), step));
    let phi = bell_vector(&"I".repeat(n));
    let mut v = phi.clone();
    for _ in 0..m {
        v = &w * v;
    }
    let survive = v.norm_squared();
    let final_state = v / Complex64::new(survive.sqrt(), 0.0);
    let zero = phi.dotc(&final_state).norm_sqr();
    DensePrimitive {
        p_abort: 1.0 - survive,
        conditional_one: 1.0 - zero,
        final_state,
    }
}

/// `Pi_D (I (x) H) Pi_D` on the doubled space.
pub fn dense_a(h: &HamiltonianSpec, k: usize) -> M {
    let basis = d_basis(h.num_qubits(), k);
    let pi = &basis * basis.adjoint();
    &pi * lift(&hamiltonian_matrix(h)) * &pi
}

/// The shared random suite: n cycles through `sizes`, 2n^2 terms (capped),
/// spectral norm 1.
pub fn random_suite(seed: u64, count: usize, sizes: &[usize]) -> Vec<HamiltonianSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = sizes[i % sizes.len()];
            let terms = (2 * n * n).min((1 << (2 * n)) - 1);
            random_hamiltonian(n, terms, 1.0, &mut rng).unwrap()
        })
        .collect()
}
