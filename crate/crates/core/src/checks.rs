//! Quantities behind the analytic guarantees, computed exactly on small
//! instances. Operators on the doubled space are restricted to the range of the
//! projector and written in Bell coordinates, so nothing 4^n x 4^n is built.

use num_complex::Complex64;

use crate::ae::{estimate_from_outcome, qae_outcome_law};
use crate::bell::{
    apply_a, restricted_coordinates, restricted_operator, BellProjector, DoubledState,
};
use crate::linalg::{evolve, hermitian_eigen, spectral_norm, CMatrix};
use crate::pauli::HamiltonianSpec;
use crate::trotter::{primitive_probabilities, PrimitiveLaw, Schedule};

/// `Pi_D (I (x) H) Pi_D` on the range of `Pi_D`.
pub fn restricted_a(h: &HamiltonianSpec, proj: &BellProjector) -> CMatrix {
    restricted_operator(&h.matrix(), proj)
}

/// `|| Pi_D (I (x) e^{-i alpha H}) Pi_D - e^{-i alpha A} ||` on the range of
/// `Pi_D`. Off that range the first operator vanishes while the second is the
/// identity, so only the restricted difference carries information.
pub fn truncation_error(h: &HamiltonianSpec, proj: &BellProjector, alpha: f64) -> f64 {
    let step = restricted_operator(&evolve(h, alpha), proj);
    let ideal = hermitian_eigen(&restricted_a(h, proj)).evolution(alpha);
    spectral_norm(&(step - ideal))
}

/// `e^alpha alpha^2`.
pub fn truncation_bound(alpha: f64) -> f64 {
    alpha.exp() * alpha * alpha
}

/// Exact primitive law and the distance of its conditional final state from
/// `e^{-i A t}|sigma_I>`.
pub fn final_state_error(
    h: &HamiltonianSpec,
    proj: &BellProjector,
    sched: &Schedule,
) -> (PrimitiveLaw, f64) {
    let law = primitive_probabilities(h, proj, sched);
    let ideal = hermitian_eigen(&restricted_a(h, proj)).evolution(sched.t);
    // the identity string is the first member of D
    let target = ideal.column(0);
    let actual = restricted_coordinates(&law.final_state, proj);
    let dist = actual
        .iter()
        .zip(target.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (law, dist)
}

/// `(<sigma_I|A|sigma_I>, <sigma_I|A^2|sigma_I>, ||H_{>k}||_2^2)`.
pub fn trace_identities(h: &HamiltonianSpec, k: usize) -> (Complex64, f64, f64) {
    let n = h.num_qubits();
    let proj = BellProjector::locality_d(n, k);
    let sigma = DoubledState::sigma_identity(n);
    let a_sigma = apply_a(h, &proj, &sigma);
    let first = sigma.inner(&a_sigma);
    let second = a_sigma.norm_sqr();
    let (_, high) = h.locality_split(k);
    (first, second, high.coefficient_norm_sqr())
}

/// Probability that phase estimation on an `m`-point grid lands within `xi`
/// of `eta`.
pub fn qae_coverage(eta: f64, xi: f64, m: u64) -> f64 {
    qae_outcome_law(eta, m)
        .iter()
        .enumerate()
        .filter(|(y, _)| (estimate_from_outcome(*y as u64, m) - eta).abs() <= xi)
        .map(|(_, p)| p)
        .sum()
}
