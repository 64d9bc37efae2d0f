//! Sampled behaviour against exact laws at 10^5 draws.

use hamlocal::bell::{BellProjector, DoubledState};
use hamlocal::oracle::{AccessFlags, EvolutionOracle};
use hamlocal::pauli::{random_hamiltonian, HamiltonianSpec, PauliString};
use hamlocal::trials::{trial_rng, WorkerPool};
use hamlocal::trotter::{
    plan_schedule, primitive_probabilities, run_primitive, TestSpec, TrialOutcome,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 100_000;

fn within(freq: f64, p: f64, sigmas: f64) -> bool {
    let sd = (p * (1.0 - p) / TRIALS as f64).sqrt();
    (freq - p).abs() <= sigmas * sd.max(1.0 / TRIALS as f64)
}

fn frequencies(h: HamiltonianSpec, seed: u64) -> ([f64; 3], [f64; 3]) {
    let n = h.num_qubits();
    let sched = plan_schedule(&TestSpec::new(0.0, 0.6, 1.0 / 3.0, 1).unwrap()).unwrap();
    let proj = BellProjector::locality_d(n, 1);
    let law = primitive_probabilities(&h, &proj, &sched);
    let oracle = EvolutionOracle::new(h, AccessFlags::FORWARD_ONLY);
    let outcomes =
        WorkerPool::new(hamlocal::trials::available_workers()).map_indexed(0..TRIALS, |i| {
            let mut fork = oracle.fork();
            run_primitive(&mut fork, &proj, &sched, &mut trial_rng(seed, i)).unwrap()
        });
    let count = |o| outcomes.iter().filter(|&&x| x == o).count() as f64 / TRIALS as f64;
    (
        [
            count(TrialOutcome::Abort),
            count(TrialOutcome::Zero),
            count(TrialOutcome::One),
        ],
        [law.p_abort, law.p_zero, law.p_one],
    )
}

#[test]
fn one_frequency_on_far_chain_within_three_sigma() {
    let h = HamiltonianSpec::single_term("ZZZ".parse().unwrap(), 0.6).unwrap();
    let (freq, exact) = frequencies(h, 21);
    assert!(within(freq[2], exact[2], 3.0), "{freq:?} vs {exact:?}");
    assert!(exact[0] < 1e-12);
}

#[test]
fn outcome_frequencies_within_four_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in [2, 3] {
        let h = random_hamiltonian(n, 2 * n * n, 1.0, &mut rng).unwrap();
        let (freq, exact) = frequencies(h, 23 + n as u64);
        for (f, p) in freq.iter().zip(&exact) {
            assert!(within(*f, *p, 4.0), "n={n}: {freq:?} vs {exact:?}");
        }
    }
}

#[test]
fn bell_sampling_superposition_frequency() {
    let theta: f64 = 0.3;
    let xx: PauliString = "XX".parse().unwrap();
    let mut s = DoubledState::sigma_identity(2);
    s.scale(Complex64::new(theta.cos(), 0.0));
    s.add_sigma(&xx, Complex64::new(theta.sin(), 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let hits = (0..TRIALS)
        .filter(|_| s.sample_bell(&mut rng).unwrap() == xx)
        .count() as f64;
    assert!(within(hits / TRIALS as f64, theta.sin().powi(2), 3.0));
}
