//! Amplitude-estimation tester and the plain Bell-sampling baseline.
//!
//! Both evolve `|sigma_I>` for a single step `alpha = (eps2 - eps1) / (3c)` and
//! look at the mass `eta` that lands on Bell states of weight above `k`. The
//! baseline estimates `eta` by repeated sampling; the amplitude-estimation
//! tester runs phase estimation on the Grover operator `-R_psi R_Pi`, where
//! `R_Pi` reflects about the non-local subspace and `R_psi = U R_sigma U^dag`
//! reflects about the evolved state.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{BellProjector, DoubledState};
use crate::error::{Error, Result};
use crate::linalg::evolve;
use crate::oracle::{Direction, EvolutionOracle, Transcript, TranscriptSummary};
use crate::pauli::HamiltonianSpec;
use crate::trials::{trial_rng, WorkerPool};
use crate::trotter::{Decision, TestSpec, Verdict};

/// Largest register for which phase estimation is simulated gate by gate.
pub const CIRCUIT_MAX_QUBITS: usize = 3;

/// Single-round success probability of phase estimation.
pub const QAE_SUCCESS: f64 = 8.0 / (PI * PI);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    /// Free constant of the mass thresholds.
    pub c: f64,
    /// Target additive accuracy of the mass estimate.
    pub xi: f64,
    /// Evolution time of the single step.
    pub alpha: f64,
}

impl AeConfig {
    pub fn new(spec: &TestSpec, c: f64) -> Result<Self> {
        spec.validate()?;
        let (e1, e2) = (spec.eps1, spec.eps2);
        // the single step must stay at or below 1/3
        if !(c.is_finite() && c > 0.0 && c >= e2 - e1) {
            return Err(Error::InvalidSpec(format!(
                "c = {c} must be positive and at least eps2 - eps1"
            )));
        }
        Ok(AeConfig {
            c,
            xi: (e2 - e1).powi(3) * (e2 + e1) / (54.0 * c * c),
            alpha: (e2 - e1) / (3.0 * c),
        })
    }
}

/// Bounds on the non-local mass: at most `low` when the non-local part has
/// norm at most `eps1`, at least `high` when it is at least `eps2`.
pub fn mass_thresholds(eps1: f64, eps2: f64, c: f64) -> (f64, f64) {
    let d = eps2 - eps1;
    let low = (d * (2.0 * eps1 + eps2) / (9.0 * c)).powi(2);
    let high = (d * (eps1 + 2.0 * eps2) / (9.0 * c)).powi(2);
    (low, high)
}

pub fn mass_midpoint(eps1: f64, eps2: f64, c: f64) -> f64 {
    let (low, high) = mass_thresholds(eps1, eps2, c);
    (low + high) / 2.0
}

/// Exact weight of `(I (x) e^{-i alpha H})|sigma_I>` on Bell states of weight
/// above `k`.
pub fn nonlocal_projection_mass(h: &HamiltonianSpec, k: usize, alpha: f64) -> f64 {
    let mut s = DoubledState::sigma_identity(h.num_qubits());
    s.apply_right(&evolve(h, alpha));
    let proj = BellProjector::nonlocal(h.num_qubits(), k);
    s.bell_transform()
        .iter()
        .zip(proj.mask())
        .filter(|(_, &inside)| inside)
        .map(|(a, _)| a.norm_sqr())
        .sum()
}

/// Number of phase-estimation grid points for accuracy `xi` when the mass is
/// near `eta_ref`.
pub fn grid_size(eta_ref: f64, xi: f64) -> u64 {
    let eta = eta_ref.clamp(0.0, 1.0);
    (PI * (eta * (1.0 - eta) + xi).sqrt() / xi).ceil().max(1.0) as u64
}

/// Fejer kernel `sin^2(pi d) / (M^2 sin^2(pi d / M))`, equal to 1 at `d = 0 mod M`.
fn fejer(d: f64, m: u64) -> f64 {
    let mf = m as f64;
    let den = (PI * d / mf).sin();
    if den.abs() < 1e-12 {
        return 1.0;
    }
    let num = (PI * d).sin();
    (num * num) / (mf * mf * den * den)
}

/// Outcome law of phase estimation on the Grover operator with `m` grid
/// points, for a state with mass `eta` on the marked subspace.
pub fn qae_outcome_law(eta: f64, m: u64) -> Vec<f64> {
    let theta = eta.clamp(0.0, 1.0).sqrt().asin();
    let omega = theta / PI;
    let mf = m as f64;
    (0..m)
        .map(|y| {
            let y = y as f64;
            0.5 * fejer(mf * omega - y, m) + 0.5 * fejer(-mf * omega - y, m)
        })
        .collect()
}

/// Mass estimate read off outcome `y`.
pub fn estimate_from_outcome(y: u64, m: u64) -> f64 {
    (PI * y as f64 / m as f64).sin().powi(2)
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> u64 {
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return i as u64;
            }
        }
    }
    last as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QaeMode {
    /// Returns the exact mass without touching the oracle. White-box.
    Ideal,
    /// Samples the closed-form outcome law and charges the circuit's queries.
    Kernel,
    /// Simulates the phase-estimation circuit branch by branch.
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaeResult {
    pub estimate: f64,
    /// Controlled Grover-operator applications.
    pub grover_calls: u64,
    /// Measured grid index, absent in ideal mode.
    pub outcome: Option<u64>,
}

/// Additive-accuracy estimate of the non-local mass of `U|sigma_I>`.
///
/// The circuit prepares `psi = U|sigma_I>` with one forward query and applies
/// the Grover operator controlled on grid index `j` for `j = 1 .. m-1`; each
/// application costs a controlled inverse and a controlled forward query of
/// length `alpha`. Kernel mode charges exactly those queries in that order.
pub fn qae_estimate<R: Rng + ?Sized>(
    oracle: &mut EvolutionOracle,
    proj: &BellProjector,
    alpha: f64,
    m: u64,
    mode: QaeMode,
    rng: &mut R,
) -> Result<QaeResult> {
    match mode {
        QaeMode::Ideal => Ok(QaeResult {
            estimate: nonlocal_projection_mass(oracle.white_box(), proj.locality(), alpha),
            grover_calls: 0,
            outcome: None,
        }),
        QaeMode::Kernel => {
            let flags = oracle.flags();
            flags.require(Direction::Forward, false)?;
            flags.require(Direction::Inverse, true)?;
            flags.require(Direction::Forward, true)?;
            let eta = nonlocal_projection_mass(oracle.white_box(), proj.locality(), alpha);
            oracle.charge(alpha, Direction::Forward, false)?;
            for _ in 1..m {
                oracle.charge(alpha, Direction::Inverse, true)?;
                oracle.charge(alpha, Direction::Forward, true)?;
            }
            let y = sample_index(&qae_outcome_law(eta, m), rng);
            Ok(QaeResult {
                estimate: estimate_from_outcome(y, m),
                grover_calls: m - 1,
                outcome: Some(y),
            })
        }
        QaeMode::Circuit => {
            let law = circuit_outcome_law(oracle, proj, alpha, m)?;
            let y = sample_index(&law, rng);
            Ok(QaeResult {
                estimate: estimate_from_outcome(y, m),
                grover_calls: m - 1,
                outcome: Some(y),
            })
        }
    }
}

/// Runs the phase-estimation circuit against the oracle and returns the exact
/// distribution of the measured grid index.
pub fn circuit_outcome_law(
    oracle: &mut EvolutionOracle,
    proj: &BellProjector,
    alpha: f64,
    m: u64,
) -> Result<Vec<f64>> {
    let n = oracle.num_qubits();
    if n > CIRCUIT_MAX_QUBITS {
        return Err(Error::CircuitTooLarge {
            n,
            max: CIRCUIT_MAX_QUBITS,
        });
    }
    let flags = oracle.flags();
    flags.require(Direction::Inverse, true)?;
    flags.require(Direction::Forward, true)?;

    let sigma = DoubledState::sigma_identity(n);
    let mut psi = sigma.clone();
    oracle.query(&mut psi, alpha, Direction::Forward)?;
    let mut branches = vec![psi; m as usize];
    let mut control = vec![false; m as usize];
    for i in 1..m as usize {
        // branch j carries Q^j, so the i-th application is controlled on j >= i
        for (j, c) in control.iter_mut().enumerate() {
            *c = j >= i;
        }
        for (b, &on) in branches.iter_mut().zip(&control) {
            if on {
                proj.reflect_in_place(b);
            }
        }
        oracle.query_controlled(&mut branches, &control, alpha, Direction::Inverse)?;
        for (b, &on) in branches.iter_mut().zip(&control) {
            if on {
                reflect_about(b, &sigma);
            }
        }
        oracle.query_controlled(&mut branches, &control, alpha, Direction::Forward)?;
        for (b, &on) in branches.iter_mut().zip(&control) {
            if on {
                b.scale(num_complex::Complex64::new(-1.0, 0.0));
            }
        }
    }

    let mf = m as f64;
    let dim = branches[0].amplitudes().len();
    let mut law = Vec::with_capacity(m as usize);
    for y in 0..m {
        let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); dim];
        for (j, b) in branches.iter().enumerate() {
            let phase = num_complex::Complex64::from_polar(
                1.0 / mf,
                -2.0 * PI * (j as f64) * (y as f64) / mf,
            );
            for (a, v) in acc.iter_mut().zip(b.amplitudes()) {
                *a += phase * v;
            }
        }
        law.push(acc.iter().map(|a| a.norm_sqr()).sum());
    }
    Ok(law)
}

/// `s -> 2 <r|s> r - s` for a normalized `r`.
fn reflect_about(s: &mut DoubledState, r: &DoubledState) {
    let overlap = r.inner(s);
    let amps: Vec<_> = s
        .amplitudes()
        .iter()
        .zip(r.amplitudes())
        .map(|(a, b)| 2.0 * overlap * b - a)
        .collect();
    let mut out = DoubledState::from_amplitudes(s.num_qubits(), &amps)
        .expect("same dimension by construction");
    std::mem::swap(s, &mut out);
}

/// Majority-vote rounds for overall failure probability `delta`.
///
/// With single-round success `p = 8/pi^2 > 0.81`, the multiplicative Chernoff
/// bound `exp(-d^2 p R / 2)` with `d = 1 - 1/(2p)` puts the chance of a wrong
/// majority below `delta` once `R >= 16.8 ln(1/delta)`; 18 rounds up. The
/// count is made odd so votes cannot tie.
pub fn majority_rounds(delta: f64) -> u64 {
    let r = (18.0 * (1.0 / delta).ln()).ceil().max(1.0) as u64;
    if r.is_multiple_of(2) {
        r + 1
    } else {
        r
    }
}

/// Per-round query bound `3 sqrt(22) pi c / (eps2 - eps1)^2`.
pub fn round_query_bound(spec: &TestSpec, c: f64) -> f64 {
    3.0 * 22f64.sqrt() * PI * c / spec.gap().powi(2)
}

/// Per-round time bound `sqrt(22) pi / (eps2 - eps1)`.
pub fn round_time_bound(spec: &TestSpec) -> f64 {
    22f64.sqrt() * PI / spec.gap()
}

pub const ROUND_QUERY_FORMULA: &str = "3 * sqrt(22) * pi * c / (eps2 - eps1)^2";
pub const ROUND_TIME_FORMULA: &str = "sqrt(22) * pi / (eps2 - eps1)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeRound {
    pub estimate: f64,
    pub outcome: Option<u64>,
    pub grover_calls: u64,
    pub cost: TranscriptSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeVerdict {
    /// Tally is the number of far votes; threshold is half the round count.
    pub verdict: Verdict,
    pub config: AeConfig,
    pub mode: QaeMode,
    pub grid: u64,
    pub midpoint: f64,
    pub rounds: Vec<AeRound>,
}

/// Amplitude-estimation tester: independent phase-estimation rounds on a grid
/// sized for the far-side threshold, each voting far iff its estimate reaches
/// the threshold midpoint, combined by majority.
pub fn run_ae_tester(
    oracle: &EvolutionOracle,
    spec: &TestSpec,
    cfg: &AeConfig,
    mode: QaeMode,
    seed: u64,
    pool: &WorkerPool,
) -> Result<AeVerdict> {
    let n = oracle.num_qubits();
    spec.check_qubits(n)?;
    if mode != QaeMode::Ideal {
        oracle.flags().require(Direction::Inverse, true)?;
        oracle.flags().require(Direction::Forward, true)?;
    }
    if mode == QaeMode::Circuit && n > CIRCUIT_MAX_QUBITS {
        return Err(Error::CircuitTooLarge {
            n,
            max: CIRCUIT_MAX_QUBITS,
        });
    }
    let proj = BellProjector::nonlocal(n, spec.k);
    let (_, high) = mass_thresholds(spec.eps1, spec.eps2, cfg.c);
    let midpoint = mass_midpoint(spec.eps1, spec.eps2, cfg.c);
    let grid = grid_size(high, cfg.xi);
    let rounds = majority_rounds(spec.delta);

    let results = pool.map_indexed(0..rounds, |r| {
        let mut fork = oracle.fork();
        let mut rng = trial_rng(seed, r);
        qae_estimate(&mut fork, &proj, cfg.alpha, grid, mode, &mut rng)
            .map(|res| (res, fork.take_transcript()))
    });
    let mut transcript = Transcript::new();
    let mut per_round = Vec::with_capacity(rounds as usize);
    let mut votes = 0u64;
    for r in results {
        let (res, t) = r?;
        if res.estimate >= midpoint {
            votes += 1;
        }
        per_round.push(AeRound {
            estimate: res.estimate,
            outcome: res.outcome,
            grover_calls: res.grover_calls,
            cost: t.summary(),
        });
        transcript.merge(&t);
    }
    let threshold = rounds as f64 / 2.0;
    let decision = if votes as f64 > threshold {
        Decision::Far
    } else {
        Decision::Local
    };
    Ok(AeVerdict {
        verdict: Verdict {
            decision,
            tally: votes,
            successes: rounds,
            trials: rounds,
            threshold,
            transcript,
        },
        config: *cfg,
        mode,
        grid,
        midpoint,
        rounds: per_round,
    })
}

/// Sample count of the baseline tester: a Bernstein-type bound for telling a
/// mean at most `low` from one at least `high`.
pub fn baseline_samples(spec: &TestSpec, c: f64) -> u64 {
    let (low, high) = mass_thresholds(spec.eps1, spec.eps2, c);
    let gap = high - low;
    ((low + gap / 3.0) * 2.0 * (2.0 / spec.delta).ln() / (gap / 2.0).powi(2)).ceil() as u64
}

/// Bell-sampling baseline: each sample evolves a fresh `|sigma_I>` for one
/// step, measures in the Bell basis, and scores whether the outcome has weight
/// above `k`. Decides far iff the mean score reaches the threshold midpoint.
pub fn run_baseline_tester(
    oracle: &EvolutionOracle,
    spec: &TestSpec,
    cfg: &AeConfig,
    seed: u64,
    pool: &WorkerPool,
) -> Result<Verdict> {
    let n = oracle.num_qubits();
    spec.check_qubits(n)?;
    oracle.flags().require(Direction::Forward, false)?;
    let samples = baseline_samples(spec, cfg.c);
    let midpoint = mass_midpoint(spec.eps1, spec.eps2, cfg.c);
    let results = pool.map_indexed(0..samples, |i| -> Result<(bool, Transcript)> {
        let mut fork = oracle.fork();
        let mut rng = trial_rng(seed, i);
        let mut s = DoubledState::sigma_identity(n);
        fork.query(&mut s, cfg.alpha, Direction::Forward)?;
        let p = s.sample_bell(&mut rng)?;
        Ok((p.weight() > spec.k, fork.take_transcript()))
    });
    let mut transcript = Transcript::new();
    let mut tally = 0u64;
    for r in results {
        let (hit, t) = r?;
        tally += hit as u64;
        transcript.merge(&t);
    }
    let threshold = samples as f64 * midpoint;
    Ok(Verdict {
        decision: if tally as f64 >= threshold {
            Decision::Far
        } else {
            Decision::Local
        },
        tally,
        successes: samples,
        trials: samples,
        threshold,
        transcript,
    })
}
