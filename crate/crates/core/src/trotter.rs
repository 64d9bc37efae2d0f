//! Trotterized postselection tester.
//!
//! One primitive run starts in `|sigma_I>` and alternates short forward
//! evolutions with the two-outcome measurement `{Pi_D, I - Pi_D}`, aborting on
//! the second outcome. After `m` steps the state is measured in the Bell basis;
//! any non-identity outcome counts as a one. Local terms are suppressed by the
//! repeated projections, so the frequency of ones tracks the weight of the
//! non-local part of `H`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::bell::{BellProjector, DoubledState};
use crate::error::{Error, Result};
use crate::oracle::{Direction, EvolutionOracle, Transcript};
use crate::pauli::HamiltonianSpec;
use crate::trials::{trial_rng, WorkerPool};

/// Tolerance parameters: decide whether the non-local part has normalized
/// Frobenius norm at most `eps1` or at least `eps2`, failing with probability
/// at most `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub k: usize,
}

impl TestSpec {
    pub fn new(eps1: f64, eps2: f64, delta: f64, k: usize) -> Result<Self> {
        let spec = TestSpec {
            eps1,
            eps2,
            delta,
            k,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let TestSpec {
            eps1, eps2, delta, ..
        } = *self;
        if !(eps1.is_finite() && (0.0..1.0).contains(&eps1)) {
            return Err(Error::InvalidSpec(format!(
                "eps1 = {eps1} must lie in [0, 1)"
            )));
        }
        if !(eps2.is_finite() && eps2 > eps1 && eps2 <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "eps2 = {eps2} must lie in (eps1, 1] with eps1 = {eps1}"
            )));
        }
        if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "delta = {delta} must lie in (0, 1)"
            )));
        }
        Ok(())
    }

    /// Checks `k < n` for an `n`-qubit Hamiltonian.
    pub fn check_qubits(&self, n: usize) -> Result<()> {
        if self.k >= n {
            return Err(Error::InvalidSpec(format!(
                "locality k = {} must be below the qubit count {n}",
                self.k
            )));
        }
        Ok(())
    }

    pub fn gap(&self) -> f64 {
        self.eps2 - self.eps1
    }

    fn square_gap(&self) -> f64 {
        self.eps2 * self.eps2 - self.eps1 * self.eps1
    }
}

/// Every constant of one tester run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Far-side tolerance the schedule was planned for.
    pub eps2: f64,
    /// Nominal step bound.
    pub alpha: f64,
    /// Total simulated time of one primitive run.
    pub t: f64,
    /// Steps per primitive run.
    pub m: u64,
    /// Step actually used, `t / m`.
    pub alpha_eff: f64,
    /// Successful runs needed.
    pub s: u64,
    /// Maximum runs attempted.
    pub s_prime: u64,
    /// Lower bound on the conditional one-probability in the far case.
    pub upsilon: f64,
    /// Upper bound on the conditional one-probability in the close case.
    pub lambda: f64,
    /// Decision threshold on the one-frequency.
    pub tau: f64,
    /// Half the separation between `upsilon` and `lambda`.
    pub xi: f64,
}

impl Schedule {
    /// `s * tau`.
    pub fn far_threshold(&self) -> f64 {
        self.s as f64 * self.tau
    }

    /// Smallest tally counted as far.
    pub fn far_count(&self) -> u64 {
        self.far_threshold().ceil().max(0.0) as u64
    }
}

pub fn plan_schedule(spec: &TestSpec) -> Result<Schedule> {
    spec.validate()?;
    let (e1, e2) = (spec.eps1, spec.eps2);
    let d2 = spec.square_gap();
    let alpha = d2 / (100.0 * e2);
    let t = d2.sqrt() / (2.0 * e2);
    let m = (50.0 / d2.sqrt()).ceil() as u64;
    let alpha_eff = t / m as f64;
    let log_term = (2.0 / spec.delta).ln();
    let samples = |c: f64| (c * e2.powi(4) / d2.powi(3) * log_term).ceil() as u64;
    let t2 = t * t;
    let upsilon =
        e2 * e2 * t2 * (1.0 - t2 / 10.0 - 13.0 / 50.0 * e2 * e2 * t2) - 3.5 * e2 * alpha_eff * t2;
    let lambda = e1 * e1 * t2 * (1.0 + t2 / 10.0)
        + 287.0 / 80.0 * e1 * alpha_eff * t2
        + 49.0 / 1600.0 * e2 * alpha_eff * t2;
    Ok(Schedule {
        eps2: e2,
        alpha,
        t,
        m,
        alpha_eff,
        s: samples(78.0),
        s_prime: samples(157.0),
        upsilon,
        lambda,
        tau: (upsilon + lambda) / 2.0,
        xi: (upsilon - lambda) / 2.0,
    })
}

/// Bounds on the one-probability of a completed primitive run when the
/// non-local part has norm `eps`. The last term of `hi` carries the schedule's
/// `eps2`, not `eps`.
pub fn conditional_acceptance_bounds(eps: f64, sched: &Schedule) -> (f64, f64) {
    let t2 = sched.t * sched.t;
    let a = sched.alpha_eff;
    let lo = eps * eps * t2 * (1.0 - t2 / 10.0 - 13.0 / 50.0 * eps * eps * t2) - 3.5 * eps * a * t2;
    let hi = eps * eps * t2 * (1.0 + t2 / 10.0)
        + 287.0 / 80.0 * eps * a * t2
        + 49.0 / 1600.0 * sched.eps2 * a * t2;
    (lo.max(0.0), hi)
}

/// Upper bound on the abort probability of one primitive run.
pub fn abort_bound(sched: &Schedule) -> f64 {
    99.0 / 98.0 * sched.alpha_eff * sched.t
}

/// Upper bound on the distance between the conditional final state and the
/// ideal evolution under the projected Hamiltonian.
pub fn final_state_bound(sched: &Schedule) -> f64 {
    1.75 * sched.alpha_eff * sched.t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialOutcome {
    Abort,
    Zero,
    One,
}

/// One primitive run against the oracle. Queries issued before an abort are
/// charged; the remaining steps are not.
pub fn run_primitive<R: Rng + ?Sized>(
    oracle: &mut EvolutionOracle,
    proj: &BellProjector,
    sched: &Schedule,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let mut state = DoubledState::sigma_identity(oracle.num_qubits());
    for _ in 0..sched.m {
        oracle.query(&mut state, sched.alpha_eff, Direction::Forward)?;
        let p_in = proj.project_in_place(&mut state);
        if rng.random::<f64>() >= p_in {
            return Ok(TrialOutcome::Abort);
        }
        state.renormalize();
    }
    let p = state.sample_bell(rng)?;
    Ok(if p.is_identity() {
        TrialOutcome::Zero
    } else {
        TrialOutcome::One
    })
}

/// Exact outcome law of one primitive run.
#[derive(Debug, Clone)]
pub struct PrimitiveLaw {
    pub p_abort: f64,
    pub p_zero: f64,
    pub p_one: f64,
    /// Normalized state just before the final measurement, given no abort.
    pub final_state: DoubledState,
}

impl PrimitiveLaw {
    /// Probability of a one given that the run completed.
    pub fn conditional_one(&self) -> f64 {
        let done = self.p_zero + self.p_one;
        if done > 0.0 {
            self.p_one / done
        } else {
            0.0
        }
    }
}

/// White-box computation of the primitive's outcome law: the unnormalized
/// state `(Pi_D U)^m |sigma_I>` carries the survival probability in its norm.
pub fn primitive_probabilities(
    h: &HamiltonianSpec,
    proj: &BellProjector,
    sched: &Schedule,
) -> PrimitiveLaw {
    let u = crate::linalg::evolve(h, sched.alpha_eff);
    let mut state = DoubledState::sigma_identity(h.num_qubits());
    for _ in 0..sched.m {
        state.apply_right(&u);
        proj.project_in_place(&mut state);
    }
    let survive = state.norm_sqr();
    let identity = DoubledState::sigma_identity(h.num_qubits());
    let p_zero = identity.inner(&state).norm_sqr();
    let p_one = (survive - p_zero).max(0.0);
    state.renormalize();
    PrimitiveLaw {
        p_abort: (1.0 - survive).max(0.0),
        p_zero,
        p_one,
        final_state: state,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Local,
    Far,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    /// Ones among the first `s` completed runs.
    pub tally: u64,
    pub successes: u64,
    pub trials: u64,
    /// `s * tau`; a tally at or above it decides far.
    pub threshold: f64,
    pub transcript: Transcript,
}

/// Full tester: up to `s'` primitive runs, stopping at `s` completions.
///
/// Runs are evaluated in parallel batches, each with its own oracle fork and
/// its own random stream, and then scanned in index order. Runs past the
/// stopping point are discarded along with their transcripts, so the verdict
/// does not depend on the batch size or worker count.
pub fn run_tester(
    oracle: &EvolutionOracle,
    spec: &TestSpec,
    seed: u64,
    pool: &WorkerPool,
) -> Result<Verdict> {
    let sched = plan_schedule(spec)?;
    let n = oracle.num_qubits();
    spec.check_qubits(n)?;
    oracle.flags().require(Direction::Forward, false)?;
    let proj = BellProjector::locality_d(n, spec.k);

    let mut transcript = Transcript::new();
    let (mut successes, mut tally, mut trials) = (0u64, 0u64, 0u64);
    let mut next = 0u64;
    while successes < sched.s && next < sched.s_prime {
        let need = sched.s - successes;
        let batch = (need + need / 16 + 4 * pool.workers() as u64).min(sched.s_prime - next);
        let results = pool.map_indexed(next..next + batch, |i| {
            let mut fork = oracle.fork();
            let mut rng = trial_rng(seed, i);
            run_primitive(&mut fork, &proj, &sched, &mut rng).map(|o| (o, fork.take_transcript()))
        });
        next += batch;
        for r in results {
            let (outcome, t) = r?;
            transcript.merge(&t);
            trials += 1;
            match outcome {
                TrialOutcome::Abort => {}
                TrialOutcome::Zero => successes += 1,
                TrialOutcome::One => {
                    successes += 1;
                    tally += 1;
                }
            }
            if successes == sched.s {
                break;
            }
        }
    }

    let threshold = sched.far_threshold();
    let decision = if successes < sched.s {
        Decision::Inconclusive
    } else if tally as f64 >= threshold {
        Decision::Far
    } else {
        Decision::Local
    };
    Ok(Verdict {
        decision,
        tally,
        successes,
        trials,
        threshold,
        transcript,
    })
}

/// Exact probabilities of each decision given the primitive's outcome law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionProbabilities {
    pub local: f64,
    pub far: f64,
    pub inconclusive: f64,
}

pub fn decision_probabilities(law: &PrimitiveLaw, sched: &Schedule) -> DecisionProbabilities {
    let complete = (1.0 - law.p_abort).clamp(0.0, 1.0);
    let inconclusive = if sched.s == 0 {
        0.0
    } else {
        binomial_cdf(sched.s_prime, complete, sched.s - 1)
    };
    let q = law.conditional_one().clamp(0.0, 1.0);
    let c = sched.far_count();
    let far_given = if c == 0 {
        1.0
    } else {
        1.0 - binomial_cdf(sched.s, q, c - 1)
    };
    let decided = 1.0 - inconclusive;
    DecisionProbabilities {
        local: decided * (1.0 - far_given),
        far: decided * far_given,
        inconclusive,
    }
}

/// `P(Bin(n, p) <= x)`.
fn binomial_cdf(n: u64, p: f64, x: u64) -> f64 {
    if x >= n {
        return 1.0;
    }
    match Binomial::new(p, n) {
        Ok(b) => b.cdf(x),
        Err(_) => 0.0,
    }
}

/// Worst-case total evolution time over the whole tester.
pub fn time_budget(spec: &TestSpec) -> f64 {
    79.0 * (spec.eps2 / spec.gap().powi(5)).sqrt() * (2.0 / spec.delta).ln()
}

/// Worst-case query count over the whole tester.
pub fn query_budget(spec: &TestSpec) -> f64 {
    7850.0 * (spec.eps2 / spec.gap().powi(7)).sqrt() * (2.0 / spec.delta).ln()
}

pub const TIME_BUDGET_FORMULA: &str = "79 * sqrt(eps2 / (eps2 - eps1)^5) * ln(2 / delta)";
pub const QUERY_BUDGET_FORMULA: &str = "7850 * sqrt(eps2 / (eps2 - eps1)^7) * ln(2 / delta)";
