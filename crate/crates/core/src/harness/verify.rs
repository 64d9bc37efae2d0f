//! The invariant battery behind `verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ae::{grid_size, mass_thresholds, nonlocal_projection_mass, AeConfig, QAE_SUCCESS};
use crate::bell::BellProjector;
use crate::checks::{
    final_state_error, qae_coverage, trace_identities, truncation_bound, truncation_error,
};
use crate::error::Result;
use crate::lower_bound::{pair_distance_table, ZChainPair};
use crate::pauli::{random_hamiltonian, HamiltonianSpec, PauliString};
use crate::trials::derive_seed;
use crate::trotter::{
    abort_bound, conditional_acceptance_bounds, final_state_bound, plan_schedule,
    primitive_probabilities, Schedule, TestSpec,
};

/// One row of the verification table. `measured` and `bound` come from the
/// case with the least slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub statement: String,
    /// `<=` or `>=`, for the least-slack case.
    pub relation: String,
    pub cases: usize,
    pub violations: usize,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

struct Tracker {
    cases: usize,
    violations: usize,
    worst: Option<(f64, f64, f64, &'static str)>,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            cases: 0,
            violations: 0,
            worst: None,
        }
    }

    /// Records `measured <= bound`, keeping the case with least slack.
    fn upper(&mut self, measured: f64, bound: f64) {
        self.cases += 1;
        let ok = measured <= bound;
        if !ok {
            self.violations += 1;
        }
        let slack = bound - measured;
        if self.worst.is_none_or(|w| slack < w.2) {
            self.worst = Some((measured, bound, slack, "<="));
        }
    }

    /// Records `measured >= bound`.
    fn lower(&mut self, measured: f64, bound: f64) {
        self.cases += 1;
        if measured < bound {
            self.violations += 1;
        }
        let slack = measured - bound;
        if self.worst.is_none_or(|w| slack < w.2) {
            self.worst = Some((measured, bound, slack, ">="));
        }
    }

    fn row(self, check: &str, statement: &str) -> CheckRow {
        let (measured, bound, _, relation) = self.worst.unwrap_or((0.0, 0.0, 0.0, "<="));
        CheckRow {
            check: check.into(),
            statement: statement.into(),
            relation: relation.into(),
            cases: self.cases,
            violations: self.violations,
            measured,
            bound,
            pass: self.violations == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub suite_size: usize,
    pub step_scale: f64,
    pub seed: u64,
}

fn suite(settings: &VerifySettings, label: u64, sizes: &[usize]) -> Result<Vec<HamiltonianSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(settings.seed, label));
    (0..settings.suite_size)
        .map(|i| {
            let n = sizes[i % sizes.len()];
            let terms = (2 * n * n).min((1 << (2 * n)) - 1);
            random_hamiltonian(n, terms, 1.0, &mut rng)
        })
        .collect()
}

/// The schedule actually run: nominal, with step and total time scaled.
fn scaled(sched: &Schedule, factor: f64) -> Schedule {
    let mut s = *sched;
    s.alpha_eff *= factor;
    s.t *= factor;
    s
}

pub fn run_battery(settings: &VerifySettings) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let reference = TestSpec::new(0.0, 0.6, 1.0 / 3.0, 1)?;
    let nominal = plan_schedule(&reference)?;
    let run = scaled(&nominal, settings.step_scale);

    let mut t = Tracker::new();
    for h in suite(settings, 1, &[2, 3, 4])? {
        let proj = BellProjector::locality_d(h.num_qubits(), 1);
        for alpha in [0.01, 0.002] {
            t.upper(truncation_error(&h, &proj, alpha), truncation_bound(alpha));
        }
    }
    rows.push(t.row(
        "one-step truncation",
        "||Pi_D U_alpha Pi_D - exp(-i alpha A)|| <= e^alpha alpha^2 on the range of Pi_D",
    ));

    let mut abort = Tracker::new();
    let mut fin = Tracker::new();
    for h in suite(settings, 2, &[2, 3, 4])? {
        let proj = BellProjector::locality_d(h.num_qubits(), 1);
        let (law, dist) = final_state_error(&h, &proj, &run);
        abort.upper(law.p_abort, abort_bound(&nominal));
        fin.upper(dist, final_state_bound(&nominal));
    }
    rows.push(abort.row("abort probability", "P(abort) <= (99/98) alpha_eff t"));
    rows.push(fin.row(
        "final-state distance",
        "||final - exp(-i A t) sigma_I|| <= (7/4) alpha_eff t",
    ));

    let mut t = Tracker::new();
    for word in ["ZZZ", "XYI", "YIX"] {
        let p: PauliString = word.parse()?;
        let proj = BellProjector::locality_d(3, 1);
        for i in 1..=10 {
            let eps = i as f64 / 10.0;
            let sched = plan_schedule(&TestSpec::new(0.0, eps, 1.0 / 3.0, 1)?)?;
            let h = HamiltonianSpec::single_term(p, eps)?;
            let q = primitive_probabilities(&h, &proj, &scaled(&sched, settings.step_scale))
                .conditional_one();
            let (lo, hi) = conditional_acceptance_bounds(eps, &sched);
            t.upper(q, hi);
            t.lower(q, lo);
        }
    }
    rows.push(t.row(
        "conditional acceptance",
        "lo(eps) <= P(one | no abort) <= hi(eps) for h = eps P, |P| > k",
    ));

    let mut t = Tracker::new();
    for h in suite(settings, 3, &[2, 3, 4])? {
        let (first, second, expected) = trace_identities(&h, 1);
        t.upper(first.norm(), 1e-10);
        t.upper((second - expected).abs(), 1e-10);
    }
    rows.push(t.row(
        "trace identities",
        "<sigma_I|A|sigma_I> = 0 and <sigma_I|A^2|sigma_I> = ||H_{>k}||_2^2",
    ));

    let mut agree = Tracker::new();
    let mut linear = Tracker::new();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let times: Vec<f64> = (1..=30).map(|i| i as f64 / 10.0).collect();
    for (i, &e1) in grid.iter().enumerate() {
        for &e2 in &grid[i..] {
            let pair = ZChainPair::new(3, 2, e1, e2)?;
            for row in pair_distance_table(&pair, &times)? {
                agree.upper((row.generic - row.closed_form).abs(), 1e-9);
                if row.in_linear_regime() {
                    linear.upper(row.closed_form, row.linear + 1e-12);
                    linear.upper(row.diamond_hi, 2.0 * row.linear + 1e-12);
                }
            }
        }
    }
    rows.push(agree.row(
        "pair distance closed form",
        "generic phase-minimized distance = 2 min(|sin(d t/2)|, |cos(d t/2)|)",
    ));
    rows.push(linear.row(
        "pair distance growth",
        "distance <= (eps2 - eps1) t and diamond upper <= 2 (eps2 - eps1) t",
    ));

    let xi = AeConfig::new(&reference, 1.0)?.xi;
    let mut t = Tracker::new();
    for eta in [0.0, 0.1, 0.25, 0.5, 0.9] {
        t.lower(qae_coverage(eta, xi, grid_size(eta, xi)), QAE_SUCCESS);
    }
    rows.push(t.row(
        "amplitude estimation coverage",
        "P(|estimate - eta| <= xi) >= 8/pi^2",
    ));

    let (e1, e2) = (0.2, 0.6);
    let cfg = AeConfig::new(&TestSpec::new(e1, e2, 0.1, 1)?, 1.0)?;
    let (low, high) = mass_thresholds(e1, e2, 1.0);
    let mut t = Tracker::new();
    for word in ["ZZI", "XYZ", "IYY"] {
        let p: PauliString = word.parse()?;
        for i in 0..=20 {
            let eps = i as f64 / 20.0;
            let mass =
                nonlocal_projection_mass(&HamiltonianSpec::single_term(p, eps)?, 1, cfg.alpha);
            if eps <= e1 {
                t.upper(mass, low);
            }
            if eps >= e2 {
                t.lower(mass, high);
            }
        }
    }
    rows.push(t.row(
        "non-local mass thresholds",
        "mass <= low when close, mass >= high when far",
    ));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_and_detects_corruption() {
        let honest = run_battery(&VerifySettings {
            suite_size: 6,
            step_scale: 1.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(honest.len(), 9);
        for row in &honest {
            assert!(row.pass, "{row:?}");
            assert!(row.cases > 0);
        }
        let corrupted = run_battery(&VerifySettings {
            suite_size: 6,
            step_scale: 4.0,
            seed: 1,
        })
        .unwrap();
        let sandwich = corrupted
            .iter()
            .find(|r| r.check == "conditional acceptance")
            .unwrap();
        assert!(!sandwich.pass);
    }
}
