//! Hard instances for locality testing and distinguishability experiments.
//!
//! The pair `eps1 * Z_{1:k'}` versus `eps2 * Z_{1:k'}` sits at distance exactly
//! `eps1` and `eps2` from the `k`-local Hamiltonians in every norm, yet the two
//! evolutions stay close for a long time: their phase-minimized spectral
//! distance grows only like `(eps2 - eps1) t`. Any tester separating them must
//! therefore spend evolution time of order `1 / (eps2 - eps1)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ae::{run_ae_tester, run_baseline_tester, AeConfig, QaeMode};
use crate::error::{Error, Result};
use crate::linalg::{diamond_interval, evolve, min_phase_spectral_distance};
use crate::oracle::{AccessFlags, EvolutionOracle, TranscriptSummary};
use crate::pauli::{HamiltonianSpec, PauliString};
use crate::trials::{derive_seed, fit_power_law, PowerLawFit, WorkerPool};
use crate::trotter::{run_tester, Decision, TestSpec, Verdict};

/// Two scaled copies of the Z string on the first `k_prime` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZChainPair {
    pub n: usize,
    pub k_prime: usize,
    pub eps1: f64,
    pub eps2: f64,
}

impl ZChainPair {
    pub fn new(n: usize, k_prime: usize, eps1: f64, eps2: f64) -> Result<Self> {
        if k_prime == 0 || k_prime > n {
            return Err(Error::InvalidSpec(format!(
                "chain length {k_prime} must lie in 1..={n}"
            )));
        }
        if !(0.0..=1.0).contains(&eps1) || !(0.0..=1.0).contains(&eps2) || eps1 > eps2 {
            return Err(Error::InvalidSpec(format!(
                "need 0 <= eps1 <= eps2 <= 1, got ({eps1}, {eps2})"
            )));
        }
        Ok(ZChainPair {
            n,
            k_prime,
            eps1,
            eps2,
        })
    }

    pub fn chain(&self) -> PauliString {
        PauliString::z_chain(self.n, self.k_prime)
    }

    pub fn scaled(&self, eps: f64) -> Result<HamiltonianSpec> {
        HamiltonianSpec::single_term(self.chain(), eps)
    }

    /// The close member, `eps1 * Z_{1:k'}`.
    pub fn close(&self) -> Result<HamiltonianSpec> {
        self.scaled(self.eps1)
    }

    /// The far member, `eps2 * Z_{1:k'}`.
    pub fn far(&self) -> Result<HamiltonianSpec> {
        self.scaled(self.eps2)
    }
}

/// `min_theta ||e^{i theta} e^{-i eps1 Z t} - e^{-i eps2 Z t}||` for a diagonal
/// `Z` with eigenvalues `+-1`: the two relative phases are `+-(eps2 - eps1) t`.
pub fn diagonal_pair_distance(eps1: f64, eps2: f64, t: f64) -> f64 {
    let half = (eps2 - eps1) * t / 2.0;
    2.0 * half.sin().abs().min(half.cos().abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistanceRow {
    pub t: f64,
    /// Phase-minimized spectral distance from the generic eigenvalue method.
    pub generic: f64,
    pub closed_form: f64,
    /// `(eps2 - eps1) t`.
    pub linear: f64,
    pub diamond_lo: f64,
    pub diamond_hi: f64,
}

impl PairDistanceRow {
    pub fn agrees(&self, tol: f64) -> bool {
        (self.generic - self.closed_form).abs() <= tol
    }

    pub fn within_linear(&self) -> bool {
        self.closed_form <= self.linear + 1e-12
    }

    pub fn diamond_within_linear(&self) -> bool {
        self.diamond_hi <= 2.0 * self.linear + 1e-12
    }

    /// Whether `t` lies where the linear bound is tight enough to test.
    pub fn in_linear_regime(&self) -> bool {
        self.linear <= FRAC_PI_2
    }
}

/// Distances between the pair's evolutions over a time grid.
pub fn pair_distance_table(pair: &ZChainPair, times: &[f64]) -> Result<Vec<PairDistanceRow>> {
    let (h1, h2) = (pair.close()?, pair.far()?);
    times
        .iter()
        .map(|&t| {
            let (u, v) = (evolve(&h1, t), evolve(&h2, t));
            let generic = min_phase_spectral_distance(&u, &v)?;
            let bracket = diamond_interval(&u, &v)?;
            Ok(PairDistanceRow {
                t,
                generic,
                closed_form: diagonal_pair_distance(pair.eps1, pair.eps2, t),
                linear: (pair.eps2 - pair.eps1) * t,
                diamond_lo: bracket.lo,
                diamond_hi: bracket.hi,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TesterKind {
    Trotter,
    Ae,
    Baseline,
}

impl TesterKind {
    pub fn name(self) -> &'static str {
        match self {
            TesterKind::Trotter => "trotter",
            TesterKind::Ae => "ae",
            TesterKind::Baseline => "baseline",
        }
    }

    /// Oracle access each tester is entitled to.
    pub fn access(self) -> AccessFlags {
        match self {
            TesterKind::Ae => AccessFlags::ALL,
            TesterKind::Trotter | TesterKind::Baseline => AccessFlags::FORWARD_ONLY,
        }
    }
}

/// Settings shared by the amplitude-estimation tester and the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeSettings {
    pub c: f64,
    pub mode: QaeMode,
}

impl Default for AeSettings {
    fn default() -> Self {
        AeSettings {
            c: 1.0,
            mode: QaeMode::Kernel,
        }
    }
}

/// Runs one tester against an oracle.
pub fn run_kind(
    kind: TesterKind,
    oracle: &EvolutionOracle,
    spec: &TestSpec,
    ae: &AeSettings,
    seed: u64,
    pool: &WorkerPool,
) -> Result<Verdict> {
    match kind {
        TesterKind::Trotter => run_tester(oracle, spec, seed, pool),
        TesterKind::Ae => {
            let cfg = AeConfig::new(spec, ae.c)?;
            run_ae_tester(oracle, spec, &cfg, ae.mode, seed, pool).map(|v| v.verdict)
        }
        TesterKind::Baseline => {
            let cfg = AeConfig::new(spec, ae.c)?;
            run_baseline_tester(oracle, spec, &cfg, seed, pool)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub tester: TesterKind,
    pub eps1: f64,
    /// Values of `eps2 - eps1`.
    pub gaps: Vec<f64>,
    pub delta: f64,
    pub n: usize,
    pub k: usize,
    pub k_prime: usize,
    /// Runs per member of the pair at each gap.
    pub reps: u64,
    pub ae: AeSettings,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gap: f64,
    pub tester: TesterKind,
    pub mean_time: f64,
    pub mean_queries: f64,
    /// Correct verdicts over both members; inconclusive counts as wrong.
    pub success_rate: f64,
    pub close_success: f64,
    pub far_success: f64,
    pub min_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
    /// Least-squares exponent of mean time against gap.
    pub fit: Option<PowerLawFit>,
}

/// Runs the chosen tester `reps` times on each member of the pair at every
/// gap. Run `r` at gap index `g` uses the seed derived from label
/// `(g << 32) | r`; the pool parallelizes over runs.
pub fn distinguishability_sweep(cfg: &SweepConfig, pool: &WorkerPool) -> Result<SweepResult> {
    if cfg.gaps.len() < 2 {
        return Err(Error::Usage("a sweep needs at least two gap values".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::Usage("a sweep needs at least one repetition".into()));
    }
    let mut points = Vec::with_capacity(cfg.gaps.len());
    for (g, &gap) in cfg.gaps.iter().enumerate() {
        let eps2 = cfg.eps1 + gap;
        let spec = TestSpec::new(cfg.eps1, eps2, cfg.delta, cfg.k)?;
        spec.check_qubits(cfg.n)?;
        let pair = ZChainPair::new(cfg.n, cfg.k_prime, cfg.eps1, eps2)?;
        if cfg.k_prime <= cfg.k {
            return Err(Error::InvalidSpec(format!(
                "chain length {} must exceed the locality {}",
                cfg.k_prime, cfg.k
            )));
        }
        let flags = cfg.tester.access();
        let close = EvolutionOracle::new(pair.close()?, flags);
        let far = EvolutionOracle::new(pair.far()?, flags);
        let serial = WorkerPool::serial();
        let runs = pool.map_indexed(0..2 * cfg.reps, |i| -> Result<(bool, TranscriptSummary)> {
            let (oracle, expected) = if i < cfg.reps {
                (&close, Decision::Local)
            } else {
                (&far, Decision::Far)
            };
            let seed = derive_seed(cfg.seed, ((g as u64) << 32) | i);
            let v = run_kind(cfg.tester, oracle, &spec, &cfg.ae, seed, &serial)?;
            Ok((v.decision == expected, v.transcript.summary()))
        });
        let runs: Vec<(bool, TranscriptSummary)> = runs.into_iter().collect::<Result<_>>()?;
        let total = runs.len() as f64;
        let correct = |range: std::ops::Range<usize>| {
            let len = range.len() as f64;
            runs[range].iter().filter(|r| r.0).count() as f64 / len
        };
        let reps = cfg.reps as usize;
        points.push(SweepPoint {
            gap,
            tester: cfg.tester,
            mean_time: runs.iter().map(|r| r.1.total_evolution_time).sum::<f64>() / total,
            mean_queries: runs.iter().map(|r| r.1.query_count as f64).sum::<f64>() / total,
            success_rate: runs.iter().filter(|r| r.0).count() as f64 / total,
            close_success: correct(0..reps),
            far_success: correct(reps..2 * reps),
            min_time: runs
                .iter()
                .map(|r| r.1.total_evolution_time)
                .fold(f64::INFINITY, f64::min),
        });
    }
    let fit = fit_power_law(
        &points
            .iter()
            .map(|p| (p.gap, p.mean_time))
            .collect::<Vec<_>>(),
    );
    Ok(SweepResult {
        config: cfg.clone(),
        points,
        fit,
    })
}

pub const SWEEP_CSV_HEADER: &str = "gap,tester,mean_time,mean_queries,success_rate,fitted_exponent";

/// One row per gap with an empty exponent column, then a footer row whose
/// gap column reads `fit` and whose exponent column carries the fitted slope.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},",
            p.gap,
            p.tester.name(),
            p.mean_time,
            p.mean_queries,
            p.success_rate
        );
    }
    let exponent = result
        .fit
        .map(|f| f.exponent.to_string())
        .unwrap_or_default();
    let _ = writeln!(out, "fit,{},,,,{}", result.config.tester.name(), exponent);
    out
}
