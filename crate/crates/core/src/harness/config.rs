use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ae::QaeMode;
use crate::error::{Error, Result};
use crate::lower_bound::{AeSettings, TesterKind};
use crate::oracle::AccessFlags;
use crate::pauli::{random_hamiltonian, HamiltonianSpec, PauliString};
use crate::trotter::TestSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Test,
    Sweep,
    Verify,
    Lowerbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Montecarlo,
    /// Computes outcome probabilities from the Hamiltonian directly.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianSource {
    File {
        path: String,
    },
    /// `eps * Z` on the first `k_prime` qubits.
    Zchain {
        n: usize,
        k_prime: usize,
        eps: f64,
    },
    /// Distinct non-identity strings drawn uniformly, coefficients uniform on
    /// `[-1, 1]`, rescaled to spectral norm `target_norm`.
    RandomPauli {
        n: usize,
        terms: usize,
        seed: u64,
        target_norm: f64,
    },
}

impl HamiltonianSource {
    pub fn load(&self) -> Result<HamiltonianSpec> {
        match self {
            HamiltonianSource::File { path } => {
                let text = std::fs::read_to_string(Path::new(path))?;
                HamiltonianSpec::parse(&text)
            }
            HamiltonianSource::Zchain { n, k_prime, eps } => {
                if *k_prime == 0 || k_prime > n {
                    return Err(Error::Usage(format!(
                        "chain length {k_prime} must lie in 1..={n}"
                    )));
                }
                HamiltonianSpec::single_term(PauliString::z_chain(*n, *k_prime), *eps)
            }
            HamiltonianSource::RandomPauli {
                n,
                terms,
                seed,
                target_norm,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_hamiltonian(*n, *terms, *target_norm, &mut rng)
            }
        }
    }
}

/// Everything that determines a run's output. Worker count and output path
/// are deliberately absent: they do not change results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub hamiltonian: Option<HamiltonianSource>,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub k: usize,
    pub algorithm: TesterKind,
    pub mode: Mode,
    pub seed: u64,
    pub access: AccessFlags,
    pub c: f64,
    pub qae_mode: QaeMode,
    /// Gap values `eps2 - eps1` for sweeps.
    pub gaps: Vec<f64>,
    pub reps: u64,
    /// Register size and chain length for sweeps and pair-distance tables.
    pub n: usize,
    pub k_prime: usize,
    /// Evolution times for pair-distance tables.
    pub times: Vec<f64>,
    /// Random Hamiltonians per check in `verify`.
    pub suite_size: usize,
    /// Factor applied to the step length and total time in `verify`, with
    /// bounds still taken from the nominal schedule. 1 is the honest setting.
    pub step_scale: f64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Test,
            hamiltonian: None,
            eps1: 0.0,
            eps2: 0.6,
            delta: 1.0 / 3.0,
            k: 1,
            algorithm: TesterKind::Trotter,
            mode: Mode::Montecarlo,
            seed: 0,
            access: AccessFlags::ALL,
            c: 1.0,
            qae_mode: QaeMode::Kernel,
            gaps: default_gaps(),
            reps: 200,
            n: 3,
            k_prime: 2,
            times: default_times(),
            suite_size: 50,
            step_scale: 1.0,
            format: Format::Json,
        }
    }
}

pub fn default_gaps() -> Vec<f64> {
    (3..=9).map(|i| i as f64 / 10.0).collect()
}

pub fn default_times() -> Vec<f64> {
    (1..=30).map(|i| i as f64 / 10.0).collect()
}

impl RunConfig {
    pub fn spec(&self) -> Result<TestSpec> {
        TestSpec::new(self.eps1, self.eps2, self.delta, self.k)
    }

    pub fn ae_settings(&self) -> AeSettings {
        AeSettings {
            c: self.c,
            mode: self.qae_mode,
        }
    }
}
