//! Black-box time evolution with capability flags and cost accounting.
//!
//! Testers hold an [`EvolutionOracle`] and can only act on states through
//! [`EvolutionOracle::query`] and friends. Every application is appended to the
//! oracle's [`Transcript`]; the total evolution time is the left fold of the
//! recorded durations in entry order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::bell::DoubledState;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, HermitianEigen};
use crate::pauli::HamiltonianSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessFlags {
    pub forward: bool,
    pub inverse: bool,
    pub controlled: bool,
}

impl AccessFlags {
    pub const FORWARD_ONLY: AccessFlags = AccessFlags {
        forward: true,
        inverse: false,
        controlled: false,
    };

    pub const ALL: AccessFlags = AccessFlags {
        forward: true,
        inverse: true,
        controlled: true,
    };

    /// Errors naming the first missing capability.
    pub fn require(&self, direction: Direction, controlled: bool) -> Result<()> {
        match direction {
            Direction::Forward if !self.forward => return Err(Error::Capability("forward")),
            Direction::Inverse if !self.inverse => return Err(Error::Capability("inverse")),
            _ => {}
        }
        if controlled && !self.controlled {
            return Err(Error::Capability("controlled"));
        }
        Ok(())
    }
}

impl Default for AccessFlags {
    fn default() -> Self {
        AccessFlags::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub duration: f64,
    pub direction: Direction,
    pub controlled: bool,
}

/// Record of oracle applications. A controlled application costs its duration
/// once, and inverse durations count toward the total like forward ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
    query_count: u64,
    total_evolution_time: f64,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, entry: TranscriptEntry) {
        self.entries.push(entry);
        self.query_count += 1;
        self.total_evolution_time += entry.duration;
    }

    /// Appends another transcript. The total continues the left fold over the
    /// appended entries, so it matches a single fold over the combined list.
    pub fn merge(&mut self, other: &Transcript) {
        for e in &other.entries {
            self.record(*e);
        }
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn total_evolution_time(&self) -> f64 {
        self.total_evolution_time
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops the entry list but keeps the totals, for bulk experiments.
    pub fn summary(&self) -> TranscriptSummary {
        TranscriptSummary {
            query_count: self.query_count,
            total_evolution_time: self.total_evolution_time,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub query_count: u64,
    pub total_evolution_time: f64,
}

struct Hidden {
    h: HamiltonianSpec,
    eigen: HermitianEigen,
    cache: Mutex<HashMap<(u64, Direction), Arc<CMatrix>>>,
}

impl Hidden {
    fn unitary(&self, duration: f64, direction: Direction) -> Arc<CMatrix> {
        let key = (duration.to_bits(), direction);
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        cache
            .entry(key)
            .or_insert_with(|| Arc::new(self.eigen.evolution(direction.sign() * duration)))
            .clone()
    }
}

/// Access to `e^{-iHt}` for a hidden `H`.
///
/// Forks share the hidden Hamiltonian and the unitary cache but carry their own
/// transcript, so each trial worker gets an independent oracle.
pub struct EvolutionOracle {
    hidden: Arc<Hidden>,
    flags: AccessFlags,
    transcript: Transcript,
    last: Option<(u64, Direction, Arc<CMatrix>)>,
}

impl EvolutionOracle {
    pub fn new(h: HamiltonianSpec, flags: AccessFlags) -> Self {
        let eigen = hermitian_eigen(&h.matrix());
        EvolutionOracle {
            hidden: Arc::new(Hidden {
                h,
                eigen,
                cache: Mutex::new(HashMap::new()),
            }),
            flags,
            transcript: Transcript::new(),
            last: None,
        }
    }

    /// A new handle on the same Hamiltonian with an empty transcript.
    pub fn fork(&self) -> Self {
        EvolutionOracle {
            hidden: Arc::clone(&self.hidden),
            flags: self.flags,
            transcript: Transcript::new(),
            last: None,
        }
    }

    pub fn flags(&self) -> AccessFlags {
        self.flags
    }

    pub fn num_qubits(&self) -> usize {
        self.hidden.h.num_qubits()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn take_transcript(&mut self) -> Transcript {
        std::mem::take(&mut self.transcript)
    }

    fn check(&self, duration: f64, direction: Direction, controlled: bool) -> Result<()> {
        self.flags.require(direction, controlled)?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidDuration(duration));
        }
        Ok(())
    }

    fn unitary(&mut self, duration: f64, direction: Direction) -> Arc<CMatrix> {
        let bits = duration.to_bits();
        if let Some((b, d, u)) = &self.last {
            if *b == bits && *d == direction {
                return Arc::clone(u);
            }
        }
        let u = self.hidden.unitary(duration, direction);
        self.last = Some((bits, direction, Arc::clone(&u)));
        u
    }

    fn record(&mut self, duration: f64, direction: Direction, controlled: bool) {
        self.transcript.record(TranscriptEntry {
            duration,
            direction,
            controlled,
        });
    }

    /// Applies `I (x) e^{-iH duration}` (forward) or `I (x) e^{+iH duration}`
    /// (inverse) to the right register.
    pub fn query(
        &mut self,
        state: &mut DoubledState,
        duration: f64,
        direction: Direction,
    ) -> Result<()> {
        self.check(duration, direction, false)?;
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::QubitMismatch {
                expected: self.num_qubits(),
                found: state.num_qubits(),
            });
        }
        let u = self.unitary(duration, direction);
        state.apply_right(&u);
        self.record(duration, direction, false);
        Ok(())
    }

    /// One controlled application on a state written as branches of a control
    /// register: branch `j` is evolved iff `control[j]`. Charged as a single
    /// controlled query.
    pub fn query_controlled(
        &mut self,
        branches: &mut [DoubledState],
        control: &[bool],
        duration: f64,
        direction: Direction,
    ) -> Result<()> {
        self.check(duration, direction, true)?;
        if branches.len() != control.len() {
            return Err(Error::DimensionMismatch(branches.len(), control.len()));
        }
        let u = self.unitary(duration, direction);
        for (b, &on) in branches.iter_mut().zip(control) {
            if b.num_qubits() != self.num_qubits() {
                return Err(Error::QubitMismatch {
                    expected: self.num_qubits(),
                    found: b.num_qubits(),
                });
            }
            if on {
                b.apply_right(&u);
            }
        }
        self.record(duration, direction, true);
        Ok(())
    }

    /// Records a query without applying it. Used when the outcome law of a
    /// circuit is sampled in closed form: the circuit's queries are still paid
    /// for, in the order the circuit would issue them.
    pub fn charge(&mut self, duration: f64, direction: Direction, controlled: bool) -> Result<()> {
        self.check(duration, direction, controlled)?;
        self.record(duration, direction, controlled);
        Ok(())
    }

    /// Uncharged access to the hidden Hamiltonian. Anything built on this is a
    /// white-box computation and must be reported as such.
    pub fn white_box(&self) -> &HamiltonianSpec {
        &self.hidden.h
    }
}
