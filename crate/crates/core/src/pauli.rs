//! Pauli-string algebra, Pauli-sum Hamiltonians and distances to the k-local set.
//!
//! Text form puts qubit 1 leftmost, and qubit 1 is the most significant bit of a
//! computational basis index. A Pauli string is stored symplectically as an
//! x-mask and a z-mask over those bits; `Y` sets both.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Default qubit limit. The doubled register then has 4^6 = 4096 amplitudes
/// (64 KiB per state); a dense operator on it would need 256 MiB, so dense
/// doubled-space oracles are only practical up to about 5 qubits.
pub const DEFAULT_MAX_QUBITS: usize = 6;

/// Spectral-norm slack allowed by [`HamiltonianSpec::validate`].
pub const NORM_TOLERANCE: f64 = 1e-9;

const IMAG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' | 'i' => Ok(Letter::I),
            'X' | 'x' => Ok(Letter::X),
            'Y' | 'y' => Ok(Letter::Y),
            'Z' | 'z' => Ok(Letter::Z),
            other => Err(Error::InvalidPauliLetter(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }
}

/// An n-qubit Pauli word over {I, X, Y, Z}.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub const MAX_QUBITS: usize = 31;

    pub fn identity(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS, "too many qubits for a PauliString");
        PauliString { n, x: 0, z: 0 }
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (pos, &l) in letters.iter().enumerate() {
            p.set(pos, l);
        }
        p
    }

    /// Single non-identity letter on 0-based position `pos` (qubit `pos + 1`).
    pub fn single(n: usize, pos: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set(pos, letter);
        p
    }

    /// `Z` on the first `k` qubits and identity elsewhere.
    pub fn z_chain(n: usize, k: usize) -> Self {
        assert!(k <= n);
        let mut p = Self::identity(n);
        for pos in 0..k {
            p.set(pos, Letter::Z);
        }
        p
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut p = Self::identity(n);
        for pos in (0..n).rev() {
            let l = match index & 3 {
                0 => Letter::I,
                1 => Letter::X,
                2 => Letter::Y,
                _ => Letter::Z,
            };
            p.set(pos, l);
            index >>= 2;
        }
        p
    }

    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    fn bit(&self, pos: usize) -> u64 {
        1u64 << (self.n - 1 - pos)
    }

    fn set(&mut self, pos: usize, letter: Letter) {
        assert!(pos < self.n, "qubit position out of range");
        let b = self.bit(pos);
        let (x, z) = letter.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn letter(&self, pos: usize) -> Letter {
        let b = self.bit(pos);
        Letter::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n).map(|pos| self.letter(pos))
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn x_mask(&self) -> usize {
        self.x as usize
    }

    pub fn z_mask(&self) -> usize {
        self.z as usize
    }

    /// Base-4 index with I=0, X=1, Y=2, Z=3 and qubit 1 as the most significant digit.
    pub fn index(&self) -> usize {
        self.letters().fold(0usize, |acc, l| {
            (acc << 2)
                | match l {
                    Letter::I => 0,
                    Letter::X => 1,
                    Letter::Y => 2,
                    Letter::Z => 3,
                }
        })
    }

    /// `i^{#Y}`, the phase that makes `P|b> = i^{#Y} (-1)^{|b & z|} |b ^ x>`.
    pub fn y_phase(&self) -> Complex64 {
        match (self.x & self.z).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Matrix element `<b ^ x| P |b>`; every other element of column `b` is zero.
    #[inline]
    pub fn column_phase(&self, b: usize) -> Complex64 {
        let sign = if ((b as u64) & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        self.y_phase() * sign
    }

    /// Dense 2^n x 2^n matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            m[(b ^ self.x_mask(), b)] = self.column_phase(b);
        }
        m
    }

    /// `tr(P M)` using the monomial structure of `P`.
    pub fn trace_product(&self, m: &CMatrix) -> Complex64 {
        let dim = 1usize << self.n;
        debug_assert_eq!(m.nrows(), dim);
        let xm = self.x_mask();
        let mut acc = Complex64::new(0.0, 0.0);
        let sign_free = self.y_phase();
        for b in 0..dim {
            let v = m[(b, b ^ xm)];
            if ((b as u64) & self.z).count_ones().is_multiple_of(2) {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc * sign_free
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.index()).cmp(&(other.n, other.index()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() || letters.len() > Self::MAX_QUBITS {
            return Err(Error::Usage(format!(
                "Pauli word length must be between 1 and {}",
                Self::MAX_QUBITS
            )));
        }
        Ok(Self::from_letters(&letters))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which norm measures the distance to the k-local set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    NormalizedFrobenius,
    Operator,
    NormalizedSchatten(f64),
    PauliP(f64),
}

/// A real-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (PauliString, f64)>,
    ) -> Result<Self> {
        let mut sum = PauliSum::new(n);
        for (p, c) in terms {
            sum.add(p, c)?;
        }
        Ok(sum)
    }

    /// Adds `coeff * p`, merging with an existing term.
    pub fn add(&mut self, p: PauliString, coeff: f64) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::QubitMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        *self.terms.entry(p).or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().map(|(p, c)| (*p, c * factor)).collect(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, &c) in &self.terms {
            let xm = p.x_mask();
            for b in 0..dim {
                m[(b ^ xm, b)] += p.column_phase(b) * c;
            }
        }
        m
    }

    /// Sum of squared coefficients, i.e. tr(M^2) / 2^n.
    pub fn coefficient_norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Terms of weight at most `k` and terms of weight above `k`.
    pub fn locality_split(&self, k: usize) -> (PauliSum, PauliSum) {
        let mut low = PauliSum::new(self.n);
        let mut high = PauliSum::new(self.n);
        for (p, &c) in &self.terms {
            if p.weight() <= k {
                low.terms.insert(*p, c);
            } else {
                high.terms.insert(*p, c);
            }
        }
        (low, high)
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::NormalizedFrobenius => Ok(self.coefficient_norm_sqr().sqrt()),
            NormKind::Operator => {
                if self.is_empty() {
                    return Ok(0.0);
                }
                let eig = linalg::hermitian_eigen(&self.to_matrix());
                Ok(eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            }
            NormKind::NormalizedSchatten(p) => {
                check_exponent(p)?;
                if self.is_empty() {
                    return Ok(0.0);
                }
                let eig = linalg::hermitian_eigen(&self.to_matrix());
                let dim = eig.values.len() as f64;
                let sum: f64 = eig.values.iter().map(|v| v.abs().powf(p)).sum();
                Ok((sum / dim).powf(1.0 / p))
            }
            NormKind::PauliP(p) => {
                check_exponent(p)?;
                let sum: f64 = self.terms.values().map(|c| c.abs().powf(p)).sum();
                Ok(sum.powf(1.0 / p))
            }
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::UnsupportedNorm(p))
    } else {
        Ok(())
    }
}

/// Pauli coefficients `tr(P M) / 2^n` of a Hermitian matrix, identity included.
pub fn decompose_hermitian(m: &CMatrix) -> Result<PauliSum> {
    let dim = m.nrows();
    if dim != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > PauliString::MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: PauliString::MAX_QUBITS,
        });
    }
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.norm()));
    let defect = (m - m.adjoint())
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.norm()));
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let mut sum = PauliSum::new(n);
    for p in PauliString::all(n) {
        let c = p.trace_product(m).re / dim as f64;
        if c != 0.0 {
            sum.terms.insert(p, c);
        }
    }
    Ok(sum)
}

/// A validated Hamiltonian: traceless, real coefficients, spectral norm at most 1.
#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianSpec {
    terms: PauliSum,
    stripped_identity: Option<f64>,
    spectral_norm: f64,
}

impl HamiltonianSpec {
    /// Validates raw terms with the default qubit limit.
    pub fn validate(
        n: usize,
        raw: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Result<Self> {
        Self::validate_with_limit(n, raw, DEFAULT_MAX_QUBITS)
    }

    pub fn validate_with_limit(
        n: usize,
        raw: impl IntoIterator<Item = (PauliString, Complex64)>,
        max_qubits: usize,
    ) -> Result<Self> {
        if n > max_qubits {
            return Err(Error::TooManyQubits { n, max: max_qubits });
        }
        let mut sum = PauliSum::new(n);
        let mut identity = 0.0;
        let mut saw_identity = false;
        for (p, c) in raw {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    pauli: p.to_string(),
                });
            }
            if c.im.abs() > IMAG_TOLERANCE {
                return Err(Error::NonRealCoefficient {
                    pauli: p.to_string(),
                    value: c,
                });
            }
            if p.is_identity() && p.num_qubits() == n {
                identity += c.re;
                saw_identity = true;
                continue;
            }
            sum.add(p, c.re)?;
        }
        sum.terms.retain(|_, c| *c != 0.0);
        let spectral_norm = sum.norm(NormKind::Operator)?;
        if spectral_norm > 1.0 + NORM_TOLERANCE {
            return Err(Error::NormExceeded {
                norm: spectral_norm,
            });
        }
        Ok(HamiltonianSpec {
            terms: sum,
            stripped_identity: saw_identity.then_some(identity),
            spectral_norm,
        })
    }

    pub fn from_real_terms(
        n: usize,
        terms: impl IntoIterator<Item = (PauliString, f64)>,
    ) -> Result<Self> {
        Self::validate(
            n,
            terms.into_iter().map(|(p, c)| (p, Complex64::new(c, 0.0))),
        )
    }

    /// `coeff * p`.
    pub fn single_term(p: PauliString, coeff: f64) -> Result<Self> {
        Self::from_real_terms(p.num_qubits(), [(p, coeff)])
    }

    pub fn zero(n: usize) -> Self {
        HamiltonianSpec {
            terms: PauliSum::new(n),
            stripped_identity: None,
            spectral_norm: 0.0,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.terms.num_qubits()
    }

    pub fn terms(&self) -> &PauliSum {
        &self.terms
    }

    /// True when an identity term was removed during validation.
    pub fn identity_stripped(&self) -> bool {
        self.stripped_identity.is_some()
    }

    pub fn stripped_identity(&self) -> Option<f64> {
        self.stripped_identity
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    pub fn matrix(&self) -> CMatrix {
        self.terms.to_matrix()
    }

    pub fn locality_split(&self, k: usize) -> (PauliSum, PauliSum) {
        self.terms.locality_split(k)
    }

    /// Norm of the weight-above-k part.
    pub fn distance_to_klocal(&self, k: usize, norm: NormKind) -> Result<f64> {
        self.locality_split(k).1.norm(norm)
    }

    /// Parses `<pauli-word> <real coefficient>` records, with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut raw = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let (word, coeff) = match (fields.next(), fields.next(), fields.next()) {
                (Some(w), Some(c), None) => (w, c),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "expected `<pauli-word> <coefficient>`".into(),
                    })
                }
            };
            let p: PauliString = word.parse().map_err(|e: Error| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let c: f64 = coeff.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid coefficient {coeff:?}"),
            })?;
            match n {
                None => n = Some(p.num_qubits()),
                Some(n0) if n0 != p.num_qubits() => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "word {word} has {} letters, earlier words have {n0}",
                            p.num_qubits()
                        ),
                    })
                }
                _ => {}
            }
            raw.push((p, Complex64::new(c, 0.0)));
        }
        let n = n.ok_or_else(|| Error::Parse {
            line: 0,
            message: "no Hamiltonian terms found".into(),
        })?;
        Self::validate(n, raw)
    }

    /// Writes the file format accepted by [`HamiltonianSpec::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in self.terms.terms() {
            out.push_str(&format!("{p} {c:e}\n"));
        }
        out
    }
}

/// Random Hamiltonian: `terms` distinct non-identity strings drawn uniformly,
/// coefficients uniform on [-1, 1], rescaled to spectral norm `target_norm`.
pub fn random_hamiltonian<R: Rng + ?Sized>(
    n: usize,
    terms: usize,
    target_norm: f64,
    rng: &mut R,
) -> Result<HamiltonianSpec> {
    let available = (1usize << (2 * n)) - 1;
    if terms == 0 || terms > available {
        return Err(Error::Usage(format!(
            "term count must be between 1 and {available} for {n} qubits"
        )));
    }
    if !(0.0..=1.0).contains(&target_norm) {
        return Err(Error::Usage("target norm must lie in [0, 1]".into()));
    }
    let picks = index::sample(rng, available, terms);
    let mut sum = PauliSum::new(n);
    for i in picks.iter() {
        let c: f64 = rng.random_range(-1.0..=1.0);
        sum.add(PauliString::from_index(n, i + 1), c)?;
    }
    let norm = sum.norm(NormKind::Operator)?;
    let scale = if norm > 0.0 { target_norm / norm } else { 0.0 };
    let scaled = sum.scaled(scale);
    HamiltonianSpec::from_real_terms(n, scaled.terms().map(|(p, c)| (*p, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(ps("IXYZ").weight(), 3);
        assert_eq!(ps("IIII").weight(), 0);
        assert_eq!(ps("ZZ").weight(), 2);
    }

    #[test]
    fn index_round_trip() {
        for i in 0..256 {
            let p = PauliString::from_index(4, i);
            assert_eq!(p.index(), i);
            assert_eq!(p.to_string().parse::<PauliString>().unwrap(), p);
        }
        assert_eq!(ps("XI").index(), 4);
    }

    #[test]
    fn single_qubit_matrices() {
        let y = ps("Y").to_matrix();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        let z = ps("Z").to_matrix();
        assert_eq!(z[(1, 1)], Complex64::new(-1.0, 0.0));
        // qubit 1 is the most significant bit
        let xi = ps("XI").to_matrix();
        assert_eq!(xi[(2, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn trace_product_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = CMatrix::from_fn(8, 8, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        for p in PauliString::all(3) {
            let dense = (p.to_matrix() * &m).trace();
            assert!((dense - p.trace_product(&m)).norm() < 1e-12);
        }
    }

    #[test]
    fn locality_split_examples() {
        // norm 1.4, so this is a plain sum rather than a validated Hamiltonian
        let h = PauliSum::from_terms(2, [(ps("ZZ"), 0.6), (ps("IZ"), 0.8)]).unwrap();
        let (low, high) = h.locality_split(1);
        assert_eq!(low.terms().collect::<Vec<_>>(), vec![(&ps("IZ"), 0.8)]);
        assert_eq!(high.terms().collect::<Vec<_>>(), vec![(&ps("ZZ"), 0.6)]);
        let (all, none) = h.locality_split(2);
        assert_eq!(all, h);
        assert!(none.is_empty());
    }

    #[test]
    fn distance_single_term() {
        let h = HamiltonianSpec::single_term(ps("ZZ"), 0.5).unwrap();
        let d = h
            .distance_to_klocal(1, NormKind::NormalizedFrobenius)
            .unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distance_rejects_small_exponent() {
        let h = HamiltonianSpec::single_term(ps("ZZ"), 0.5).unwrap();
        assert!(matches!(
            h.distance_to_klocal(1, NormKind::PauliP(0.5)),
            Err(Error::UnsupportedNorm(_))
        ));
        assert!(h
            .distance_to_klocal(1, NormKind::NormalizedSchatten(0.9))
            .is_err());
    }

    #[test]
    fn validation_strips_identity() {
        let h = HamiltonianSpec::from_real_terms(2, [(ps("II"), 0.3), (ps("ZZ"), 0.6)]).unwrap();
        assert!(h.identity_stripped());
        assert_eq!(h.stripped_identity(), Some(0.3));
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms().coefficient(&ps("ZZ")), 0.6);
    }

    #[test]
    fn validation_merges_duplicates() {
        let h = HamiltonianSpec::from_real_terms(2, [(ps("ZZ"), 0.7), (ps("ZZ"), 0.2)]).unwrap();
        assert!((h.terms().coefficient(&ps("ZZ")) - 0.9).abs() < 1e-15);
        assert!(!h.identity_stripped());
    }

    #[test]
    fn validation_rejects_large_norm() {
        // XX and ZZ commute and share the eigenvector Phi+ with eigenvalue 1.6
        let err =
            HamiltonianSpec::from_real_terms(2, [(ps("XX"), 0.8), (ps("ZZ"), 0.8)]).unwrap_err();
        match err {
            Error::NormExceeded { norm } => assert!((norm - 1.6).abs() < 1e-12),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn validation_rejects_complex_and_mismatched() {
        let err = HamiltonianSpec::validate(1, [(ps("Z"), Complex64::new(0.1, 0.2))]).unwrap_err();
        assert!(matches!(err, Error::NonRealCoefficient { .. }));
        let err = HamiltonianSpec::from_real_terms(2, [(ps("Z"), 0.1)]).unwrap_err();
        assert!(matches!(err, Error::QubitMismatch { .. }));
        let err = HamiltonianSpec::from_real_terms(7, [(ps("ZIIIIII"), 0.1)]).unwrap_err();
        assert!(matches!(err, Error::TooManyQubits { .. }));
    }

    #[test]
    fn decompose_examples() {
        let zz = decompose_hermitian(&ps("ZZ").to_matrix()).unwrap();
        assert_eq!(zz.len(), 1);
        assert!((zz.coefficient(&ps("ZZ")) - 1.0).abs() < 1e-15);
        let id = decompose_hermitian(&CMatrix::identity(4, 4)).unwrap();
        assert_eq!(id.terms().collect::<Vec<_>>(), vec![(&ps("II"), 1.0)]);
        let bad = CMatrix::from_fn(2, 2, |r, c| Complex64::new((r + 2 * c) as f64, 0.0));
        assert!(matches!(
            decompose_hermitian(&bad),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn decompose_random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = CMatrix::from_fn(8, 8, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = &a + a.adjoint();
        let sum = decompose_hermitian(&m).unwrap();
        let err = (sum.to_matrix() - &m)
            .iter()
            .fold(0.0f64, |e, v| e.max(v.norm()));
        assert!(err < 1e-10, "reconstruction error {err}");
    }

    #[test]
    fn parse_file_format() {
        let text = "# two-qubit example\nZZ 0.5\nXI -0.25 # trailing\n\nIZ 1e-1\n";
        let h = HamiltonianSpec::parse(text).unwrap();
        assert_eq!(h.num_qubits(), 2);
        assert_eq!(h.terms().len(), 3);
        assert_eq!(h.terms().coefficient(&ps("XI")), -0.25);

        let err = HamiltonianSpec::parse("ZZ 0.1\nZZZ 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = HamiltonianSpec::parse("ZQ 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = HamiltonianSpec::parse("ZZ abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(HamiltonianSpec::parse("# nothing\n").is_err());
    }

    #[test]
    fn random_hamiltonian_hits_target_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hamiltonian(3, 6, 1.0, &mut rng).unwrap();
        assert_eq!(h.terms().len(), 6);
        assert!((h.spectral_norm() - 1.0).abs() < 1e-9);
        assert!(!h.identity_stripped());
    }
}
