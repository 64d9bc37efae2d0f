//! The doubled 2n-qubit register and its Bell basis.
//!
//! A doubled state `sum_{x,y} psi[x,y] |x>|y>` (left/reference register `x`,
//! right/evolved register `y`) is stored as the 2^n x 2^n matrix `C[y, x]`.
//! Under this identification `(I (x) U)` acts as `C -> U C`, and the Bell state
//! `|sigma_P> = (I (x) P)|sigma_I>` is the matrix `P / sqrt(2^n)`, so
//! `<sigma_P|psi> = tr(P C) / sqrt(2^n)`. No per-state rephasing is applied, which
//! makes the Bell transform of `(I (x) U)|sigma_I>` equal to the Pauli
//! coefficients of `U`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::{HamiltonianSpec, PauliString};

/// Tolerated norm deviation when sampling a measurement.
pub const SAMPLING_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DoubledState {
    n: usize,
    amps: CMatrix,
    normalized: bool,
}

impl DoubledState {
    /// `|sigma_I> = 2^{-n/2} sum_x |x>|x>`.
    pub fn sigma_identity(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        DoubledState {
            n,
            amps: CMatrix::from_diagonal_element(dim, dim, a),
            normalized: true,
        }
    }

    /// `|sigma_P>`.
    pub fn sigma(p: &PauliString) -> Self {
        let n = p.num_qubits();
        let scale = ((1usize << n) as f64).sqrt().recip();
        DoubledState {
            n,
            amps: p.to_matrix() * Complex64::new(scale, 0.0),
            normalized: true,
        }
    }

    /// `(I (x) M)|sigma_I>` for a 2^n x 2^n matrix.
    pub fn from_operator(m: &CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let n = dim.trailing_zeros() as usize;
        let mut s = DoubledState {
            n,
            amps: m * Complex64::new((dim as f64).sqrt().recip(), 0.0),
            normalized: false,
        };
        s.normalized = (s.norm_sqr() - 1.0).abs() <= 1e-9;
        Ok(s)
    }

    /// Amplitudes indexed by `x * 2^n + y`.
    pub fn from_amplitudes(n: usize, amps: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n;
        if amps.len() != dim * dim {
            return Err(Error::DimensionMismatch(amps.len(), dim * dim));
        }
        let mut s = DoubledState {
            n,
            amps: DMatrix::from_column_slice(dim, dim, amps),
            normalized: false,
        };
        s.normalized = (s.norm_sqr() - 1.0).abs() <= 1e-9;
        Ok(s)
    }

    /// Bell-basis amplitudes back to a state.
    pub fn from_bell(n: usize, bell: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n;
        if bell.len() != dim * dim {
            return Err(Error::DimensionMismatch(bell.len(), dim * dim));
        }
        let mut s = DoubledState {
            n,
            amps: CMatrix::zeros(dim, dim),
            normalized: false,
        };
        for (i, &b) in bell.iter().enumerate() {
            if b != Complex64::new(0.0, 0.0) {
                s.add_sigma(&PauliString::from_index(n, i), b);
            }
        }
        s.normalized = (s.norm_sqr() - 1.0).abs() <= 1e-9;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Amplitudes in `x * 2^n + y` order.
    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn amplitude(&self, left: usize, right: usize) -> Complex64 {
        self.amps[(right, left)]
    }

    /// False for post-projection intermediates that were not renormalized.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the previous norm.
    pub fn renormalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amps /= Complex64::new(norm, 0.0);
            self.normalized = true;
        }
        norm
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amps *= factor;
        self.normalized = self.normalized && (factor.norm() - 1.0).abs() <= 1e-12;
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DoubledState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Euclidean distance to another state.
    pub fn distance(&self, other: &DoubledState) -> f64 {
        (&self.amps - &other.amps)
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Applies `I (x) U` to the right register.
    pub fn apply_right(&mut self, u: &CMatrix) {
        self.amps = u * &self.amps;
    }

    /// `<sigma_P|self>`.
    pub fn bell_amplitude(&self, p: &PauliString) -> Complex64 {
        p.trace_product(&self.amps) / ((1usize << self.n) as f64).sqrt()
    }

    /// All Bell amplitudes, indexed by [`PauliString::index`].
    pub fn bell_transform(&self) -> Vec<Complex64> {
        PauliString::all(self.n)
            .map(|p| self.bell_amplitude(&p))
            .collect()
    }

    /// `self += coeff |sigma_P>`.
    pub fn add_sigma(&mut self, p: &PauliString, coeff: Complex64) {
        let dim = 1usize << self.n;
        let c = coeff / (dim as f64).sqrt();
        let xm = p.x_mask();
        for b in 0..dim {
            self.amps[(b ^ xm, b)] += p.column_phase(b) * c;
        }
        self.normalized = false;
    }

    /// Bell-basis measurement: returns `P` with probability `|<sigma_P|self>|^2`.
    pub fn sample_bell<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PauliString> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation > SAMPLING_NORM_TOLERANCE {
            return Err(Error::NotNormalized(deviation));
        }
        let probs: Vec<f64> = self.bell_transform().iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = probs.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                last = i;
                acc += p;
                if u < acc {
                    return Ok(PauliString::from_index(self.n, i));
                }
            }
        }
        Ok(PauliString::from_index(self.n, last))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKind {
    /// Identity plus every string of weight above k (the subspace D).
    IdentityOrNonlocal,
    /// Only strings of weight above k.
    Nonlocal,
}

/// Projector onto a span of Bell states selected by Pauli weight, applied as an
/// index mask in Bell coordinates.
#[derive(Debug, Clone)]
pub struct BellProjector {
    n: usize,
    k: usize,
    kind: ProjectorKind,
    mask: Vec<bool>,
    inside: Vec<PauliString>,
    outside: Vec<PauliString>,
}

impl BellProjector {
    pub fn new(n: usize, k: usize, kind: ProjectorKind) -> Self {
        let mask: Vec<bool> = PauliString::all(n)
            .map(|p| {
                p.weight() > k || (kind == ProjectorKind::IdentityOrNonlocal && p.is_identity())
            })
            .collect();
        let (mut inside, mut outside) = (Vec::new(), Vec::new());
        for (i, &m) in mask.iter().enumerate() {
            let p = PauliString::from_index(n, i);
            if m {
                inside.push(p);
            } else {
                outside.push(p);
            }
        }
        BellProjector {
            n,
            k,
            kind,
            mask,
            inside,
            outside,
        }
    }

    /// The projector onto D: identity or weight above `k`.
    pub fn locality_d(n: usize, k: usize) -> Self {
        Self::new(n, k, ProjectorKind::IdentityOrNonlocal)
    }

    /// The projector onto weight above `k` only.
    pub fn nonlocal(n: usize, k: usize) -> Self {
        Self::new(n, k, ProjectorKind::Nonlocal)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn locality(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> ProjectorKind {
        self.kind
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.mask[p.index()]
    }

    pub fn members(&self) -> &[PauliString] {
        &self.inside
    }

    pub fn excluded(&self) -> &[PauliString] {
        &self.outside
    }

    /// Projects in place and returns the squared norm of the result, which is
    /// the outcome probability when the input is normalized.
    pub fn project_in_place(&self, s: &mut DoubledState) -> f64 {
        debug_assert_eq!(s.n, self.n);
        if self.outside.len() <= self.inside.len() {
            for p in &self.outside {
                let b = s.bell_amplitude(p);
                if b != Complex64::new(0.0, 0.0) {
                    s.add_sigma(p, -b);
                }
            }
        } else {
            let coeffs: Vec<(PauliString, Complex64)> = self
                .inside
                .iter()
                .map(|p| (*p, s.bell_amplitude(p)))
                .collect();
            s.amps.fill(Complex64::new(0.0, 0.0));
            for (p, b) in coeffs {
                s.add_sigma(&p, b);
            }
        }
        s.normalized = false;
        s.norm_sqr()
    }

    /// `(Pi s, ||Pi s||^2)`; the projected state is left unnormalized.
    pub fn project(&self, s: &DoubledState) -> (DoubledState, f64) {
        let mut out = s.clone();
        let p = self.project_in_place(&mut out);
        (out, p)
    }

    /// `(2 Pi - I) s`.
    pub fn reflect_in_place(&self, s: &mut DoubledState) {
        let was_normalized = s.normalized;
        let original = s.amps.clone();
        self.project_in_place(s);
        s.amps = &s.amps * Complex64::new(2.0, 0.0) - original;
        s.normalized = was_normalized;
    }
}

/// `A s` with `A = Pi_D (I (x) H) Pi_D`, without building `A`.
pub fn apply_a(h: &HamiltonianSpec, proj: &BellProjector, s: &DoubledState) -> DoubledState {
    let (mut out, _) = proj.project(s);
    out.apply_right(&h.matrix());
    proj.project_in_place(&mut out);
    out
}

/// Matrix of `I (x) M` restricted to the projector's range, in the basis of
/// member Bell states (index order). Built column by column from states.
pub fn restricted_operator(m: &CMatrix, proj: &BellProjector) -> CMatrix {
    let members = proj.members();
    let mut out = CMatrix::zeros(members.len(), members.len());
    for (j, q) in members.iter().enumerate() {
        let mut s = DoubledState::sigma(q);
        s.apply_right(m);
        for (i, p) in members.iter().enumerate() {
            out[(i, j)] = s.bell_amplitude(p);
        }
    }
    out
}

/// Bell coordinates of a state on the projector's members.
pub fn restricted_coordinates(s: &DoubledState, proj: &BellProjector) -> Vec<Complex64> {
    proj.members().iter().map(|p| s.bell_amplitude(p)).collect()
}

/// `<sigma_P| (I (x) M) |sigma_Q>`, computed on state vectors.
pub fn sigma_overlap(p: &PauliString, m: &CMatrix, q: &PauliString) -> Result<Complex64> {
    let dim = 1usize << p.num_qubits();
    if q.num_qubits() != p.num_qubits() {
        return Err(Error::QubitMismatch {
            expected: p.num_qubits(),
            found: q.num_qubits(),
        });
    }
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(m.nrows(), dim));
    }
    let mut s = DoubledState::sigma(q);
    s.apply_right(m);
    Ok(s.bell_amplitude(p))
}

/// Dense doubled-space operators, for reference checks only. These allocate
/// 4^n x 4^n matrices and never appear in the testers.
pub mod dense {
    use super::*;
    use nalgebra::DVector;

    pub fn state_vector(s: &DoubledState) -> DVector<Complex64> {
        DVector::from_column_slice(s.amplitudes())
    }

    pub fn from_vector(n: usize, v: &DVector<Complex64>) -> Result<DoubledState> {
        DoubledState::from_amplitudes(n, v.as_slice())
    }

    /// `I (x) U` in the `x * 2^n + y` ordering.
    pub fn lift_right(u: &CMatrix) -> CMatrix {
        CMatrix::identity(u.nrows(), u.ncols()).kronecker(u)
    }

    /// Columns are `|sigma_P>` for the projector's members, in index order.
    pub fn subspace_basis(proj: &BellProjector) -> CMatrix {
        let dim = 1usize << (2 * proj.num_qubits());
        let members = proj.members();
        let mut b = CMatrix::zeros(dim, members.len());
        for (j, p) in members.iter().enumerate() {
            let s = DoubledState::sigma(p);
            b.column_mut(j).copy_from_slice(s.amplitudes());
        }
        b
    }

    pub fn projector_matrix(proj: &BellProjector) -> CMatrix {
        let b = subspace_basis(proj);
        &b * b.adjoint()
    }

    /// `Pi_D (I (x) H) Pi_D` as a 4^n x 4^n matrix.
    pub fn a_matrix(h: &HamiltonianSpec, proj: &BellProjector) -> CMatrix {
        let pi = projector_matrix(proj);
        &pi * lift_right(&h.matrix()) * &pi
    }

    /// `B^dag M B`: the operator restricted to the projector's range.
    pub fn compress(m: &CMatrix, basis: &CMatrix) -> CMatrix {
        basis.adjoint() * m * basis
    }
}
