//! Exact dense complex linear algebra: Hermitian eigendecomposition, time
//! evolution, spectral norms and the phase-minimized unitary distance.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::HamiltonianSpec;

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for `||U^dag U - I||` when a matrix is claimed to be unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-9;

/// Eigendecomposition `M = V diag(values) V^dag` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(exp(-i values t)) V^dag`.
    pub fn evolution(&self, t: f64) -> CMatrix {
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    HermitianEigen {
        values: eig.eigenvalues,
        vectors: eig.eigenvectors,
    }
}

/// `exp(-i M t)` for a Hermitian matrix.
pub fn evolve_matrix(m: &CMatrix, t: f64) -> CMatrix {
    if t == 0.0 {
        return CMatrix::identity(m.nrows(), m.ncols());
    }
    hermitian_eigen(m).evolution(t)
}

/// `exp(-i H t)`; negative `t` gives the inverse evolution.
pub fn evolve(h: &HamiltonianSpec, t: f64) -> CMatrix {
    evolve_matrix(&h.matrix(), t)
}

/// Largest singular value. The matrix is rescaled to unit max entry first,
/// since the SVD iteration can stall on tiny or subnormal entries; if it still
/// fails to converge the Frobenius norm is returned as an upper bound.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let unit = m.map(|z| z / scale);
    match unit.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        Some(svd) => {
            scale
                * svd
                    .singular_values
                    .iter()
                    .fold(0.0f64, |acc, &s| acc.max(s))
        }
        None => scale * unit.norm(),
    }
}

/// `||U^dag U - I||` in spectral norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let gram = u.adjoint() * u;
    spectral_norm(&(gram - CMatrix::identity(u.nrows(), u.ncols())))
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch(u.nrows(), u.ncols()));
    }
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOLERANCE {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// Eigenvalues of a normal matrix.
///
/// The Hermitian and anti-Hermitian parts of a normal matrix commute, so a
/// generic real combination of them shares the eigenvectors; each eigenvalue
/// is then read off as a Rayleigh quotient. This avoids the general Schur
/// iteration, which can stall on near-scalar inputs such as `U^dag U`.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    let re = (m + m.adjoint()) * half;
    let im = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    let mix = re + im * Complex64::new(0.618_033_988_749_894_8, 0.0);
    let vectors = SymmetricEigen::new(mix).eigenvectors;
    vectors.column_iter().map(|v| v.dotc(&(m * v))).collect()
}

/// Minimizer of `||e^{i theta} U - V||` over the global phase.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseAlignment {
    pub theta: f64,
    pub distance: f64,
}

const PHASE_GRID: usize = 4096;
const THETA_TOLERANCE: f64 = 1e-12;

/// `min_theta ||e^{i theta} U - V||_inf` for unitaries of equal dimension.
///
/// `e^{i theta} U - V = U (e^{i theta} - U^dag V)` and `U^dag V` is normal, so the
/// spectral norm at each `theta` is `max_j |e^{i theta} - w_j|` over the
/// eigenvalues `w_j` of `U^dag V`. The minimum over `theta` is found by a grid
/// scan followed by golden-section refinement.
pub fn min_phase_alignment(u: &CMatrix, v: &CMatrix) -> Result<PhaseAlignment> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch(u.nrows(), v.nrows()));
    }
    check_unitary(u)?;
    check_unitary(v)?;
    let w = u.adjoint() * v;
    let eigs = eigenvalues(&w);
    let objective = |theta: f64| {
        let z = Complex64::from_polar(1.0, theta);
        eigs.iter().fold(0.0f64, |m, &e| m.max((z - e).norm()))
    };

    let step = TAU / PHASE_GRID as f64;
    let (best_i, _) = (0..PHASE_GRID)
        .map(|i| (i, objective(i as f64 * step)))
        .fold(
            (0, f64::INFINITY),
            |acc, (i, f)| if f < acc.1 { (i, f) } else { acc },
        );

    let (mut a, mut b) = ((best_i as f64 - 1.0) * step, (best_i as f64 + 1.0) * step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > THETA_TOLERANCE {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    let theta = 0.5 * (a + b);
    Ok(PhaseAlignment {
        theta: theta.rem_euclid(TAU),
        distance: objective(theta),
    })
}

pub fn min_phase_spectral_distance(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    min_phase_alignment(u, v).map(|a| a.distance)
}

/// Bracket `[lo, hi]` on the diamond distance between two unitary channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiamondInterval {
    pub lo: f64,
    pub hi: f64,
}

pub fn diamond_interval(u: &CMatrix, v: &CMatrix) -> Result<DiamondInterval> {
    let d = min_phase_spectral_distance(u, v)?;
    Ok(DiamondInterval { lo: d, hi: 2.0 * d })
}

/// Angle of a complex number mapped into `[0, 2 pi)`.
pub fn phase_of(z: Complex64) -> f64 {
    z.arg().rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliString, PauliSum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0f64, |e, v| e.max(v.norm()))
    }

    fn random_h(rng: &mut ChaCha8Rng, n: usize) -> HamiltonianSpec {
        crate::pauli::random_hamiltonian(
            n,
            5.min((1 << (2 * n)) - 1),
            rng.random_range(0.2..1.0),
            rng,
        )
        .unwrap()
    }

    #[test]
    fn evolve_z_by_pi_is_minus_identity() {
        let h = HamiltonianSpec::single_term("Z".parse().unwrap(), 1.0).unwrap();
        let u = evolve(&h, PI);
        assert!(max_abs(&(u + CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_h(&mut rng, 2);
        assert!(max_abs(&(evolve(&h, 0.0) - CMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn evolve_zz_diagonal_closed_form() {
        let h = HamiltonianSpec::single_term("ZZ".parse().unwrap(), 0.6).unwrap();
        let u = evolve(&h, 0.5);
        let signs = [1.0, -1.0, -1.0, 1.0];
        for (i, s) in signs.iter().enumerate() {
            let expected = Complex64::from_polar(1.0, -0.3 * s);
            assert!((u[(i, i)] - expected).norm() < 1e-12);
        }
        assert!(max_abs(&(u.clone() - CMatrix::from_diagonal(&u.diagonal()))) < 1e-12);
    }

    #[test]
    fn spectral_norm_examples() {
        let x: PauliString = "X".parse().unwrap();
        assert!((spectral_norm(&x.to_matrix()) - 1.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&CMatrix::zeros(4, 4)), 0.0);
        let pair = PauliSum::from_terms(
            2,
            [("XX".parse().unwrap(), 0.5), ("ZZ".parse().unwrap(), 0.5)],
        )
        .unwrap();
        assert!((spectral_norm(&pair.to_matrix()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_and_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let h = random_h(&mut rng, 3);
            let s = rng.random_range(-2.0..2.0);
            let t = rng.random_range(-2.0..2.0);
            let id = CMatrix::identity(8, 8);
            assert!(spectral_norm(&(evolve(&h, t) * evolve(&h, -t) - &id)) < 1e-9);
            assert!(spectral_norm(&(evolve(&h, s) * evolve(&h, t) - evolve(&h, s + t))) < 1e-9);
            assert!(unitarity_defect(&evolve(&h, t)) < 1e-9);
        }
    }

    #[test]
    fn first_order_truncation_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.random_range(1..=3);
            let h = random_h(&mut rng, n);
            let dim = 1 << n;
            for t in [0.001, 0.01, 0.1] {
                let first = CMatrix::identity(dim, dim) - h.matrix() * c(0.0, t);
                let err = spectral_norm(&(evolve(&h, t) - first));
                assert!(err <= t.exp() * t * t / 2.0, "t={t} err={err}");
            }
        }
    }

    #[test]
    fn min_phase_basic_cases() {
        let id = CMatrix::identity(4, 4);
        assert!(min_phase_spectral_distance(&id, &id).unwrap() < 1e-12);
        let phased = &id * Complex64::from_polar(1.0, 0.7);
        assert!(min_phase_spectral_distance(&id, &phased).unwrap() < 1e-12);

        let z = HamiltonianSpec::single_term("Z".parse().unwrap(), 0.5).unwrap();
        let u = CMatrix::identity(2, 2);
        let v = evolve(&z, 1.0);
        let d = min_phase_spectral_distance(&u, &v).unwrap();
        assert!((d - 2.0 * 0.25f64.sin()).abs() < 1e-12, "{d}");
        let bracket = diamond_interval(&u, &v).unwrap();
        assert!((bracket.lo - 0.494_808).abs() < 1e-6);
        assert!((bracket.hi - 0.989_616).abs() < 1e-6);
        assert_eq!(bracket.hi, 2.0 * bracket.lo);
    }

    #[test]
    fn min_phase_rejects_non_unitary() {
        let id = CMatrix::identity(2, 2);
        let bad = &id * c(2.0, 0.0);
        assert!(matches!(
            min_phase_spectral_distance(&id, &bad),
            Err(Error::NotUnitary(_))
        ));
    }

    /// Largest-gap formula: the optimal phase sits opposite the widest gap
    /// between the eigenphases of `U^dag V`.
    fn largest_gap_distance(u: &CMatrix, v: &CMatrix) -> f64 {
        let mut phases: Vec<f64> = eigenvalues(&(u.adjoint() * v))
            .into_iter()
            .map(phase_of)
            .collect();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut gap = TAU - (phases[phases.len() - 1] - phases[0]);
        for w in phases.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        2.0 * ((TAU - gap) / 4.0).sin()
    }

    #[test]
    fn min_phase_matches_largest_gap_and_direct_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.random_range(1..=3);
            let u = evolve(&random_h(&mut rng, n), rng.random_range(0.0..4.0));
            let v = evolve(&random_h(&mut rng, n), rng.random_range(0.0..4.0));
            let a = min_phase_alignment(&u, &v).unwrap();
            assert!((a.distance - largest_gap_distance(&u, &v)).abs() < 1e-9);
            let direct = spectral_norm(&(&u * Complex64::from_polar(1.0, a.theta) - &v));
            assert!((direct - a.distance).abs() < 1e-9);
            let back = min_phase_spectral_distance(&v, &u).unwrap();
            assert!((back - a.distance).abs() < 1e-9);
        }
    }
}
