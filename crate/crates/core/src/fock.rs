//! Truncated Fock-space arithmetic: the dimension newtype, operator and
//! density matrices, and the elementary operators `â`, `â†`, `n̂`, `D̂(ξ)`.
//!
//! Truncation leaks into operator identities only through the last rows and
//! columns. Identities that move one rung up or down the ladder hold on the
//! leading `(D−1)×(D−1)` block, `m` rungs on the `(D−m)` block; see
//! [`top_left_block`].

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, Tolerances, C64};

/// Number of retained Fock states `|0⟩ … |D−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Truncation(usize);

impl Truncation {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self(dim))
    }

    pub fn dim(self) -> usize {
        self.0
    }

    pub fn check_index(self, n: usize) -> Result<()> {
        if n >= self.0 {
            return Err(Error::IndexOutOfRange { index: n, dim: self.0 });
        }
        Ok(())
    }

    pub fn check_same(self, other: Truncation) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                expected: self.0,
                found: other.0,
            });
        }
        Ok(())
    }
}

/// Dense `D×D` operator, `entry[(j, k)] = ⟨j|Â|k⟩`.
pub type OperatorMatrix = DMatrix<C64>;

/// Leading `size×size` block of a square matrix.
pub fn top_left_block(m: &OperatorMatrix, size: usize) -> OperatorMatrix {
    m.view((0, 0), (size, size)).into_owned()
}

pub fn identity(t: Truncation) -> OperatorMatrix {
    OperatorMatrix::identity(t.dim(), t.dim())
}

/// Diagonal operator `f(n̂)`.
pub fn number_function(t: Truncation, f: impl Fn(usize) -> f64) -> OperatorMatrix {
    let d = t.dim();
    OperatorMatrix::from_diagonal(&DVector::from_fn(d, |n, _| C64::new(f(n), 0.0)))
}

/// `â`, with `â|n⟩ = √n |n−1⟩`.
pub fn annihilation_matrix(t: Truncation) -> OperatorMatrix {
    let d = t.dim();
    let mut a = OperatorMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation_matrix(t: Truncation) -> OperatorMatrix {
    annihilation_matrix(t).adjoint()
}

pub fn number_matrix(t: Truncation) -> OperatorMatrix {
    number_function(t, |n| n as f64)
}

/// Displacement operator `D̂(ξ) = exp(ξâ† − ξ*â)` on the truncated space.
///
/// Truncation artifacts grow with `|ξ|²/D`; a warning is logged once
/// `|ξ|² > D/4`.
pub fn displacement_matrix(t: Truncation, xi: C64) -> OperatorMatrix {
    if xi.norm_sqr() > t.dim() as f64 / 4.0 {
        log::warn!(
            "displacement |xi|^2 = {:.3} exceeds D/4 = {:.3}; truncation artifacts likely",
            xi.norm_sqr(),
            t.dim() as f64 / 4.0
        );
    }
    let a = annihilation_matrix(t);
    let generator = creation_matrix(t) * xi - a * xi.conj();
    generator.exp()
}

/// Reproducible random density matrix `GG†/Tr(GG†)`, `G` a seeded complex
/// Gaussian matrix.
pub fn random_density(t: Truncation, seed: u64) -> DensityMatrix {
    let d = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = OperatorMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho /= C64::new(tr, 0.0);
    // GG† is Hermitian only up to roundoff in the products; symmetrize.
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho, &Tolerances::default())
        .expect("Gram matrix normalized by its trace is a valid density")
}

/// Normalized pure state `c_n = ⟨n|ψ⟩` on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    tail_weight: f64,
}

impl StateVector {
    /// Normalizes `amplitudes`; `tail_weight` records the probability mass
    /// the untruncated state had beyond `|D−1⟩`.
    pub fn from_truncated(amplitudes: DVector<C64>, tail_weight: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            tail_weight,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn truncation(&self) -> Truncation {
        Truncation(self.dim())
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    /// Mass discarded by the truncation, before renormalization.
    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix(m)
    }
}

/// Hermitian, positive semidefinite, unit-trace `D×D` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity against `tol`.
    pub fn new(entries: OperatorMatrix, tol: &Tolerances) -> Result<Self> {
        validate_density(&entries, tol)?;
        Ok(Self(entries))
    }

    /// Wraps a matrix without any validation. Intended for fault injection
    /// and for inspecting inconsistent reconstructions.
    pub fn new_unchecked(entries: OperatorMatrix) -> Self {
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn truncation(&self) -> Truncation {
        Truncation(self.dim())
    }

    pub fn entries(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_inner(self) -> OperatorMatrix {
        self.0
    }

    /// `⟨j|ρ|k⟩`.
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.0[(j, k)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Photon-number distribution `⟨n|ρ|n⟩`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.0[(n, n)].re).collect()
    }

    /// `Tr{ρ A}`.
    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        (&self.0 * op).trace()
    }

    /// Frobenius distance `‖ρ − σ‖_F`.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Convex combination `p·self + (1−p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        self.truncation().check_same(other.truncation())?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("mixing weight {p} outside [0, 1]")));
        }
        Ok(Self(&self.0 * C64::new(p, 0.0) + &other.0 * C64::new(1.0 - p, 0.0)))
    }

    /// Re-runs the invariant checks, e.g. after [`DensityMatrix::new_unchecked`].
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        validate_density(&self.0, tol)
    }
}

pub fn hermiticity_defect(m: &OperatorMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..d {
        for k in j..d {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

pub fn min_eigenvalue(m: &OperatorMatrix) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().min()
}

fn validate_density(m: &OperatorMatrix, tol: &Tolerances) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::InvalidParameter(format!(
            "density matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("density matrix"));
    }
    let deviation = hermiticity_defect(m);
    if deviation > tol.herm {
        return Err(Error::NotHermitian { deviation, tolerance: tol.herm });
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(Error::TraceMismatch { trace, tolerance: tol.trace });
    }
    let min_eigenvalue = min_eigenvalue(m);
    if min_eigenvalue < -tol.psd {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn t(d: usize) -> Truncation {
        Truncation::new(d).unwrap()
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(Truncation::new(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn annihilation_entries_and_sparsity() {
        let a = annihilation_matrix(t(2));
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(a[(1, 0)], C64::new(0.0, 0.0));
        assert_eq!(a[(1, 1)], C64::new(0.0, 0.0));

        let a = annihilation_matrix(t(4));
        assert_abs_diff_eq!(a[(2, 3)].re, 1.7320508, epsilon = 1e-7);
        for j in 0..4 {
            for k in 0..4 {
                if k != j + 1 {
                    assert_eq!(a[(j, k)], C64::new(0.0, 0.0), "({j},{k})");
                }
            }
        }
    }

    #[test]
    fn creation_is_adjoint() {
        let tt = t(5);
        let ad = creation_matrix(tt);
        assert_eq!(ad[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(ad.adjoint(), annihilation_matrix(tt));
        // â†|0⟩ = |1⟩
        let col = ad.column(0);
        assert_eq!(col[1], C64::new(1.0, 0.0));
        assert!(col.iter().enumerate().all(|(n, c)| n == 1 || c.norm() == 0.0));
    }

    #[test]
    fn number_operator() {
        let n3 = number_matrix(t(3));
        assert_eq!(
            n3,
            OperatorMatrix::from_diagonal(&DVector::from_vec(vec![
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0)
            ]))
        );
        for d in [2, 7, 16] {
            let tt = t(d);
            let n = number_matrix(tt);
            assert!((creation_matrix(tt) * annihilation_matrix(tt) - &n).camax() <= 1e-14);
            assert_eq!(n.trace().re, (d * (d - 1) / 2) as f64);
        }
    }

    #[test]
    fn canonical_commutator_on_valid_block() {
        for d in [2, 5, 16] {
            let tt = t(d);
            let a = annihilation_matrix(tt);
            let ad = creation_matrix(tt);
            let comm = &a * &ad - &ad * &a;
            assert!((top_left_block(&comm, d - 1) - identity(t(d - 1))).camax() <= 1e-14);
            assert!((comm[(d - 1, d - 1)] + (d - 1) as f64).norm() <= 1e-14);
        }
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let tt = t(8);
        let dm = displacement_matrix(tt, C64::new(0.0, 0.0));
        assert_abs_diff_eq!((dm - identity(tt)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn displacement_column_zero_is_coherent_state() {
        let tt = t(64);
        let alpha = C64::from_polar(1.0, 0.7);
        let dm = displacement_matrix(tt, alpha);
        // independent evaluation of e^{−|α|²/2} αⁿ/√n!
        let mut c = C64::new((-0.5f64).exp(), 0.0);
        for n in 0..64 {
            if n > 0 {
                c *= alpha / (n as f64).sqrt();
            }
            assert!((dm[(n, 0)] - c).norm() <= 1e-8, "n={n}");
        }
    }

    #[test]
    fn displacement_is_unitary() {
        let tt = t(64);
        for xi in [C64::new(1.0, 0.0), C64::new(0.3, -0.8), C64::new(-0.5, 0.5)] {
            let dm = displacement_matrix(tt, xi);
            let defect = (&dm * dm.adjoint() - identity(tt)).norm();
            assert!(defect <= 1e-8, "xi={xi} defect={defect}");
        }
    }

    #[test]
    fn random_density_invariants() {
        let tol = Tolerances::default();
        for d in [2, 8, 32] {
            for seed in 0..100 {
                let rho = random_density(t(d), seed);
                rho.validate(&tol).unwrap();
                assert!(hermiticity_defect(rho.entries()) <= 1e-12);
                assert!((rho.trace() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn random_density_is_deterministic() {
        assert_eq!(random_density(t(6), 42), random_density(t(6), 42));
        assert_ne!(random_density(t(6), 42), random_density(t(6), 43));
    }

    #[test]
    fn random_density_dimension_one() {
        let rho = random_density(t(1), 9);
        assert_abs_diff_eq!(rho.get(0, 0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.get(0, 0).im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let tol = Tolerances::default();
        let mut m = OperatorMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m.clone(), &tol), Err(Error::NotHermitian { .. })));
        m[(1, 0)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m.clone(), &tol).is_ok());
        m[(0, 0)] = C64::new(0.6, 0.0);
        assert!(matches!(DensityMatrix::new(m.clone(), &tol), Err(Error::TraceMismatch { .. })));
        let neg = OperatorMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(matches!(DensityMatrix::new(neg, &tol), Err(Error::NotPositive { .. })));
    }
}
