//! State-sets, overlap (Gram) matrices and their factorizations.
//!
//! The state family is the real qubit arc `sin t |1> + cos t |0>`, `t` in
//! `[0, pi/2]`, whose overlaps are `cos(t_i - t_j)`. Abstract Gram matrices
//! that do not come from angles are accepted as well.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{safe_acos, Real};

/// Relative eigenvalue cutoff used by [`GramMatrix::factor`] when no tolerance is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const FACTOR_PSD_TOL: f64 = 1e-8;
const PRIOR_SUM_TOL: f64 = 1e-12;

/// Qubit states given by their angles on the real arc, with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet<T> {
    angles: Vec<T>,
    priors: Vec<T>,
}

impl<T: Real> StateSet<T> {
    pub fn new(angles: Vec<T>, priors: Vec<T>) -> Result<Self> {
        check_angles(&angles)?;
        check_priors(&priors, angles.len())?;
        Ok(Self { angles, priors })
    }

    /// States with equal priors `1/n`.
    pub fn uniform(angles: Vec<T>) -> Result<Self> {
        let priors = uniform_priors(angles.len());
        Self::new(angles, priors)
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn gram(&self) -> GramMatrix<T> {
        GramMatrix::from_validated_angles(&self.angles)
    }
}

/// `n` equal priors summing to one.
pub fn uniform_priors<T: Real>(n: usize) -> Vec<T> {
    if n == 0 {
        return Vec::new();
    }
    vec![T::one() / T::lit(n as f64); n]
}

fn check_angles<T: Real>(angles: &[T]) -> Result<()> {
    if angles.len() < 2 {
        return Err(Error::TooFewStates(angles.len()));
    }
    for (index, &t) in angles.iter().enumerate() {
        if !(t >= T::zero() && t <= T::frac_pi_2()) {
            return Err(Error::InvalidAngles { index, value: t.as_f64() });
        }
    }
    Ok(())
}

pub(crate) fn check_priors<T: Real>(priors: &[T], n: usize) -> Result<()> {
    if priors.len() != n {
        return Err(Error::PriorCount { expected: n, got: priors.len() });
    }
    for (index, &p) in priors.iter().enumerate() {
        if !(p > T::zero()) {
            return Err(Error::NonPositivePrior { index, value: p.as_f64() });
        }
    }
    let sum: T = priors.iter().copied().sum();
    if (sum - T::one()).abs() > T::tol(PRIOR_SUM_TOL) {
        return Err(Error::PriorSum { sum: sum.as_f64() });
    }
    Ok(())
}

/// Real symmetric, unit-diagonal, positive semidefinite overlap matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T: Real> {
    entries: DMatrix<T>,
}

impl<T: Real> GramMatrix<T> {
    /// Validates `entries` as a Gram matrix.
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::TooFewStates(rows));
        }
        let tol = T::tol(SYMMETRY_TOL);
        for i in 0..rows {
            let d = entries[(i, i)];
            if !((d - T::one()).abs() <= tol) {
                return Err(Error::NotUnitDiagonal { index: i, value: d.as_f64() });
            }
            for j in 0..cols {
                let v = entries[(i, j)];
                if !(v.abs() <= T::one() + tol) {
                    return Err(Error::EntryOutOfRange { i, j, value: v.as_f64() });
                }
                let dev = (v - entries[(j, i)]).abs();
                if dev > tol {
                    return Err(Error::NotSymmetric { i, j, deviation: dev.as_f64() });
                }
            }
        }
        let g = Self { entries };
        let min_eigenvalue = g.min_eigenvalue();
        if min_eigenvalue < -T::tol(PSD_TOL) {
            return Err(Error::NotPsd { min_eigenvalue: min_eigenvalue.as_f64() });
        }
        Ok(g)
    }

    /// Builds a Gram matrix from nested rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Overlaps `cos(t_i - t_j)` of real qubit states.
    pub fn from_angles(angles: &[T]) -> Result<Self> {
        check_angles(angles)?;
        Ok(Self::from_validated_angles(angles))
    }

    fn from_validated_angles(angles: &[T]) -> Self {
        let n = angles.len();
        let entries = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::one()
            } else {
                (angles[i] - angles[j]).cos()
            }
        });
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }

    /// Gram of `n` identical states.
    pub fn ones(n: usize) -> Self {
        Self { entries: DMatrix::from_element(n, n, T::one()) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }

    /// Entrywise `k`-th power: the Gram of the `k`-fold tensor copies.
    ///
    /// Closed under PSD by the Schur product theorem, so the result is not
    /// re-validated.
    ///
    /// # Panics
    /// If `k == 0`.
    pub fn elementwise_power(&self, k: u32) -> Self {
        assert!(k >= 1, "copy count must be positive");
        let entries = self.entries.map(|x| x.powi(k as i32));
        Self { entries }
    }

    /// Factor `F` with `F * F^T = self`, keeping eigen-directions whose
    /// eigenvalue exceeds `rel_tol` times the largest eigenvalue.
    pub fn factor(&self, rel_tol: T) -> Result<FactorMatrix<T>> {
        let eig = SymmetricEigen::new(self.entries.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let largest = eig.eigenvalues[order[0]];
        let smallest = eig.eigenvalues[order[n - 1]];
        if smallest < -T::tol(FACTOR_PSD_TOL) {
            return Err(Error::NotPsd { min_eigenvalue: smallest.as_f64() });
        }
        let cutoff = rel_tol * largest.max(T::zero());
        let kept: Vec<usize> = order
            .into_iter()
            .filter(|&k| eig.eigenvalues[k] > cutoff)
            .collect();
        let mut columns = DMatrix::zeros(n, kept.len());
        for (col, &k) in kept.iter().enumerate() {
            let scale = eig.eigenvalues[k].sqrt();
            let v = eig.eigenvectors.column(k);
            // Sign convention: largest-magnitude component positive.
            let pivot = v.iter().copied().fold(T::zero(), |acc, x| {
                if x.abs() > acc.abs() {
                    x
                } else {
                    acc
                }
            });
            let sign = if pivot < T::zero() { -T::one() } else { T::one() };
            for row in 0..n {
                columns[(row, col)] = v[row] * scale * sign;
            }
        }
        Ok(FactorMatrix { columns, tolerance: rel_tol })
    }

    /// Factor with the default relative tolerance.
    pub fn factor_default(&self) -> Result<FactorMatrix<T>> {
        self.factor(T::tol(DEFAULT_RANK_TOL))
    }

    /// Pairwise Fubini-Study angles `acos(g_ij)`.
    pub fn pairwise_angles(&self) -> Result<DMatrix<T>> {
        self.check_nonnegative()?;
        let n = self.dim();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                safe_acos(self.entries[(i, j)])
            }
        }))
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let v = self.entries[(i, j)];
                if i != j && v < T::zero() {
                    return Err(Error::NegativeOverlap { i, j, value: v.as_f64() });
                }
            }
        }
        Ok(())
    }
}

/// Thin factor of a Gram matrix: `columns * columns^T` reproduces the source.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix<T: Real> {
    columns: DMatrix<T>,
    tolerance: T,
}

impl<T: Real> FactorMatrix<T> {
    pub fn columns(&self) -> &DMatrix<T> {
        &self.columns
    }

    pub fn into_columns(self) -> DMatrix<T> {
        self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        &self.columns * self.columns.transpose()
    }
}

/// A cloning task `M -> N` over a fixed state-set.
#[derive(Debug, Clone, PartialEq)]
pub struct CloneTask<T: Real> {
    base: GramMatrix<T>,
    priors: Vec<T>,
    m_copies: u32,
    n_copies: u32,
}

impl<T: Real> CloneTask<T> {
    pub fn new(base: GramMatrix<T>, priors: Vec<T>, m_copies: u32, n_copies: u32) -> Result<Self> {
        if m_copies < 1 || m_copies >= n_copies {
            return Err(Error::InvalidCopies { m: m_copies, n: n_copies });
        }
        check_priors(&priors, base.dim())?;
        Ok(Self { base, priors, m_copies, n_copies })
    }

    pub fn uniform(base: GramMatrix<T>, m_copies: u32, n_copies: u32) -> Result<Self> {
        let priors = uniform_priors(base.dim());
        Self::new(base, priors, m_copies, n_copies)
    }

    pub fn from_states(states: &StateSet<T>, m_copies: u32, n_copies: u32) -> Result<Self> {
        Self::new(states.gram(), states.priors().to_vec(), m_copies, n_copies)
    }

    /// Uniform-prior task on the real qubit arc.
    pub fn from_angles(angles: &[T], m_copies: u32, n_copies: u32) -> Result<Self> {
        Self::uniform(GramMatrix::from_angles(angles)?, m_copies, n_copies)
    }

    pub fn base(&self) -> &GramMatrix<T> {
        &self.base
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn n_states(&self) -> usize {
        self.base.dim()
    }

    pub fn m_copies(&self) -> u32 {
        self.m_copies
    }

    pub fn n_copies(&self) -> u32 {
        self.n_copies
    }

    /// Gram of the `M` input copies.
    pub fn input_gram(&self) -> GramMatrix<T> {
        self.base.elementwise_power(self.m_copies)
    }

    /// Gram of the `N` ideal output copies.
    pub fn output_gram(&self) -> GramMatrix<T> {
        self.base.elementwise_power(self.n_copies)
    }

    pub fn has_uniform_priors(&self) -> bool {
        let first = self.priors[0];
        let tol = T::tol(PRIOR_SUM_TOL);
        self.priors.iter().all(|&p| (p - first).abs() <= tol)
    }
}
