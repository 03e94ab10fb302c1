use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Real;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// A matrix with orthonormal rows, `W W^T = I`.
///
/// With `Xi^N = C C^T` and `Xi^M = D D^T`, every coefficient matrix `A`
/// satisfying `A Xi^N A^T = Xi^M` has `A C = D W` for such a `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint<T: Real>(DMatrix<T>);

impl<T: Real> StiefelPoint<T> {
    pub fn new(w: DMatrix<T>) -> Result<Self> {
        if w.nrows() > w.ncols() {
            return Err(Error::Shape(format!(
                "{}x{} matrix cannot have orthonormal rows",
                w.nrows(),
                w.ncols()
            )));
        }
        let deviation = orthonormality_error(&w);
        if deviation > T::tol(ORTHONORMAL_TOL) {
            return Err(Error::NotOrthonormal { deviation: deviation.as_f64() });
        }
        Ok(Self(w))
    }

    /// Nearest point (in Frobenius norm) to an arbitrary full-rank matrix.
    pub fn from_polar(m: &DMatrix<T>) -> Self {
        Self(polar_factor(m))
    }

    /// Orthonormalized Gaussian matrix: uniformly distributed on the manifold.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)));
        Self::from_polar(&g)
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// Projects an ambient direction onto the tangent space at this point:
    /// `Z - sym(Z W^T) W`.
    pub fn project_tangent(&self, z: &DMatrix<T>) -> DMatrix<T> {
        let s = z * self.0.transpose();
        let sym = (&s + s.transpose()) * T::lit(0.5);
        z - sym * &self.0
    }

    /// Polar retraction of `W + step * direction`.
    pub fn retract(&self, direction: &DMatrix<T>, step: T) -> Self {
        Self::from_polar(&(&self.0 + direction * step))
    }

    pub fn orthonormality_error(&self) -> T {
        orthonormality_error(&self.0)
    }
}

fn orthonormality_error<T: Real>(w: &DMatrix<T>) -> T {
    let r = w.nrows();
    let g = w * w.transpose() - DMatrix::identity(r, r);
    g.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// `(M M^T)^{-1/2} M` for a wide matrix `m` of full row rank. Computed from
/// the symmetric eigendecomposition of `M M^T`; the result is only
/// approximately orthonormal when `m` is close to rank-deficient.
pub fn polar_factor<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let eig = SymmetricEigen::new(m * m.transpose());
    let largest = eig.eigenvalues.iter().fold(T::zero(), |a, &x| a.max(x));
    let floor = largest * T::default_epsilon();
    let scale = eig.eigenvalues.map(|x| T::one() / x.max(floor).sqrt());
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&scale) * v.transpose() * m
}

/// `m_i = (D W C^T)_ii`, the overlap of each output with its ideal clone.
pub fn clone_overlaps<T: Real>(w: &DMatrix<T>, d: &DMatrix<T>, c: &DMatrix<T>) -> DVector<T> {
    let dw = d * w;
    DVector::from_fn(d.nrows(), |i, _| dw.row(i).dot(&c.row(i)))
}

/// Global fidelity `sum_i eta_i m_i^2` and its Euclidean gradient in `W`,
/// `2 D^T diag(eta * m) C`.
pub fn objective_and_gradient<T: Real>(
    w: &StiefelPoint<T>,
    d: &DMatrix<T>,
    c: &DMatrix<T>,
    priors: &[T],
) -> (T, DMatrix<T>) {
    let m = clone_overlaps(w.matrix(), d, c);
    let value = objective_from_overlaps(&m, priors);
    let weights = DVector::from_fn(m.len(), |i, _| priors[i] * m[i] * T::lit(2.0));
    let grad = d.transpose() * DMatrix::from_diagonal(&weights) * c;
    (value, grad)
}

pub fn objective<T: Real>(w: &DMatrix<T>, d: &DMatrix<T>, c: &DMatrix<T>, priors: &[T]) -> T {
    objective_from_overlaps(&clone_overlaps(w, d, c), priors)
}

fn objective_from_overlaps<T: Real>(m: &DVector<T>, priors: &[T]) -> T {
    m.iter().zip(priors).map(|(&x, &p)| p * x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_points_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (r, c) in [(1, 1), (2, 2), (2, 5), (3, 4)] {
            let w = StiefelPoint::<f64>::random(r, c, &mut rng);
            assert!(w.orthonormality_error() < 1e-12);
            assert!(StiefelPoint::new(w.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(StiefelPoint::new(m), Err(Error::NotOrthonormal { .. })));
        assert!(StiefelPoint::new(DMatrix::<f64>::zeros(3, 2)).is_err());
    }

    #[test]
    fn tangent_projection_is_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = StiefelPoint::<f64>::random(2, 4, &mut rng);
        let z = DMatrix::from_fn(2, 4, |i, j| (i as f64 + 1.0) * (j as f64 - 1.5));
        let t = w.project_tangent(&z);
        // W T^T + T W^T = 0 on the tangent space.
        let s = w.matrix() * t.transpose();
        let sym = &s + s.transpose();
        assert!(sym.iter().all(|x| x.abs() < 1e-12));
        // Projection is idempotent.
        let t2 = w.project_tangent(&t);
        assert!((t2 - &t).norm() < 1e-12);
    }

    #[test]
    fn zero_overlap_point() {
        // D W C^T with no diagonal: value and gradient vanish.
        let d = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let c = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let w = StiefelPoint::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let (v, g) = objective_and_gradient(&w, &d, &c, &[0.5, 0.5]);
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn scalar_case() {
        let (d, c, eta): (f64, f64, f64) = (0.8, 0.6, 0.7);
        let w = StiefelPoint::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let (v, g) = objective_and_gradient(
            &w,
            &DMatrix::from_element(1, 1, d),
            &DMatrix::from_element(1, 1, c),
            &[eta],
        );
        assert!((v - eta * (d * c) * (d * c)).abs() < 1e-15);
        assert!((g[(0, 0)] - 2.0 * eta * (d * c) * d * c).abs() < 1e-15);
    }
}
