use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gram::CloneTask;
use crate::scalar::Real;
use crate::spherical::{angle_from_sides, SphericalTriangle};

/// Pairwise arc lengths between the ideal `N`-copy states (`outer`) and
/// between the `M`-copy inputs (`inner`).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMatrices<T: Real> {
    pub outer: DMatrix<T>,
    pub inner: DMatrix<T>,
}

pub fn edge_matrices<T: Real>(task: &CloneTask<T>) -> Result<EdgeMatrices<T>> {
    task.base().check_nonnegative()?;
    Ok(EdgeMatrices {
        outer: task.output_gram().pairwise_angles()?,
        inner: task.input_gram().pairwise_angles()?,
    })
}

/// Entries `a_jk - a'_jk`: how much farther apart the ideal `N`-copy outputs
/// are than the `M`-copy inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMatrix<T: Real>(pub(crate) DMatrix<T>);

impl<T: Real> DifferenceMatrix<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[(i, j)]
    }
}

pub fn difference_matrix<T: Real>(task: &CloneTask<T>) -> Result<DifferenceMatrix<T>> {
    let edges = edge_matrices(task)?;
    let n = task.n_states();
    Ok(DifferenceMatrix(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            T::zero()
        } else {
            edges.outer[(i, j)] - edges.inner[(i, j)]
        }
    })))
}

/// Geometric validity of a three-state configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometryFlags {
    /// `pi/2 - max(b, c) >= 0`.
    pub l_domain_nonempty: bool,
    /// Both the outer and inner triangles satisfy the triangle inequalities.
    pub triangles_valid: bool,
}

/// The outer (`N`-copy) and inner (`M`-copy) triangles seen from one anchor state.
///
/// With anchor `A` and the other states `B`, `C`: `c` joins `A`-`B`, `b` joins
/// `A`-`C`, `a` joins `B`-`C`, and `alpha` is the angle at `A` on the outer
/// triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub a_prime: T,
    pub b_prime: T,
    pub c_prime: T,
    pub alpha: T,
    pub anchor: usize,
    /// State indices playing `B` and `C`.
    pub others: (usize, usize),
    pub flags: GeometryFlags,
}

impl<T: Real> TriangleGeometry<T> {
    /// Upper end of the admissible range `[0, pi/2 - max(b, c)]` for the anchor angle.
    pub fn l_max(&self) -> T {
        T::frac_pi_2() - self.b.max(self.c)
    }

    /// Same triangle with `B` and `C` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            b: self.c,
            c: self.b,
            b_prime: self.c_prime,
            c_prime: self.b_prime,
            others: (self.others.1, self.others.0),
            ..*self
        }
    }
}

/// Triangle geometry for a three-state task with the given anchor.
pub fn three_state_geometry<T: Real>(
    task: &CloneTask<T>,
    anchor: usize,
) -> Result<TriangleGeometry<T>> {
    let n = task.n_states();
    if n != 3 {
        return Err(Error::WrongArity { expected: 3, got: n });
    }
    if anchor >= 3 {
        return Err(Error::Shape(format!("anchor {anchor} out of range for 3 states")));
    }
    let edges = edge_matrices(task)?;
    geometry_from_edges(&edges, anchor)
}

pub(crate) fn geometry_from_edges<T: Real>(
    edges: &EdgeMatrices<T>,
    anchor: usize,
) -> Result<TriangleGeometry<T>> {
    let p = (anchor + 1) % 3;
    let q = (anchor + 2) % 3;
    let (o, i) = (&edges.outer, &edges.inner);
    let (a, b, c) = (o[(p, q)], o[(anchor, q)], o[(anchor, p)]);
    let (a_prime, b_prime, c_prime) = (i[(p, q)], i[(anchor, q)], i[(anchor, p)]);
    let alpha = angle_from_sides(a, b, c)?;
    let flags = GeometryFlags {
        l_domain_nonempty: T::frac_pi_2() - b.max(c) >= T::zero(),
        triangles_valid: SphericalTriangle::new(a, b, c).is_ok()
            && SphericalTriangle::new(a_prime, b_prime, c_prime).is_ok(),
    };
    Ok(TriangleGeometry {
        a,
        b,
        c,
        a_prime,
        b_prime,
        c_prime,
        alpha,
        anchor,
        others: (p, q),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::GramMatrix;
    use std::f64::consts::FRAC_PI_2;

    // acos(cos(dt)^2) and dt for the pairs of (0, 0.5, 1.0), 30-digit reference.
    const OUTER_NEAR: f64 = 0.691718240721045852506448166035;
    const OUTER_FAR: f64 = 1.27455578230629434467527106854;

    #[test]
    fn identity_geometry() {
        let task = CloneTask::uniform(GramMatrix::<f64>::identity(3), 1, 2).unwrap();
        let g = three_state_geometry(&task, 0).unwrap();
        for x in [g.a, g.b, g.c, g.a_prime, g.b_prime, g.c_prime, g.alpha] {
            assert!((x - FRAC_PI_2).abs() < 1e-12);
        }
        assert!(g.flags.l_domain_nonempty);
        assert!(g.l_max().abs() < 1e-15);
    }

    #[test]
    fn identical_states_are_degenerate() {
        let task = CloneTask::uniform(GramMatrix::<f64>::ones(3), 1, 2).unwrap();
        assert!(matches!(
            three_state_geometry(&task, 0),
            Err(Error::DegenerateTriangle { .. })
        ));
        let d = difference_matrix(&task).unwrap();
        assert!(d.matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn worked_geometry() {
        let task = CloneTask::<f64>::from_angles(&[0.0, 0.5, 1.0], 1, 2).unwrap();
        let g = three_state_geometry(&task, 0).unwrap();
        assert_eq!(g.others, (1, 2));
        assert!((g.a_prime - 0.5).abs() < 1e-12);
        assert!((g.c_prime - 0.5).abs() < 1e-12);
        assert!((g.b_prime - 1.0).abs() < 1e-12);
        assert!((g.a - OUTER_NEAR).abs() < 1e-12);
        assert!((g.c - OUTER_NEAR).abs() < 1e-12);
        assert!((g.b - OUTER_FAR).abs() < 1e-12);
        // Rounded reference values quoted for this configuration.
        assert!((g.a - 0.69171).abs() < 1e-4);
        assert!((g.b - 1.27446).abs() < 1e-4);

        let s = g.swapped();
        assert_eq!((s.b, s.c, s.others), (g.c, g.b, (2, 1)));
        assert_eq!(s.alpha, g.alpha);
    }

    #[test]
    fn worked_differences() {
        let task = CloneTask::<f64>::from_angles(&[0.0, 0.5, 1.0], 1, 2).unwrap();
        let d = difference_matrix(&task).unwrap();
        assert!((d.get(0, 1) - (OUTER_NEAR - 0.5)).abs() < 1e-12);
        assert!((d.get(1, 2) - (OUTER_NEAR - 0.5)).abs() < 1e-12);
        assert!((d.get(0, 2) - (OUTER_FAR - 1.0)).abs() < 1e-12);
        assert_eq!(d.get(2, 0), d.get(0, 2));
        let id = CloneTask::uniform(GramMatrix::<f64>::identity(4), 1, 3).unwrap();
        assert!(difference_matrix(&id).unwrap().matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn wrong_arity() {
        let task = CloneTask::<f64>::from_angles(&[0.0, 0.5], 1, 2).unwrap();
        assert!(matches!(
            three_state_geometry(&task, 0),
            Err(Error::WrongArity { expected: 3, got: 2 })
        ));
    }
}
