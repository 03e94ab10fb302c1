//! Spherical trigonometry on the unit sphere `S^2`.
//!
//! Distances are great-circle arc lengths in radians. All `acos` arguments are
//! clamped so that rounding (e.g. a dot product of `1 + ulp`) never yields NaN.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::scalar::{safe_acos, Real};

const UNIT_TOL: f64 = 1e-12;
const DEGENERATE_TOL: f64 = 1e-12;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint<T: Real>(Vector3<T>);

impl<T: Real> SpherePoint<T> {
    /// Accepts `v` only if it already has unit norm.
    pub fn new(v: Vector3<T>) -> Result<Self> {
        let norm = v.norm();
        if (norm - T::one()).abs() > T::tol(UNIT_TOL) {
            return Err(Error::NotUnit { norm: norm.as_f64() });
        }
        Ok(Self(v))
    }

    /// Projects a non-zero vector onto the sphere.
    pub fn normalized(v: Vector3<T>) -> Result<Self> {
        let norm = v.norm();
        if norm <= T::zero() {
            return Err(Error::NotUnit { norm: 0.0 });
        }
        Ok(Self(v / norm))
    }

    /// Point at colatitude `polar` and longitude `azimuth`.
    pub fn from_polar(polar: T, azimuth: T) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self(Vector3::new(sp * ca, sp * sa, cp))
    }

    pub fn vector(&self) -> &Vector3<T> {
        &self.0
    }
}

/// Three side lengths forming a spherical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalTriangle<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> SphericalTriangle<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        let tol = T::tol(UNIT_TOL);
        let pi = T::pi();
        let in_range = |x: T| x >= -tol && x <= pi + tol;
        let ok = in_range(a)
            && in_range(b)
            && in_range(c)
            && a <= b + c + tol
            && b <= a + c + tol
            && c <= a + b + tol
            && a + b + c <= T::two_pi() + tol;
        if !ok {
            return Err(Error::InvalidTriangle { a: a.as_f64(), b: b.as_f64(), c: c.as_f64() });
        }
        Ok(Self { a, b, c })
    }

    /// Vertex angle between sides `b` and `c` (opposite `a`).
    pub fn alpha(&self) -> Result<T> {
        angle_from_sides(self.a, self.b, self.c)
    }
}

/// Spherical law of cosines: the side opposite `alpha` given the two sides
/// enclosing it, `cos a = cos b cos c + sin b sin c cos alpha`.
pub fn side_from_sides_and_angle<T: Real>(b: T, c: T, alpha: T) -> T {
    safe_acos(b.cos() * c.cos() + b.sin() * c.sin() * alpha.cos())
}

/// The vertex angle opposite `a`, inverting the law of cosines.
pub fn angle_from_sides<T: Real>(a: T, b: T, c: T) -> Result<T> {
    let denom = b.sin() * c.sin();
    if denom <= T::tol(DEGENERATE_TOL) {
        return Err(Error::DegenerateTriangle { product: denom.as_f64() });
    }
    Ok(safe_acos((a.cos() - b.cos() * c.cos()) / denom))
}

pub fn geodesic_distance<T: Real>(u: &SpherePoint<T>, v: &SpherePoint<T>) -> T {
    u.0.cross(&v.0).norm().atan2(u.0.dot(&v.0))
}

/// Outcome of the four-point chain inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck<T> {
    pub holds: bool,
    /// `d(A,A') + d(A',B') + d(B',B) - d(A,B)`.
    pub slack: T,
}

/// Checks `d(A,B) <= d(A,A') + d(A',B') + d(B',B)` for the path `A, A', B', B`.
pub fn chain_inequality_holds<T: Real>(points: &[SpherePoint<T>; 4]) -> ChainCheck<T> {
    let [a, a1, b1, b] = points;
    let path = geodesic_distance(a, a1) + geodesic_distance(a1, b1) + geodesic_distance(b1, b);
    let slack = path - geodesic_distance(a, b);
    ChainCheck { holds: slack >= T::zero(), slack }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p(x: f64, y: f64, z: f64) -> SpherePoint<f64> {
        SpherePoint::normalized(Vector3::new(x, y, z)).unwrap()
    }

    #[test]
    fn law_of_cosines_special_cases() {
        for &alpha in &[0.0, 0.3, 1.2, FRAC_PI_2, 2.5, PI] {
            let a = side_from_sides_and_angle(FRAC_PI_2, FRAC_PI_2, alpha);
            assert!((a - alpha).abs() < 1e-7, "alpha {alpha} -> {a}");
        }
        for &alpha in &[0.0, 1.0, 3.0] {
            assert!((side_from_sides_and_angle(0.8f64, 0.0, alpha) - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn law_of_cosines_matches_constructed_points() {
        // Vertex at the north pole, the two other vertices at colatitudes b, c
        // separated in longitude by alpha.
        let (b, c, alpha): (f64, f64, f64) = (0.69312, 0.69312, 1.1);
        let apex = SpherePoint::from_polar(0.0, 0.0);
        let pb = SpherePoint::from_polar(b, 0.0);
        let pc = SpherePoint::from_polar(c, alpha);
        assert!((geodesic_distance(&apex, &pb) - b).abs() < 1e-12);
        let measured = geodesic_distance(&pb, &pc);
        assert!((side_from_sides_and_angle(b, c, alpha) - measured).abs() < 1e-12);
    }

    #[test]
    fn angle_from_sides_cases() {
        let h = FRAC_PI_2;
        assert!((angle_from_sides(h, h, h).unwrap() - h).abs() < 1e-12);
        assert!((angle_from_sides(0.7, 0.4, 0.3).unwrap() - PI).abs() < 1e-6);
        let alpha = angle_from_sides(0.5, 0.4, 0.3).unwrap();
        assert!((side_from_sides_and_angle(0.4f64, 0.3, alpha) - 0.5).abs() < 1e-12);
        assert!(matches!(
            angle_from_sides(0.2, 0.2, 0.0),
            Err(Error::DegenerateTriangle { .. })
        ));
    }

    #[test]
    fn distance_cases() {
        let x = p(1.0, 0.0, 0.0);
        assert_eq!(geodesic_distance(&x, &x), 0.0);
        assert!((geodesic_distance(&x, &p(-1.0, 0.0, 0.0)) - PI).abs() < 1e-15);
        assert!((geodesic_distance(&x, &p(0.0, 1.0, 0.0)) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn chain_cases() {
        let x = p(0.3, -0.2, 0.9);
        let check = chain_inequality_holds(&[x, x, x, x]);
        assert!(check.holds);
        assert_eq!(check.slack, 0.0);
        let y = p(-0.4, 0.5, 0.1);
        let check = chain_inequality_holds(&[x, y, y, x]);
        assert!(check.holds);
        assert!((check.slack - 2.0 * geodesic_distance(&x, &y)).abs() < 1e-14);
    }

    #[test]
    fn point_validation() {
        assert!(SpherePoint::new(Vector3::new(1.0, 1.0, 0.0)).is_err());
        assert!(SpherePoint::normalized(Vector3::<f64>::zeros()).is_err());
        assert!(SpherePoint::new(Vector3::new(0.0, 0.0, 1.0)).is_ok());
    }

    #[test]
    fn triangle_validation() {
        assert!(SphericalTriangle::new(0.5, 0.4, 0.3).is_ok());
        assert!(SphericalTriangle::new(1.5, 0.4, 0.3).is_err());
        assert!(SphericalTriangle::new(3.0, 3.0, 3.0).is_err());
        let t = SphericalTriangle::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((t.alpha().unwrap() - FRAC_PI_2).abs() < 1e-12);
    }
}
