//! Fidelity bounds specific to three-state sets.

use super::geometry::{edge_matrices, geometry_from_edges, GeometryFlags, TriangleGeometry};
use super::{require_uniform, Validity};
use crate::error::{Error, Result};
use crate::gram::CloneTask;
use crate::scalar::Real;

const IDENTICAL_TOL: f64 = 1e-12;

/// Result of the trigonometric three-state bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBound<T: Real> {
    /// Minimum over all anchor/orientation variants, clamped to at most 1.
    pub value: T,
    pub validity: Validity,
    /// Geometry of the variant attaining `value`.
    pub geometry: TriangleGeometry<T>,
    /// Maximizing anchor angle `l` and interior angle `theta` for that variant.
    pub l: T,
    pub theta: T,
    /// The unrelaxed closed form with its printed constants, for comparison.
    pub closed_form: T,
    /// Unclamped maxima of the six variants: anchors 0, 1, 2, each in natural
    /// then swapped orientation. `None` for an empty `l` domain.
    pub variants: Vec<Option<T>>,
}

/// The relaxed objective `g(l, theta)` bounding `3 F` divided by three.
pub fn trig_objective<T: Real>(geom: &TriangleGeometry<T>, l: T, theta: T) -> T {
    let (p, q) = theta_coefficients(geom, theta.cos());
    quadratic_form(geom, p, q, l)
}

/// `P` and `Q` as functions of `u = cos(theta)`.
fn theta_coefficients<T: Real>(geom: &TriangleGeometry<T>, u: T) -> (T, T) {
    let TriangleGeometry { b, c, b_prime, c_prime, alpha, .. } = *geom;
    let p = c.sin() * c_prime.cos() * u + c.cos() * c_prime.sin();
    let sin_alpha = alpha.sin();
    let q = b.sin() * b_prime.cos() * alpha.cos() * u
        + b.sin() * b_prime.cos() * sin_alpha * sin_alpha
        + b.cos() * b_prime.sin();
    (p, q)
}

fn quadratic_form<T: Real>(geom: &TriangleGeometry<T>, p: T, q: T, l: T) -> T {
    let a1 = (geom.c - geom.c_prime).cos();
    let b1 = (geom.b - geom.b_prime).cos();
    let (sl, cl) = l.sin_cos();
    let x = a1 * cl + p * sl;
    let y = b1 * cl + q * sl;
    (cl * cl + x * x + y * y) / T::lit(3.0)
}

/// Exact maximum of `g` over `l in [0, l_max]`, `theta in [0, alpha]`.
///
/// `g` is a sum of squares of affine functions of `cos(theta)`, hence convex
/// in it, so the maximum sits at `theta = 0` or `theta = alpha`. For fixed
/// `theta` it is a quadratic form in `(cos l, sin l)`, i.e. `k + r cos(2l - phi)`,
/// whose maximum over an interval is at an endpoint or at `l = phi / 2`.
pub(crate) fn maximize_variant<T: Real>(geom: &TriangleGeometry<T>) -> Option<(T, T, T)> {
    let l_max = geom.l_max();
    if l_max < T::zero() {
        return None;
    }
    let two = T::lit(2.0);
    let a1 = (geom.c - geom.c_prime).cos();
    let b1 = (geom.b - geom.b_prime).cos();
    let mut best: Option<(T, T, T)> = None;
    for theta in [T::zero(), geom.alpha] {
        let (p, q) = theta_coefficients(geom, theta.cos());
        let k11 = T::one() + a1 * a1 + b1 * b1;
        let k22 = p * p + q * q;
        let k12 = a1 * p + b1 * q;
        let mut candidates = vec![T::zero(), l_max];
        let stationary = k12.atan2((k11 - k22) / two) / two;
        for l in [stationary, stationary + T::pi()] {
            if l > T::zero() && l < l_max {
                candidates.push(l);
            }
        }
        for l in candidates {
            let v = quadratic_form(geom, p, q, l);
            if best.is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v, l, theta));
            }
        }
    }
    best
}

/// The closed-form maximum with the constants exactly as printed in the
/// original derivation (`A2 = sin c sin c'`, `B2^2` in the denominator).
pub fn trig_closed_form<T: Real>(geom: &TriangleGeometry<T>) -> T {
    let TriangleGeometry { b, c, b_prime, c_prime, alpha, .. } = *geom;
    let a1 = (c - c_prime).cos();
    let a2 = c.sin() * c_prime.sin();
    let a3 = c.cos() * c_prime.sin();
    let b1 = (b - b_prime).cos();
    let b2 = b.sin() * b_prime.cos() * alpha.cos();
    let sin_alpha = alpha.sin();
    let b3 = b.sin() * b_prime.cos() * sin_alpha * sin_alpha + b.cos() * b_prime.sin();
    let two = T::lit(2.0);
    let num = two * (a1 * (a2 + a3) + b1 * (b2 + b3));
    let den = T::one() + a1 * a1 + b2 * b2 - (a2 + a3) * (a2 + a3) - (b2 + b3) * (b2 + b3);
    let l = num.atan2(den) / two;
    let (sl, cl) = l.sin_cos();
    let x = a1 * cl + (a2 + a3) * sl;
    let y = b1 * cl + (b2 + b3) * sl;
    (cl * cl + x * x + y * y) / T::lit(3.0)
}

/// Trigonometric upper bound on the global fidelity of a three-state task.
pub fn bound_three_state_trig<T: Real>(task: &CloneTask<T>) -> Result<TrigBound<T>> {
    let n = task.n_states();
    if n != 3 {
        return Err(Error::WrongArity { expected: 3, got: n });
    }
    require_uniform(task)?;
    let edges = edge_matrices(task)?;
    if edges.outer.iter().all(|&e| e <= T::tol(IDENTICAL_TOL)) {
        return Ok(identical_states());
    }
    let mut variants = Vec::with_capacity(6);
    let mut best: Option<(T, TriangleGeometry<T>, T, T)> = None;
    let mut vacuous_fallback = None;
    for anchor in 0..3 {
        let natural = geometry_from_edges(&edges, anchor)?;
        for geom in [natural, natural.swapped()] {
            match maximize_variant(&geom) {
                Some((v, l, theta)) => {
                    variants.push(Some(v));
                    if best.as_ref().is_none_or(|(bv, ..)| v < *bv) {
                        best = Some((v, geom, l, theta));
                    }
                }
                None => {
                    variants.push(None);
                    vacuous_fallback.get_or_insert(geom);
                }
            }
        }
    }
    let bound = match best {
        Some((v, geom, l, theta)) => {
            let validity = if geom.l_max() > T::zero() {
                Validity::Valid
            } else {
                Validity::Marginal
            };
            TrigBound {
                value: v.min(T::one()),
                validity,
                closed_form: trig_closed_form(&geom),
                geometry: geom,
                l,
                theta,
                variants,
            }
        }
        None => {
            let geom = vacuous_fallback.expect("six variants were visited");
            TrigBound {
                value: T::one(),
                validity: Validity::Vacuous,
                closed_form: trig_closed_form(&geom),
                geometry: geom,
                l: T::zero(),
                theta: T::zero(),
                variants,
            }
        }
    };
    Ok(bound)
}

/// All three states coincide: exact cloning is possible.
fn identical_states<T: Real>() -> TrigBound<T> {
    let z = T::zero();
    let geometry = TriangleGeometry {
        a: z,
        b: z,
        c: z,
        a_prime: z,
        b_prime: z,
        c_prime: z,
        alpha: z,
        anchor: 0,
        others: (1, 2),
        flags: GeometryFlags { l_domain_nonempty: true, triangles_valid: true },
    };
    TrigBound {
        value: T::one(),
        validity: Validity::Valid,
        geometry,
        l: z,
        theta: z,
        closed_form: T::one(),
        variants: vec![Some(T::one()); 6],
    }
}

/// Edge-symmetric three-state bound `(3 + cos(a-a') + cos(b-b') + cos(c-c')) / 6`.
pub fn bound_three_state_symmetric<T: Real>(task: &CloneTask<T>) -> Result<T> {
    let n = task.n_states();
    if n != 3 {
        return Err(Error::WrongArity { expected: 3, got: n });
    }
    require_uniform(task)?;
    let e = edge_matrices(task)?;
    let term = |i: usize, j: usize| (e.outer[(i, j)] - e.inner[(i, j)]).cos();
    let sum = term(1, 2) + term(0, 2) + term(0, 1);
    Ok((T::lit(3.0) + sum) / T::lit(6.0))
}
