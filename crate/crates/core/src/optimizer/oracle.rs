//! Exhaustive grid search over small Stiefel manifolds, used to check the
//! gradient ascent independently.

use nalgebra::DMatrix;

use super::Landscape;
use crate::error::{Error, Result};
use crate::gram::CloneTask;
use crate::scalar::Real;

const MAX_PARAMS: usize = 4;
const SEEDS: usize = 6;
const POLISH_STEP_MIN: f64 = 1e-13;

/// Dimension `r_M r_N - r_M (r_M + 1) / 2` of the manifold searched for `task`.
pub fn oracle_parameter_count<T: Real>(task: &CloneTask<T>) -> Result<usize> {
    let land = Landscape::new(task, false)?;
    let (rows, cols) = land.point_shape();
    Ok(rows * cols - rows * (rows + 1) / 2)
}

/// One coordinate of the angle grid.
#[derive(Clone, Copy)]
struct Axis {
    span: f64,
    /// Include the upper endpoint (non-periodic axes).
    closed: bool,
}

impl Axis {
    fn periodic() -> Self {
        Self { span: std::f64::consts::TAU, closed: false }
    }

    fn half() -> Self {
        Self { span: std::f64::consts::PI, closed: true }
    }

    fn points(&self, resolution: usize) -> usize {
        if self.closed {
            resolution + 1
        } else {
            resolution
        }
    }

    fn at(&self, k: usize, resolution: usize) -> f64 {
        self.span * k as f64 / resolution as f64
    }
}

/// How angles map to a row-orthonormal `W`.
#[derive(Clone, Copy)]
enum Chart {
    /// `W` is a single unit row in `R^dim`, hyperspherical angles.
    Sphere { dim: usize },
    /// First `rows` rows of a rotation of `R^2` or `R^3`, optionally reflected.
    Orthogonal { dim: usize, rows: usize },
}

impl Chart {
    fn axes(&self) -> Vec<Axis> {
        match *self {
            Chart::Sphere { dim } if dim <= 1 => Vec::new(),
            Chart::Sphere { dim } => {
                let mut axes = vec![Axis::half(); dim - 2];
                axes.push(Axis::periodic());
                axes
            }
            Chart::Orthogonal { dim: 2, .. } => vec![Axis::periodic()],
            Chart::Orthogonal { .. } => vec![Axis::periodic(), Axis::half(), Axis::periodic()],
        }
    }

    /// Discrete branches not reached by the angles.
    fn branches(&self) -> usize {
        match *self {
            Chart::Sphere { dim } if dim <= 1 => 2,
            Chart::Sphere { .. } => 1,
            Chart::Orthogonal { .. } => 2,
        }
    }

    fn build(&self, angles: &[f64], branch: usize) -> DMatrix<f64> {
        match *self {
            Chart::Sphere { dim } => {
                if dim <= 1 {
                    let s = if branch == 0 { 1.0 } else { -1.0 };
                    return DMatrix::from_element(1, 1, s);
                }
                let mut v = vec![0.0; dim];
                let mut carry = 1.0;
                for (k, &a) in angles.iter().enumerate() {
                    v[k] = carry * a.cos();
                    carry *= a.sin();
                }
                v[dim - 1] = carry;
                DMatrix::from_row_slice(1, dim, &v)
            }
            Chart::Orthogonal { dim, rows } => {
                let r = if dim == 2 { rotation2(angles[0]) } else { rotation3_zyz(angles) };
                let flip = if branch == 1 { -1.0 } else { 1.0 };
                DMatrix::from_fn(rows, dim, |i, j| {
                    let s = if j == dim - 1 { flip } else { 1.0 };
                    r[i][j] * s
                })
            }
        }
    }
}

fn rotation2(phi: f64) -> [[f64; 3]; 3] {
    let (s, c) = phi.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rotation3_zyz(a: &[f64]) -> [[f64; 3]; 3] {
    let (s1, c1) = a[0].sin_cos();
    let (s2, c2) = a[1].sin_cos();
    let (s3, c3) = a[2].sin_cos();
    let rz1 = [[c1, -s1, 0.0], [s1, c1, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[c2, 0.0, s2], [0.0, 1.0, 0.0], [-s2, 0.0, c2]];
    let rz2 = [[c3, -s3, 0.0], [s3, c3, 0.0], [0.0, 0.0, 1.0]];
    mul3(&mul3(&rz1, &ry), &rz2)
}

fn mul3(x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

/// Best fidelity over a grid of `resolution` points per angle, refined by a
/// compass search around the best grid points.
///
/// Supports tasks whose search manifold has at most 4 parameters (every task
/// with `n <= 3`).
pub fn brute_force_oracle<T: Real>(task: &CloneTask<T>, resolution: usize) -> Result<T> {
    let land = Landscape::new(task, false)?;
    let (rows, dim) = land.point_shape();
    let params = rows * dim - rows * (rows + 1) / 2;
    if params > MAX_PARAMS {
        return Err(Error::TooLarge(params));
    }
    let chart = if rows == 1 {
        Chart::Sphere { dim }
    } else if dim <= 3 {
        Chart::Orthogonal { dim, rows }
    } else {
        return Err(Error::TooLarge(params));
    };
    let resolution = resolution.max(4);
    let fid = Fidelity::new(&land);

    let axes = chart.axes();
    let counts: Vec<usize> = axes.iter().map(|a| a.points(resolution)).collect();
    let total: usize = counts.iter().product();
    let mut seeds: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(SEEDS + 1);
    let mut angles = vec![0.0; axes.len()];
    for branch in 0..chart.branches() {
        for flat in 0..total {
            let mut rem = flat;
            for (k, axis) in axes.iter().enumerate() {
                angles[k] = axis.at(rem % counts[k], resolution);
                rem /= counts[k];
            }
            let w = chart.build(&angles, branch);
            let v = fid.eval(&w);
            if seeds.len() < SEEDS || v > seeds[seeds.len() - 1].0 {
                let pos = seeds.partition_point(|s| s.0 >= v);
                seeds.insert(pos, (v, w));
                seeds.truncate(SEEDS);
            }
        }
    }

    let grid_step = std::f64::consts::PI / resolution as f64;
    let best = seeds
        .into_iter()
        .map(|(v, w)| compass_search(&fid, w, v, grid_step))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(T::lit(best))
}

/// The objective in plain `f64`, `sum_i eta_i (D_i W C_i^T)^2`.
struct Fidelity {
    d: DMatrix<f64>,
    c: DMatrix<f64>,
    priors: Vec<f64>,
}

impl Fidelity {
    fn new<T: Real>(land: &Landscape<T>) -> Self {
        Self {
            d: land.d.map(|x| x.as_f64()),
            c: land.c.map(|x| x.as_f64()),
            priors: land.priors.iter().map(|p| p.as_f64()).collect(),
        }
    }

    fn eval(&self, w: &DMatrix<f64>) -> f64 {
        let (rows, cols) = w.shape();
        let mut total = 0.0;
        for (i, &eta) in self.priors.iter().enumerate() {
            let mut m = 0.0;
            for a in 0..rows {
                let da = self.d[(i, a)];
                if da == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for b in 0..cols {
                    row += w[(a, b)] * self.c[(i, b)];
                }
                m += da * row;
            }
            total += eta * m * m;
        }
        total
    }
}

/// Rotates columns `j`, `k` of `w` by `angle`.
fn givens(w: &DMatrix<f64>, j: usize, k: usize, angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    let mut out = w.clone();
    for r in 0..w.nrows() {
        let (x, y) = (w[(r, j)], w[(r, k)]);
        out[(r, j)] = c * x - s * y;
        out[(r, k)] = s * x + c * y;
    }
    out
}

/// Pattern search over plane rotations `W G_jk(+-h)` applied on the right,
/// halving `h` when no move improves.
fn compass_search(f: &Fidelity, mut w: DMatrix<f64>, mut fw: f64, mut h: f64) -> f64 {
    let dim = w.ncols();
    let planes: Vec<(usize, usize)> =
        (0..dim).flat_map(|j| (j + 1..dim).map(move |k| (j, k))).collect();
    if planes.is_empty() {
        return fw;
    }
    while h > POLISH_STEP_MIN {
        let mut improved = false;
        for &(j, k) in &planes {
            for sign in [1.0, -1.0] {
                let y = givens(&w, j, k, sign * h);
                let fy = f.eval(&y);
                if fy > fw {
                    w = y;
                    fw = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    fw
}
