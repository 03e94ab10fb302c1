//! Achievable optimum of the global fidelity.
//!
//! The unitarity constraints `A Xi^N A^T (+ B B^T) = Xi^M` are parametrized by
//! row-orthonormal matrices `W` (see [`StiefelPoint`]). The fidelity is a
//! smooth function of `W`, maximized by multi-start Riemannian gradient ascent
//! with backtracking and polar retraction.
//!
//! In restricted mode the outputs live in the span of the ideal clones. Leak
//! mode adds `n` orthonormal directions outside that span; the optimum should
//! not use them.

mod oracle;
mod stiefel;

pub use oracle::{brute_force_oracle, oracle_parameter_count};
pub use stiefel::{
    clone_overlaps, objective, objective_and_gradient, polar_factor, StiefelPoint,
};

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::CloneTask;
use crate::scalar::Real;

/// Solutions whose fidelity is within this of the best are considered tied.
pub const RESTART_TIE_TOL: f64 = 1e-12;
const ARMIJO: f64 = 0.1;
const LBFGS_MEMORY: usize = 10;
const ORTHO_TOL: f64 = 1e-12;
/// Largest halving count in the backtracking line search (step `2^-52`).
const MAX_HALVINGS: u32 = 52;
/// A restart whose line search can no longer find a strict increase counts as
/// converged if its Riemannian gradient norm is below this.
const STALL_GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Riemannian gradient norm at which a restart stops.
    pub tol: f64,
    pub allow_leak: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { restarts: 64, seed: 0, max_iter: 2000, tol: 1e-10, allow_leak: false }
    }
}

/// Optimal cloner found by [`optimal_fidelity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClonerSolution<T: Real> {
    /// `A` with outputs `Phi_i = sum_j A_ij psi_j^N`.
    pub coefficients: DMatrix<T>,
    /// Components along the `n` leak directions, row per output. Zero-width in
    /// restricted mode.
    pub leak: DMatrix<T>,
    /// `sum_i eta_i ((A Xi^N)_ii)^2`.
    pub fidelity: T,
    /// Max-abs entry of `A Xi^N A^T + B B^T - Xi^M`.
    pub constraint_residual: T,
    /// Iterations of the winning restart.
    pub iterations: usize,
    pub restarts_used: usize,
    pub restarts_converged: usize,
    /// Whether the winning restart met the convergence test.
    pub converged: bool,
    pub gradient_norm: T,
    pub allow_leak: bool,
    pub point: StiefelPoint<T>,
}

impl<T: Real> ClonerSolution<T> {
    pub fn leak_norm(&self) -> T {
        self.leak.norm()
    }

    /// No restart converged.
    pub fn non_convergence(&self) -> bool {
        self.restarts_converged == 0
    }
}

/// Fidelity and constraint residual of a restricted-mode coefficient matrix.
pub fn fidelity_from_coeffs<T: Real>(a: &DMatrix<T>, task: &CloneTask<T>) -> (T, T) {
    let xi_n = task.output_gram();
    let a_xi = a * xi_n.entries();
    let fidelity = task
        .priors()
        .iter()
        .enumerate()
        .map(|(i, &eta)| eta * a_xi[(i, i)] * a_xi[(i, i)])
        .sum();
    (fidelity, constraint_residual(a, None, task))
}

/// Max-abs entry of `A Xi^N A^T + B B^T - Xi^M`.
pub fn constraint_residual<T: Real>(
    a: &DMatrix<T>,
    leak: Option<&DMatrix<T>>,
    task: &CloneTask<T>,
) -> T {
    let mut lhs = a * task.output_gram().entries() * a.transpose();
    if let Some(b) = leak {
        if b.ncols() > 0 {
            lhs += b * b.transpose();
        }
    }
    let diff = lhs - task.input_gram().entries();
    diff.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Factors and priors defining the objective on the manifold.
#[derive(Debug, Clone)]
pub struct Landscape<T: Real> {
    /// `Xi^M = D D^T`.
    pub d: DMatrix<T>,
    /// `Xi^N = C C^T`, padded with an `n x n` zero block in leak mode.
    pub c: DMatrix<T>,
    /// Rank of `Xi^N`: the first `span_rank` columns of `W` act on the span.
    pub span_rank: usize,
    pub priors: Vec<T>,
}

impl<T: Real> Landscape<T> {
    pub fn new(task: &CloneTask<T>, allow_leak: bool) -> Result<Self> {
        let d = task.input_gram().factor_default()?.into_columns();
        let c_span = task.output_gram().factor_default()?.into_columns();
        let (rank_m, rank_n) = (d.ncols(), c_span.ncols());
        if !allow_leak && rank_m > rank_n {
            return Err(Error::RankInfeasible { rank_m, rank_n });
        }
        let n = task.n_states();
        let c = if allow_leak {
            let mut c = DMatrix::zeros(n, rank_n + n);
            c.view_mut((0, 0), (n, rank_n)).copy_from(&c_span);
            c
        } else {
            c_span
        };
        Ok(Self { d, c, span_rank: rank_n, priors: task.priors().to_vec() })
    }

    /// Shape `(rows, cols)` of `W`.
    pub fn point_shape(&self) -> (usize, usize) {
        (self.d.ncols(), self.c.ncols())
    }

    pub fn value(&self, w: &StiefelPoint<T>) -> T {
        objective(w.matrix(), &self.d, &self.c, &self.priors)
    }

    /// Coefficients `A = D W_span C^+` and leak block `B = D W_leak`.
    pub fn coefficients(&self, w: &StiefelPoint<T>) -> (DMatrix<T>, DMatrix<T>) {
        let w = w.matrix();
        let (rows, cols) = w.shape();
        // The factor's columns are orthogonal, so `C^+ = diag(1 / |c_k|^2) C^T`.
        let c_span = self.c.columns(0, self.span_rank);
        let pinv = DMatrix::from_fn(self.span_rank, c_span.nrows(), |k, i| {
            c_span[(i, k)] / c_span.column(k).norm_squared()
        });
        let w_span = w.view((0, 0), (rows, self.span_rank));
        let a = &self.d * w_span * pinv;
        let leak_cols = cols - self.span_rank;
        let b = &self.d * w.view((0, self.span_rank), (rows, leak_cols));
        (a, b)
    }
}

/// Trace of a single ascent run.
#[derive(Debug, Clone)]
pub struct AscentRun<T: Real> {
    pub point: StiefelPoint<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: T,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<T>,
}

/// Riemannian L-BFGS ascent from `start`.
///
/// Directions come from the limited-memory quasi-Newton recursion on the
/// tangent space (stored pairs are carried along by projection), falling back
/// to the gradient whenever that is not an ascent direction. Each iteration
/// halves the step from 1 until the objective rises by at least
/// `ARMIJO * step * <grad, direction>`. Stops when the gradient norm falls to
/// `tol`, after `max_iter` iterations, or when no halving gives an increase.
pub fn ascend<T: Real>(
    landscape: &Landscape<T>,
    start: StiefelPoint<T>,
    max_iter: usize,
    tol: T,
) -> AscentRun<T> {
    let Landscape { d, c, priors, .. } = landscape;
    let mut w = start;
    let (mut value, euclidean) = objective_and_gradient(&w, d, c, priors);
    let mut grad = w.project_tangent(&euclidean);
    let mut memory = Memory::new();
    let mut history = vec![value];
    let mut converged = false;
    let mut gradient_norm = grad.norm();
    let mut iterations = 0;
    while iterations < max_iter {
        gradient_norm = grad.norm();
        if gradient_norm <= tol {
            converged = true;
            break;
        }
        let mut direction = memory.direction(&grad);
        let mut slope = dot(&grad, &direction);
        if slope <= T::zero() {
            memory.clear();
            direction = grad.clone();
            slope = gradient_norm * gradient_norm;
        }
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = w.retract(&direction, step);
            // Long steps can make W + step * direction rank-deficient, where
            // the SVD polar factor is no longer orthonormal.
            if candidate.orthonormality_error() > T::tol(ORTHO_TOL) {
                step *= T::lit(0.5);
                continue;
            }
            let (v, g) = objective_and_gradient(&candidate, d, c, priors);
            if v > value && v - value >= T::lit(ARMIJO) * step * slope {
                accepted = Some((candidate, v, g));
                break;
            }
            step *= T::lit(0.5);
        }
        match accepted {
            Some((candidate, v, g)) => {
                let new_grad = candidate.project_tangent(&g);
                let s = candidate.project_tangent(&(&direction * step));
                let y = &new_grad - candidate.project_tangent(&grad);
                memory.transport(&candidate);
                memory.push(s, y);
                w = candidate;
                value = v;
                grad = new_grad;
                history.push(v);
                iterations += 1;
            }
            None => {
                converged = gradient_norm <= T::tol(STALL_GRAD_TOL).max(tol);
                break;
            }
        }
    }
    if iterations == max_iter {
        gradient_norm = grad.norm();
        converged = gradient_norm <= tol;
    }
    AscentRun { point: w, value, iterations, converged, gradient_norm, history }
}

fn dot<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.dot(b)
}

/// Curvature pairs `(s, y)` for the L-BFGS recursion, newest last. Both are
/// stored for descent on `-F`.
struct Memory<T: Real> {
    pairs: Vec<(DMatrix<T>, DMatrix<T>)>,
}

impl<T: Real> Memory<T> {
    fn new() -> Self {
        Self { pairs: Vec::new() }
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }

    fn push(&mut self, s: DMatrix<T>, y: DMatrix<T>) {
        // Ascent on F is descent on -F, whose gradient change is -y.
        let curvature = -dot(&s, &y);
        if curvature > T::default_epsilon() * s.norm() * y.norm() {
            if self.pairs.len() == LBFGS_MEMORY {
                self.pairs.remove(0);
            }
            self.pairs.push((s, -y));
        }
    }

    /// Moves the stored pairs to the tangent space at `w`.
    fn transport(&mut self, w: &StiefelPoint<T>) {
        for (s, y) in &mut self.pairs {
            *s = w.project_tangent(s);
            *y = w.project_tangent(y);
        }
    }

    /// Two-loop recursion applied to the descent gradient `-grad`, negated back.
    fn direction(&self, grad: &DMatrix<T>) -> DMatrix<T> {
        let Some((s_new, y_new)) = self.pairs.last() else {
            return grad.clone();
        };
        let mut q = -grad;
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y) in self.pairs.iter().rev() {
            let rho = T::one() / dot(y, s);
            let a = rho * dot(s, &q);
            q -= y * a;
            alphas.push((rho, a));
        }
        let gamma = dot(s_new, y_new) / dot(y_new, y_new);
        let mut r = q * gamma;
        for ((s, y), (rho, a)) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &r);
            r += s * (a - b);
        }
        -r
    }
}

/// Deterministic generator for restart `index` under `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Maximizes the global fidelity of `task` over all cloners.
pub fn optimal_fidelity<T: Real>(
    task: &CloneTask<T>,
    opts: &OptimizerOptions,
) -> Result<ClonerSolution<T>> {
    if opts.restarts == 0 {
        return Err(Error::NoRestarts);
    }
    let landscape = Landscape::new(task, opts.allow_leak)?;
    let (rows, cols) = landscape.point_shape();
    let tol = T::lit(opts.tol);
    let runs: Vec<AscentRun<T>> = (0..opts.restarts)
        .into_par_iter()
        .map(|index| {
            let mut rng = restart_rng(opts.seed, index);
            let start = StiefelPoint::random(rows, cols, &mut rng);
            ascend(&landscape, start, opts.max_iter, tol)
        })
        .collect();

    let best_value = runs
        .iter()
        .map(|r| r.value)
        .fold(T::zero(), |a, b| a.max(b));
    let tie = T::tol(RESTART_TIE_TOL);
    let (best_run, (a, b)) = runs
        .iter()
        .filter(|r| best_value - r.value <= tie)
        .map(|r| (r, landscape.coefficients(&r.point)))
        .min_by(|x, y| lexicographic(&x.1 .0, &y.1 .0))
        .expect("at least one restart attains the maximum");

    let xi_n = task.output_gram();
    let a_xi = &a * xi_n.entries();
    let fidelity = task
        .priors()
        .iter()
        .enumerate()
        .map(|(i, &eta)| eta * a_xi[(i, i)] * a_xi[(i, i)])
        .sum();
    let constraint_residual = constraint_residual(&a, Some(&b), task);
    Ok(ClonerSolution {
        coefficients: a,
        leak: b,
        fidelity,
        constraint_residual,
        iterations: best_run.iterations,
        restarts_used: runs.len(),
        restarts_converged: runs.iter().filter(|r| r.converged).count(),
        converged: best_run.converged,
        gradient_norm: best_run.gradient_norm,
        allow_leak: opts.allow_leak,
        point: best_run.point.clone(),
    })
}

// Row-major lexicographic order.
fn lexicographic<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>) -> Ordering {
    let row_major = |m: &DMatrix<T>| m.transpose().iter().copied().collect::<Vec<T>>();
    row_major(x)
        .into_iter()
        .zip(row_major(y))
        .map(|(a, b)| a.partial_cmp(&b).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Leak-mode versus restricted-mode comparison.
#[derive(Debug, Clone)]
pub struct SpanCheck<T: Real> {
    pub restricted: ClonerSolution<T>,
    pub leaky: ClonerSolution<T>,
    /// Leak-mode fidelity minus restricted fidelity.
    pub gap: T,
    /// Frobenius norm of the leak block at the leak-mode optimum.
    pub leak_norm: T,
    pub passed: bool,
}

pub const SPAN_GAP_TOL: f64 = 1e-6;
pub const SPAN_LEAK_TOL: f64 = 1e-4;

/// Checks numerically that optimal outputs need no component outside the span
/// of the ideal clones.
pub fn verify_span_restriction<T: Real>(
    task: &CloneTask<T>,
    opts: &OptimizerOptions,
) -> Result<SpanCheck<T>> {
    let restricted = optimal_fidelity(task, &OptimizerOptions { allow_leak: false, ..*opts })?;
    let leaky = optimal_fidelity(task, &OptimizerOptions { allow_leak: true, ..*opts })?;
    let gap = leaky.fidelity - restricted.fidelity;
    let leak_norm = leaky.leak_norm();
    let passed = gap <= T::tol(SPAN_GAP_TOL) && leak_norm <= T::tol(SPAN_LEAK_TOL);
    Ok(SpanCheck { restricted, leaky, gap, leak_norm, passed })
}
