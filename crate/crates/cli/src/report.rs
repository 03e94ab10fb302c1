//! Serializable report schemas.

use std::collections::BTreeMap;

use clonebound::bounds::GreedyPick;
use clonebound::{BoundKind, BoundReport, ClonerSolution, CloneTask, OptimizerOptions};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Row-major nested vectors.
pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub n_states: usize,
    pub clone_from: u32,
    pub clone_to: u32,
    pub priors: Vec<f64>,
}

impl TaskSummary {
    pub fn new(task: &CloneTask<f64>) -> Self {
        Self {
            n_states: task.n_states(),
            clone_from: task.m_copies(),
            clone_to: task.n_copies(),
            priors: task.priors().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl From<&GreedyPick<f64>> for Pick {
    fn from(p: &GreedyPick<f64>) -> Self {
        Self { row: p.row, col: p.col, value: p.value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigDetail {
    pub anchor: usize,
    pub l: f64,
    pub theta: f64,
    pub alpha: f64,
    pub closed_form: f64,
    /// Unclamped maxima per anchor/orientation variant; `null` for an empty domain.
    pub variants: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub task: TaskSummary,
    pub bound_trig3: Option<f64>,
    pub bound_sym3: Option<f64>,
    pub bound_avg: Option<f64>,
    pub bound_partition: Option<f64>,
    pub bound_greedy_paper: Option<f64>,
    pub bound_greedy_matching: Option<f64>,
    pub min_valid_bound: Option<f64>,
    /// Validity per computed bound: valid, marginal, vacuous or unproven.
    pub validity: BTreeMap<String, String>,
    /// Bounds that apply to the task but could not be computed.
    pub errors: BTreeMap<String, String>,
    pub partition: Option<String>,
    /// Greedy selections `e_1..e_p`; `null` where the matrix was exhausted.
    pub greedy_trace: Vec<Option<Pick>>,
    pub matching_trace: Vec<Option<Pick>>,
    pub trig3: Option<TrigDetail>,
}

impl BoundsReport {
    pub fn new(task: &CloneTask<f64>, report: &BoundReport<f64>, partition: Option<String>) -> Self {
        let mut validity = BTreeMap::new();
        let mut errors = BTreeMap::new();
        for entry in report.entries() {
            if let Some(v) = entry.validity {
                validity.insert(entry.kind.name().to_string(), v.as_str().to_string());
            }
            if let Some(e) = &entry.error {
                errors.insert(entry.kind.name().to_string(), e.to_string());
            }
        }
        let (greedy_trace, matching_trace) = match &report.greedy {
            Ok(g) => (
                g.paper_trace.iter().map(|p| p.as_ref().map(Pick::from)).collect(),
                g.matching_trace.iter().map(|p| p.as_ref().map(Pick::from)).collect(),
            ),
            Err(_) => (Vec::new(), Vec::new()),
        };
        let trig3 = report.trig3.as_ref().and_then(|r| r.as_ref().ok()).map(|t| TrigDetail {
            anchor: t.geometry.anchor,
            l: t.l,
            theta: t.theta,
            alpha: t.geometry.alpha,
            closed_form: t.closed_form,
            variants: t.variants.clone(),
        });
        Self {
            task: TaskSummary::new(task),
            bound_trig3: report.value(BoundKind::Trig3),
            bound_sym3: report.value(BoundKind::Sym3),
            bound_avg: report.value(BoundKind::Average),
            bound_partition: report.value(BoundKind::Partition),
            bound_greedy_paper: report.value(BoundKind::GreedyPaper),
            bound_greedy_matching: report.value(BoundKind::GreedyMatching),
            min_valid_bound: report.min_valid_bound,
            validity,
            errors,
            partition,
            greedy_trace,
            matching_trace,
            trig3,
        }
    }

    pub fn value(&self, kind: BoundKind) -> Option<f64> {
        match kind {
            BoundKind::Trig3 => self.bound_trig3,
            BoundKind::Sym3 => self.bound_sym3,
            BoundKind::Average => self.bound_avg,
            BoundKind::Partition => self.bound_partition,
            BoundKind::GreedyPaper => self.bound_greedy_paper,
            BoundKind::GreedyMatching => self.bound_greedy_matching,
        }
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} states, {} -> {} copies\n",
            self.task.n_states, self.task.clone_from, self.task.clone_to
        );
        for kind in BoundKind::ALL {
            let name = kind.name();
            let cell = match (self.value(kind), self.errors.get(name)) {
                (Some(v), _) => {
                    let flag = self.validity.get(name).map(String::as_str).unwrap_or("");
                    format!("{v:.12}  {flag}")
                }
                (None, Some(e)) => format!("error: {e}"),
                (None, None) => "n/a".to_string(),
            };
            out.push_str(&format!("  {name:<22} {cell}\n"));
        }
        if let Some(m) = self.min_valid_bound {
            out.push_str(&format!("  {:<22} {m:.12}\n", "min_valid_bound"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub task: TaskSummary,
    pub fidelity: f64,
    /// `A` with `|phi_i^N> = sum_k A_ik |psi_k^M>`, one row per state.
    pub coefficients: Vec<Vec<f64>>,
    /// Components outside the span of the ideal clones (zero unless `allow_leak`).
    pub leak: Vec<Vec<f64>>,
    pub leak_norm: f64,
    pub constraint_residual: f64,
    pub converged: bool,
    pub non_convergence: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub restarts: usize,
    pub restarts_converged: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub allow_leak: bool,
}

impl SolutionReport {
    pub fn new(task: &CloneTask<f64>, s: &ClonerSolution<f64>, opts: &OptimizerOptions) -> Self {
        Self {
            task: TaskSummary::new(task),
            fidelity: s.fidelity,
            coefficients: rows(&s.coefficients),
            leak: rows(&s.leak),
            leak_norm: s.leak_norm(),
            constraint_residual: s.constraint_residual,
            converged: s.converged,
            non_convergence: s.non_convergence(),
            iterations: s.iterations,
            gradient_norm: s.gradient_norm,
            restarts: s.restarts_used,
            restarts_converged: s.restarts_converged,
            seed: opts.seed,
            max_iter: opts.max_iter,
            tol: opts.tol,
            allow_leak: s.allow_leak,
        }
    }
}

/// Output of the default command: bounds, plus the optimum for small tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedReport {
    pub bounds: BoundsReport,
    pub optimizer: Option<SolutionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Failures of asserted checks make verification fail; others are logged only.
    pub asserted: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub task: TaskSummary,
    pub fidelity: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}
