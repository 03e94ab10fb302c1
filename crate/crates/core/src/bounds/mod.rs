//! Upper bounds on the global fidelity of `M -> N` cloning.
//!
//! Every bound assumes uniform priors and nonnegative overlaps. The pairwise
//! ingredient shared by the n-state bounds is
//! `cos^2 l_j + cos^2 l_k <= 1 + cos(a_jk - a'_jk)`, where `l_i` is the angle
//! between an actual output and its ideal clone.

mod geometry;
mod n_state;
mod three_state;

pub use geometry::{
    difference_matrix, edge_matrices, three_state_geometry, DifferenceMatrix, EdgeMatrices,
    GeometryFlags, TriangleGeometry,
};
pub use n_state::{
    bound_n_average, bound_n_greedy, bound_n_partition, greedy_from_differences, GreedyBound,
    GreedyPick, Partition, GREEDY_TIE_TOL,
};
pub use three_state::{
    bound_three_state_symmetric, bound_three_state_trig, trig_closed_form, trig_objective,
    TrigBound,
};

use crate::error::{Error, Result};
use crate::gram::CloneTask;
use crate::scalar::Real;

/// How much a reported bound value can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Validity {
    /// Derived under preconditions that hold.
    Valid,
    /// Preconditions hold only at a boundary point (e.g. the anchor-angle
    /// domain collapsed to `{0}`).
    Marginal,
    /// Preconditions fail; the value is the trivial bound 1.
    Vacuous,
    /// Reported for comparison; no proof covers it.
    Unproven,
}

impl Validity {
    /// Whether the value may enter the minimum over bounds.
    pub fn is_usable(self) -> bool {
        matches!(self, Validity::Valid | Validity::Marginal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Validity::Valid => "valid",
            Validity::Marginal => "marginal",
            Validity::Vacuous => "vacuous",
            Validity::Unproven => "unproven",
        }
    }
}

pub(crate) fn require_uniform<T: Real>(task: &CloneTask<T>) -> Result<()> {
    if task.has_uniform_priors() {
        Ok(())
    } else {
        Err(Error::NonUniformPriors)
    }
}

/// Which bound a [`BoundEntry`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Trig3,
    Sym3,
    Average,
    Partition,
    GreedyPaper,
    GreedyMatching,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Trig3,
        BoundKind::Sym3,
        BoundKind::Average,
        BoundKind::Partition,
        BoundKind::GreedyPaper,
        BoundKind::GreedyMatching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Trig3 => "bound_trig3",
            BoundKind::Sym3 => "bound_sym3",
            BoundKind::Average => "bound_avg",
            BoundKind::Partition => "bound_partition",
            BoundKind::GreedyPaper => "bound_greedy_paper",
            BoundKind::GreedyMatching => "bound_greedy_matching",
        }
    }
}

/// Flattened view of one bound in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry<T> {
    pub kind: BoundKind,
    pub value: Option<T>,
    pub validity: Option<Validity>,
    pub error: Option<Error>,
}

#[derive(Debug, Clone, Default)]
pub struct BoundOptions {
    /// Cycles for the partition bound; skipped when `None`.
    pub partition: Option<Partition>,
}

/// Every applicable bound for one task. `None` marks a bound that does not
/// apply (three-state bounds for `n != 3`, partition bound without a partition);
/// `Some(Err(..))` a bound that applies but failed.
#[derive(Debug, Clone)]
pub struct BoundReport<T: Real> {
    pub trig3: Option<Result<TrigBound<T>>>,
    pub sym3: Option<Result<T>>,
    pub average: Result<T>,
    pub partition: Option<Result<T>>,
    pub greedy: Result<GreedyBound<T>>,
    /// Minimum over bounds whose validity is usable; `None` if none computed.
    pub min_valid_bound: Option<T>,
}

impl<T: Real> BoundReport<T> {
    pub fn entries(&self) -> Vec<BoundEntry<T>> {
        BoundKind::ALL
            .iter()
            .filter_map(|&kind| self.entry(kind))
            .collect()
    }

    /// The entry for `kind`, or `None` if that bound does not apply.
    pub fn entry(&self, kind: BoundKind) -> Option<BoundEntry<T>> {
        fn lift<T: Copy>(kind: BoundKind, r: &Result<T>, validity: Validity) -> BoundEntry<T> {
            match r {
                Ok(v) => BoundEntry { kind, value: Some(*v), validity: Some(validity), error: None },
                Err(e) => BoundEntry { kind, value: None, validity: None, error: Some(e.clone()) },
            }
        }
        let entry = match kind {
            BoundKind::Trig3 => match self.trig3.as_ref()? {
                Ok(t) => BoundEntry {
                    kind,
                    value: Some(t.value),
                    validity: Some(t.validity),
                    error: None,
                },
                Err(e) => BoundEntry { kind, value: None, validity: None, error: Some(e.clone()) },
            },
            BoundKind::Sym3 => lift(kind, self.sym3.as_ref()?, Validity::Valid),
            BoundKind::Average => lift(kind, &self.average, Validity::Valid),
            BoundKind::Partition => lift(kind, self.partition.as_ref()?, Validity::Valid),
            BoundKind::GreedyPaper => lift(
                kind,
                &self.greedy.as_ref().map(|g| g.paper).map_err(Clone::clone),
                Validity::Unproven,
            ),
            BoundKind::GreedyMatching => lift(
                kind,
                &self.greedy.as_ref().map(|g| g.matching).map_err(Clone::clone),
                Validity::Valid,
            ),
        };
        Some(entry)
    }

    pub fn value(&self, kind: BoundKind) -> Option<T> {
        self.entry(kind).and_then(|e| e.value)
    }
}

/// Runs every applicable bound on `task`.
pub fn bound_report<T: Real>(task: &CloneTask<T>, options: &BoundOptions) -> BoundReport<T> {
    let three = task.n_states() == 3;
    let mut report = BoundReport {
        trig3: three.then(|| bound_three_state_trig(task)),
        sym3: three.then(|| bound_three_state_symmetric(task)),
        average: bound_n_average(task),
        partition: options.partition.as_ref().map(|p| bound_n_partition(task, p)),
        greedy: bound_n_greedy(task),
        min_valid_bound: None,
    };
    report.min_valid_bound = report
        .entries()
        .into_iter()
        .filter(|e| e.validity.is_some_and(Validity::is_usable))
        .filter_map(|e| e.value)
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::GramMatrix;

    #[test]
    fn two_state_report_is_gated() {
        let task = CloneTask::<f64>::from_angles(&[0.0, 0.4], 1, 2).unwrap();
        let r = bound_report(&task, &BoundOptions::default());
        assert!(r.trig3.is_none() && r.sym3.is_none() && r.partition.is_none());
        let kinds: Vec<_> = r.entries().iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![BoundKind::Average, BoundKind::GreedyPaper, BoundKind::GreedyMatching]
        );
    }

    #[test]
    fn identity_report() {
        let task = CloneTask::uniform(GramMatrix::<f64>::identity(3), 1, 2).unwrap();
        let opts = BoundOptions { partition: Some(Partition::single_cycle(3)) };
        let r = bound_report(&task, &opts);
        for e in r.entries() {
            assert!((e.value.unwrap() - 1.0).abs() < 1e-12, "{:?}", e.kind);
        }
        assert!((r.min_valid_bound.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn worked_report_minimum() {
        let task = CloneTask::<f64>::from_angles(&[0.0, 0.5, 1.0], 1, 2).unwrap();
        let r = bound_report(&task, &BoundOptions::default());
        let usable = [BoundKind::Sym3, BoundKind::Average, BoundKind::Trig3, BoundKind::GreedyMatching];
        let expected = usable
            .iter()
            .map(|&k| r.value(k).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.min_valid_bound, Some(expected));
        // The paper-form greedy value is larger here and never enters the minimum.
        assert!(r.value(BoundKind::GreedyPaper).unwrap() > expected);
        assert_eq!(
            r.entry(BoundKind::GreedyPaper).unwrap().validity,
            Some(Validity::Unproven)
        );
    }

    #[test]
    fn degenerate_trig_is_excluded() {
        let task = CloneTask::<f64>::from_angles(&[0.2, 0.2, 0.9], 1, 2).unwrap();
        let r = bound_report(&task, &BoundOptions::default());
        let e = r.entry(BoundKind::Trig3).unwrap();
        assert!(matches!(e.error, Some(Error::DegenerateTriangle { .. })));
        assert!(r.min_valid_bound.is_some());
    }

    #[test]
    fn non_uniform_priors_give_partial_report() {
        let g = GramMatrix::<f64>::from_angles(&[0.0, 0.5, 1.0]).unwrap();
        let task = CloneTask::new(g, vec![0.5, 0.25, 0.25], 1, 2).unwrap();
        let r = bound_report(&task, &BoundOptions::default());
        assert!(r.entries().iter().all(|e| e.error == Some(Error::NonUniformPriors)));
        assert_eq!(r.min_valid_bound, None);
    }
}
