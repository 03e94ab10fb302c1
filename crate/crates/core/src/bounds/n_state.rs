//! Bounds valid for any number of states.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::geometry::{difference_matrix, DifferenceMatrix};
use super::require_uniform;
use crate::error::{Error, Result};
use crate::gram::CloneTask;
use crate::scalar::Real;

/// Entries within this distance of the running maximum count as tied.
pub const GREEDY_TIE_TOL: f64 = 1e-12;

/// Average of the pairwise bounds over all ordered pairs:
/// `1/2 + (1 / (2 n (n-1))) * sum_{j != k} cos(a_jk - a'_jk)`.
pub fn bound_n_average<T: Real>(task: &CloneTask<T>) -> Result<T> {
    require_uniform(task)?;
    let d = difference_matrix(task)?;
    let n = d.dim();
    let mut sum = T::zero();
    for j in 0..n {
        for k in 0..n {
            if j != k {
                sum += d.get(j, k).cos();
            }
        }
    }
    let half = T::lit(0.5);
    Ok(half + sum / T::lit((2 * n * (n - 1)) as f64))
}

/// Disjoint cycles of state indices. Each cycle is traversed in the stored order
/// and closed back to its first element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        Self { groups }
    }

    /// One cycle through every state in index order.
    pub fn single_cycle(n: usize) -> Self {
        Self { groups: vec![(0..n).collect()] }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Checks that the groups are non-empty, disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::InvalidPartition("empty group".into()));
            }
            for &i in group {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range for {n} states"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {i} appears twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("index {missing} is not covered")));
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `"0,1,2;3,4"`: semicolon-separated cycles of comma-separated indices.
    fn from_str(s: &str) -> Result<Self> {
        let groups = s
            .split(';')
            .map(|group| {
                group
                    .split(',')
                    .map(|tok| {
                        tok.trim().parse::<usize>().map_err(|_| {
                            Error::InvalidPartition(format!("bad index {:?}", tok.trim()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { groups })
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&text.join(";"))
    }
}

/// Partition bound `1/2 + (1/(2n)) * sum over cycle edges of cos(a - a')`.
///
/// A cycle of length `k >= 2` contributes its `k` consecutive pairs (a two-cycle
/// counts its pair twice); a singleton contributes the trivial term 1.
pub fn bound_n_partition<T: Real>(task: &CloneTask<T>, partition: &Partition) -> Result<T> {
    let n = task.n_states();
    partition.validate(n)?;
    require_uniform(task)?;
    let d = difference_matrix(task)?;
    let mut sum = T::zero();
    for group in partition.groups() {
        if group.len() == 1 {
            sum += T::one();
            continue;
        }
        for (pos, &i) in group.iter().enumerate() {
            let j = group[(pos + 1) % group.len()];
            sum += d.get(i, j).cos();
        }
    }
    Ok(T::lit(0.5) + sum / T::lit((2 * n) as f64))
}

/// One greedy pick: upper-triangle position `(row, col)` with `row < col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyPick<T> {
    pub row: usize,
    pub col: usize,
    pub value: T,
}

/// Both greedy refinements of the averaged bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyBound<T> {
    /// `1/2 + (1 / (2 p)) * sum cos(e_s)` with `p = floor((n + 1) / 2)` picks,
    /// erasing only the picked row and column.
    pub paper: T,
    /// `None` where the matrix was exhausted (`e_s = 0`).
    pub paper_trace: Vec<Option<GreedyPick<T>>>,
    /// `1 - (1/n) * sum (1 - cos e_s)` over `floor(n / 2)` index-disjoint pairs.
    pub matching: T,
    pub matching_trace: Vec<Option<GreedyPick<T>>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Erasure {
    /// Erase row `row` and column `col` only.
    RowAndColumn,
    /// Erase both indices everywhere.
    BothIndices,
}

/// Upper-triangle eligibility mask for greedy selection.
struct Eligible {
    n: usize,
    mask: Vec<bool>,
}

impl Eligible {
    fn new(n: usize) -> Self {
        Self { n, mask: vec![true; n * n] }
    }

    fn get(&self, r: usize, c: usize) -> bool {
        self.mask[r * self.n + c]
    }

    /// Upper-triangle cells `(i, j)` that erasing `(row, col)` under `mode` would remove.
    fn touched(&self, row: usize, col: usize, mode: Erasure, i: usize, j: usize) -> bool {
        match mode {
            Erasure::RowAndColumn => i == row || j == col,
            Erasure::BothIndices => i == row || j == row || i == col || j == col,
        }
    }

    fn erase(&mut self, row: usize, col: usize, mode: Erasure) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.touched(row, col, mode, i, j) {
                    self.mask[i * self.n + j] = false;
                }
            }
        }
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.get(i, j))
    }
}

/// Picks the next entry: the maximum eligible value; among ties, the one whose
/// largest other eligible entry in the cells it would erase is smallest; then
/// lowest row, then lowest column.
fn pick<T: Real>(
    d: &DifferenceMatrix<T>,
    eligible: &Eligible,
    mode: Erasure,
) -> Option<GreedyPick<T>> {
    let max = eligible
        .cells()
        .map(|(i, j)| d.get(i, j))
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))?;
    let tol = T::tol(GREEDY_TIE_TOL);
    let secondary = |row: usize, col: usize| -> Option<T> {
        eligible
            .cells()
            .filter(|&(i, j)| (i, j) != (row, col) && eligible.touched(row, col, mode, i, j))
            .map(|(i, j)| d.get(i, j))
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    let mut best: Option<(Option<T>, usize, usize)> = None;
    for (i, j) in eligible.cells() {
        if max - d.get(i, j) > tol {
            continue;
        }
        let s = secondary(i, j);
        // Cells are visited in (row, col) order, so strict improvement keeps the
        // lowest indices among equal secondaries.
        let better = match &best {
            None => true,
            Some((bs, _, _)) => cmp_secondary(s, *bs) == Ordering::Less,
        };
        if better {
            best = Some((s, i, j));
        }
    }
    best.map(|(_, row, col)| GreedyPick { row, col, value: d.get(row, col) })
}

// `None` (nothing else would be erased) ranks below any value.
fn cmp_secondary<T: Real>(a: Option<T>, b: Option<T>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            if (x - y).abs() <= T::tol(GREEDY_TIE_TOL) {
                Ordering::Equal
            } else {
                x.partial_cmp(&y).unwrap_or(Ordering::Equal)
            }
        }
    }
}

fn greedy_trace<T: Real>(
    d: &DifferenceMatrix<T>,
    picks: usize,
    mode: Erasure,
) -> Vec<Option<GreedyPick<T>>> {
    let mut eligible = Eligible::new(d.dim());
    (0..picks)
        .map(|_| {
            let p = pick(d, &eligible, mode);
            if let Some(p) = &p {
                eligible.erase(p.row, p.col, mode);
            }
            p
        })
        .collect()
}

/// Greedy refinements built from the difference matrix.
pub fn bound_n_greedy<T: Real>(task: &CloneTask<T>) -> Result<GreedyBound<T>> {
    require_uniform(task)?;
    let d = difference_matrix(task)?;
    Ok(greedy_from_differences(&d))
}

pub fn greedy_from_differences<T: Real>(d: &DifferenceMatrix<T>) -> GreedyBound<T> {
    let n = d.dim();
    let half = T::lit(0.5);
    let cos_sum = |trace: &[Option<GreedyPick<T>>]| -> T {
        trace
            .iter()
            .map(|p| p.map_or(T::one(), |p| p.value.cos()))
            .sum()
    };

    let paper_picks = n.div_ceil(2);
    let paper_trace = greedy_trace(d, paper_picks, Erasure::RowAndColumn);
    let paper = half + cos_sum(&paper_trace) / T::lit((2 * paper_picks) as f64);

    let matching_trace = greedy_trace(d, n / 2, Erasure::BothIndices);
    let deficit: T = matching_trace
        .iter()
        .map(|p| p.map_or(T::zero(), |p| T::one() - p.value.cos()))
        .sum();
    let matching = T::one() - deficit / T::lit(n as f64);

    GreedyBound { paper, paper_trace, matching, matching_trace }
}
