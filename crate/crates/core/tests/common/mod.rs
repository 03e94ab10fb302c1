#![allow(dead_code)]

use clonebound::{CloneTask, GramMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Gram matrix of `n` random unit vectors in `R^dim`.
pub fn random_gram(n: usize, dim: usize) -> impl Strategy<Value = GramMatrix<f64>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), n)
        .prop_filter("nonzero vectors", |vs| {
            vs.iter().all(|v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        })
        .prop_map(|vs| gram_of(&vs))
}

/// Gram matrix of random vectors in the positive orthant, so every overlap is nonnegative.
pub fn random_nonneg_gram(n: usize, dim: usize) -> impl Strategy<Value = GramMatrix<f64>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), n)
        .prop_filter("nonzero vectors", |vs| {
            vs.iter().all(|v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        })
        .prop_map(|vs| gram_of(&vs))
}

pub fn gram_of(vs: &[Vec<f64>]) -> GramMatrix<f64> {
    let unit: Vec<Vec<f64>> = vs
        .iter()
        .map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        })
        .collect();
    let n = unit.len();
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum::<f64>()
    });
    for i in 0..n {
        m[(i, i)] = 1.0;
    }
    GramMatrix::new(m).expect("Gram of unit vectors")
}

/// Sorted angles on the qubit arc spanning less than a right angle.
pub fn arc_angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.5, n).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    })
}

/// Uniform three-state task with distinct states on the arc.
pub fn three_state_task(max_n: u32) -> impl Strategy<Value = CloneTask<f64>> {
    (arc_angles(3), 2..=max_n)
        .prop_filter("distinct states", |(a, _)| a[1] - a[0] > 1e-3 && a[2] - a[1] > 1e-3)
        .prop_map(|(a, n)| CloneTask::from_angles(&a, 1, n).unwrap())
}
