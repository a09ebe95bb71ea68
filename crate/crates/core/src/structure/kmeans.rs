//! Deterministic one-dimensional Lloyd k-means.

use super::draft::nearest_index as nearest;
use super::StructureConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans1d {
    /// Cluster centers, ascending.
    pub centers: Vec<f64>,
    /// Index into `centers` for each input value.
    pub assignment: Vec<usize>,
    pub iterations: usize,
    /// Sum of squared distances after each assignment step.
    pub objective_trace: Vec<f64>,
}

pub fn kmeans_objective(values: &[f64], centers: &[f64], assignment: &[usize]) -> f64 {
    values.iter().zip(assignment).map(|(v, &a)| (v - centers[a]).powi(2)).sum()
}

/// Cluster `values` into at most `k` groups.
///
/// `k` is capped at the number of distinct values. Centers start at the
/// `(i + 0.5) / k` quantiles of the sorted values; a cluster that empties is
/// re-seeded at the value farthest from its current center.
///
/// # Panics
/// When `values` is empty.
pub fn kmeans_1d(values: &[f64], k: usize, cfg: &StructureConfig) -> KMeans1d {
    assert!(!values.is_empty(), "kmeans_1d needs at least one value");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    let k = k.clamp(1, distinct.len());
    let n = sorted.len();

    let mut centers: Vec<f64> = (0..k)
        .map(|i| {
            let idx = (((i as f64 + 0.5) / k as f64) * n as f64).floor() as usize;
            sorted[idx.min(n - 1)]
        })
        .collect();

    let mut assignment = vec![0usize; values.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.kmeans_max_iter {
        iterations += 1;
        for (a, &v) in assignment.iter_mut().zip(values) {
            *a = nearest(&centers, v);
        }
        trace.push(kmeans_objective(values, &centers, &assignment));

        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&a, &v) in assignment.iter().zip(values) {
            sums[a] += v;
            counts[a] += 1;
        }
        let mut next: Vec<f64> = (0..k)
            .map(|c| if counts[c] > 0 { sums[c] / counts[c] as f64 } else { centers[c] })
            .collect();
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            // farthest value from its own (updated) center
            let mut far = 0;
            let mut far_d = -1.0;
            for (i, (&a, &v)) in assignment.iter().zip(values).enumerate() {
                let d = (v - next[a]).abs();
                if d > far_d {
                    far = i;
                    far_d = d;
                }
            }
            let old = assignment[far];
            counts[old] -= 1;
            counts[c] = 1;
            assignment[far] = c;
            next[c] = values[far];
        }
        let movement = centers.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        centers = next;
        if movement < cfg.kmeans_tol {
            break;
        }
    }

    centers.sort_by(f64::total_cmp);
    for (a, &v) in assignment.iter_mut().zip(values) {
        *a = nearest(&centers, v);
    }
    KMeans1d { centers, assignment, iterations, objective_trace: trace }
}
