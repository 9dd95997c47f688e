//! Exact synthetic metric spaces for tests. Coordinates of regular polygons
//! carry float jitter that splits supposedly-equal distances into distinct
//! breakpoints, so these helpers build the distance matrices directly: all
//! distances in one equivalence class share the same bit pattern.

use crate::metric::DistanceMatrix;

/// Cycle graph geometry: n points on a circle, `d(i, j)` depends only on the
/// index gap, computed once per gap class.
pub fn cycle_dm(n: usize, radius: f64) -> DistanceMatrix {
    let chord: Vec<f64> = (0..=n / 2)
        .map(|g| 2.0 * radius * (std::f64::consts::PI * g as f64 / n as f64).sin())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let g = (i as isize - j as isize).unsigned_abs();
                    chord[g.min(n - g)]
                })
                .collect()
        })
        .collect();
    DistanceMatrix::from_rows(&rows).expect("cycle metric is valid")
}

/// All pairwise distances equal to `side`.
pub fn simplex_dm(n: usize, side: f64) -> DistanceMatrix {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { side }).collect()).collect();
    DistanceMatrix::from_rows(&rows).expect("equilateral metric is valid")
}

/// Disjoint union of two metric spaces with every cross distance equal to
/// `bridge`. A valid metric whenever `bridge` is at least half of either
/// diameter.
pub fn disjoint_union_dm(a: &DistanceMatrix, b: &DistanceMatrix, bridge: f64) -> DistanceMatrix {
    let (na, nb) = (a.size(), b.size());
    let n = na + nb;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i < na, j < na) {
                    (true, true) => a.get(i, j),
                    (false, false) => b.get(i - na, j - na),
                    _ => bridge,
                })
                .collect()
        })
        .collect();
    DistanceMatrix::from_rows(&rows).expect("union metric is valid")
}
