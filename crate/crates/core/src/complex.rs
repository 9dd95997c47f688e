//! Vietoris-Rips complexes with geometric simplex weights.
//!
//! A simplex enters the complex at scale `r` when all of its pairwise
//! distances are at most `r` (the diameter criterion), so the scales where
//! the complex changes are exactly the pairwise distances. Weights estimate
//! the volume of the underlying piece of space: vertices weigh 1, edges their
//! length, higher simplices the Euclidean volume recovered from edge lengths
//! via the Cayley-Menger determinant.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::metric::DistanceMatrix;
use crate::{Error, Result};

/// Floor applied to simplex weights so the induced inner product stays
/// positive definite even for degenerate (near-flat) simplices.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-12;

/// A simplex as a strictly increasing tuple of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Simplex {
    vertices: Vec<u32>,
}

impl Simplex {
    /// Requires strictly ascending vertex indices.
    pub fn new(vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("a simplex needs at least one vertex".into()));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "simplex vertices must be strictly ascending, got {vertices:?}"
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertex(v: u32) -> Self {
        Self { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Faces in vertex-removal order: the i-th face drops the i-th vertex,
    /// which carries sign (-1)^i in the coboundary.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.vertices.len()).map(move |i| {
            let mut v = self.vertices.clone();
            v.remove(i);
            Simplex { vertices: v }
        })
    }
}

/// Options for weight assignment.
#[derive(Debug, Clone, Copy)]
pub struct WeightOptions {
    pub weight_floor: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self { weight_floor: DEFAULT_WEIGHT_FLOOR }
    }
}

/// A Vietoris-Rips skeleton per dimension together with simplex weights.
#[derive(Debug, Clone)]
pub struct WeightedComplex {
    scale: f64,
    /// `skeleta[d]` lists the d-simplices in lexicographic vertex order.
    skeleta: Vec<Vec<Simplex>>,
    /// Aligned with `skeleta`; all entries are at least the weight floor.
    weights: Vec<Vec<f64>>,
    /// Number of simplices whose Cayley-Menger determinant came out negative
    /// (non-Euclidean edge lengths) and was clamped before flooring.
    degenerate_count: usize,
}

impl WeightedComplex {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Highest dimension with storage allocated (skeleta may be empty).
    pub fn max_dim(&self) -> usize {
        self.skeleta.len() - 1
    }

    /// The d-skeleton, empty when `d` exceeds the built range.
    pub fn skeleton(&self, d: usize) -> &[Simplex] {
        self.skeleta.get(d).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn weights(&self, d: usize) -> &[f64] {
        self.weights.get(d).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Position of a simplex inside its skeleton list, by binary search on
    /// the lexicographic order.
    pub fn position(&self, d: usize, vertices: &[u32]) -> Option<usize> {
        self.skeleton(d)
            .binary_search_by(|s| s.vertices.as_slice().cmp(vertices))
            .ok()
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate_count
    }

    fn assert_face_closure(&self) {
        for d in 1..self.skeleta.len() {
            for s in &self.skeleta[d] {
                for face in s.faces() {
                    assert!(
                        self.position(d - 1, face.vertices()).is_some(),
                        "face {:?} of {:?} missing from skeleton {}",
                        face.vertices(),
                        s.vertices(),
                        d - 1
                    );
                }
            }
        }
    }
}

/// The scales where the Vietoris-Rips complex changes: sorted, deduplicated
/// positive pairwise distances. Empty for fewer than two points.
pub fn scale_grid(dm: &DistanceMatrix) -> Vec<f64> {
    let n = dm.size();
    let mut grid = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dm.get(i, j);
            if d > 0.0 {
                grid.push(d);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Builds the Vietoris-Rips complex at scale `r` up to `max_dim`, with
/// default weight options.
pub fn build_vr(dm: &DistanceMatrix, r: f64, max_dim: usize) -> WeightedComplex {
    build_vr_with(dm, r, max_dim, WeightOptions::default())
}

/// Builds the Vietoris-Rips complex at scale `r` up to `max_dim`.
///
/// Simplices are the cliques of the r-neighborhood graph, found by ordered
/// expansion: a (d-1)-simplex extends by any vertex above its largest that is
/// within `r` of all its vertices. Extending lexicographically ordered lists
/// by ascending vertices keeps every skeleton in lexicographic order.
pub fn build_vr_with(
    dm: &DistanceMatrix,
    r: f64,
    max_dim: usize,
    opts: WeightOptions,
) -> WeightedComplex {
    let n = dm.size();
    let mut skeleta = Vec::with_capacity(max_dim + 1);
    let mut weights = Vec::with_capacity(max_dim + 1);
    let mut degenerate_count = 0;

    skeleta.push((0..n as u32).map(Simplex::vertex).collect::<Vec<_>>());
    weights.push(vec![1.0; n]);

    for d in 1..=max_dim {
        let mut level = Vec::new();
        let mut level_weights = Vec::new();
        for parent in &skeleta[d - 1] {
            let pv = parent.vertices();
            let start = *pv.last().unwrap() + 1;
            for v in start..n as u32 {
                if pv.iter().all(|&u| dm.get(u as usize, v as usize) <= r) {
                    let mut verts = pv.to_vec();
                    verts.push(v);
                    let (w, degenerate) = simplex_weight_from_vertices(dm, &verts, opts);
                    if degenerate {
                        degenerate_count += 1;
                    }
                    level.push(Simplex { vertices: verts });
                    level_weights.push(w);
                }
            }
        }
        skeleta.push(level);
        weights.push(level_weights);
    }

    let complex = WeightedComplex { scale: r, skeleta, weights, degenerate_count };
    complex.assert_face_closure();
    complex
}

/// Weight of a single simplex: 1 for vertices, the distance for edges, the
/// Euclidean volume from the Cayley-Menger determinant for dimension >= 2,
/// floored at the default weight floor.
pub fn simplex_weight(dm: &DistanceMatrix, s: &Simplex) -> f64 {
    simplex_weight_from_vertices(dm, s.vertices(), WeightOptions::default()).0
}

fn simplex_weight_from_vertices(
    dm: &DistanceMatrix,
    verts: &[u32],
    opts: WeightOptions,
) -> (f64, bool) {
    match verts.len() {
        1 => (1.0, false),
        2 => {
            let d = dm.get(verts[0] as usize, verts[1] as usize);
            (d.max(opts.weight_floor), false)
        }
        _ => {
            let (vol, degenerate) =
                cayley_menger_volume(verts.len() - 1, |i, j| dm.get(verts[i] as usize, verts[j] as usize));
            (vol.max(opts.weight_floor), degenerate)
        }
    }
}

/// k-volume of a Euclidean simplex from its edge lengths.
///
/// vol^2 = (-1)^(k+1) / (2^k (k!)^2) * det(B) where B borders the squared
/// distance matrix with a row and column of ones. Reduces to Heron's formula
/// for triangles. Returns the volume and whether the squared volume came out
/// negative (non-Euclidean lengths) and was clamped to zero.
pub fn cayley_menger_volume(k: usize, dist: impl Fn(usize, usize) -> f64) -> (f64, bool) {
    let m = k + 2;
    let mut b = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        b[(0, i)] = 1.0;
        b[(i, 0)] = 1.0;
        for j in 1..m {
            if i != j {
                let d = dist(i - 1, j - 1);
                b[(i, j)] = d * d;
            }
        }
    }
    let det = b.determinant();
    let mut factorial = 1.0;
    for i in 2..=k {
        factorial *= i as f64;
    }
    let coeff = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let vol2 = coeff * det / (2f64.powi(k as i32) * factorial * factorial);
    if vol2 < 0.0 {
        (0.0, true)
    } else {
        (vol2.sqrt(), false)
    }
}

/// JSON debug dump of a complex: scale, vertex tuples and weights per
/// dimension.
pub fn dump_complex_json(k: &WeightedComplex) -> serde_json::Value {
    serde_json::json!({
        "scale": k.scale,
        "skeleta": k.skeleta.iter()
            .map(|level| level.iter().map(|s| s.vertices()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "weights": k.weights,
    })
}

// ---------------------------------------------------------------------------
// Filtration: shared storage for sweeping every scale of the grid.
//
// The scan evaluates the pipeline at up to O(n^2) scales. Simplex membership
// is monotone in r and weights do not depend on r, so all simplices are
// enumerated once, sorted by the scale at which they appear, and each scale's
// complex is a prefix of the sorted lists.
// ---------------------------------------------------------------------------

/// One dimension of a filtration: simplices sorted by (appearance scale,
/// vertex tuple).
#[derive(Debug, Clone)]
pub(crate) struct FiltrationDim {
    /// Ascending appearance scales (the simplex diameter).
    pub filtration: Vec<f64>,
    pub weights: Vec<f64>,
    /// Face indices in vertex-removal order; the i-th face carries sign
    /// (-1)^i. For edges these index vertices, otherwise the previous
    /// dimension's sorted order.
    pub faces: Vec<Vec<u32>>,
}

impl FiltrationDim {
    /// Number of simplices present at scale `r`.
    pub fn count_at(&self, r: f64) -> usize {
        self.filtration.partition_point(|&f| f <= r)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Filtration {
    pub n_points: usize,
    /// `dims[d - 1]` holds dimension `d`; dimension 0 is implicit (all
    /// vertices, weight 1, appearing at scale 0).
    pub dims: Vec<FiltrationDim>,
    /// Scale at or above which the top-dimensional count exceeds the cap
    /// used at construction; such scales must be skipped.
    pub top_dim_guard: Option<f64>,
}

impl Filtration {
    pub fn count_at(&self, d: usize, r: f64) -> usize {
        if d == 0 {
            self.n_points
        } else {
            self.dims.get(d - 1).map(|fd| fd.count_at(r)).unwrap_or(0)
        }
    }

    /// Enumerates all simplices up to `max_dim` with appearance scale at most
    /// `r_limit`, sorted by (scale, vertex tuple) within each dimension.
    ///
    /// In the top dimension only the `cap + 1` earliest simplices are kept:
    /// scales where the top-dimensional count would exceed `cap` are skipped
    /// by the sweep, so later simplices are never consulted.
    pub fn build(
        dm: &DistanceMatrix,
        max_dim: usize,
        r_limit: f64,
        cap: usize,
        opts: WeightOptions,
    ) -> Self {
        let n = dm.size();
        let mut dims: Vec<FiltrationDim> = Vec::with_capacity(max_dim);
        let mut top_dim_guard = None;
        // Sorted simplices of the previous dimension as vertex tuples, with a
        // tuple -> sorted-index map for face lookups.
        let mut prev_tuples: Vec<Vec<u32>> = Vec::new();

        for d in 1..=max_dim {
            let mut entries: Vec<(f64, Vec<u32>)> = Vec::new();
            if d == 1 {
                for i in 0..n as u32 {
                    for j in (i + 1)..n as u32 {
                        let dist = dm.get(i as usize, j as usize);
                        if dist <= r_limit {
                            entries.push((dist, vec![i, j]));
                        }
                    }
                }
            } else {
                for (pi, parent) in prev_tuples.iter().enumerate() {
                    let pf = dims[d - 2].filtration[pi];
                    let start = *parent.last().unwrap() + 1;
                    for v in start..n as u32 {
                        let mut appear = pf;
                        let mut ok = true;
                        for &u in parent {
                            let dist = dm.get(u as usize, v as usize);
                            if dist > r_limit {
                                ok = false;
                                break;
                            }
                            appear = appear.max(dist);
                        }
                        if ok {
                            let mut verts = parent.clone();
                            verts.push(v);
                            entries.push((appear, verts));
                        }
                    }
                }
            }
            entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            if d == max_dim && entries.len() > cap {
                top_dim_guard = Some(entries[cap].0);
                entries.truncate(cap + 1);
            }

            // Map from tuple to index in the previous dimension's order.
            let prev_index: HashMap<&[u32], u32> = prev_tuples
                .iter()
                .enumerate()
                .map(|(i, t)| (t.as_slice(), i as u32))
                .collect();

            let mut filtration = Vec::with_capacity(entries.len());
            let mut weights = Vec::with_capacity(entries.len());
            let mut faces = Vec::with_capacity(entries.len());
            let mut tuples = Vec::with_capacity(entries.len());
            for (appear, verts) in entries {
                let (w, _) = simplex_weight_from_vertices(dm, &verts, opts);
                let face_ids = if d == 1 {
                    vec![verts[1], verts[0]]
                } else {
                    (0..verts.len())
                        .map(|i| {
                            let mut f = verts.clone();
                            f.remove(i);
                            prev_index[f.as_slice()]
                        })
                        .collect()
                };
                filtration.push(appear);
                weights.push(w);
                faces.push(face_ids);
                tuples.push(verts);
            }
            dims.push(FiltrationDim { filtration, weights, faces });
            prev_tuples = tuples;
        }

        Self { n_points: n, dims, top_dim_guard }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{pairwise_distances, PointCloud};
    use approx::assert_relative_eq;

    fn dm_from(points: &[&[f64]]) -> DistanceMatrix {
        let pc = PointCloud::new(points.iter().map(|p| p.to_vec()).collect()).unwrap();
        pairwise_distances(&pc)
    }

    fn line_013() -> DistanceMatrix {
        dm_from(&[&[0.0], &[1.0], &[3.0]])
    }

    #[test]
    fn grid_for_line_points() {
        assert_eq!(scale_grid(&line_013()), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn grid_for_equilateral_triangle_is_single_scale() {
        let dm = crate::test_util::simplex_dm(3, 1.0);
        assert_eq!(scale_grid(&dm), vec![1.0]);
    }

    #[test]
    fn grid_for_unit_square() {
        let dm = dm_from(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let grid = scale_grid(&dm);
        assert_eq!(grid, vec![1.0, 2f64.sqrt()]);
    }

    #[test]
    fn grid_empty_below_two_points() {
        let dm = dm_from(&[&[0.0]]);
        assert!(scale_grid(&dm).is_empty());
    }

    #[test]
    fn vr_line_small_scale_has_one_edge() {
        let k = build_vr(&line_013(), 1.0, 2);
        assert_eq!(k.skeleton(0).len(), 3);
        assert_eq!(k.skeleton(1).len(), 1);
        assert_eq!(k.skeleton(1)[0].vertices(), &[0, 1]);
        assert!(k.skeleton(2).is_empty());
    }

    #[test]
    fn vr_line_full_scale_has_triangle() {
        let k = build_vr(&line_013(), 3.0, 2);
        assert_eq!(k.skeleton(1).len(), 3);
        assert_eq!(k.skeleton(2).len(), 1);
        assert_eq!(k.skeleton(2)[0].vertices(), &[0, 1, 2]);
    }

    #[test]
    fn vr_equilateral_has_full_two_simplex() {
        let k = build_vr(&crate::test_util::simplex_dm(3, 1.0), 1.0, 2);
        assert_eq!(k.skeleton(2).len(), 1);
    }

    #[test]
    fn vr_at_zero_scale_is_vertices_only() {
        let k = build_vr(&line_013(), 0.0, 2);
        assert_eq!(k.skeleton(0).len(), 3);
        assert!(k.skeleton(1).is_empty());
    }

    #[test]
    fn vertex_weight_is_one_and_edge_weight_is_length() {
        let dm = line_013();
        assert_eq!(simplex_weight(&dm, &Simplex::vertex(2)), 1.0);
        let e = Simplex::new(vec![0, 2]).unwrap();
        assert_eq!(simplex_weight(&dm, &e), 3.0);
    }

    #[test]
    fn right_triangle_area() {
        // Sides 3, 4, 5: area 6.
        let dm = dm_from(&[&[0.0, 0.0], &[3.0, 0.0], &[0.0, 4.0]]);
        let t = Simplex::new(vec![0, 1, 2]).unwrap();
        assert_relative_eq!(simplex_weight(&dm, &t), 6.0, max_relative = 1e-12);
    }

    #[test]
    fn regular_tetrahedron_volume() {
        let rows = vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ];
        let dm = DistanceMatrix::from_rows(&rows).unwrap();
        let t = Simplex::new(vec![0, 1, 2, 3]).unwrap();
        let expected = 2f64.sqrt() / 12.0;
        assert_relative_eq!(simplex_weight(&dm, &t), expected, max_relative = 1e-12);
    }

    #[test]
    fn non_euclidean_lengths_clamp_to_floor() {
        // Violates the triangle inequality: no Euclidean triangle exists.
        let rows = vec![
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 1.0],
            vec![10.0, 1.0, 0.0],
        ];
        let dm = DistanceMatrix::from_rows(&rows).unwrap();
        let k = build_vr(&dm, 10.0, 2);
        assert_eq!(k.degenerate_count(), 1);
        assert_eq!(k.weights(2)[0], DEFAULT_WEIGHT_FLOOR);
    }

    #[test]
    fn monotone_in_scale() {
        let dm = dm_from(&[&[0.0, 0.0], &[1.0, 0.1], &[2.0, -0.2], &[0.5, 0.9]]);
        let grid = scale_grid(&dm);
        for w in grid.windows(2) {
            let small = build_vr(&dm, w[0], 2);
            let large = build_vr(&dm, w[1], 2);
            for d in 0..=2 {
                for s in small.skeleton(d) {
                    assert!(large.position(d, s.vertices()).is_some());
                }
            }
        }
    }

    #[test]
    fn complexes_constant_between_breakpoints() {
        let dm = dm_from(&[&[0.0, 0.0], &[1.0, 0.2], &[2.1, -0.3], &[0.4, 1.1]]);
        let grid = scale_grid(&dm);
        for w in grid.windows(2) {
            let at_bp = build_vr(&dm, w[0], 2);
            let mid = 0.5 * (w[0] + w[1]);
            let at_mid = build_vr(&dm, mid, 2);
            for d in 0..=2 {
                assert_eq!(at_bp.skeleton(d), at_mid.skeleton(d));
                assert_eq!(at_bp.weights(d), at_mid.weights(d));
            }
        }
    }

    #[test]
    fn filtration_prefixes_match_direct_builds() {
        let dm = dm_from(&[&[0.0, 0.0], &[1.0, 0.1], &[1.8, 0.9], &[0.3, 1.2], &[2.2, 0.1]]);
        let filt = Filtration::build(&dm, 2, f64::INFINITY, usize::MAX, WeightOptions::default());
        for &r in &scale_grid(&dm) {
            let k = build_vr(&dm, r, 2);
            assert_eq!(filt.count_at(0, r), k.skeleton(0).len());
            assert_eq!(filt.count_at(1, r), k.skeleton(1).len());
            assert_eq!(filt.count_at(2, r), k.skeleton(2).len());
        }
    }

    #[test]
    fn filtration_cap_sets_guard() {
        let dm = crate::test_util::simplex_dm(3, 1.0);
        let filt = Filtration::build(&dm, 2, f64::INFINITY, 0, WeightOptions::default());
        // One triangle exists; cap 0 means every scale holding it is guarded.
        assert_eq!(filt.top_dim_guard, Some(1.0));
    }
}
