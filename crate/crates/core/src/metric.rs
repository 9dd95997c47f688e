//! Finite metric spaces: point clouds, distance matrices and synthetic
//! samplers with seeded randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative slack for the triangle-inequality check on ingested matrices.
pub const DEFAULT_TRIANGLE_SLACK: f64 = 1e-9;

/// A finite set of points embedded in Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    ambient_dim: usize,
}

impl PointCloud {
    /// Builds a point cloud, checking that the list is non-empty, all points
    /// share the same dimension and every coordinate is finite.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("point cloud is empty".into()));
        }
        let ambient_dim = points[0].len();
        if ambient_dim == 0 {
            return Err(Error::InvalidInput("points must have dimension >= 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(Error::InvalidInput(format!(
                    "point {i} has dimension {} but point 0 has dimension {ambient_dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Self { points, ambient_dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// Symmetric matrix of pairwise distances with zero diagonal.
///
/// Triangle-inequality violations are tolerated (the downstream math needs
/// only symmetry and non-negativity) but counted so callers can warn.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    /// Row-major `size * size` entries.
    data: Vec<f64>,
    triangle_violations: usize,
}

impl DistanceMatrix {
    /// Ingests a square matrix, validating symmetry, non-negativity and zero
    /// diagonal. Entries are symmetrized to `(a + b) / 2` to absorb rounding
    /// in serialized input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_with_slack(rows, DEFAULT_TRIANGLE_SLACK)
    }

    /// As [`from_rows`](Self::from_rows) with an explicit relative slack for
    /// the triangle-inequality check.
    pub fn from_rows_with_slack(rows: &[Vec<f64>], slack: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("distance matrix is empty".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidInput(format!(
                    "distance matrix is not square: row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
        }
        let mut max_abs = 0.0f64;
        for r in rows {
            for &x in r {
                if !x.is_finite() {
                    return Err(Error::InvalidInput("distance matrix has non-finite entries".into()));
                }
                max_abs = max_abs.max(x.abs());
            }
        }
        let tol = 1e-12 * max_abs.max(1.0);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i].abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry d[{i}][{i}] = {} is not zero",
                    rows[i][i]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric entries d[{i}][{j}] = {a} vs d[{j}][{i}] = {b}"
                    )));
                }
                if a < 0.0 || b < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "negative distance d[{i}][{j}] = {}",
                        a.min(b)
                    )));
                }
                let d = 0.5 * (a + b);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        let mut dm = Self { size: n, data, triangle_violations: 0 };
        dm.triangle_violations = dm.count_triangle_violations(slack);
        Ok(dm)
    }

    fn count_triangle_violations(&self, slack: f64) -> usize {
        let n = self.size;
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let bound = self.get(i, k) + self.get(k, j);
                    if dij > bound + slack * bound.max(1.0) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// Number of (i, j, k) triples violating the triangle inequality beyond
    /// the slack used at construction. Zero for Euclidean input.
    pub fn triangle_violations(&self) -> usize {
        self.triangle_violations
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|i| self.data[i * self.size..(i + 1) * self.size].to_vec())
            .collect()
    }
}

/// Euclidean pairwise distances. Symmetry and zero diagonal hold exactly by
/// construction: each pair is computed once and mirrored.
pub fn pairwise_distances(pc: &PointCloud) -> DistanceMatrix {
    let n = pc.len();
    let pts = pc.points();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&pts[i], &pts[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { size: n, data, triangle_violations: 0 }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Largest pairwise distance; 0 for a single point.
pub fn diameter(dm: &DistanceMatrix) -> f64 {
    dm.data.iter().copied().fold(0.0, f64::max)
}

/// Supported synthetic shapes.
///
/// Circles are centered at the origin of their plane. The two-circle shapes
/// place one circle in the plane `z = 0` and the other in the parallel plane
/// `z = separation`, so the supports are disjoint and exactly `separation`
/// apart. "Nonuniform" variants draw angles from the tilted-cosine density
/// proportional to `1 + density_param * cos(theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Circle { radius: f64 },
    TwoCircles { radius: f64, separation: f64 },
    NonuniformCircle { radius: f64, density_param: f64 },
    NonuniformTwoCircles { radius: f64, separation: f64, density_param: f64 },
}

impl Shape {
    fn radius(&self) -> f64 {
        match self {
            Shape::Circle { radius }
            | Shape::TwoCircles { radius, .. }
            | Shape::NonuniformCircle { radius, .. }
            | Shape::NonuniformTwoCircles { radius, .. } => *radius,
        }
    }

    fn density_param(&self) -> Option<f64> {
        match self {
            Shape::NonuniformCircle { density_param, .. }
            | Shape::NonuniformTwoCircles { density_param, .. } => Some(*density_param),
            _ => None,
        }
    }
}

/// Configuration for [`sample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub shape: Shape,
    pub n_points: usize,
    /// Standard deviation of isotropic Gaussian noise added per coordinate.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::InvalidParameter("n_points must be >= 1".into()));
        }
        if !(self.shape.radius() > 0.0) {
            return Err(Error::InvalidParameter("radius must be > 0".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise_sigma must be >= 0".into()));
        }
        if let Some(a) = self.shape.density_param() {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "density_param must lie in [0, 1), got {a}"
                )));
            }
        }
        if let Shape::TwoCircles { separation, .. }
        | Shape::NonuniformTwoCircles { separation, .. } = self.shape
        {
            if !(separation > 0.0) {
                return Err(Error::InvalidParameter("separation must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Draws a point cloud. Deterministic: identical configs (including seed)
/// produce bit-identical clouds. Angles are drawn in point order, then
/// Gaussian noise in point-major, coordinate-minor order.
pub fn sample(cfg: &SamplerConfig) -> Result<PointCloud> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_points;

    let mut points: Vec<Vec<f64>> = match cfg.shape {
        Shape::Circle { radius } => (0..n)
            .map(|_| on_circle(radius, uniform_angle(&mut rng)))
            .collect(),
        Shape::NonuniformCircle { radius, density_param } => (0..n)
            .map(|_| on_circle(radius, tilted_cosine_angle(&mut rng, density_param)))
            .collect(),
        Shape::TwoCircles { radius, separation } => {
            two_circles(n, radius, separation, &mut rng, |rng| uniform_angle(rng))
        }
        Shape::NonuniformTwoCircles { radius, separation, density_param } => {
            two_circles(n, radius, separation, &mut rng, |rng| {
                tilted_cosine_angle(rng, density_param)
            })
        }
    };

    if cfg.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_sigma)
            .map_err(|e| Error::InvalidParameter(format!("noise_sigma: {e}")))?;
        for p in &mut points {
            for x in p.iter_mut() {
                *x += normal.sample(&mut rng);
            }
        }
    }
    PointCloud::new(points)
}

fn uniform_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.0..std::f64::consts::TAU)
}

/// Rejection sampling from the density proportional to
/// `1 + density_param * cos(theta)` on `[0, 2*pi)`.
fn tilted_cosine_angle(rng: &mut ChaCha8Rng, density_param: f64) -> f64 {
    loop {
        let theta = uniform_angle(rng);
        let u: f64 = rng.random_range(0.0..1.0);
        if u * (1.0 + density_param) <= 1.0 + density_param * theta.cos() {
            return theta;
        }
    }
}

fn on_circle(radius: f64, theta: f64) -> Vec<f64> {
    vec![radius * theta.cos(), radius * theta.sin()]
}

/// First `ceil(n/2)` points on the circle in the plane `z = 0`, the rest on
/// the circle in the plane `z = separation`.
fn two_circles(
    n: usize,
    radius: f64,
    separation: f64,
    rng: &mut ChaCha8Rng,
    mut angle: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Vec<Vec<f64>> {
    let first = n - n / 2;
    (0..n)
        .map(|i| {
            let theta = angle(rng);
            let z = if i < first { 0.0 } else { separation };
            vec![radius * theta.cos(), radius * theta.sin(), z]
        })
        .collect()
}
