//! Coboundary operators and combinatorial Hodge Laplacians of weighted
//! complexes, in symmetrized coordinates.
//!
//! The weights define inner products `(f, g) = sum w(s) f(s) g(s)` on each
//! cochain space, which fix the adjoint `d* = W_n^{-1} d^T W_{n+1}` and the
//! Laplacian `L_q = d_q* d_q + d_{q-1} d_{q-1}*`. Conjugating by `W_q^{1/2}`
//! turns this into the symmetric PSD matrix `B^T B + C C^T` with
//! `B = W_{q+1}^{1/2} d_q W_q^{-1/2}` and `C = W_q^{1/2} d_{q-1} W_{q-1}^{-1/2}`,
//! which has the same spectrum and kernel dimension and admits a symmetric
//! eigensolver.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex::{Filtration, WeightedComplex};
use crate::{eigen, Result};

/// Sparse signed incidence of (n+1)-simplices against n-simplices. Each row
/// holds exactly n+2 entries with values +1 or -1.
#[derive(Debug, Clone)]
pub struct CoboundaryMatrix {
    n_rows: usize,
    n_cols: usize,
    /// Per row: (column index, sign).
    rows: Vec<Vec<(u32, i8)>>,
}

impl CoboundaryMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[Vec<(u32, i8)>] {
        &self.rows
    }

    /// Dense unweighted form; rows index (n+1)-simplices.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, entries) in self.rows.iter().enumerate() {
            for &(c, s) in entries {
                m[(r, c as usize)] = s as f64;
            }
        }
        m
    }
}

/// The coboundary operator from n-cochains to (n+1)-cochains:
/// `(df)(s) = sum_i (-1)^i f(s minus its i-th vertex)`.
pub fn coboundary(k: &WeightedComplex, n: usize) -> CoboundaryMatrix {
    let n_cols = k.skeleton(n).len();
    let upper = k.skeleton(n + 1);
    let rows = upper
        .iter()
        .map(|s| {
            s.faces()
                .enumerate()
                .map(|(i, face)| {
                    let col = k
                        .position(n, face.vertices())
                        .expect("face closure guarantees the face is present");
                    let sign = if i % 2 == 0 { 1i8 } else { -1i8 };
                    (col as u32, sign)
                })
                .collect()
        })
        .collect();
    CoboundaryMatrix { n_rows: upper.len(), n_cols, rows }
}

/// The dimension-q Hodge Laplacian conjugated by `W_q^{1/2}`: symmetric,
/// positive semidefinite, with the same spectrum as the weighted Laplacian.
#[derive(Debug, Clone)]
pub struct SymmetrizedLaplacian {
    matrix: DMatrix<f64>,
    q: usize,
}

impl SymmetrizedLaplacian {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when the q-skeleton is empty (0x0 Laplacian).
    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Assembles the symmetrized Laplacian `B^T B + C C^T` for dimension `q`.
/// For `q = 0` the down-term is absent; a missing (q+1)-skeleton drops the
/// up-term. An empty q-skeleton yields the 0x0 Laplacian.
pub fn symmetrized_laplacian(k: &WeightedComplex, q: usize) -> SymmetrizedLaplacian {
    let nq = k.skeleton(q).len();
    let wq = k.weights(q);
    let mut l = DMatrix::<f64>::zeros(nq, nq);

    // Up-term: rows of d_q are (q+1)-simplices.
    let up = coboundary(k, q);
    let w_up = k.weights(q + 1);
    accumulate_up(&mut l, &up, w_up, wq);

    // Down-term: columns of d_{q-1} are (q-1)-simplices.
    if q > 0 && nq > 0 {
        let down = coboundary(k, q - 1);
        let w_down = k.weights(q - 1);
        accumulate_down(&mut l, &down, w_down, wq);
    }

    SymmetrizedLaplacian { matrix: l, q }
}

/// `L += B^T B` where `B = W_up^{1/2} d W_q^{-1/2}` and `d` has the given
/// sparse rows.
fn accumulate_up(l: &mut DMatrix<f64>, d: &CoboundaryMatrix, w_up: &[f64], wq: &[f64]) {
    for (r, entries) in d.rows().iter().enumerate() {
        let wt = w_up[r];
        for (a, &(ca, sa)) in entries.iter().enumerate() {
            let ca = ca as usize;
            let da = wt * sa as f64 / wq[ca].sqrt();
            // Diagonal contribution once, off-diagonals mirrored.
            l[(ca, ca)] += da * sa as f64 / wq[ca].sqrt();
            for &(cb, sb) in &entries[a + 1..] {
                let cb = cb as usize;
                let v = da * sb as f64 / wq[cb].sqrt();
                l[(ca, cb)] += v;
                l[(cb, ca)] += v;
            }
        }
    }
}

/// `L += C C^T` where `C = W_q^{1/2} d W_down^{-1/2}`; rows of `d` are
/// q-simplices, columns (q-1)-simplices.
fn accumulate_down(l: &mut DMatrix<f64>, d: &CoboundaryMatrix, w_down: &[f64], wq: &[f64]) {
    let mut incident: Vec<Vec<(u32, i8)>> = vec![Vec::new(); d.n_cols()];
    for (r, entries) in d.rows().iter().enumerate() {
        for &(c, s) in entries {
            incident[c as usize].push((r as u32, s));
        }
    }
    for (c, list) in incident.iter().enumerate() {
        let wc = w_down[c];
        for (a, &(ra, sa)) in list.iter().enumerate() {
            let ra = ra as usize;
            let da = sa as f64 * wq[ra].sqrt() / wc;
            l[(ra, ra)] += da * sa as f64 * wq[ra].sqrt();
            for &(rb, sb) in &list[a + 1..] {
                let rb = rb as usize;
                let v = da * sb as f64 * wq[rb].sqrt();
                l[(ra, rb)] += v;
                l[(rb, ra)] += v;
            }
        }
    }
}

/// Eigenvalues of a symmetrized Laplacian, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Wraps an ascending list of eigenvalues.
    pub fn from_sorted(eigenvalues: Vec<f64>) -> Self {
        debug_assert!(eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Negative eigenvalues above this magnitude indicate an assembly bug rather
/// than rounding; smaller ones are clamped to zero.
pub const PSD_CLAMP: f64 = -1e-10;

/// Full spectrum via LAPACK's symmetric eigensolver. Rounding negatives in
/// `[-1e-10, 0)` are clamped to zero.
pub fn spectrum(l: &SymmetrizedLaplacian) -> Result<Spectrum> {
    let mut w = eigen::symmetric_eigenvalues(l.matrix.clone())?;
    for x in &mut w {
        if *x < 0.0 && *x >= PSD_CLAMP {
            *x = 0.0;
        }
    }
    Ok(Spectrum { eigenvalues: w })
}

/// Relative rule deciding which numerically small eigenvalues count as zero:
/// an eigenvalue is kernel when `lambda <= rel * max(lambda_max, scale_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTolerance {
    pub rel: f64,
    pub scale_floor: f64,
}

impl Default for ZeroTolerance {
    fn default() -> Self {
        Self { rel: 1e-8, scale_floor: 1.0 }
    }
}

impl ZeroTolerance {
    pub fn threshold(&self, lambda_max: f64) -> f64 {
        self.rel * lambda_max.max(self.scale_floor)
    }
}

/// Number of kernel eigenvalues under the relative tolerance rule.
pub fn kernel_dimension(sp: &Spectrum, tol: ZeroTolerance) -> usize {
    let tau = tol.threshold(sp.max());
    sp.eigenvalues.partition_point(|&x| x <= tau)
}

/// Betti number over the reals by rank-nullity on the unweighted coboundary
/// matrices: `beta_q = |S_q| - rank d_q - rank d_{q-1}`.
///
/// This is the independent oracle for the spectral pipeline: ranks come from
/// Gaussian elimination with full pivoting, not from an eigensolver.
pub fn betti_bruteforce(k: &WeightedComplex, q: usize) -> usize {
    let nq = k.skeleton(q).len();
    if nq == 0 {
        return 0;
    }
    let tol = ZeroTolerance::default();
    let rank_up = rank_with_tolerance(coboundary(k, q).to_dense(), tol);
    let rank_down = if q > 0 {
        rank_with_tolerance(coboundary(k, q - 1).to_dense(), tol)
    } else {
        0
    };
    nq - rank_up - rank_down
}

/// Rank by Gaussian elimination with full pivoting. The pivot cutoff is
/// relative to the largest initial entry magnitude, with the same floor rule
/// as the kernel tolerance.
fn rank_with_tolerance(mut m: DMatrix<f64>, tol: ZeroTolerance) -> usize {
    let (nr, nc) = m.shape();
    if nr == 0 || nc == 0 {
        return 0;
    }
    let max_abs = m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let tau = tol.threshold(max_abs);
    let mut rank = 0;
    while rank < nr.min(nc) {
        // Largest remaining entry as pivot.
        let (mut pr, mut pc, mut pv) = (rank, rank, 0.0f64);
        for r in rank..nr {
            for c in rank..nc {
                if m[(r, c)].abs() > pv {
                    pv = m[(r, c)].abs();
                    pr = r;
                    pc = c;
                }
            }
        }
        if pv <= tau {
            break;
        }
        m.swap_rows(rank, pr);
        m.swap_columns(rank, pc);
        let pivot = m[(rank, rank)];
        for r in (rank + 1)..nr {
            let factor = m[(r, rank)] / pivot;
            if factor != 0.0 {
                for c in rank..nc {
                    let v = m[(rank, c)];
                    m[(r, c)] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

// ---------------------------------------------------------------------------
// Prefix assembly for the scan sweep.
// ---------------------------------------------------------------------------

/// Laplacian of the scale-`r` complex assembled directly from filtration
/// prefixes, with skeleta in filtration order. Permutation-similar to the
/// lexicographic assembly, hence spectrally identical.
pub(crate) struct PrefixLaplacian {
    pub matrix: DMatrix<f64>,
    /// |S_{q-1}|, |S_q|, |S_{q+1}| at this scale.
    pub counts: [usize; 3],
}

pub(crate) fn prefix_laplacian(filt: &Filtration, q: usize, r: f64) -> PrefixLaplacian {
    let n_down = if q == 0 { 0 } else { filt.count_at(q - 1, r) };
    let nq = filt.count_at(q, r);
    let n_up = filt.count_at(q + 1, r);
    let mut l = DMatrix::<f64>::zeros(nq, nq);
    if nq == 0 {
        return PrefixLaplacian { matrix: l, counts: [n_down, 0, n_up] };
    }
    let wq: &[f64] = if q == 0 { &[] } else { &filt.dims[q - 1].weights };
    let weight_q = |i: usize| -> f64 {
        if q == 0 {
            1.0
        } else {
            wq[i]
        }
    };

    if n_up > 0 {
        let up = &filt.dims[q];
        for t in 0..n_up {
            let wt = up.weights[t];
            let faces = &up.faces[t];
            for (a, &fa) in faces.iter().enumerate() {
                let sa = if a % 2 == 0 { 1.0 } else { -1.0 };
                let fa = fa as usize;
                let da = wt * sa / weight_q(fa).sqrt();
                l[(fa, fa)] += da * sa / weight_q(fa).sqrt();
                for (boff, &fb) in faces[a + 1..].iter().enumerate() {
                    let b = a + 1 + boff;
                    let sb = if b % 2 == 0 { 1.0 } else { -1.0 };
                    let fb = fb as usize;
                    let v = da * sb / weight_q(fb).sqrt();
                    l[(fa, fb)] += v;
                    l[(fb, fa)] += v;
                }
            }
        }
    }

    if q > 0 {
        let level = &filt.dims[q - 1];
        let w_down: &[f64] = if q == 1 { &[] } else { &filt.dims[q - 2].weights };
        let weight_down = |c: usize| -> f64 {
            if q == 1 {
                1.0
            } else {
                w_down[c]
            }
        };
        let mut incident: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_down];
        for e in 0..nq {
            for (i, &c) in level.faces[e].iter().enumerate() {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                incident[c as usize].push((e as u32, s));
            }
        }
        for (c, list) in incident.iter().enumerate() {
            let wc = weight_down(c);
            for (a, &(ra, sa)) in list.iter().enumerate() {
                let ra = ra as usize;
                let da = sa * wq[ra].sqrt() / wc;
                l[(ra, ra)] += da * sa * wq[ra].sqrt();
                for &(rb, sb) in &list[a + 1..] {
                    let rb = rb as usize;
                    let v = da * sb * wq[rb].sqrt();
                    l[(ra, rb)] += v;
                    l[(rb, ra)] += v;
                }
            }
        }
    }

    PrefixLaplacian { matrix: l, counts: [n_down, nq, n_up] }
}
