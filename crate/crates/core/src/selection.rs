//! End-to-end scale selection: sweep the grid, evaluate the criterion at
//! every scale, select the argmax and report the kernel dimension there.

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{build_vr_with, scale_grid, Filtration, WeightOptions, DEFAULT_WEIGHT_FLOOR};
use crate::hodge::{self, kernel_dimension, prefix_laplacian, Spectrum, ZeroTolerance};
use crate::metric::{diameter, DistanceMatrix};
use crate::semigroup::{criterion_value, CriterionKind, CriterionParams};
use crate::{eigen, Error, Result};

/// Default cap on the number of (q+1)-simplices per scale. Scales whose
/// upper skeleton would exceed it are skipped with a diagnostic instead of
/// aborting the scan.
pub const DEFAULT_UPPER_SIMPLEX_CAP: usize = 200_000;

/// Which scales to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GridSpec {
    /// The pairwise-distance breakpoints, the only scales where the complex
    /// changes.
    Breakpoints,
    /// Caller-provided scales.
    Explicit(Vec<f64>),
}

/// Configuration for [`scan`].
#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    /// Target cohomology dimension.
    pub q: usize,
    pub kind: CriterionKind,
    pub params: CriterionParams,
    pub tol: ZeroTolerance,
    pub grid: GridSpec,
    /// Keep the scale equal to the diameter. Off by default: the loop runs
    /// strictly below the diameter.
    pub include_diameter: bool,
    /// Per-scale cap on |S_{q+1}|.
    pub max_upper_simplices: usize,
    pub weight_floor: f64,
    /// Cross-check the estimate at the selected scale against the
    /// rank-nullity Betti oracle and record it.
    pub verify_with_oracle: bool,
}

impl ScanConfig {
    pub fn new(q: usize, kind: CriterionKind) -> Self {
        Self {
            q,
            kind,
            params: CriterionParams::default(),
            tol: ZeroTolerance::default(),
            grid: GridSpec::Breakpoints,
            include_diameter: false,
            max_upper_simplices: DEFAULT_UPPER_SIMPLEX_CAP,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            verify_with_oracle: false,
        }
    }
}

/// One grid point of the criterion curve.
#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub r: f64,
    #[serde(rename = "D")]
    pub d_value: f64,
    /// |S_{q-1}|, |S_q|, |S_{q+1}| at this scale. For skipped scales the
    /// upper count is truncated at the cap.
    pub n_simplices: [usize; 3],
    pub kernel_dim: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub empty_q_skeleton: bool,
    /// Scale skipped because |S_{q+1}| exceeded the cap; excluded from the
    /// argmax.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub skipped: bool,
}

/// The criterion curve over the grid plus the selected scale and estimate.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub q: usize,
    pub criterion: CriterionKind,
    pub s: f64,
    pub t0: f64,
    pub r_hat: f64,
    pub betti_hat: usize,
    /// Scales attaining the maximal criterion value; the smallest wins.
    pub ties: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_betti_at_r_hat: Option<usize>,
    pub curve: Vec<ScanEntry>,
}

/// Thin wrapper around the winning row of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct BettiEstimate {
    pub betti_hat: usize,
    pub r_hat: f64,
    pub scan: ScanResult,
}

/// Per-scale spectra shared by every criterion.
struct ScaleData {
    r: f64,
    counts: [usize; 3],
    spectrum: Option<Spectrum>,
}

/// Runs Algorithm selection for one criterion.
pub fn scan(dm: &DistanceMatrix, cfg: &ScanConfig) -> Result<ScanResult> {
    let mut results = scan_many(dm, cfg, &[cfg.kind])?;
    Ok(results.pop().expect("one criterion in, one result out"))
}

/// As [`scan`] but evaluates several criteria from a single spectral sweep,
/// which is where nearly all the time goes.
pub fn scan_many(
    dm: &DistanceMatrix,
    cfg: &ScanConfig,
    kinds: &[CriterionKind],
) -> Result<Vec<ScanResult>> {
    cfg.params.validate()?;
    if cfg.weight_floor <= 0.0 {
        return Err(Error::InvalidParameter("weight_floor must be positive".into()));
    }
    let grid = resolve_grid(dm, cfg)?;

    if grid.is_empty() {
        return degenerate_scan(dm, cfg, kinds);
    }

    let opts = WeightOptions { weight_floor: cfg.weight_floor };
    let r_limit = *grid.last().unwrap();
    let filt = Filtration::build(dm, cfg.q + 1, r_limit, cfg.max_upper_simplices, opts);

    let scales: Result<Vec<ScaleData>> = grid
        .par_iter()
        .map(|&r| {
            if filt.top_dim_guard.is_some_and(|g| r >= g) {
                let n_down = if cfg.q == 0 { 0 } else { filt.count_at(cfg.q - 1, r) };
                return Ok(ScaleData {
                    r,
                    counts: [n_down, filt.count_at(cfg.q, r), filt.count_at(cfg.q + 1, r)],
                    spectrum: None,
                });
            }
            let assembled = prefix_laplacian(&filt, cfg.q, r);
            let mut eigenvalues = eigen::symmetric_eigenvalues(assembled.matrix)?;
            for x in &mut eigenvalues {
                if *x < 0.0 && *x >= hodge::PSD_CLAMP {
                    *x = 0.0;
                }
            }
            Ok(ScaleData {
                r,
                counts: assembled.counts,
                spectrum: Some(Spectrum::from_sorted(eigenvalues)),
            })
        })
        .collect();
    let scales = scales?;

    if scales.iter().all(|s| s.spectrum.as_ref().is_none_or(Spectrum::is_empty)) {
        return Err(Error::NoQStructure { q: cfg.q });
    }

    kinds.iter().map(|&kind| finish(dm, cfg, kind, &scales)).collect()
}

/// Runs the scan and repackages the winning row.
pub fn estimate_betti(dm: &DistanceMatrix, cfg: &ScanConfig) -> Result<BettiEstimate> {
    let scan = scan(dm, cfg)?;
    Ok(BettiEstimate { betti_hat: scan.betti_hat, r_hat: scan.r_hat, scan })
}

fn resolve_grid(dm: &DistanceMatrix, cfg: &ScanConfig) -> Result<Vec<f64>> {
    let diam = diameter(dm);
    let mut grid = match &cfg.grid {
        GridSpec::Breakpoints => scale_grid(dm),
        GridSpec::Explicit(list) => {
            if list.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
                return Err(Error::InvalidParameter(
                    "explicit grid scales must be positive and finite".into(),
                ));
            }
            let mut list = list.clone();
            list.sort_by(f64::total_cmp);
            list.dedup();
            list
        }
    };
    if cfg.include_diameter {
        grid.retain(|&r| r <= diam);
    } else {
        grid.retain(|&r| r < diam);
    }
    Ok(grid)
}

/// Fewer than two points, or an explicit grid filtered down to nothing.
/// Dimension 0 still has a well-defined answer at scale 0; anything higher
/// has no structure to scan.
fn degenerate_scan(
    dm: &DistanceMatrix,
    cfg: &ScanConfig,
    kinds: &[CriterionKind],
) -> Result<Vec<ScanResult>> {
    if cfg.q > 0 {
        return Err(Error::NoQStructure { q: cfg.q });
    }
    let n = dm.size();
    let spectrum = Spectrum::from_sorted(vec![0.0; n]);
    kinds
        .iter()
        .map(|&kind| {
            let scales = [ScaleData { r: 0.0, counts: [0, n, 0], spectrum: Some(spectrum.clone()) }];
            finish(dm, cfg, kind, &scales)
        })
        .collect()
}

fn finish(
    dm: &DistanceMatrix,
    cfg: &ScanConfig,
    kind: CriterionKind,
    scales: &[ScaleData],
) -> Result<ScanResult> {
    let curve: Vec<ScanEntry> = scales
        .iter()
        .map(|sd| {
            let (d_value, kernel_dim, empty) = match &sd.spectrum {
                Some(sp) => (
                    criterion_value(kind, sp, &cfg.params),
                    kernel_dimension(sp, cfg.tol),
                    sp.is_empty(),
                ),
                None => (0.0, 0, false),
            };
            ScanEntry {
                r: sd.r,
                d_value,
                n_simplices: sd.counts,
                kernel_dim,
                empty_q_skeleton: empty,
                skipped: sd.spectrum.is_none(),
            }
        })
        .collect();

    // Argmax over evaluated scales; ties break toward the smallest scale.
    let mut best: Option<usize> = None;
    for (i, e) in curve.iter().enumerate() {
        if e.skipped {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) if e.d_value > curve[b].d_value => best = Some(i),
            _ => {}
        }
    }
    let best = best.ok_or(Error::NoQStructure { q: cfg.q })?;
    let d_max = curve[best].d_value;
    let ties: Vec<f64> =
        curve.iter().filter(|e| !e.skipped && e.d_value == d_max).map(|e| e.r).collect();

    let r_hat = curve[best].r;
    let betti_hat = curve[best].kernel_dim;
    let oracle_betti_at_r_hat = if cfg.verify_with_oracle && scales[best].counts[1] > 0 {
        let k = build_vr_with(
            dm,
            r_hat,
            cfg.q + 1,
            WeightOptions { weight_floor: cfg.weight_floor },
        );
        Some(hodge::betti_bruteforce(&k, cfg.q))
    } else {
        None
    };

    Ok(ScanResult {
        q: cfg.q,
        criterion: kind,
        s: cfg.params.s,
        t0: cfg.params.t0,
        r_hat,
        betti_hat,
        ties,
        oracle_betti_at_r_hat,
        curve,
    })
}
