//! Monte-Carlo experiment runner.
//!
//! A spec file (TOML or JSON) describes a sampler, the scan parameters, a
//! trial count and the expected Betti number. Each trial draws a fresh cloud
//! with seed `seed_base + trial`, runs one spectral sweep and evaluates every
//! requested criterion on it. Reports are fully deterministic: a spec file
//! maps to byte-identical JSON on every run.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use bettiscan_core::hodge::ZeroTolerance;
use bettiscan_core::metric::{pairwise_distances, sample, SamplerConfig, Shape};
use bettiscan_core::selection::{scan_many, GridSpec, ScanConfig, DEFAULT_UPPER_SIMPLEX_CAP};
use bettiscan_core::semigroup::{CriterionKind, CriterionParams};
use bettiscan_core::{Error, Result};

/// Sampler description without a seed; the harness derives per-trial seeds
/// from `seed_base`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub shape: Shape,
    pub n_points: usize,
    #[serde(default)]
    pub noise_sigma: f64,
}

/// Scan parameters shared by all criteria of the experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSpec {
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_tol_rel")]
    pub tol_rel: f64,
    #[serde(default)]
    pub include_diameter: bool,
    #[serde(default = "default_cap")]
    pub max_upper_simplices: usize,
}

fn default_s() -> f64 {
    1.0
}
fn default_t0() -> f64 {
    250.0
}
fn default_tol_rel() -> f64 {
    1e-8
}
fn default_cap() -> usize {
    DEFAULT_UPPER_SIMPLEX_CAP
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            s: default_s(),
            t0: default_t0(),
            tol_rel: default_tol_rel(),
            include_diameter: false,
            max_upper_simplices: default_cap(),
        }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub q: usize,
    pub criteria: Vec<CriterionKind>,
    pub trials: usize,
    pub expected_betti: usize,
    pub seed_base: u64,
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub scan: ScanSpec,
}

impl ExperimentSpec {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        let spec: ExperimentSpec = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::InvalidParameter("at least one criterion is required".into()));
        }
        CriterionParams::new(self.scan.s, self.scan.t0)?;
        Ok(())
    }

    fn scan_config(&self, kind: CriterionKind) -> ScanConfig {
        ScanConfig {
            q: self.q,
            kind,
            params: CriterionParams { s: self.scan.s, t0: self.scan.t0 },
            tol: ZeroTolerance { rel: self.scan.tol_rel, ..ZeroTolerance::default() },
            grid: GridSpec::Breakpoints,
            include_diameter: self.scan.include_diameter,
            max_upper_simplices: self.scan.max_upper_simplices,
            ..ScanConfig::new(self.q, kind)
        }
    }
}

/// Outcome of one criterion on one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub r_hat: f64,
    pub betti_hat: usize,
}

/// One seeded trial: the per-criterion outcomes, keyed by criterion name.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub outcomes: BTreeMap<String, TrialOutcome>,
}

/// Aggregate for one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    /// Estimated Betti value -> trial count.
    pub histogram: BTreeMap<usize, usize>,
    /// `100 * count(betti_hat == expected) / trials`.
    pub percent_correct: f64,
}

/// Deterministic experiment report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub per_criterion: BTreeMap<String, CriterionReport>,
    pub trials: Vec<TrialRecord>,
    /// Trials that failed outright (seed and error text); normally empty.
    pub failures: Vec<(u64, String)>,
}

/// Runs all trials, in parallel, and aggregates. Deterministic for a fixed
/// spec regardless of thread count: seeds are assigned by trial index and
/// per-trial computation is order-independent.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let outcomes: Vec<(u64, Result<TrialRecord>)> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed_base + i as u64;
            (seed, run_trial(spec, seed))
        })
        .collect();

    let mut trials = Vec::with_capacity(spec.trials);
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(rec) => trials.push(rec),
            Err(e) => failures.push((seed, e.to_string())),
        }
    }

    let mut per_criterion = BTreeMap::new();
    for kind in &spec.criteria {
        let name = kind.name().to_string();
        let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
        let mut correct = 0usize;
        for t in &trials {
            let out = &t.outcomes[&name];
            *histogram.entry(out.betti_hat).or_insert(0) += 1;
            if out.betti_hat == spec.expected_betti {
                correct += 1;
            }
        }
        let percent_correct = 100.0 * correct as f64 / spec.trials as f64;
        per_criterion.insert(name, CriterionReport { histogram, percent_correct });
    }

    Ok(ExperimentReport { spec: spec.clone(), per_criterion, trials, failures })
}

fn run_trial(spec: &ExperimentSpec, seed: u64) -> Result<TrialRecord> {
    let cfg = SamplerConfig {
        shape: spec.sampler.shape.clone(),
        n_points: spec.sampler.n_points,
        noise_sigma: spec.sampler.noise_sigma,
        seed,
    };
    let cloud = sample(&cfg)?;
    let dm = pairwise_distances(&cloud);
    let base = spec.scan_config(spec.criteria[0]);
    let results = scan_many(&dm, &base, &spec.criteria)?;
    let outcomes = spec
        .criteria
        .iter()
        .zip(results)
        .map(|(kind, res)| {
            (kind.name().to_string(), TrialOutcome { r_hat: res.r_hat, betti_hat: res.betti_hat })
        })
        .collect();
    Ok(TrialRecord { seed, outcomes })
}

/// Canonical JSON for the report; byte-identical across reruns of the same
/// spec.
pub fn report_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            name: "tiny".into(),
            q: 1,
            criteria: vec![CriterionKind::TraceDifference, CriterionKind::HilbertSchmidt],
            trials: 3,
            expected_betti: 1,
            seed_base: 40,
            sampler: SamplerSpec {
                shape: Shape::Circle { radius: 1.0 },
                n_points: 12,
                noise_sigma: 0.01,
            },
            scan: ScanSpec::default(),
        }
    }

    #[test]
    fn histogram_totals_match_trials() {
        let report = run_experiment(&tiny_spec()).unwrap();
        assert!(report.failures.is_empty());
        for (_, crit) in &report.per_criterion {
            let total: usize = crit.histogram.values().sum();
            assert_eq!(total, 3);
        }
        assert_eq!(report.trials.len(), 3);
    }

    #[test]
    fn percent_correct_is_exact_ratio() {
        let report = run_experiment(&tiny_spec()).unwrap();
        for (name, crit) in &report.per_criterion {
            let correct = report
                .trials
                .iter()
                .filter(|t| t.outcomes[name].betti_hat == 1)
                .count();
            assert_eq!(crit.percent_correct, 100.0 * correct as f64 / 3.0);
        }
    }

    #[test]
    fn reports_are_byte_identical() {
        let spec = tiny_spec();
        let a = report_json(&run_experiment(&spec).unwrap()).unwrap();
        let b = report_json(&run_experiment(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trial_report() {
        let mut spec = tiny_spec();
        spec.trials = 1;
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.trials.len(), 1);
        for (_, crit) in &report.per_criterion {
            assert_eq!(crit.histogram.values().sum::<usize>(), 1);
        }
    }

    #[test]
    fn toml_round_trip() {
        let spec = tiny_spec();
        let text = toml::to_string(&spec).unwrap();
        let back: ExperimentSpec = toml::from_str(&text).unwrap();
        assert_eq!(back.name, spec.name);
        assert_eq!(back.criteria, spec.criteria);
        assert_eq!(back.sampler.n_points, 12);
    }
}
