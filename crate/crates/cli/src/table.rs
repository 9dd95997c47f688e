//! Plain-text rendering of experiment reports, with the estimated-value
//! histogram bucketed as 0, 1, 2, >2.

use std::fmt::Write;

use crate::experiment::ExperimentReport;

pub fn render(report: &ExperimentReport) -> String {
    let spec = &report.spec;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: q = {}, expected beta = {}, trials = {}, s = {}, t0 = {}",
        spec.name, spec.q, spec.expected_betti, spec.trials, spec.scan.s, spec.scan.t0
    );
    let _ = writeln!(
        out,
        "{:<12} {:>6} {:>6} {:>6} {:>6} {:>8} {:>16}",
        "criterion", "0", "1", "2", ">2", "total", "percent correct"
    );
    for (name, crit) in &report.per_criterion {
        let bucket = |b: usize| -> usize { crit.histogram.get(&b).copied().unwrap_or(0) };
        let above: usize =
            crit.histogram.iter().filter(|(k, _)| **k > 2).map(|(_, v)| v).sum();
        let total: usize = crit.histogram.values().sum();
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>6} {:>6} {:>6} {:>8} {:>15.1}%",
            name,
            bucket(0),
            bucket(1),
            bucket(2),
            above,
            total,
            crit.percent_correct
        );
    }
    if !report.failures.is_empty() {
        let _ = writeln!(out, "failed trials: {}", report.failures.len());
        for (seed, err) in &report.failures {
            let _ = writeln!(out, "  seed {seed}: {err}");
        }
    }
    out
}
