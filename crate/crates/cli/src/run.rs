//! Running scenarios and rendering their reports.

use std::fmt::Write as _;

use riemap_core::{CheckContext, Measurement, Offender, SamplingStrategy, Verdict, VerificationReport};
use serde::Serialize;

use crate::scenario::{Scenario, Verification};

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Replaces every check tolerance.
    pub tolerance: Option<f64>,
    /// Replaces the sample count of grid and uniform sampling.
    pub samples: Option<usize>,
    /// Replaces the seed of uniform sampling.
    pub seed: Option<u64>,
    pub rank_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub map: String,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub worst_offender: Option<Offender>,
    pub residuals: Vec<Measurement>,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
}

impl CheckEntry {
    fn new(map: &str, r: VerificationReport) -> Self {
        Self {
            name: r.name,
            map: map.to_string(),
            verdict: r.verdict,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            samples: r.samples,
            worst_offender: r.worst_offender,
            residuals: r.residuals,
            measurements: r.measurements,
            notes: r.notes,
        }
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn measurement(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    /// Seed of the first uniformly sampled block, if any.
    pub seed: Option<u64>,
    pub checks: Vec<CheckEntry>,
}

impl RunReport {
    /// True when no check failed, was inconsistent or errored.
    pub fn success(&self) -> bool {
        self.checks.iter().all(|c| c.verdict.is_success())
    }

    pub fn check(&self, map: &str, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.map == map && c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.scenario);
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<12} {:<width$}  map={}  max_residual={:.3e}  tol={:.1e}  samples={}",
                c.verdict.as_str(),
                c.name,
                c.map,
                c.max_residual,
                c.tolerance,
                c.samples,
            );
            if !c.verdict.is_success() {
                if let Some(o) = &c.worst_offender {
                    let _ = writeln!(out, "      worst at {:?}: {}", o.point, o.detail);
                }
            }
            for note in &c.notes {
                let _ = writeln!(out, "      note: {note}");
            }
        }
        let failed = self.checks.iter().filter(|c| !c.verdict.is_success()).count();
        let _ = writeln!(out, "{} checks, {} not passing", self.checks.len(), failed);
        out
    }
}

fn effective_sampling(v: &Verification, opts: &RunOptions) -> riemap_core::Sampling {
    let mut sampling = v.sampling.clone();
    if !matches!(sampling.strategy, SamplingStrategy::Explicit(_)) {
        if let Some(n) = opts.samples {
            sampling.count = n;
        }
    }
    if let (SamplingStrategy::Uniform { seed }, Some(s)) = (&mut sampling.strategy, opts.seed) {
        *seed = s;
    }
    sampling
}

fn run_verification(v: &Verification, opts: &RunOptions) -> Vec<CheckEntry> {
    let mut map = (*v.map).clone();
    if let Some(t) = opts.rank_tolerance {
        map = map.with_rank_tolerance(t);
    }
    let mut tolerances = v.tolerances.clone();
    if let Some(t) = opts.tolerance {
        tolerances.set_global(t);
    }
    let sampling = effective_sampling(v, opts);
    let samples = match sampling.points(map.source().dim()) {
        Ok(s) => s,
        Err(e) => {
            return v
                .checks
                .iter()
                .map(|k| {
                    let r = VerificationReport::error(k.name(), tolerances.get(*k), 0, e.to_string());
                    CheckEntry::new(map.name(), r)
                })
                .collect()
        }
    };
    let ctx = CheckContext::new(&map, samples, tolerances);
    ctx.run_all(&v.checks)
        .into_iter()
        .map(|r| CheckEntry::new(map.name(), r))
        .collect()
}

/// Runs every `[verify]` block in order.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> RunReport {
    let seed = s
        .verifications
        .iter()
        .find_map(|v| effective_sampling(v, opts).seed());
    RunReport {
        scenario: s.name.clone(),
        seed,
        checks: s.verifications.iter().flat_map(|v| run_verification(v, opts)).collect(),
    }
}

/// Text for `describe`.
pub fn describe(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}: {}", s.name, s.description);
    for m in &s.manifolds {
        let j = if m.has_complex_structure() { ", complex structure" } else { "" };
        let _ = writeln!(out, "  manifold {} ({}){j}", m.name(), m.coords().join(", "));
    }
    for f in &s.maps {
        let comps: Vec<String> = f.components().iter().map(|e| e.to_string()).collect();
        let _ = writeln!(
            out,
            "  map {}: {} -> {}, ({})",
            f.name(),
            f.source().name(),
            f.target().name(),
            comps.join(", ")
        );
        for p in f.probes() {
            let _ = writeln!(out, "    probe {} = {:?}", p.name, p.vector.as_slice());
        }
    }
    for v in &s.verifications {
        let names: Vec<&str> = v.checks.iter().map(|k| k.name()).collect();
        let _ = writeln!(out, "  verify {} with {} sample(s): {}", v.map.name(), v.sampling.count, names.join(", "));
    }
    out
}
