//! Verification reports: verdicts, per-condition residuals, worst offenders.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Hypotheses of the statement do not hold (or there is nothing to check).
    VacuousPass,
    /// Two independently measured sides of an equivalence disagree.
    Inconsistent,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::VacuousPass => "vacuous-pass",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Error => "error",
        }
    }

    pub fn is_success(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::VacuousPass)
    }

    /// Combines the verdicts of the two sides of an equivalence.
    pub fn biconditional(a: bool, b: bool) -> Verdict {
        match (a, b) {
            (true, true) => Verdict::Pass,
            (false, false) => Verdict::Fail,
            _ => Verdict::Inconsistent,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Offender {
    pub point: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    /// Largest residual seen for every sub-condition, in first-seen order.
    pub residuals: Vec<Measurement>,
    /// Informational values that do not enter the verdict directly.
    pub measurements: Vec<Measurement>,
    pub worst_offender: Option<Offender>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn residual(&self, condition: &str) -> Option<f64> {
        self.residuals.iter().find(|m| m.name == condition).map(|m| m.value)
    }

    pub fn measurement(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// All residuals strictly below tolerance (NaN counts as a violation).
    pub fn within_tolerance(&self) -> bool {
        self.residuals.iter().all(|m| m.value < self.tolerance)
    }

    pub fn error(name: impl Into<String>, tolerance: f64, samples: usize, message: String) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::Error,
            max_residual: f64::NAN,
            tolerance,
            samples,
            residuals: Vec::new(),
            measurements: Vec::new(),
            worst_offender: None,
            notes: vec![message],
        }
    }
}

/// Accumulates residuals sample by sample. Feed samples in a fixed order to keep
/// reports reproducible: ties keep the first offender.
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    name: String,
    tolerance: f64,
    samples: usize,
    residuals: Vec<Measurement>,
    measurements: Vec<Measurement>,
    worst: Option<(f64, Offender)>,
    notes: Vec<String>,
}

fn severity(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

impl ReportBuilder {
    pub fn new(name: impl Into<String>, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            tolerance,
            samples,
            residuals: Vec::new(),
            measurements: Vec::new(),
            worst: None,
            notes: Vec::new(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Declares a condition so it shows up with residual 0 even if never fed.
    pub fn declare(&mut self, condition: &str) {
        if !self.residuals.iter().any(|m| m.name == condition) {
            self.residuals.push(Measurement {
                name: condition.to_string(),
                value: 0.0,
            });
        }
    }

    pub fn residual(&mut self, condition: &str, value: f64, point: &[f64], detail: impl FnOnce() -> String) {
        let value = value.abs();
        match self.residuals.iter_mut().find(|m| m.name == condition) {
            Some(m) => {
                if severity(value) > severity(m.value) {
                    m.value = value;
                }
            }
            None => self.residuals.push(Measurement {
                name: condition.to_string(),
                value,
            }),
        }
        let worse = self
            .worst
            .as_ref()
            .map_or(value > 0.0 || value.is_nan(), |(w, _)| severity(value) > *w);
        if worse {
            self.worst = Some((
                severity(value),
                Offender {
                    point: point.to_vec(),
                    detail: format!("{condition}: {}", detail()),
                },
            ));
        }
    }

    /// Records an informational value, keeping the largest one seen.
    pub fn measure_max(&mut self, name: &str, value: f64) {
        match self.measurements.iter_mut().find(|m| m.name == name) {
            Some(m) => {
                if severity(value) > severity(m.value) {
                    m.value = value;
                }
            }
            None => self.measure(name, value),
        }
    }

    /// Records an informational value, replacing any earlier one.
    pub fn measure(&mut self, name: &str, value: f64) {
        match self.measurements.iter_mut().find(|m| m.name == name) {
            Some(m) => m.value = value,
            None => self.measurements.push(Measurement {
                name: name.to_string(),
                value,
            }),
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Residuals become side measurements with a prefix; used when embedding the
    /// outcome of one check inside another.
    pub fn absorb_as_measurements(&mut self, prefix: &str, report: &VerificationReport) {
        for m in &report.residuals {
            self.measure_max(&format!("{prefix}.{}", m.name), m.value);
        }
    }

    /// Current maximum for `condition`, if it has been declared or fed.
    pub fn current(&self, condition: &str) -> Option<f64> {
        self.residuals.iter().find(|m| m.name == condition).map(|m| m.value)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .fold(0.0_f64, |acc, m| if severity(m.value) > acc { severity(m.value) } else { acc })
    }

    pub fn within_tolerance(&self) -> bool {
        self.residuals.iter().all(|m| m.value < self.tolerance)
    }

    /// Verdict from tolerance: pass iff every residual is below it.
    pub fn finish(self) -> VerificationReport {
        let verdict = if self.within_tolerance() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self.finish_with(verdict)
    }

    pub fn finish_with(self, verdict: Verdict) -> VerificationReport {
        let max_residual = self.max_residual();
        VerificationReport {
            name: self.name,
            verdict,
            max_residual,
            tolerance: self.tolerance,
            samples: self.samples,
            residuals: self.residuals,
            measurements: self.measurements,
            worst_offender: self.worst.map(|(_, o)| o),
            notes: self.notes,
        }
    }
}
