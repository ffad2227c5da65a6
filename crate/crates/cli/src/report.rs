//! Machine-readable pass/fail reports.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|measured − predicted| ≤ tolerance`
    Absolute,
    /// `|measured/predicted − 1| ≤ tolerance`
    Relative,
    /// `measured ≤ predicted + tolerance`
    AtMost,
    /// `measured ≥ predicted − tolerance`
    AtLeast,
    /// pass flag set by the caller
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub predicted: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    /// only gated checks decide the overall verdict
    pub gated: bool,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    fn new(name: &str, predicted: f64, measured: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::Absolute => (measured - predicted).abs() <= tolerance,
            Comparison::Relative => (measured / predicted - 1.0).abs() <= tolerance,
            Comparison::AtMost => measured <= predicted + tolerance,
            Comparison::AtLeast => measured >= predicted - tolerance,
            Comparison::Flag => false,
        };
        Check { name: name.into(), predicted, measured, tolerance, comparison, pass, gated: true, wall_time_s: 0.0, note: String::new() }
    }

    pub fn absolute(name: &str, predicted: f64, measured: f64, tolerance: f64) -> Self {
        Self::new(name, predicted, measured, tolerance, Comparison::Absolute)
    }

    pub fn relative(name: &str, predicted: f64, measured: f64, tolerance: f64) -> Self {
        Self::new(name, predicted, measured, tolerance, Comparison::Relative)
    }

    pub fn at_most(name: &str, bound: f64, measured: f64) -> Self {
        Self::new(name, bound, measured, 0.0, Comparison::AtMost)
    }

    pub fn at_least(name: &str, bound: f64, measured: f64) -> Self {
        Self::new(name, bound, measured, 0.0, Comparison::AtLeast)
    }

    /// A yes/no property; `measured` is recorded for context.
    pub fn flag(name: &str, pass: bool, measured: f64) -> Self {
        let mut c = Self::new(name, f64::NAN, measured, 0.0, Comparison::Flag);
        c.pass = pass;
        c
    }

    /// Wall-time limit on a timed section.
    pub fn runtime(name: &str, limit_s: f64, measured_s: f64) -> Self {
        let mut c = Self::at_most(name, limit_s, measured_s);
        c.wall_time_s = measured_s;
        c
    }

    /// Reported, never decides the verdict.
    pub fn diagnostic(mut self) -> Self {
        self.gated = false;
        self
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.wall_time_s = seconds;
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.note = text.into();
        self
    }

    /// NaN measurements never pass.
    pub fn verdict(&self) -> bool {
        self.pass && (self.comparison == Comparison::Flag || !self.measured.is_nan())
    }
}

/// One acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionReport {
    pub fn new(id: u32, title: &str, checks: Vec<Check>, wall_time_s: f64) -> Self {
        let pass = !checks.is_empty() && checks.iter().filter(|c| c.gated).all(Check::verdict);
        CriterionReport { id, title: title.into(), pass, wall_time_s, checks, error: None }
    }

    pub fn failed(id: u32, title: &str, error: String, wall_time_s: f64) -> Self {
        CriterionReport { id, title: title.into(), pass: false, wall_time_s, checks: Vec::new(), error: Some(error) }
    }

    /// One summary line: id, verdict, title, time and the failing checks.
    pub fn line(&self) -> String {
        let mut s = format!("criterion {:>2} {} {} ({:.1} s)", self.id, if self.pass { "PASS" } else { "FAIL" }, self.title, self.wall_time_s);
        let failing: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.gated && !c.verdict())
            .map(|c| format!("{} measured {:.4e} vs {:.4e}", c.name, c.measured, c.predicted))
            .collect();
        if !failing.is_empty() {
            s.push_str(" [");
            s.push_str(&failing.join("; "));
            s.push(']');
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(" [error: {e}]"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub kind: String,
    pub pass: bool,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionReport>,
    /// per-sweep-point reports
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub jobs: Vec<RunReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(name: &str, kind: &str) -> Self {
        RunReport {
            name: name.into(),
            kind: kind.into(),
            pass: false,
            wall_time_s: 0.0,
            checks: Vec::new(),
            criteria: Vec::new(),
            jobs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Overall verdict: every gated check, criterion and job passes.
    pub fn finish(&mut self, wall_time_s: f64) {
        self.wall_time_s = wall_time_s;
        self.pass = self.checks.iter().filter(|c| c.gated).all(Check::verdict)
            && self.criteria.iter().all(|c| c.pass)
            && self.jobs.iter().all(|j| j.pass);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn criterion(&self, id: u32) -> Option<&CriterionReport> {
        self.criteria.iter().find(|c| c.id == id)
    }
}
