//! Named checks and the plain-text report.

use std::fmt::Write;

use plap_core::evolution::Verdict;

/// One pass/fail judgement. Every number written to a report belongs to
/// exactly one of these, next to the slack it was judged against.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Amount by which the checked quantity exceeded its bound.
    pub worst_excess: f64,
    pub slack: f64,
    pub values: Vec<(String, f64)>,
    pub note: Option<String>,
}

impl Check {
    /// Passes when `excess <= slack`.
    pub fn new(name: impl Into<String>, excess: f64, slack: f64) -> Self {
        Self::from(Verdict::new(name, excess, slack))
    }

    /// A yes/no condition, recorded as excess 0 (pass) or 1 (fail).
    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self::new(name, if pass { 0.0 } else { 1.0 }, 0.0)
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, why: impl Into<String>) -> Self {
        Self {
            note: Some(why.into()),
            ..Self::flag(name, false)
        }
    }

    pub fn value(mut self, name: impl Into<String>, x: f64) -> Self {
        self.values.push((name.into(), x));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl From<Verdict> for Check {
    fn from(v: Verdict) -> Self {
        Self {
            name: v.name,
            pass: v.pass,
            worst_excess: v.worst_excess,
            slack: v.slack,
            values: Vec::new(),
            note: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub checks: Vec<Check>,
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario = {}", self.scenario);
        let _ = writeln!(out, "status = {}", status(self.pass()));
        let _ = writeln!(out, "checks = {}", self.checks.len());
        for c in &self.checks {
            let _ = writeln!(out, "\n[check {}]", c.name);
            let _ = writeln!(out, "status = {}", status(c.pass));
            let _ = writeln!(out, "worst_excess = {:e}", c.worst_excess);
            let _ = writeln!(out, "slack = {:e}", c.slack);
            for (k, v) in &c.values {
                let _ = writeln!(out, "{k} = {v:e}");
            }
            if let Some(n) = &c.note {
                let _ = writeln!(out, "note = {n}");
            }
        }
        out
    }

    /// One line per check, for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<32} excess {:>12.4e}  slack {:.2e}",
                status(c.pass),
                c.name,
                c.worst_excess,
                c.slack
            );
        }
        out
    }
}
