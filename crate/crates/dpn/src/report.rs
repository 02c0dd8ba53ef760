//! Verification reports: counted checks with recorded failures.
//!
//! Verifiers enumerate every violated identity instead of aborting at the
//! first, so a failing hand-entered descent or parameter matrix can be
//! debugged from one run. Notes record scope limits (e.g. "checked up to
//! depth 3") that are part of an honest verdict.

use std::fmt;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    checks: usize,
    violations: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    /// Record one check; `describe` is only rendered on failure.
    pub fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(describe());
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn merge(&mut self, other: Report) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn checks(&self) -> usize {
        self.checks
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "all {} checks passed", self.checks)?;
        } else {
            write!(
                f,
                "{} of {} checks failed:",
                self.violations.len(),
                self.checks
            )?;
            for v in &self.violations {
                write!(f, "\n  - {}", v)?;
            }
        }
        for n in &self.notes {
            write!(f, "\n  note: {}", n)?;
        }
        Ok(())
    }
}
