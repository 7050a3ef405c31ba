use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// One line of the battery. Unasserted checks are recorded but never fail a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub asserted: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub subject: String,
    pub settings: Map<String, Value>,
    pub checks: Vec<Check>,
    pub advisories: Vec<String>,
    pub results: Map<String, Value>,
    pub all_passed: bool,
}

impl Report {
    pub fn new(command: &str, subject: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            subject: subject.into(),
            settings: Map::new(),
            checks: Vec::new(),
            advisories: Vec::new(),
            results: Map::new(),
            all_passed: true,
        }
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) {
        self.settings.insert(key.into(), to_value(value));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), to_value(value));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.push(name, true, passed, detail.into());
    }

    /// Recorded for the reader; has no effect on the exit status.
    pub fn note(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.push(name, false, passed, detail.into());
    }

    pub fn advise(&mut self, text: impl Into<String>) {
        self.advisories.push(text.into());
    }

    fn push(&mut self, name: &str, asserted: bool, passed: bool, detail: String) {
        if asserted && !passed {
            self.all_passed = false;
        }
        self.checks.push(Check {
            name: name.into(),
            asserted,
            passed,
            detail,
        });
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)? + "\n";
        fs::write(dir.join("report.json"), json).with_context(|| format!("writing report to {}", dir.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("report.json");
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.command, self.subject);
        for c in &self.checks {
            let mark = match (c.asserted, c.passed) {
                (true, true) => "PASS",
                (true, false) => "FAIL",
                (false, true) => "info",
                (false, false) => "note",
            };
            let _ = writeln!(out, "  [{mark}] {}: {}", c.name, c.detail);
        }
        for a in &self.advisories {
            let _ = writeln!(out, "  advisory: {a}");
        }
        let asserted = self.checks.iter().filter(|c| c.asserted).count();
        let failed = self.checks.iter().filter(|c| c.asserted && !c.passed).count();
        let _ = writeln!(out, "{} of {asserted} asserted checks passed", asserted - failed);
        out
    }
}

fn to_value(v: impl Serialize) -> Value {
    // non-finite floats serialize as null
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notes_do_not_fail_the_run() {
        let mut r = Report::new("verify-example", "ex2.4");
        r.note("informational", false, "reported only");
        assert!(r.all_passed);
        r.check("real", false, "broken");
        assert!(!r.all_passed);
        assert!(r.summary().contains("[FAIL] real"));
        assert!(r.summary().contains("0 of 1 asserted checks passed"));
    }

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("solve-fbvp", "demo");
        r.setting("n", 16);
        r.result("lambda", 0.25);
        r.check("ok", true, "fine");
        r.write(dir.path()).unwrap();
        let back = Report::read(dir.path()).unwrap();
        assert_eq!(back.checks.len(), 1);
        assert_eq!(back.results["lambda"], 0.25);
    }
}
