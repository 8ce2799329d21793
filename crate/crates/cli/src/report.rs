//! Machine-readable run reports. Every pass/fail item carries both the
//! recomputed value and the expected one, so a report can be re-audited
//! without rerunning anything. Serialization order is fixed; reruns with
//! the same seed differ only in the timing field.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct ReportItem {
    pub name: String,
    pub passed: bool,
    pub expected: String,
    pub computed: String,
}

impl ReportItem {
    pub fn new(
        name: impl Into<String>,
        passed: bool,
        expected: impl Into<String>,
        computed: impl Into<String>,
    ) -> Self {
        ReportItem {
            name: name.into(),
            passed,
            expected: expected.into(),
            computed: computed.into(),
        }
    }

    pub fn check<T: PartialEq + std::fmt::Display>(
        name: impl Into<String>,
        expected: T,
        computed: T,
    ) -> Self {
        let passed = expected == computed;
        ReportItem {
            name: name.into(),
            passed,
            expected: expected.to_string(),
            computed: computed.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSection {
    pub name: String,
    pub passed: bool,
    pub items: Vec<ReportItem>,
}

impl ReportSection {
    pub fn new(name: impl Into<String>, items: Vec<ReportItem>) -> Self {
        let passed = items.iter().all(|i| i.passed);
        ReportSection { name: name.into(), passed, items }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: serde_json::Value,
    pub sections: Vec<ReportSection>,
    pub passed: bool,
    /// Timing; the only field that varies between identical runs.
    pub wall_ms: u128,
}

impl RunReport {
    pub fn new(command: &str, inputs: serde_json::Value, sections: Vec<ReportSection>) -> Self {
        let passed = sections.iter().all(|s| s.passed);
        RunReport {
            command: command.to_string(),
            inputs,
            sections,
            passed,
            wall_ms: 0,
        }
    }

    pub fn print_human(&self) {
        for section in &self.sections {
            let flag = if section.passed { "PASS" } else { "FAIL" };
            println!("[{flag}] {}", section.name);
            for item in &section.items {
                if item.passed {
                    println!("    ok   {}", item.name);
                } else {
                    println!(
                        "    FAIL {}: expected {}, computed {}",
                        item.name, item.expected, item.computed
                    );
                }
            }
        }
        println!(
            "overall: {} ({} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.wall_ms
        );
    }
}
