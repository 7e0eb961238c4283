//! `verify`: runs the whole check suite and writes a report with margins.

use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::error::{Result, EXIT_OK, EXIT_VERIFY};
use crate::output::{flag, num, CsvSink, RunStamp};
use crate::suite::{Check, Suite};

#[derive(Debug, Clone)]
pub struct VerifySummary {
    pub report: PathBuf,
    pub total: usize,
    pub failures: Vec<Check>,
}

impl VerifySummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_VERIFY
        }
    }
}

pub const REPORT_HEADER: [&str; 7] = ["criterion", "group", "check", "value", "bound", "margin", "pass"];

/// Runs every check and writes `verify_report.csv`. A failing check is not
/// an error here; see [`VerifySummary::exit_code`].
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifySummary> {
    cfg.validate()?;
    let checks = Suite::new(cfg).run_all()?;
    let stamp = RunStamp { config_hash: cfg.hash()?, seed: cfg.seed };
    let mut sink = CsvSink::create(&cfg.output.dir, "verify_report.csv", &REPORT_HEADER, &stamp)?;
    for c in &checks {
        sink.row([
            c.criterion.to_string(),
            c.group.to_string(),
            c.name.clone(),
            num(c.value),
            num(c.bound),
            num(c.margin),
            flag(c.pass),
        ])?;
    }
    let (report, _) = sink.finish()?;
    let failures = checks.iter().filter(|c| !c.pass).cloned().collect();
    Ok(VerifySummary { report, total: checks.len(), failures })
}
