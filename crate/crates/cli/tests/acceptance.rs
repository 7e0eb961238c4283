//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! The small-beta OR schedule's level-3 edge inequality is false for every n
//! (its left side is 1 - 2/(3n) against e^{-1/n}), so criterion 5 reports
//! FAIL. Those rows, and only those, are tolerated for the exit status; any
//! other failing check makes the run exit nonzero.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use logit_cli::config::{BetaSpec, ExperimentConfig};
use logit_cli::suite::{Check, Suite, CRITERIA};
use logit_cli::{run_simulate, run_verify};

fn expected_failure(c: &Check) -> bool {
    c.criterion == 5 && c.group == "or-edges" && c.name.starts_with("small_beta")
}

fn describe(c: &Check) -> String {
    format!("{} (value {:e}, bound {:e})", c.name, c.value, c.bound)
}

fn small_config(dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.game.name = "ck".into();
    c.beta_grid = vec![BetaSpec::Value(0.0), BetaSpec::Value(1.0), BetaSpec::Expr("ln n".into())];
    c.output.dir = dir.to_path_buf();
    let v = &mut c.verify;
    v.welfare_n = vec![2, 3];
    v.coordination_params.truncate(2);
    v.bottleneck_n = vec![3, 4];
    v.domination_n = vec![3];
    v.schedule_n = vec![3, 8];
    v.recursion_n = vec![4, 8];
    v.log_beta_n = vec![16];
    v.xor_law_n = vec![2, 3];
    v.xor_n = vec![4];
    v.ck_extra_beta.clear();
    v.stairs_exact_n = vec![2];
    v.stairs_n = vec![4, 8];
    v.stairs_trials = 60;
    v.invariant_n = vec![2];
    c.simulate.trials = 40;
    c
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Runs verify and simulate twice on the same config in separate directories.
fn determinism() -> Result<String, String> {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = small_config(dir.path());
        run_verify(&cfg).map_err(|e| e.to_string())?;
        run_simulate(&cfg).map_err(|e| e.to_string())?;
        outputs.push(read_all(dir.path()));
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    if outputs[0] == outputs[1] {
        Ok(format!("{} files byte-identical: {}", names.len(), names.join(", ")))
    } else {
        Err("outputs differ between identical runs".into())
    }
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default();
    let suite = Suite::new(&cfg);
    let mut unexpected = 0;
    let mut passed = 0;
    for &(k, title) in CRITERIA.iter() {
        let start = Instant::now();
        let outcome = if k == 10 {
            determinism().map(|detail| (1usize, Vec::new(), detail))
        } else {
            suite
                .criterion(k)
                .map(|checks| {
                    let failed: Vec<Check> = checks.iter().filter(|c| !c.pass).cloned().collect();
                    (checks.len(), failed, String::new())
                })
                .map_err(|e| e.to_string())
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok((total, failed, detail)) if failed.is_empty() && total > 0 => {
                passed += 1;
                let detail = if detail.is_empty() { format!("{total} checks") } else { detail };
                println!("PASS criterion {k:>2}: {title} [{detail}, {secs:.1}s]");
            }
            Ok((total, failed, _)) => {
                let tolerated = !failed.is_empty() && failed.iter().all(expected_failure);
                if !tolerated {
                    unexpected += 1;
                }
                let first = failed.first().map(describe).unwrap_or_else(|| "no checks ran".into());
                let note = if tolerated { " (known defect in the small-beta schedule; see README)" } else { "" };
                println!(
                    "FAIL criterion {k:>2}: {title} [{} of {total} checks failed, first: {first}, {secs:.1}s]{note}",
                    failed.len()
                );
            }
            Err(e) => {
                unexpected += 1;
                println!("FAIL criterion {k:>2}: {title} [error: {e}, {secs:.1}s]");
            }
        }
    }
    println!("acceptance: {passed} of {} criteria passed, {unexpected} unexpected failures", CRITERIA.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
