use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use logit_cli::config::{BetaSpec, ExperimentConfig};
use logit_cli::error::{EXIT_CONFIG, EXIT_VERIFY};
use logit_cli::{run_analyze, run_simulate, run_sweep, run_verify};

const BIN: &str = env!("CARGO_BIN_EXE_logit-dynamics");

fn config(dir: &Path, game: &str, n: usize, betas: &[f64]) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.game.name = game.into();
    c.game.n = n;
    c.beta_grid = betas.iter().map(|&b| BetaSpec::Value(b)).collect();
    c.output.dir = dir.to_path_buf();
    c
}

/// Data rows keyed by column name, after checking the comment and header rows.
fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let stamp = lines.next().unwrap();
    assert!(stamp.starts_with("# config_hash=") && stamp.contains(",seed="), "{stamp}");
    assert!(!text.contains('\r'));
    let body: String = text.split_once('\n').unwrap().1.to_string();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert!(!header.is_empty());
    reader.records().map(|r| header.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect()).collect()
}

fn quantity<'a>(rows: &'a [HashMap<String, String>], beta: &str, q: &str) -> &'a HashMap<String, String> {
    rows.iter().find(|r| r["beta"] == beta && r["quantity"] == q).unwrap_or_else(|| panic!("missing {q} at {beta}"))
}

/// A verify config small enough for a unit-test budget.
fn small_verify(dir: &Path) -> ExperimentConfig {
    let mut c = config(dir, "ck", 2, &[0.0, 1.0]);
    let v = &mut c.verify;
    v.welfare_n = vec![3];
    v.coordination_params.truncate(1);
    v.bottleneck_n = vec![3];
    v.domination_n = vec![3];
    v.schedule_n = vec![4, 5];
    v.recursion_n = vec![4];
    v.log_beta_n = vec![16];
    v.xor_law_n = vec![3];
    v.xor_n = vec![4];
    v.ck_extra_beta.clear();
    v.stairs_exact_n = vec![2];
    v.stairs_n = vec![4, 8];
    v.stairs_trials = 60;
    v.invariant_n = vec![2];
    c
}

#[test]
fn analyze_ck_welfare_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run_analyze(&config(dir.path(), "ck", 3, &[0.0, 1.0])).unwrap();
    let rows = read_csv(&paths[0]);
    for q in ["EW_exact", "EW_closed"] {
        let v: f64 = quantity(&rows, "0", q)["value"].parse().unwrap();
        assert!((v + 13.5).abs() < 1e-12, "{q} = {v}");
    }
    let t: u64 = quantity(&rows, "1", "t_mix")["value"].parse().unwrap();
    assert!(t >= 1);
}

#[test]
fn analyze_caps_state_count() {
    let dir = tempfile::tempdir().unwrap();
    let rows = read_csv(&run_analyze(&config(dir.path(), "or", 6, &[1.0])).unwrap()[0]);
    let t = quantity(&rows, "1", "t_mix");
    assert_eq!(t["status"], "ok");
    assert!(t["value"].parse::<u64>().unwrap() > 0);

    let dir = tempfile::tempdir().unwrap();
    let rows = read_csv(&run_analyze(&config(dir.path(), "or", 20, &[1.0])).unwrap()[0]);
    assert_eq!(quantity(&rows, "1", "t_mix")["status"], "skipped(cap)");
    assert_eq!(quantity(&rows, "1", "states")["value"], (1u64 << 20).to_string());
    // closed forms need no enumeration
    assert_eq!(quantity(&rows, "1", "EW_closed")["status"], "ok");
}

#[test]
fn analyze_matching_pennies_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run_analyze(&config(dir.path(), "matching_pennies", 2, &[0.5, 5.0])).unwrap();
    let rows = read_csv(&paths[0]);
    for b in ["0.5", "5"] {
        assert_eq!(quantity(&rows, b, "stationary_uniform")["value"], "true");
        assert_eq!(quantity(&rows, b, "lambda_star")["status"], "skipped(nonreversible)");
    }
    let curve = read_csv(&paths[1]);
    assert_eq!(curve[0]["t"], "0");
}

#[test]
fn verify_small_config_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_verify(&small_verify(dir.path())).unwrap();
    let rows = read_csv(&summary.report);
    assert_eq!(rows.len(), summary.total);
    // with n < 8 the small-beta schedule is never in scope
    assert!(summary.failures.is_empty(), "{:?}", summary.failures.first());
    assert_eq!(summary.exit_code(), 0);
    for k in 0..=9 {
        assert!(rows.iter().any(|r| r["criterion"] == k.to_string()), "criterion {k} missing");
    }
    assert!(rows.iter().all(|r| r["margin"].parse::<f64>().is_ok()));
}

#[test]
fn corrupted_schedule_names_the_broken_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_verify(dir.path());
    c.verify.corrupt_schedule = true;
    let summary = run_verify(&c).unwrap();
    assert_eq!(summary.exit_code(), EXIT_VERIFY);
    assert!(summary
        .failures
        .iter()
        .any(|f| f.group == "or-edges" && f.name.contains("custom") && f.name.contains("edge k=")));
}

#[test]
fn simulate_ck_three_step_coalescence() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "ck", 3, &[0.0, 2.0, 10.0]);
    c.simulate.trials = 400;
    let (paths, rows) = run_simulate(&c).unwrap();
    for r in &rows {
        assert_eq!(r.pairs, 56);
        assert!(r.p_le_3_hi >= 1.0 / 36.0, "beta {}: {:?}", r.beta, r);
        assert!(r.p_le_3 >= 1.0 / 36.0);
    }
    let trials = read_csv(&paths[0]);
    assert_eq!(trials.len(), 3 * 56 * 400);
}

#[test]
fn simulate_stairs_ratio_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "stairs", 4, &[1.0]);
    c.simulate.n_values = vec![4, 8, 16, 32];
    c.simulate.trials = 100;
    let (_, rows) = run_simulate(&c).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.mean_over_n_log_n()).collect();
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 10.0, "{ratios:?}");
    assert!(rows.iter().all(|r| r.timeouts == 0));
}

#[test]
fn simulate_is_deterministic() {
    let run = |seed: u64| {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path(), "xor", 4, &[0.5, 2.0]);
        c.seed = seed;
        c.simulate.trials = 50;
        let (paths, _) = run_simulate(&c).unwrap();
        paths.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(11), run(11));
    assert_ne!(run(11), run(12));
}

#[test]
fn sweep_tables_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "or", 6, &[0.0, 2.0]);
    c.beta_grid.push(BetaSpec::Expr("ln n".into()));
    c.sweep.n_values = vec![2, 5, 16];
    let paths = run_sweep(&c).unwrap();
    assert_eq!(paths.len(), 4);
    let xor = read_csv(&paths[2]);
    for r in &xor {
        let (a, b): (f64, f64) = (r["nu_closed"].parse().unwrap(), r["nu_linear"].parse().unwrap());
        assert!((a - b).abs() <= 1e-9 * b, "{r:?}");
    }
    let summary = read_csv(&paths[1]);
    // n = 2 has no OR edge system; 2 n-values x 3 betas x 3 schedules
    assert_eq!(summary.len(), 18);
    assert!(summary.iter().filter(|r| r["schedule"] == "large_beta").all(|r| r["edges_pass"] == "true"));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "beta_grid = []\n").unwrap();
    let out = dir.path().join("out");
    let status = Command::new(BIN)
        .args(["verify", "--config", empty.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_CONFIG));
    assert!(!out.exists(), "nothing may run before the config is accepted");

    let status = Command::new(BIN).args(["analyze", "--game", "chess"]).status().unwrap();
    assert_eq!(status.code(), Some(EXIT_CONFIG));
    let status = Command::new(BIN).args(["analyze", "--eps", "0.7"]).status().unwrap();
    assert_eq!(status.code(), Some(EXIT_CONFIG));

    let o = Command::new(BIN)
        .args(["analyze", "--game", "coordination", "--params", "3,2,0,0", "--beta", "0,ln n", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("analyze.csv"));
    assert!(rows.iter().any(|r| r["beta"] == "0.6931471805599453"));
}

#[test]
fn binary_verify_fails_on_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("small.toml");
    let mut c = small_verify(&dir.path().join("out"));
    std::fs::write(&cfg_path, c.to_toml().unwrap()).unwrap();
    let o = Command::new(BIN).args(["verify", "--config", cfg_path.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = Command::new(BIN)
        .args(["verify", "--corrupt-schedule", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_VERIFY));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("custom") && err.contains("edge k="), "{err}");

    c.verify.corrupt_schedule = true;
    assert!(c.to_toml().unwrap().contains("corrupt_schedule = true"));
}

#[test]
fn binary_config_round_trips() {
    let o = Command::new(BIN).args(["config", "--seed", "5"]).output().unwrap();
    assert!(o.status.success());
    let c = ExperimentConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(c.seed, 5);
}

#[test]
fn shipped_example_config_is_the_default() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let c = ExperimentConfig::load(&path).unwrap();
    assert_eq!(c, ExperimentConfig::default());
}
