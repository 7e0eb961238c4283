//! `simulate`: coupled-chain coalescence campaigns.

use std::path::PathBuf;

use logit_core::coupling::{coalescence_sample, start_pairs, wilson_lower, wilson_upper, WILSON_Z};
use logit_core::Beta;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{num, CsvSink, RunStamp};

/// Grid point `k` draws from seed `seed + (k + 1) * GOLDEN`, so points do
/// not share random streams.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub beta: f64,
    pub pairs: usize,
    pub runs: u64,
    pub timeouts: u64,
    pub mean: f64,
    pub q50: u64,
    pub q90: u64,
    pub q99: u64,
    pub max: u64,
    pub p_le_3: f64,
    pub p_le_3_lo: f64,
    pub p_le_3_hi: f64,
}

impl SummaryRow {
    /// Mean coalescence time over `n ln n`.
    pub fn mean_over_n_log_n(&self) -> f64 {
        let n = self.n as f64;
        self.mean / (n * n.ln())
    }
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

fn player_counts(cfg: &ExperimentConfig) -> Vec<usize> {
    if cfg.game.is_sized() && !cfg.simulate.n_values.is_empty() {
        cfg.simulate.n_values.clone()
    } else {
        vec![cfg.game.n]
    }
}

/// Writes `simulate_trials.csv` (one row per run) and `simulate_summary.csv`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<(Vec<PathBuf>, Vec<SummaryRow>)> {
    cfg.validate()?;
    let s = &cfg.simulate;
    let stamp = RunStamp { config_hash: cfg.hash()?, seed: cfg.seed };
    let dir = &cfg.output.dir;
    let mut trials =
        CsvSink::create(dir, "simulate_trials.csv", &["n", "beta", "pair", "x", "y", "trial", "tau"], &stamp)?;
    let header = [
        "n",
        "beta",
        "pairs",
        "runs",
        "timeouts",
        "mean",
        "q50",
        "q90",
        "q99",
        "max",
        "p_le_3",
        "p_le_3_lo",
        "p_le_3_hi",
        "mean_over_nlogn",
    ];
    let mut summary = CsvSink::create(dir, "simulate_summary.csv", &header, &stamp)?;
    let mut rows = Vec::new();
    let mut point = 0u64;
    for n in player_counts(cfg) {
        let game = cfg.game.build_with_n(n)?;
        if !game.is_two_strategy() {
            return Err(CliError::Config(format!("simulate needs a two-strategy game, `{}` is not", cfg.game.name)));
        }
        let n = game.n_players();
        for b in cfg.betas_for(n)? {
            point += 1;
            let seed = cfg.seed.wrapping_add(point.wrapping_mul(GOLDEN));
            let pairs = start_pairs(&game, s.all_pairs_cap, s.extra_pairs, seed)?;
            let mut done = Vec::new();
            let mut timeouts = 0u64;
            for (p, pair) in pairs.iter().enumerate() {
                let sample = coalescence_sample(&game, pair, p as u64, Beta::new(b)?, s.trials, s.horizon, seed)?;
                for (k, tau) in sample.iter().enumerate() {
                    let tau_text = match tau {
                        Some(t) => {
                            done.push(*t);
                            t.to_string()
                        }
                        None => {
                            timeouts += 1;
                            "timeout".to_string()
                        }
                    };
                    trials.row([
                        n.to_string(),
                        num(b),
                        p.to_string(),
                        pair.0.to_string(),
                        pair.1.to_string(),
                        k.to_string(),
                        tau_text,
                    ])?;
                }
            }
            let runs = pairs.len() as u64 * s.trials;
            done.sort_unstable();
            let hits = done.iter().filter(|&&t| t <= 3).count() as u64;
            let row = SummaryRow {
                n,
                beta: b,
                pairs: pairs.len(),
                runs,
                timeouts,
                mean: done.iter().sum::<u64>() as f64 / done.len().max(1) as f64,
                q50: quantile(&done, 0.5),
                q90: quantile(&done, 0.9),
                q99: quantile(&done, 0.99),
                max: done.last().copied().unwrap_or(0),
                p_le_3: hits as f64 / runs as f64,
                p_le_3_lo: wilson_lower(hits, runs, WILSON_Z),
                p_le_3_hi: wilson_upper(hits, runs, WILSON_Z),
            };
            summary.row([
                n.to_string(),
                num(b),
                row.pairs.to_string(),
                runs.to_string(),
                timeouts.to_string(),
                num(row.mean),
                row.q50.to_string(),
                row.q90.to_string(),
                row.q99.to_string(),
                row.max.to_string(),
                num(row.p_le_3),
                num(row.p_le_3_lo),
                num(row.p_le_3_hi),
                num(row.mean_over_n_log_n()),
            ])?;
            rows.push(row);
        }
    }
    Ok((vec![trials.finish()?.0, summary.finish()?.0], rows))
}
