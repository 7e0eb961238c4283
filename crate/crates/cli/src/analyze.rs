//! `analyze`: exact chain quantities per grid point, one row per quantity.

use std::path::PathBuf;

use logit_core::analysis::{
    bottleneck_lower_bound, expected_social_welfare, relaxation_bounds, set_mass, tv_distance, GameChain,
};
use logit_core::closed_form::{
    ck_expected_welfare, coordination_expected_welfare, or_expected_welfare, xor_expected_welfare,
};
use logit_core::{Beta, Distribution, Error as CoreError, GameSpec};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, GameConfig};
use crate::error::Result;
use crate::output::{flag, num, CsvSink, RunStamp};

/// Longest d(t) prefix written to the curve file per grid point.
pub const CURVE_ROWS: usize = 100_000;

struct Row {
    quantity: &'static str,
    value: String,
    status: String,
}

fn ok(quantity: &'static str, value: String) -> Row {
    Row { quantity, value, status: "ok".into() }
}

fn skipped(quantity: &'static str, why: &str) -> Row {
    Row { quantity, value: String::new(), status: format!("skipped({why})") }
}

/// Closed-form stationary welfare where one is known.
fn closed_welfare(game: &GameConfig, n: usize, beta: f64) -> Option<f64> {
    let p = if game.params.len() == 4 {
        [game.params[0], game.params[1], game.params[2], game.params[3]]
    } else {
        [3.0, 2.0, 0.0, 0.0]
    };
    match game.name.as_str() {
        "ck" => Some(ck_expected_welfare(beta)),
        "coordination" => Some(coordination_expected_welfare(p[0], p[1], p[2], p[3], beta)),
        "or" => Some(or_expected_welfare(n, beta)),
        "xor" => Some(xor_expected_welfare(n, beta)),
        _ => None,
    }
}

fn state_count(game: &GameSpec) -> u128 {
    game.strategy_counts().iter().try_fold(1u128, |acc, &c| acc.checked_mul(c as u128)).unwrap_or(u128::MAX)
}

fn point(cfg: &ExperimentConfig, game: &GameSpec, n: usize, b: f64) -> Result<(Vec<Row>, Vec<f64>)> {
    let beta = Beta::new(b)?;
    let states = state_count(game);
    let mut rows = vec![ok("states", states.to_string())];
    let closed = closed_welfare(&cfg.game, n, b);
    let exact_names = [
        "stationary_min",
        "stationary_max",
        "stationary_uniform",
        "EW_exact",
        "t_mix",
        "lambda_star",
        "t_rel",
        "spectral_lower",
        "spectral_upper",
        "bottleneck_lower",
    ];
    if states > cfg.caps.states as u128 {
        rows.extend(exact_names.iter().map(|q| skipped(q, "cap")));
        rows.push(match closed {
            Some(v) => ok("EW_closed", num(v)),
            None => skipped("EW_closed", "no closed form"),
        });
        return Ok((rows, Vec::new()));
    }
    let chain = GameChain::build_capped(game, beta, cfg.caps.states)?;
    let pi = &chain.stationary;
    let uniform = tv_distance(pi, &Distribution::uniform(pi.len()))? < 1e-12;
    rows.push(ok("stationary_min", num(pi.min())));
    rows.push(ok("stationary_max", num(pi.max())));
    rows.push(ok("stationary_uniform", flag(uniform)));
    rows.push(ok("EW_exact", num(expected_social_welfare(game, pi)?)));
    rows.push(match closed {
        Some(v) => ok("EW_closed", num(v)),
        None => skipped("EW_closed", "no closed form"),
    });
    let mut curve = Vec::new();
    match chain.mixing_time(cfg.epsilon, cfg.caps.horizon) {
        Ok(report) => {
            rows.push(ok("t_mix", report.t_mix.to_string()));
            curve = report.d_curve;
        }
        Err(CoreError::Horizon { .. }) => rows.push(skipped("t_mix", "horizon")),
        Err(e) => return Err(e.into()),
    }
    match relaxation_bounds(&chain.matrix, pi, cfg.epsilon) {
        Ok(sb) => {
            rows.push(ok("lambda_star", num(sb.lambda_star)));
            rows.push(ok("t_rel", num(sb.t_rel)));
            rows.push(ok("spectral_lower", num(sb.lower)));
            rows.push(ok("spectral_upper", num(sb.upper)));
        }
        Err(CoreError::NotReversible(_)) => {
            for q in ["lambda_star", "t_rel", "spectral_lower", "spectral_upper"] {
                rows.push(skipped(q, "nonreversible"));
            }
        }
        Err(e) => return Err(e.into()),
    }
    // S = {first profile} or its complement, whichever has mass <= 1/2
    let first = vec![0usize];
    let rest: Vec<usize> = (1..pi.len()).collect();
    let set = if set_mass(pi, &first) <= 0.5 { &first } else { &rest };
    rows.push(ok("bottleneck_lower", num(bottleneck_lower_bound(&chain.matrix, pi, set, cfg.epsilon)?)));
    curve.truncate(CURVE_ROWS);
    Ok((rows, curve))
}

/// Writes `analyze.csv` and `analyze_dcurve.csv` into the output directory.
pub fn run_analyze(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let game = cfg.game.build()?;
    let n = game.n_players();
    let betas = cfg.betas_for(n)?;
    let results: Vec<(Vec<Row>, Vec<f64>)> =
        betas.par_iter().map(|&b| point(cfg, &game, n, b)).collect::<Result<_>>()?;

    let stamp = RunStamp { config_hash: cfg.hash()?, seed: cfg.seed };
    let dir = &cfg.output.dir;
    let mut table = CsvSink::create(dir, "analyze.csv", &["game", "n", "beta", "quantity", "value", "status"], &stamp)?;
    let mut curves = CsvSink::create(dir, "analyze_dcurve.csv", &["game", "n", "beta", "t", "d"], &stamp)?;
    let label = game.name().to_string();
    for (&b, (rows, curve)) in betas.iter().zip(&results) {
        for r in rows {
            table.row([
                label.clone(),
                n.to_string(),
                num(b),
                r.quantity.to_string(),
                r.value.clone(),
                r.status.clone(),
            ])?;
        }
        for (t, d) in curve.iter().enumerate() {
            curves.row([label.clone(), n.to_string(), num(b), t.to_string(), num(*d)])?;
        }
    }
    Ok(vec![table.finish()?.0, curves.finish()?.0])
}
