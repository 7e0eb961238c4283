//! `sweep`: OR weight schedules and XOR hitting times over player counts.

use std::path::PathBuf;

use logit_core::or_path::{
    achieved_alpha, check_edge_inequalities, weights_large_beta, weights_log_beta, weights_small_beta,
};
use logit_core::xor::{
    distance_hitting_times, expected_coalescence_bound, expected_coalescence_exact, mu_closed_form, nu_closed_form,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{flag, num, CsvSink, RunStamp};

type Rows = Vec<Vec<String>>;

fn or_point(cfg: &ExperimentConfig, n: usize, b: f64) -> Result<(Rows, Rows)> {
    let schedules =
        [weights_large_beta(n)?, weights_small_beta(n, cfg.verify.small_beta_eps)?, weights_log_beta(n, b)?];
    let (mut edges, mut summary) = (Vec::new(), Vec::new());
    for s in &schedules {
        let report = check_edge_inequalities(n, b, s)?;
        for r in &report.rows {
            edges.push(vec![
                n.to_string(),
                num(b),
                s.kind.label().to_string(),
                r.k.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.slack),
                flag(r.pass),
            ]);
        }
        summary.push(vec![
            n.to_string(),
            num(b),
            s.kind.label().to_string(),
            num(s.delta_max()),
            num(s.diameter()),
            num(s.alpha),
            num(achieved_alpha(n, b, &s.deltas)?),
            num(s.mixing_bound(cfg.epsilon)?),
            flag(report.all_pass()),
        ]);
    }
    Ok((edges, summary))
}

fn xor_point(n: usize, b: f64) -> Result<(Rows, Rows)> {
    let h = distance_hitting_times(n, b)?;
    let mut rows = Vec::new();
    for ell in 1..=h.nu.len() {
        let (mu_c, mu_l) = match h.mu.get(ell - 1) {
            Some(&m) => (num(mu_closed_form(n, b, ell)?), num(m)),
            None => (String::new(), String::new()),
        };
        rows.push(vec![
            n.to_string(),
            num(b),
            ell.to_string(),
            num(nu_closed_form(n, b, ell)?),
            num(h.nu[ell - 1]),
            mu_c,
            mu_l,
        ]);
    }
    let bound = expected_coalescence_bound(n, b)?;
    let summary = vec![vec![
        n.to_string(),
        num(b),
        num(bound.sum),
        num(1.0 + expected_coalescence_exact(n, b)?),
        num(bound.envelope),
        num(bound.mixing_bound()),
    ]];
    Ok((rows, summary))
}

fn write(cfg: &ExperimentConfig, stamp: &RunStamp, name: &str, header: &[&str], rows: &[Rows]) -> Result<PathBuf> {
    let mut sink = CsvSink::create(&cfg.output.dir, name, header, stamp)?;
    for row in rows.iter().flatten() {
        sink.row(row)?;
    }
    Ok(sink.finish()?.0)
}

/// Writes the four sweep files; OR points need `n >= 3`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &n in &cfg.sweep.n_values {
        for b in cfg.betas_for(n)? {
            points.push((n, b));
        }
    }
    let or_points: Vec<(usize, f64)> = points.iter().copied().filter(|&(n, _)| n >= 3).collect();
    let or: Vec<(Rows, Rows)> = or_points.par_iter().map(|&(n, b)| or_point(cfg, n, b)).collect::<Result<_>>()?;
    let xor: Vec<(Rows, Rows)> = points.par_iter().map(|&(n, b)| xor_point(n, b)).collect::<Result<_>>()?;
    let (or_edges, or_summary): (Vec<Rows>, Vec<Rows>) = or.into_iter().unzip();
    let (xor_rows, xor_summary): (Vec<Rows>, Vec<Rows>) = xor.into_iter().unzip();

    let stamp = RunStamp { config_hash: cfg.hash()?, seed: cfg.seed };
    Ok(vec![
        write(
            cfg,
            &stamp,
            "sweep_or_edges.csv",
            &["n", "beta", "schedule", "k", "lhs", "rhs", "slack", "pass"],
            &or_edges,
        )?,
        write(
            cfg,
            &stamp,
            "sweep_or_summary.csv",
            &["n", "beta", "schedule", "delta_max", "diameter", "alpha", "achieved_alpha", "bound", "edges_pass"],
            &or_summary,
        )?,
        write(
            cfg,
            &stamp,
            "sweep_xor.csv",
            &["n", "beta", "ell", "nu_closed", "nu_linear", "mu_closed", "mu_linear"],
            &xor_rows,
        )?,
        write(
            cfg,
            &stamp,
            "sweep_xor_summary.csv",
            &["n", "beta", "one_plus_sum", "one_plus_exact", "envelope", "mixing_bound"],
            &xor_summary,
        )?,
    ])
}
