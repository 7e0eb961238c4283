//! The logit update rule, its transition matrix and stationary distributions.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{GameSpec, Profile, ProfileSpace, ENUMERATION_CAP};

/// Default cap on the state count of a single-chain transition matrix.
pub const DENSE_STATE_CAP: usize = 4096;

/// Row sums of every constructed matrix must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Residual target for stationary vectors (max-norm of `pi P - pi`).
pub const STATIONARY_RESIDUAL: f64 = 1e-12;

/// Iteration cap for the power-iteration fallback.
pub const POWER_ITERATION_CAP: u64 = 10_000_000;

/// Name of the pseudorandom generator behind every simulation in this crate.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3), stream = trial index";

/// Generator for `(seed, stream)`; streams are independent and fixed per trial.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse noise. Finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameters(format!("beta must be finite and >= 0, got {value}")));
        }
        Ok(Beta(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameters("empty distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameters("probabilities must be finite and >= 0".into()));
        }
        let sum: f64 = probs.iter().sum();
        let tol = ROW_SUM_TOL.max(4.0 * f64::EPSILON * probs.len() as f64);
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidParameters(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Distribution { probs })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!("cannot normalise weights with total {total}")));
        }
        Distribution::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(len: usize) -> Self {
        Distribution { probs: vec![1.0 / len as f64; len] }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mass_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&k| self.probs[k]).sum()
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.probs[k]
    }
}

/// Row-stochastic matrix stored row by row with explicit nonzeros.
///
/// Logit chains only move between profiles at Hamming distance at most one,
/// so each row holds at most `1 + sum_i (|S_i| - 1)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds from per-row `(column, probability)` lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let size = rows.len();
        let mut row_ptr = Vec::with_capacity(size + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut sum = 0.0;
            let start = cols.len();
            for (c, v) in row {
                if c >= size {
                    return Err(Error::Dimension { expected: size, found: c + 1 });
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Numerical(format!("row {r} has entry {v}")));
                }
                sum += v;
                if v == 0.0 {
                    continue;
                }
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Numerical(format!("row {r} sums to {sum}")));
            }
            row_ptr.push(cols.len());
        }
        Ok(TransitionMatrix { size, row_ptr, cols, vals })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut out = Vec::with_capacity(n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            out.push(row.iter().copied().enumerate().collect());
        }
        Self::from_rows(out)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.vals[self.row_ptr[r]..self.row_ptr[r + 1]].iter().sum()
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.size).map(|r| (self.row_sum(r) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `out = v P`.
    pub fn left_mul(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &w) in v.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.cols[k]] += w * self.vals[k];
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for r in 0..self.size {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Dense `P - I` with the diagonal rebuilt as minus the off-diagonal row
    /// sum, so that small leaving rates keep full relative precision.
    pub fn generator_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for r in 0..self.size {
            let mut out = 0.0;
            for (c, v) in self.row(r) {
                if c != r {
                    m[(r, c)] = v;
                    out += v;
                }
            }
            m[(r, r)] = -out;
        }
        m
    }

    /// Dense dump for debugging: one CSV line per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut line = vec![0.0; self.size];
        for r in 0..self.size {
            line.iter_mut().for_each(|x| *x = 0.0);
            for (c, v) in self.row(r) {
                line[c] = v;
            }
            let text: Vec<String> = line.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", text.join(","))?;
        }
        Ok(())
    }
}

/// Softmax of `beta * u` written into `out`, shifted by the maximum exponent.
pub(crate) fn softmax_into(beta: f64, utilities: &[f64], out: &mut [f64]) {
    let top = utilities.iter().map(|u| beta * u).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, u) in out.iter_mut().zip(utilities) {
        *o = (beta * u - top).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// `sigma_i(. | x)` into `out`; `x` is restored before returning.
pub(crate) fn update_probs_into(game: &GameSpec, x: &mut [usize], i: usize, beta: f64, out: &mut [f64]) {
    let own = x[i];
    let count = game.strategy_counts()[i];
    let mut utils = [0.0f64; 8];
    let mut heap;
    let utils: &mut [f64] = if count <= utils.len() {
        &mut utils[..count]
    } else {
        heap = vec![0.0; count];
        &mut heap
    };
    for (s, u) in utils.iter_mut().enumerate() {
        x[i] = s;
        *u = game.utility_raw(i, x);
    }
    x[i] = own;
    softmax_into(beta, utils, &mut out[..count]);
}

/// Logit update distribution of player `i` at profile `x`.
pub fn update_distribution(game: &GameSpec, x: &Profile, i: usize, beta: Beta) -> Result<Distribution> {
    game.check_player(i)?;
    game.check_profile(x.as_slice())?;
    let mut buf = x.as_slice().to_vec();
    let mut out = vec![0.0; game.strategy_counts()[i]];
    update_probs_into(game, &mut buf, i, beta.value(), &mut out);
    Ok(Distribution { probs: out })
}

pub fn transition_matrix(game: &GameSpec, beta: Beta) -> Result<TransitionMatrix> {
    transition_matrix_capped(game, beta, DENSE_STATE_CAP)
}

pub fn transition_matrix_capped(game: &GameSpec, beta: Beta, cap: usize) -> Result<TransitionMatrix> {
    let space = ProfileSpace::new(game, cap)?;
    let n = game.n_players();
    let inv_n = 1.0 / n as f64;
    let strides: Vec<usize> = (0..n).map(|i| space.stride(i)).collect();
    let max_count = *game.strategy_counts().iter().max().unwrap();
    let rows: Vec<Vec<(usize, f64)>> = (0..space.size())
        .into_par_iter()
        .map_init(
            || (vec![0usize; n], vec![0.0f64; max_count]),
            |(x, sigma), k| {
                space.decode_into(k, x);
                let mut row = Vec::with_capacity(1 + n * (max_count - 1));
                let mut diag = 0.0;
                for i in 0..n {
                    update_probs_into(game, x, i, beta.value(), sigma);
                    let own = x[i];
                    for s in 0..game.strategy_counts()[i] {
                        let p = sigma[s] * inv_n;
                        if s == own {
                            diag += p;
                        } else {
                            let col = k + s * strides[i] - own * strides[i];
                            row.push((col, p));
                        }
                    }
                }
                row.push((k, diag));
                row
            },
        )
        .collect();
    TransitionMatrix::from_rows(rows)
}

/// Gibbs measure `exp(beta * phi) / Z` of the attached potential.
///
/// The caller is responsible for the potential being exact
/// (see [`crate::game::verify_exact_potential`]).
pub fn gibbs_stationary(game: &GameSpec, beta: Beta) -> Result<Distribution> {
    let (dist, _) = gibbs_with_log_partition(game, beta)?;
    Ok(dist)
}

/// Gibbs measure together with `ln Z`.
pub fn gibbs_with_log_partition(game: &GameSpec, beta: Beta) -> Result<(Distribution, f64)> {
    if !game.has_potential() {
        return Err(Error::MissingPotential(game.name().to_string()));
    }
    let space = ProfileSpace::new(game, ENUMERATION_CAP)?;
    let mut x = vec![0; game.n_players()];
    let mut exps = Vec::with_capacity(space.size());
    for k in 0..space.size() {
        space.decode_into(k, &mut x);
        exps.push(beta.value() * game.potential_raw(&x).unwrap());
    }
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exps.iter().map(|e| (e - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let log_z = top + total.ln();
    Ok((Distribution::from_weights(weights)?, log_z))
}

/// Max-norm of `pi P - pi`.
pub fn stationary_residual(p: &TransitionMatrix, pi: &[f64]) -> f64 {
    let mut next = vec![0.0; p.size()];
    p.left_mul(pi, &mut next);
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// The unique stationary distribution of an irreducible aperiodic chain.
///
/// Chains up to [`DENSE_STATE_CAP`] states are solved by GTH state
/// reduction, which avoids subtraction and keeps relative accuracy in tiny
/// entries even when the chain is nearly decomposable. The result is then
/// polished with power iteration until the residual is below
/// [`STATIONARY_RESIDUAL`]; larger chains use power iteration alone.
pub fn stationary_solve(p: &TransitionMatrix) -> Result<Distribution> {
    let n = p.size();
    let mut pi = if n <= DENSE_STATE_CAP { gth_solve(p)? } else { vec![1.0 / n as f64; n] };
    let mut next = vec![0.0; n];
    let mut iterations = 0u64;
    loop {
        p.left_mul(&pi, &mut next);
        let residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if residual < STATIONARY_RESIDUAL {
            break;
        }
        iterations += 1;
        if iterations > POWER_ITERATION_CAP {
            return Err(Error::Numerical(format!(
                "power iteration did not reach residual {STATIONARY_RESIDUAL:e} (last {residual:e})"
            )));
        }
        let total: f64 = next.iter().sum();
        std::mem::swap(&mut pi, &mut next);
        pi.iter_mut().for_each(|v| *v /= total);
    }
    Distribution::from_weights(pi)
}

/// Grassmann-Taksar-Heyman elimination on a dense row-major copy.
fn gth_solve(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = p.size();
    let mut a = vec![0.0f64; n * n];
    for r in 0..n {
        for (c, v) in p.row(r) {
            a[r * n + c] = v;
        }
    }
    // eliminate states n-1, ..., 1; the diagonal is never read
    for k in (1..n).rev() {
        let out: f64 = a[k * n..k * n + k].iter().sum();
        if !(out > 0.0) {
            return Err(Error::Numerical(format!("state {k} cannot reach lower states; chain is reducible")));
        }
        let (head, tail) = a.split_at_mut(k * n);
        let row_k = &tail[..k];
        for i in 0..k {
            let row_i = &mut head[i * n..i * n + n];
            let w = row_i[k] / out;
            row_i[k] = w;
            if w != 0.0 {
                for (x, &y) in row_i[..k].iter_mut().zip(row_k) {
                    *x += w * y;
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * a[i * n + k]).sum();
    }
    let total: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|v| v / total).collect())
}

/// Largest `|pi(x) P(x, y) - pi(y) P(y, x)|`.
pub fn detailed_balance_defect(p: &TransitionMatrix, pi: &Distribution) -> Result<f64> {
    if pi.len() != p.size() {
        return Err(Error::Dimension { expected: p.size(), found: pi.len() });
    }
    let mut worst = 0.0f64;
    for x in 0..p.size() {
        for (y, pxy) in p.row(x) {
            let d = (pi[x] * pxy - pi[y] * p.get(y, x)).abs();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

pub fn detailed_balance_check(p: &TransitionMatrix, pi: &Distribution) -> Result<bool> {
    Ok(detailed_balance_defect(p, pi)? < 1e-12)
}

/// Picks an index from `probs` with a single uniform draw mapped through the
/// cumulative table in index order.
pub(crate) fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the total; fall back to the last positive entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// One logit step in place: pick a player uniformly, resample her strategy.
pub fn logit_step<R: Rng>(game: &GameSpec, x: &mut [usize], beta: Beta, rng: &mut R, sigma: &mut [f64]) {
    let i = rng.gen_range(0..game.n_players());
    update_probs_into(game, x, i, beta.value(), sigma);
    x[i] = sample_index(rng, &sigma[..game.strategy_counts()[i]]);
}

/// Runs the chain for `steps` steps, calling `visit` on the start and after
/// every step.
pub fn run_chain<F>(game: &GameSpec, x0: &Profile, beta: Beta, steps: u64, seed: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]),
{
    game.check_profile(x0.as_slice())?;
    let mut rng = rng_for(seed, 0);
    let mut x = x0.as_slice().to_vec();
    let mut sigma = vec![0.0; *game.strategy_counts().iter().max().unwrap()];
    visit(&x);
    for _ in 0..steps {
        logit_step(game, &mut x, beta, &mut rng, &mut sigma);
        visit(&x);
    }
    Ok(())
}

/// Reproducible trajectory `[x0, x1, ..., x_steps]`.
pub fn simulate_trajectory(game: &GameSpec, x0: &Profile, beta: Beta, steps: u64, seed: u64) -> Result<Vec<Profile>> {
    let mut out = Vec::with_capacity(steps as usize + 1);
    run_chain(game, x0, beta, steps, seed, |x| out.push(Profile::new(x.to_vec())))?;
    Ok(out)
}
