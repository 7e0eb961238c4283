//! Weighted path coupling for the OR game.
//!
//! Edges of the Hamming graph between levels `k - 1` and `k` carry weight
//! `delta_k`. A schedule of weights contracts when every edge's expected
//! coupled distance after one step is at most `delta_k e^{-alpha}`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::coupling::{joint_update_raw, JointUpdate};
use crate::error::{Error, Result};
use crate::game::make_or;

/// Largest n for which path distances are found by a full graph search.
pub const GRAPH_SEARCH_MAX_N: usize = 12;

/// Agreement required between the coupling-derived expectation and the
/// algebraic left side (relative to `max(1, lhs)`).
pub const CONTRACTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    LargeBeta,
    SmallBeta,
    LogBeta,
    Custom,
}

impl ScheduleKind {
    pub fn label(self) -> &'static str {
        match self {
            ScheduleKind::LargeBeta => "large_beta",
            ScheduleKind::SmallBeta => "small_beta",
            ScheduleKind::LogBeta => "log_beta",
            ScheduleKind::Custom => "custom",
        }
    }
}

/// Edge weights `delta_1..delta_n` (stored from index 0) and a contraction rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    pub kind: ScheduleKind,
    pub deltas: Vec<f64>,
    pub alpha: f64,
}

impl WeightSchedule {
    pub fn new(kind: ScheduleKind, deltas: Vec<f64>, alpha: f64) -> Result<Self> {
        if deltas.iter().any(|d| !(d.is_finite() && *d >= 1.0)) {
            return Err(Error::InvalidParameters("every edge weight must be finite and >= 1".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameters(format!("alpha must be positive, got {alpha}")));
        }
        Ok(WeightSchedule { kind, deltas, alpha })
    }

    pub fn n(&self) -> usize {
        self.deltas.len()
    }

    /// `delta_k`, 1-based.
    pub fn delta(&self, k: usize) -> f64 {
        self.deltas[k - 1]
    }

    pub fn delta_max(&self) -> f64 {
        self.deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Weighted diameter of the Hamming graph: the all-zeros to all-ones path.
    pub fn diameter(&self) -> f64 {
        self.deltas.iter().sum()
    }

    pub fn mixing_bound(&self, epsilon: f64) -> Result<f64> {
        path_coupling_bound(self.diameter(), self.alpha, epsilon)
    }

    /// Same weights with `delta_k` multiplied by `factor` (for fault injection).
    pub fn scaled_at(&self, k: usize, factor: f64) -> WeightSchedule {
        let mut deltas = self.deltas.clone();
        deltas[k - 1] *= factor;
        WeightSchedule { kind: ScheduleKind::Custom, deltas, alpha: self.alpha }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("the OR edge system needs n >= 3, got {n}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameters(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

/// `delta_n = 1`, `delta_k = ((n-k)/k) delta_{k+1} + 1`,
/// `delta_1 = ((n-1) delta_2 + 1)/2`, `alpha = 1/(2 n delta_max)`.
pub fn weights_large_beta(n: usize) -> Result<WeightSchedule> {
    check_n(n)?;
    let mut d = vec![1.0; n];
    for k in (2..n).rev() {
        d[k - 1] = (n - k) as f64 / k as f64 * d[k] + 1.0;
    }
    d[0] = ((n - 1) as f64 * d[1] + 1.0) / 2.0;
    let dmax = d.iter().copied().fold(0.0, f64::max);
    WeightSchedule::new(ScheduleKind::LargeBeta, d, 1.0 / (2.0 * n as f64 * dmax))
}

/// `delta_1 = n^{1-eps}`, `delta_2 = 4/3`, the rest 1, `alpha = 1/n`.
pub fn weights_small_beta(n: usize, eps: f64) -> Result<WeightSchedule> {
    check_n(n)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameters(format!("eps must lie in (0, 1), got {eps}")));
    }
    let mut d = vec![1.0; n];
    d[0] = (n as f64).powf(1.0 - eps);
    d[1] = 4.0 / 3.0;
    WeightSchedule::new(ScheduleKind::SmallBeta, d, 1.0 / n as f64)
}

/// `delta_n = 1`, `delta_k = (a_k/b_k) delta_{k+1} + 1`,
/// `delta_1 = ((1 + e^{-beta})/2)((a_1/b_1) delta_2 + 1)`, `alpha = 1/(2 n delta_max)`.
pub fn weights_log_beta(n: usize, beta: f64) -> Result<WeightSchedule> {
    check_n(n)?;
    let gamma = gamma_sequence(n, beta)?;
    let mut d = vec![1.0; n];
    for k in (2..n).rev() {
        d[k - 1] = gamma[k - 1] * d[k] + 1.0;
    }
    d[0] = (1.0 + (-beta).exp()) / 2.0 * (gamma[0] * d[1] + 1.0);
    let dmax = d.iter().copied().fold(0.0, f64::max);
    WeightSchedule::new(ScheduleKind::LogBeta, d, 1.0 / (2.0 * n as f64 * dmax))
}

/// The coefficient sequences behind the log-beta schedule, 1-based in the
/// accessors and stored from index 0 for `k = 1..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionTable {
    pub n: usize,
    pub beta: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub l: Vec<f64>,
    pub r: Vec<f64>,
}

impl RecursionTable {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        check_n(n)?;
        check_beta(beta)?;
        let len = n - 1;
        let e = (-beta).exp();
        let nf = n as f64;
        let (mut a, mut b) = (vec![0.0; len], vec![0.0; len]);
        let (mut p, mut q) = (vec![0.0; len], vec![0.0; len]);
        let (mut l, mut r) = (vec![0.0; len], vec![0.0; len]);
        a[0] = nf - 1.0;
        b[0] = nf * e + 1.0;
        p[0] = 0.0;
        q[0] = nf;
        l[0] = nf - 1.0;
        r[0] = 1.0;
        for k in 2..=len {
            let (i, kf) = (k - 1, k as f64);
            a[i] = (nf - kf) * b[i - 1];
            b[i] = (nf + 1.0) * b[i - 1] - (kf - 1.0) * a[i - 1];
            p[i] = (nf - kf) * q[i - 1];
            q[i] = (nf + 1.0) * q[i - 1] - (kf - 1.0) * p[i - 1];
            l[i] = (nf - kf) * r[i - 1];
            r[i] = (nf + 1.0) * r[i - 1] - (kf - 1.0) * l[i - 1];
        }
        Ok(RecursionTable { n, beta, a, b, p, q, l, r })
    }

    /// `gamma_k` from the split form, which stays accurate when `e^{-beta}`
    /// underflows.
    pub fn gamma(&self, k: usize) -> f64 {
        let e = (-self.beta).exp();
        let i = k - 1;
        (self.p[i] * e + self.l[i]) / (self.q[i] * e + self.r[i])
    }

    /// `a_k / b_k` from the direct recursion.
    pub fn gamma_direct(&self, k: usize) -> f64 {
        self.a[k - 1] / self.b[k - 1]
    }
}

/// `l_k, r_k` for `k = 1..=kmax` by the recursion in exact integers.
pub fn lr_exact(n: usize, kmax: usize) -> Result<Vec<(i128, i128)>> {
    check_n(n)?;
    let kmax = kmax.min(n - 1);
    let nn = n as i128;
    let mut out = vec![(nn - 1, 1i128)];
    for k in 2..=kmax as i128 {
        let (l, r) = out[out.len() - 1];
        let next_l = (nn - k).checked_mul(r);
        let next_r = (nn + 1).checked_mul(r).and_then(|v| (k - 1).checked_mul(l).and_then(|w| v.checked_sub(w)));
        match (next_l, next_r) {
            (Some(a), Some(b)) => out.push((a, b)),
            _ => return Err(Error::Numerical(format!("integer overflow at k = {k}"))),
        }
    }
    Ok(out)
}

/// `(n - k)(k - 1)!` and `k!` as exact integers.
pub fn lr_closed(n: usize, k: usize) -> (i128, i128) {
    let fact = |m: usize| (1..=m as i128).product::<i128>();
    ((n as i128 - k as i128) * fact(k - 1), fact(k))
}

/// `gamma_1..gamma_{n-1}` via the split recursion.
pub fn gamma_sequence(n: usize, beta: f64) -> Result<Vec<f64>> {
    let t = RecursionTable::new(n, beta)?;
    Ok((1..n).map(|k| t.gamma(k)).collect())
}

/// Ratios of the large-beta schedule, `gamma_k = (n-k)/k`.
pub fn large_beta_gammas(n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    Ok((1..n).map(|k| (n - k) as f64 / k as f64).collect())
}

/// `n * max_{h <= j} prod_{i=h..j} gamma_i` with `n = gammas.len() + 1`.
pub fn delta_max_bound(gammas: &[f64]) -> f64 {
    let n = gammas.len() + 1;
    let mut best = 1.0f64;
    for h in 0..gammas.len() {
        let mut prod = 1.0;
        for g in &gammas[h..] {
            prod *= g;
            best = best.max(prod);
        }
    }
    n as f64 * best
}

/// `delta_k = 1 + sum_{j=k}^{n-1} prod_{i=k}^j gamma_i`, the closed form of
/// `delta_n = 1, delta_k = gamma_k delta_{k+1} + 1`.
pub fn deltas_from_gammas(gammas: &[f64]) -> Vec<f64> {
    let n = gammas.len() + 1;
    let mut out = vec![1.0; n];
    for k in 0..gammas.len() {
        let mut prod = 1.0;
        let mut sum = 0.0;
        for g in &gammas[k..] {
            prod *= g;
            sum += prod;
        }
        out[k] = 1.0 + sum;
    }
    out
}

/// Left side of the level-`k` contraction inequality.
pub fn edge_lhs(n: usize, beta: f64, deltas: &[f64], k: usize) -> f64 {
    let nf = n as f64;
    let d = |j: usize| deltas[j - 1];
    let s = 1.0 / (1.0 + (-beta).exp());
    match k {
        1 => (nf - 1.0) / nf * (d(1) * s + d(2) / 2.0),
        2 => (2.0 * s * d(1) + (nf - 1.0) * d(2) + (nf - 2.0) * d(3)) / (2.0 * nf),
        k if k == n => (nf - 1.0) / (2.0 * nf) * (d(n) + d(n - 1)),
        k => ((nf - 1.0) * d(k) + (k as f64 - 1.0) * d(k - 1) + (nf - k as f64) * d(k + 1)) / (2.0 * nf),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCheck {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeReport {
    pub n: usize,
    pub beta: f64,
    pub kind: ScheduleKind,
    pub rows: Vec<EdgeCheck>,
}

impl EdgeReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| !r.pass).map(|r| r.k).collect()
    }
}

/// Evaluates every level's inequality `lhs_k <= delta_k e^{-alpha}`.
pub fn check_edge_inequalities(n: usize, beta: f64, schedule: &WeightSchedule) -> Result<EdgeReport> {
    check_n(n)?;
    check_beta(beta)?;
    if schedule.n() != n {
        return Err(Error::Dimension { expected: n, found: schedule.n() });
    }
    let shrink = (-schedule.alpha).exp();
    let rows = (1..=n)
        .map(|k| {
            let lhs = edge_lhs(n, beta, &schedule.deltas, k);
            let rhs = schedule.delta(k) * shrink;
            EdgeCheck { k, lhs, rhs, slack: rhs - lhs, pass: lhs <= rhs }
        })
        .collect();
    Ok(EdgeReport { n, beta, kind: schedule.kind, rows })
}

/// Largest alpha the weights actually support: `min_k ln(delta_k / lhs_k)`.
pub fn achieved_alpha(n: usize, beta: f64, deltas: &[f64]) -> Result<f64> {
    check_n(n)?;
    if deltas.len() != n {
        return Err(Error::Dimension { expected: n, found: deltas.len() });
    }
    Ok((1..=n).map(|k| (deltas[k - 1] / edge_lhs(n, beta, deltas, k)).ln()).fold(f64::INFINITY, f64::min))
}

/// `(ln diameter + ln(1/eps)) / alpha`.
pub fn path_coupling_bound(diameter: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(diameter >= 1.0 && alpha > 0.0 && epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "need diameter >= 1, alpha > 0, eps in (0,1); got {diameter}, {alpha}, {epsilon}"
        )));
    }
    Ok((diameter.ln() + (1.0 / epsilon).ln()) / alpha)
}

fn weight(x: &[usize]) -> usize {
    x.iter().sum()
}

/// Shortest weighted path between two profiles of the Hamming graph whose
/// level-`k` edges weigh `delta_k`.
///
/// Comparable profiles (one's ones a subset of the other's) are joined by a
/// monotone path, which is optimal since every path crosses each level in
/// between at least once. Other pairs need a graph search, available for
/// `n <= GRAPH_SEARCH_MAX_N`.
pub fn path_distance(deltas: &[f64], x: &[usize], y: &[usize]) -> Result<f64> {
    let n = deltas.len();
    if x.len() != n || y.len() != n {
        return Err(Error::Dimension { expected: n, found: x.len().max(y.len()) });
    }
    let x_in_y = x.iter().zip(y).all(|(a, b)| a <= b);
    let y_in_x = x.iter().zip(y).all(|(a, b)| a >= b);
    if x_in_y || y_in_x {
        let (lo, hi) = if x_in_y { (weight(x), weight(y)) } else { (weight(y), weight(x)) };
        return Ok(((lo + 1)..=hi).map(|k| deltas[k - 1]).sum());
    }
    if n > GRAPH_SEARCH_MAX_N {
        return Err(Error::Unsupported(format!("path distance between incomparable profiles for n = {n}")));
    }
    Ok(graph_distance(deltas, x, y))
}

/// Dijkstra over all `2^n` profiles.
pub fn graph_distance(deltas: &[f64], x: &[usize], y: &[usize]) -> f64 {
    let n = deltas.len();
    let enc = |v: &[usize]| v.iter().enumerate().fold(0usize, |acc, (i, &s)| acc | (s << i));
    let (src, dst) = (enc(x), enc(y));
    let mut dist = vec![f64::INFINITY; 1 << n];
    dist[src] = 0.0;
    // f64 is not Ord; the bit pattern of a nonnegative float orders correctly
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((bits, u))) = heap.pop() {
        let du = f64::from_bits(bits);
        if du > dist[u] {
            continue;
        }
        if u == dst {
            return du;
        }
        for i in 0..n {
            let v = u ^ (1 << i);
            let level = (u.count_ones().max(v.count_ones())) as usize;
            let dv = du + deltas[level - 1];
            if dv < dist[v] {
                dist[v] = dv;
                heap.push(Reverse((dv.to_bits(), v)));
            }
        }
    }
    dist[dst]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub k: usize,
    /// Expected distance after one coupled step, from the coupling itself.
    pub coupled: f64,
    /// The inequality's left side.
    pub algebraic: f64,
    pub matches: bool,
}

/// Expected path distance after one coupled step from a level-`k` edge,
/// computed from the OR game's joint update laws.
///
/// The edge is `x = 1^{k} 0^{n-k}` with player 0 switched off, `y = 1^k 0^{n-k}`.
pub fn coupled_edge_expectation(n: usize, beta: f64, deltas: &[f64], k: usize) -> Result<f64> {
    check_beta(beta)?;
    if deltas.len() != n || k == 0 || k > n {
        return Err(Error::Dimension { expected: n, found: deltas.len() });
    }
    let game = make_or(n)?;
    let mut y: Vec<usize> = (0..n).map(|i| usize::from(i < k)).collect();
    let mut x = y.clone();
    x[0] = 0;
    let mut total = 0.0;
    for i in 0..n {
        let ju = joint_update_raw(&game, &mut x, &mut y, i, beta);
        for (&(a, b), &p) in JointUpdate::OUTCOMES.iter().zip(&ju.probs) {
            if p == 0.0 {
                continue;
            }
            let (mut nx, mut ny) = (x.clone(), y.clone());
            nx[i] = a;
            ny[i] = b;
            total += p * path_distance(deltas, &nx, &ny)?;
        }
    }
    Ok(total / n as f64)
}

/// Ties the algebraic left sides to the executable coupling at every level.
pub fn verify_or_contraction(n: usize, beta: f64, schedule: &WeightSchedule) -> Result<Vec<ContractionRow>> {
    check_n(n)?;
    if schedule.n() != n {
        return Err(Error::Dimension { expected: n, found: schedule.n() });
    }
    (1..=n)
        .map(|k| {
            let coupled = coupled_edge_expectation(n, beta, &schedule.deltas, k)?;
            let algebraic = edge_lhs(n, beta, &schedule.deltas, k);
            let matches = (coupled - algebraic).abs() <= CONTRACTION_TOL * algebraic.abs().max(1.0);
            Ok(ContractionRow { k, coupled, algebraic, matches })
        })
        .collect()
}
