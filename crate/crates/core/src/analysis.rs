//! Distances to stationarity, exact mixing times and the classical bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{verify_player_symmetry, welfare_raw, GameSpec, ProfileSpace, ENUMERATION_CAP};
use crate::logit::{
    detailed_balance_defect, gibbs_stationary, stationary_solve, transition_matrix_capped, Beta, Distribution,
    TransitionMatrix, DENSE_STATE_CAP,
};

/// Default mixing threshold.
pub const DEFAULT_EPSILON: f64 = 0.25;

/// Default horizon for exact mixing-time searches.
pub const DEFAULT_HORIZON: u64 = 10_000_000;

/// Slack allowed when checking that d(t) is nonincreasing.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Largest chain for which dense matrix powers are used.
pub const LIFT_STATE_CAP: usize = 512;

/// Cap on `starts * states` held in memory during stepwise evolution.
const ROW_BLOCK_CAP: usize = 1 << 25;

#[derive(Debug, Clone, PartialEq)]
pub struct MixingOptions {
    pub epsilon: f64,
    pub horizon: u64,
    /// d(t) is evaluated step by step (and recorded) up to this t; beyond it
    /// small chains switch to doubling with dense matrix powers.
    pub curve_limit: u64,
    /// Starting states to maximise over; `None` means every state.
    pub starts: Option<Vec<usize>>,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions { epsilon: DEFAULT_EPSILON, horizon: DEFAULT_HORIZON, curve_limit: 100_000, starts: None }
    }
}

impl MixingOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        MixingOptions { epsilon, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub epsilon: f64,
    pub t_mix: u64,
    /// `d(0), d(1), ...` for the stepwise part of the search. When `t_mix`
    /// lies inside it, `d_curve[t_mix] <= epsilon < d_curve[t_mix - 1]`.
    pub d_curve: Vec<f64>,
    /// d at `t_mix`.
    pub d_at: f64,
    /// d at `t_mix - 1`, absent when `t_mix == 0`.
    pub d_before: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_star: f64,
    pub t_rel: f64,
    pub lower: f64,
    pub upper: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameters(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    Ok(())
}

fn check_dims(p: &TransitionMatrix, pi: &Distribution) -> Result<()> {
    if p.size() != pi.len() {
        return Err(Error::Dimension { expected: p.size(), found: pi.len() });
    }
    Ok(())
}

fn tv_raw(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::Dimension { expected: mu.len(), found: nu.len() });
    }
    Ok(tv_raw(mu.probs(), nu.probs()).min(1.0))
}

/// Rows `P^t(x, .)` for every `x` in `starts`, advanced together.
struct RowBlock<'a> {
    p: &'a TransitionMatrix,
    rows: Vec<Vec<f64>>,
    scratch: Vec<Vec<f64>>,
}

impl<'a> RowBlock<'a> {
    fn new(p: &'a TransitionMatrix, starts: &[usize]) -> Result<Self> {
        let n = p.size();
        let cells = starts.len() as u128 * n as u128;
        if cells > ROW_BLOCK_CAP as u128 {
            return Err(Error::Capacity { what: "row block", size: cells, cap: ROW_BLOCK_CAP as u128 });
        }
        let rows = starts
            .iter()
            .map(|&s| {
                let mut r = vec![0.0; n];
                r[s] = 1.0;
                r
            })
            .collect();
        Ok(RowBlock { p, rows, scratch: vec![vec![0.0; n]; starts.len()] })
    }

    fn step(&mut self) {
        let p = self.p;
        if self.rows.len() * p.nnz() > 1 << 14 {
            self.rows.par_iter().zip(self.scratch.par_iter_mut()).for_each(|(r, out)| p.left_mul(r, out));
        } else {
            for (r, out) in self.rows.iter().zip(self.scratch.iter_mut()) {
                p.left_mul(r, out);
            }
        }
        std::mem::swap(&mut self.rows, &mut self.scratch);
    }

    fn distance(&self, pi: &[f64]) -> f64 {
        self.rows.iter().map(|r| tv_raw(r, pi)).fold(0.0, f64::max)
    }
}

fn resolve_starts(p: &TransitionMatrix, starts: Option<&[usize]>) -> Result<Vec<usize>> {
    match starts {
        None => Ok((0..p.size()).collect()),
        Some([]) => Err(Error::InvalidParameters("empty start set".into())),
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&k| k >= p.size()) {
                return Err(Error::Dimension { expected: p.size(), found: bad + 1 });
            }
            Ok(s.to_vec())
        }
    }
}

/// `d(t) = max_x ||P^t(x, .) - pi||_TV` by iterated vector-matrix products.
pub fn d_of_t(p: &TransitionMatrix, pi: &Distribution, t: u64) -> Result<f64> {
    d_of_t_from(p, pi, t, None)
}

/// [`d_of_t`] maximised over the given starting states only.
pub fn d_of_t_from(p: &TransitionMatrix, pi: &Distribution, t: u64, starts: Option<&[usize]>) -> Result<f64> {
    check_dims(p, pi)?;
    let starts = resolve_starts(p, starts)?;
    let mut block = RowBlock::new(p, &starts)?;
    for _ in 0..t {
        block.step();
    }
    Ok(block.distance(pi.probs()).min(1.0))
}

pub fn mixing_time_exact(p: &TransitionMatrix, pi: &Distribution, epsilon: f64) -> Result<MixingReport> {
    mixing_time_with(p, pi, &MixingOptions::with_epsilon(epsilon))
}

/// Smallest `t` with `d(t) <= epsilon`.
pub fn mixing_time_with(p: &TransitionMatrix, pi: &Distribution, opts: &MixingOptions) -> Result<MixingReport> {
    check_epsilon(opts.epsilon)?;
    check_dims(p, pi)?;
    let starts = resolve_starts(p, opts.starts.as_deref())?;
    let eps = opts.epsilon;
    let mut block = RowBlock::new(p, &starts)?;
    let mut d = block.distance(pi.probs());
    let mut curve = vec![d];
    let mut prev = None;
    let mut t = 0u64;
    while d > eps {
        if t >= opts.horizon {
            return Err(Error::Horizon { horizon: opts.horizon, last: d });
        }
        if t >= opts.curve_limit && p.size() <= LIFT_STATE_CAP {
            return lift(p, pi, &block, t, d, eps, opts.horizon, curve);
        }
        block.step();
        t += 1;
        prev = Some(d);
        d = block.distance(pi.probs());
        if t <= opts.curve_limit {
            curve.push(d);
        }
    }
    Ok(MixingReport { epsilon: eps, t_mix: t, d_curve: curve, d_at: d, d_before: prev })
}

fn dense_distance(rows: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..rows.nrows())
        .map(|r| 0.5 * (0..rows.ncols()).map(|c| (rows[(r, c)] - pi[c]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Doubling search past `t0` where `d(t0) > eps`, using `P^(2^k)`.
#[allow(clippy::too_many_arguments)]
fn lift(
    p: &TransitionMatrix,
    pi: &Distribution,
    block: &RowBlock,
    t0: u64,
    d0: f64,
    eps: f64,
    horizon: u64,
    curve: Vec<f64>,
) -> Result<MixingReport> {
    let n = p.size();
    let pi = pi.probs();
    let base = DMatrix::from_fn(block.rows.len(), n, |r, c| block.rows[r][c]);
    // P^(2^k) = I + E_k with E_{k+1} = 2 E_k + E_k^2; working with E keeps
    // the slow leaving rates of metastable chains accurate
    let mut gens = vec![p.generator_dense()];
    let advance = |rows: &DMatrix<f64>, e: &DMatrix<f64>| rows + rows * e;
    let mut k = 0usize;
    loop {
        let step = 1u64 << k;
        let d = dense_distance(&advance(&base, &gens[k]), pi);
        if d <= eps {
            break;
        }
        if t0 + step >= horizon {
            return Err(Error::Horizon { horizon, last: d });
        }
        let e = &gens[k];
        let next = e * 2.0 + e * e;
        gens.push(next);
        k += 1;
    }
    // descend: d(t) > eps and d(t + 2^k) <= eps
    let mut t = t0;
    let mut cur = base;
    let mut d_before = d0;
    for j in (0..k).rev() {
        let cand = advance(&cur, &gens[j]);
        let d = dense_distance(&cand, pi);
        if d > eps {
            cur = cand;
            t += 1 << j;
            d_before = d;
        }
    }
    let d_at = dense_distance(&advance(&cur, &gens[0]), pi);
    let t_mix = t + 1;
    if t_mix > horizon {
        return Err(Error::Horizon { horizon, last: d_before });
    }
    Ok(MixingReport { epsilon: eps, t_mix, d_curve: curve, d_at, d_before: Some(d_before) })
}

/// Exact chain quantities of a game at one inverse noise.
#[derive(Debug, Clone)]
pub struct GameChain {
    pub space: ProfileSpace,
    pub matrix: TransitionMatrix,
    pub stationary: Distribution,
    /// Starting states that realise `d(t)`: orbit representatives when the
    /// game is verified to be player-symmetric, otherwise every state.
    pub starts: Vec<usize>,
}

impl GameChain {
    pub fn build(game: &GameSpec, beta: Beta) -> Result<Self> {
        Self::build_capped(game, beta, DENSE_STATE_CAP)
    }

    pub fn build_capped(game: &GameSpec, beta: Beta, cap: usize) -> Result<Self> {
        let space = ProfileSpace::new(game, cap)?;
        let matrix = transition_matrix_capped(game, beta, cap)?;
        let stationary = if game.has_potential() { gibbs_stationary(game, beta)? } else { stationary_solve(&matrix)? };
        let symmetric = game.is_symmetric() && verify_player_symmetry(game)?;
        let starts = if symmetric { space.orbit_representatives() } else { (0..space.size()).collect() };
        Ok(GameChain { space, matrix, stationary, starts })
    }

    pub fn mixing_time(&self, epsilon: f64, horizon: u64) -> Result<MixingReport> {
        let opts = MixingOptions { epsilon, horizon, starts: Some(self.starts.clone()), ..Default::default() };
        mixing_time_with(&self.matrix, &self.stationary, &opts)
    }

    pub fn d_of_t(&self, t: u64) -> Result<f64> {
        d_of_t_from(&self.matrix, &self.stationary, t, Some(&self.starts))
    }
}

/// `sum_x W(x) pi(x)`.
pub fn expected_social_welfare(game: &GameSpec, pi: &Distribution) -> Result<f64> {
    let space = ProfileSpace::new(game, ENUMERATION_CAP)?;
    if space.size() != pi.len() {
        return Err(Error::Dimension { expected: space.size(), found: pi.len() });
    }
    let mut x = vec![0; game.n_players()];
    let mut total = 0.0;
    for k in 0..space.size() {
        if pi[k] == 0.0 {
            continue;
        }
        space.decode_into(k, &mut x);
        total += welfare_raw(game, &x) * pi[k];
    }
    Ok(total)
}

/// Detailed-balance tolerance for [`relaxation_bounds`].
pub const REVERSIBILITY_TOL: f64 = 1e-12;

pub fn relaxation_bounds(p: &TransitionMatrix, pi: &Distribution, epsilon: f64) -> Result<SpectralBounds> {
    check_epsilon(epsilon)?;
    let s = spectrum(p, pi)?;
    let distance_to_one = s.absolute_gap();
    let t_rel = 1.0 / distance_to_one;
    let lower = (t_rel - 1.0) * (1.0 / (2.0 * epsilon)).ln();
    let upper = t_rel * (1.0 / (epsilon * pi.min())).ln();
    Ok(SpectralBounds { lambda_star: 1.0 - distance_to_one, t_rel, lower, upper })
}

/// Extreme nontrivial eigenvalues of a reversible chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    /// Second largest eigenvalue.
    pub lambda_two: f64,
    /// Smallest eigenvalue.
    pub lambda_min: f64,
    /// `1 - lambda_two`, evaluated as a Rayleigh quotient of the Dirichlet
    /// form so that it keeps relative precision when it is tiny.
    pub gap: f64,
}

impl Spectrum {
    /// `1 - max(lambda_two, |lambda_min|)`.
    pub fn absolute_gap(&self) -> f64 {
        if self.lambda_min.abs() > self.lambda_two {
            1.0 - self.lambda_min.abs()
        } else {
            self.gap
        }
    }
}

/// Eigen-decomposition of the symmetrised matrix `D^{1/2} P D^{-1/2}`.
pub fn spectrum(p: &TransitionMatrix, pi: &Distribution) -> Result<Spectrum> {
    check_dims(p, pi)?;
    if p.size() > DENSE_STATE_CAP {
        return Err(Error::Capacity { what: "eigen-solve", size: p.size() as u128, cap: DENSE_STATE_CAP as u128 });
    }
    if p.size() < 2 {
        return Err(Error::InvalidParameters("chain has a single state".into()));
    }
    let defect = detailed_balance_defect(p, pi)?;
    if defect >= REVERSIBILITY_TOL {
        return Err(Error::NotReversible(defect));
    }
    if pi.min() <= 0.0 {
        return Err(Error::Numerical("stationary distribution has a zero entry".into()));
    }
    let n = p.size();
    let root: Vec<f64> = pi.probs().iter().map(|v| v.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        for (y, v) in p.row(x) {
            s[(x, y)] = root[x] * v / root[y];
        }
    }
    let sym = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let lambda_two = eig.eigenvalues[order[1]];
    let lambda_min = eig.eigenvalues[order[n - 1]];
    // f = v / sqrt(pi), centred; gap = E(f, f) / Var(f)
    let v = eig.eigenvectors.column(order[1]);
    let mut f: Vec<f64> = (0..n).map(|x| v[x] / root[x]).collect();
    let mean: f64 = (0..n).map(|x| pi[x] * f[x]).sum();
    f.iter_mut().for_each(|v| *v -= mean);
    let var: f64 = (0..n).map(|x| pi[x] * f[x] * f[x]).sum();
    let mut dirichlet = 0.0;
    for x in 0..n {
        for (y, v) in p.row(x) {
            if y != x {
                dirichlet += pi[x] * v * (f[x] - f[y]).powi(2);
            }
        }
    }
    let gap = 0.5 * dirichlet / var;
    Ok(Spectrum { lambda_two, lambda_min, gap })
}

/// Largest eigenvalue modulus other than the trivial 1.
pub fn second_eigenvalue_modulus(p: &TransitionMatrix, pi: &Distribution) -> Result<f64> {
    Ok(1.0 - spectrum(p, pi)?.absolute_gap())
}

/// `Q(S, S^c) / pi(S)` without the `pi(S) <= 1/2` precondition.
pub fn bottleneck_ratio_unchecked(p: &TransitionMatrix, pi: &Distribution, set: &[usize]) -> Result<f64> {
    check_dims(p, pi)?;
    let mut member = vec![false; p.size()];
    for &k in set {
        if k >= p.size() {
            return Err(Error::InvalidSet(format!("state {k} is out of range")));
        }
        member[k] = true;
    }
    let mass: f64 = (0..p.size()).filter(|&k| member[k]).map(|k| pi[k]).sum();
    if mass <= 0.0 {
        return Err(Error::InvalidSet("set has zero stationary mass".into()));
    }
    let mut flow = 0.0;
    for x in (0..p.size()).filter(|&k| member[k]) {
        for (y, v) in p.row(x) {
            if !member[y] {
                flow += pi[x] * v;
            }
        }
    }
    Ok(flow / mass)
}

/// Stationary mass of a state set.
pub fn set_mass(pi: &Distribution, set: &[usize]) -> f64 {
    let mut member = vec![false; pi.len()];
    set.iter().filter(|&&k| k < pi.len()).for_each(|&k| member[k] = true);
    (0..pi.len()).filter(|&k| member[k]).map(|k| pi[k]).sum()
}

/// `Phi(S)`, defined for sets with `pi(S) <= 1/2`.
pub fn bottleneck_ratio(p: &TransitionMatrix, pi: &Distribution, set: &[usize]) -> Result<f64> {
    check_dims(p, pi)?;
    let mass = set_mass(pi, set);
    if mass > 0.5 {
        return Err(Error::InvalidSet(format!("stationary mass {mass} exceeds 1/2")));
    }
    bottleneck_ratio_unchecked(p, pi, set)
}

/// `(1 - 2 eps) / (2 Phi(S))`.
pub fn bottleneck_lower_bound(p: &TransitionMatrix, pi: &Distribution, set: &[usize], epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let phi = bottleneck_ratio(p, pi, set)?;
    Ok((1.0 - 2.0 * epsilon) / (2.0 * phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;
    use crate::game::*;
    use crate::logit::transition_matrix;
    use approx::assert_relative_eq;

    fn b(v: f64) -> Beta {
        Beta::new(v).unwrap()
    }

    /// Independent oracle: d(t) via dense powers.
    fn dense_d(p: &TransitionMatrix, pi: &Distribution, t: u32) -> f64 {
        let m = p.to_dense();
        let mut pow = DMatrix::<f64>::identity(p.size(), p.size());
        for _ in 0..t {
            pow = &pow * &m;
        }
        dense_distance(&pow, pi.probs())
    }

    #[test]
    fn tv_examples() {
        let a = Distribution::new(vec![0.5, 0.5]).unwrap();
        let c = Distribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &c).unwrap(), 0.5);
        assert_eq!(tv_distance(&Distribution::point_mass(3, 0), &Distribution::point_mass(3, 2)).unwrap(), 1.0);
        assert!(tv_distance(&a, &Distribution::uniform(3)).is_err());
    }

    #[test]
    fn d_at_zero_and_monotone() {
        let g = make_ck();
        for beta in [0.0, 1.0, 3.0] {
            let p = transition_matrix(&g, b(beta)).unwrap();
            let pi = gibbs_stationary(&g, b(beta)).unwrap();
            assert_relative_eq!(d_of_t(&p, &pi, 0).unwrap(), 1.0 - pi.min(), max_relative = 1e-14);
            let r = mixing_time_exact(&p, &pi, 0.01).unwrap();
            assert!(r.d_curve.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK));
            for t in 0..6u32 {
                assert!((d_of_t(&p, &pi, t as u64).unwrap() - dense_d(&p, &pi, t)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stairs_two_players_uniform() {
        // brute-force oracle on the explicit 4x4 matrix
        let g = make_stairs(2).unwrap();
        let p = transition_matrix(&g, b(0.0)).unwrap();
        let pi = Distribution::uniform(4);
        let oracle = (0..).find(|&t| dense_d(&p, &pi, t) <= 0.25).unwrap() as u64;
        let r = mixing_time_exact(&p, &pi, 0.25).unwrap();
        assert_eq!(r.t_mix, oracle);
        assert!(r.t_mix <= 4);
        assert!(r.d_at <= 0.25 && r.d_before.unwrap() > 0.25);
    }

    #[test]
    fn matching_pennies_three_steps() {
        let g = make_matching_pennies();
        for beta in [0.0, 0.5, 1.0, 5.0, 10.0] {
            let p = transition_matrix(&g, b(beta)).unwrap();
            let pi = stationary_solve(&p).unwrap();
            assert!(d_of_t(&p, &pi, 3).unwrap() <= 7.0 / 16.0);
        }
    }

    #[test]
    fn or_bottleneck_lower_bound() {
        let g = make_or(6).unwrap();
        let chain = GameChain::build(&g, b(0.5)).unwrap();
        let bound = bottleneck_lower_bound(&chain.matrix, &chain.stationary, &[0], 0.25).unwrap();
        assert_relative_eq!(bound, 0.25 * (1.0 + 0.5f64.exp()), max_relative = 1e-12);
        let t = chain.mixing_time(0.25, DEFAULT_HORIZON).unwrap().t_mix;
        assert!(bound <= t as f64);
    }

    #[test]
    fn orbit_starts_agree_with_all_starts() {
        for g in [make_or(5).unwrap(), make_xor(5).unwrap(), make_stairs(4).unwrap()] {
            for beta in [0.0, 1.0, 3.0] {
                let chain = GameChain::build(&g, b(beta)).unwrap();
                assert!(chain.starts.len() < chain.space.size());
                let full = mixing_time_exact(&chain.matrix, &chain.stationary, 0.25).unwrap();
                let reduced = chain.mixing_time(0.25, DEFAULT_HORIZON).unwrap();
                assert_eq!(full.t_mix, reduced.t_mix);
                assert_eq!(full.d_curve.len(), reduced.d_curve.len());
                for (u, v) in full.d_curve.iter().zip(&reduced.d_curve) {
                    assert!((u - v).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn lifting_matches_stepwise() {
        let g = make_coordination(3.0, 2.0, 0.0, 0.0).unwrap();
        for beta in [1.0, 2.0, 3.0] {
            let p = transition_matrix(&g, b(beta)).unwrap();
            let pi = gibbs_stationary(&g, b(beta)).unwrap();
            let step = mixing_time_exact(&p, &pi, 0.25).unwrap();
            let opts = MixingOptions { curve_limit: 3, ..Default::default() };
            let lifted = mixing_time_with(&p, &pi, &opts).unwrap();
            assert_eq!(step.t_mix, lifted.t_mix, "beta={beta}");
            assert!((step.d_at - lifted.d_at).abs() < 1e-12);
        }
    }

    #[test]
    fn horizon_error() {
        let g = make_coordination(3.0, 2.0, 0.0, 0.0).unwrap();
        let p = transition_matrix(&g, b(5.0)).unwrap();
        let pi = gibbs_stationary(&g, b(5.0)).unwrap();
        for curve_limit in [5, 1000] {
            let opts = MixingOptions { horizon: 20, curve_limit, ..Default::default() };
            match mixing_time_with(&p, &pi, &opts) {
                Err(Error::Horizon { horizon: 20, last }) => assert!(last > 0.25),
                other => panic!("expected horizon error, got {other:?}"),
            }
        }
        assert!(mixing_time_exact(&p, &pi, 0.5).is_err());
    }

    #[test]
    fn welfare_closed_forms() {
        let ck = make_ck();
        let or = make_or(5).unwrap();
        let xor = make_xor(5).unwrap();
        for beta in [0.0, 0.1, 1.0, 2.0, 10.0] {
            let e = expected_social_welfare(&ck, &gibbs_stationary(&ck, b(beta)).unwrap()).unwrap();
            assert_relative_eq!(e, closed_form::ck_expected_welfare(beta), max_relative = 1e-10);
            let e = expected_social_welfare(&or, &gibbs_stationary(&or, b(beta)).unwrap()).unwrap();
            assert_relative_eq!(e, closed_form::or_expected_welfare(5, beta), max_relative = 1e-10);
            let e = expected_social_welfare(&xor, &gibbs_stationary(&xor, b(beta)).unwrap()).unwrap();
            assert_relative_eq!(e, closed_form::xor_expected_welfare(5, beta), max_relative = 1e-10);
        }
        let e = expected_social_welfare(&ck, &gibbs_stationary(&ck, b(0.0)).unwrap()).unwrap();
        assert!((e + 13.5).abs() < 1e-12);
    }

    #[test]
    fn relaxation_uniform_or() {
        let g = make_or(2).unwrap();
        let p = transition_matrix(&g, b(0.0)).unwrap();
        let pi = gibbs_stationary(&g, b(0.0)).unwrap();
        // oracle: eigenvalues of the non-symmetric dense matrix
        let mut eig: Vec<f64> = p.to_dense().complex_eigenvalues().iter().map(|z| z.norm()).collect();
        eig.sort_by(|a, c| c.partial_cmp(a).unwrap());
        let s = relaxation_bounds(&p, &pi, 0.25).unwrap();
        assert!((s.lambda_star - eig[1]).abs() < 1e-9);
        assert!((s.lambda_star - 0.5).abs() < 1e-12);
        assert_relative_eq!(s.t_rel, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn coordination_spectral_sandwich() {
        let (a, bb, c, d) = (3.0, 2.0, 0.0, 0.0);
        let g = make_coordination(a, bb, c, d).unwrap();
        for beta in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let p = transition_matrix(&g, b(beta)).unwrap();
            let pi = gibbs_stationary(&g, b(beta)).unwrap();
            let s = relaxation_bounds(&p, &pi, 0.25).unwrap();
            let pp = 1.0 / (1.0 + ((a - d) * beta).exp());
            let q = 1.0 / (1.0 + ((bb - c) * beta).exp());
            assert!((s.lambda_star - ((1.0 - pp) + (1.0 - q)) / 2.0).abs() < 1e-9);
            let t = mixing_time_exact(&p, &pi, 0.25).unwrap().t_mix as f64;
            assert!(s.lower <= t && t <= s.upper, "beta={beta}: {} <= {t} <= {}", s.lower, s.upper);
        }
    }

    #[test]
    fn non_reversible_rejected() {
        let g = make_matching_pennies();
        let p = transition_matrix(&g, b(1.0)).unwrap();
        let pi = stationary_solve(&p).unwrap();
        assert!(matches!(relaxation_bounds(&p, &pi, 0.25), Err(Error::NotReversible(_))));
    }

    #[test]
    fn bottleneck_sets() {
        for n in [3, 5, 8] {
            let g = make_or(n).unwrap();
            let all_but_zero: Vec<usize> = (1..1usize << n).collect();
            for beta in [0.0, 1.0, 5.0, 10.0] {
                let chain = GameChain::build(&g, b(beta)).unwrap();
                let (p, pi) = (&chain.matrix, &chain.stationary);
                let phi0 = bottleneck_ratio_unchecked(p, pi, &[0]).unwrap();
                assert!((phi0 - 1.0 / (1.0 + beta.exp())).abs() < 1e-12);
                let phi1 = bottleneck_ratio_unchecked(p, pi, &all_but_zero).unwrap();
                let expected = 1.0 / (((1u64 << n) - 1) as f64 * (1.0 + (-beta).exp()));
                assert!((phi1 - expected).abs() < 1e-12);
                let admissible = if pi[0] <= 0.5 { vec![0] } else { all_but_zero.clone() };
                let bound = bottleneck_lower_bound(p, pi, &admissible, 0.25).unwrap();
                let other = if pi[0] <= 0.5 { all_but_zero.clone() } else { vec![0] };
                assert!(matches!(bottleneck_ratio(p, pi, &other), Err(Error::InvalidSet(_))));
                let t = chain.mixing_time(0.25, DEFAULT_HORIZON).unwrap().t_mix;
                assert!(bound <= t as f64);
            }
        }
    }

    #[test]
    fn xor_bottleneck() {
        let g = make_xor(4).unwrap();
        for beta in [0.0, 2.0, 6.0] {
            let chain = GameChain::build(&g, b(beta)).unwrap();
            let phi = bottleneck_ratio(&chain.matrix, &chain.stationary, &[0]).unwrap();
            assert!((phi - 1.0 / (1.0 + beta.exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn metastable_sandwich_is_resolved() {
        // symmetric wells: exact t_mix sits within a step of the lower bound
        let g = make_coordination(2.0, 2.0, 0.0, 0.0).unwrap();
        for beta in [5.0, 10.0] {
            let chain = GameChain::build(&g, b(beta)).unwrap();
            let t = chain.mixing_time(0.25, u64::MAX / 4).unwrap().t_mix as f64;
            let sb = relaxation_bounds(&chain.matrix, &chain.stationary, 0.25).unwrap();
            let (p, q) = closed_form::coordination_exit_probabilities(2.0, 2.0, 0.0, 0.0, beta);
            assert_relative_eq!(sb.t_rel, 2.0 / (p + q), max_relative = 1e-12);
            assert!(sb.lower <= t && t <= sb.upper, "beta {beta}: {} {t}", sb.lower);
            assert!(t - sb.lower < 1.5);
        }
    }
}
