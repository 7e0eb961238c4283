//! A coupling of two logit chains for games with two strategies per player.
//!
//! Both chains select the same player. Her new strategies are drawn jointly
//! so that they agree as often as the two update distributions allow.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{GameSpec, Profile, ProfileSpace};
use crate::logit::{rng_for, update_probs_into, Beta, TransitionMatrix};

/// Default cap on the number of state pairs in the product chain.
pub const PAIR_CAP: usize = 1 << 16;

/// Normal quantile used for the one-sided confidence margins (95%).
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoupledState {
    pub x: Profile,
    pub y: Profile,
}

impl CoupledState {
    pub fn new(game: &GameSpec, x: Profile, y: Profile) -> Result<Self> {
        game.check_profile(x.as_slice())?;
        game.check_profile(y.as_slice())?;
        Ok(CoupledState { x, y })
    }

    pub fn is_coalesced(&self) -> bool {
        self.x == self.y
    }

    pub fn distance(&self) -> usize {
        self.x.hamming(&self.y)
    }
}

/// Joint law of the selected player's new strategies `(x_i, y_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointUpdate {
    /// Probabilities of `(0,0), (1,1), (0,1), (1,0)`, in that order.
    pub probs: [f64; 4],
}

impl JointUpdate {
    pub const OUTCOMES: [(usize, usize); 4] = [(0, 0), (1, 1), (0, 1), (1, 0)];

    fn from_marginals(sx0: f64, sy0: f64) -> Self {
        let both0 = sx0.min(sy0);
        let both1 = (1.0 - sx0).min(1.0 - sy0);
        let p01 = (sx0 - both0).max(0.0);
        let p10 = ((1.0 - sx0) - both1).max(0.0);
        JointUpdate { probs: [both0, both1, p01, p10] }
    }

    /// Probability that `x_i` is set to `s`.
    pub fn marginal_x(&self, s: usize) -> f64 {
        Self::OUTCOMES.iter().zip(&self.probs).filter(|((a, _), _)| *a == s).map(|(_, p)| p).sum()
    }

    /// Probability that `y_i` is set to `s`.
    pub fn marginal_y(&self, s: usize) -> f64 {
        Self::OUTCOMES.iter().zip(&self.probs).filter(|((_, b), _)| *b == s).map(|(_, p)| p).sum()
    }

    pub fn mismatch(&self) -> f64 {
        self.probs[2] + self.probs[3]
    }

    /// One draw through the cumulative table in outcome order.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Self::OUTCOMES[k];
            }
        }
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self::OUTCOMES[last]
    }
}

fn require_two_strategies(game: &GameSpec) -> Result<()> {
    if !game.is_two_strategy() {
        return Err(Error::Unsupported(format!(
            "coupling needs two strategies per player; `{}` has others",
            game.name()
        )));
    }
    Ok(())
}

pub(crate) fn joint_update_raw(game: &GameSpec, x: &mut [usize], y: &mut [usize], i: usize, beta: f64) -> JointUpdate {
    let mut sx = [0.0; 2];
    let mut sy = [0.0; 2];
    update_probs_into(game, x, i, beta, &mut sx);
    update_probs_into(game, y, i, beta, &mut sy);
    JointUpdate::from_marginals(sx[0], sy[0])
}

pub fn joint_update(game: &GameSpec, x: &Profile, y: &Profile, i: usize, beta: Beta) -> Result<JointUpdate> {
    require_two_strategies(game)?;
    game.check_player(i)?;
    game.check_profile(x.as_slice())?;
    game.check_profile(y.as_slice())?;
    let mut xb = x.as_slice().to_vec();
    let mut yb = y.as_slice().to_vec();
    Ok(joint_update_raw(game, &mut xb, &mut yb, i, beta.value()))
}

fn step_raw<R: Rng>(game: &GameSpec, x: &mut [usize], y: &mut [usize], beta: f64, rng: &mut R) {
    let i = rng.gen_range(0..game.n_players());
    let (a, b) = if x == y {
        // identical profiles give identical update distributions
        let mut s = [0.0; 2];
        update_probs_into(game, x, i, beta, &mut s);
        let v = JointUpdate::from_marginals(s[0], s[0]).sample(rng);
        (v.0, v.0)
    } else {
        joint_update_raw(game, x, y, i, beta).sample(rng)
    };
    x[i] = a;
    y[i] = b;
}

/// One coupled step: a uniformly chosen player, one joint draw.
pub fn coupled_step<R: Rng>(game: &GameSpec, state: &CoupledState, beta: Beta, rng: &mut R) -> Result<CoupledState> {
    require_two_strategies(game)?;
    let mut x = state.x.as_slice().to_vec();
    let mut y = state.y.as_slice().to_vec();
    step_raw(game, &mut x, &mut y, beta.value(), rng);
    Ok(CoupledState { x: Profile::new(x), y: Profile::new(y) })
}

/// Exact kernel of the coupled pair process on `Omega x Omega`, pair `(x, y)`
/// at index `x * |Omega| + y`.
pub fn coupling_product_matrix(game: &GameSpec, beta: Beta) -> Result<TransitionMatrix> {
    coupling_product_matrix_capped(game, beta, PAIR_CAP)
}

pub fn coupling_product_matrix_capped(game: &GameSpec, beta: Beta, pair_cap: usize) -> Result<TransitionMatrix> {
    require_two_strategies(game)?;
    let space = ProfileSpace::new(game, pair_cap)?;
    let size = space.size();
    let pairs = size as u128 * size as u128;
    if pairs > pair_cap as u128 {
        return Err(Error::Capacity { what: "profile pairs", size: pairs, cap: pair_cap as u128 });
    }
    let n = game.n_players();
    let inv_n = 1.0 / n as f64;
    let strides: Vec<usize> = (0..n).map(|i| space.stride(i)).collect();
    let rows: Vec<Vec<(usize, f64)>> = (0..size * size)
        .into_par_iter()
        .map_init(
            || (vec![0usize; n], vec![0usize; n]),
            |(x, y), idx| {
                let (kx, ky) = (idx / size, idx % size);
                space.decode_into(kx, x);
                space.decode_into(ky, y);
                let mut row = Vec::with_capacity(4 * n);
                for i in 0..n {
                    let ju = joint_update_raw(game, x, y, i, beta.value());
                    for (&(a, b), &p) in JointUpdate::OUTCOMES.iter().zip(&ju.probs) {
                        if p > 0.0 {
                            let nx = kx + a * strides[i] - x[i] * strides[i];
                            let ny = ky + b * strides[i] - y[i] * strides[i];
                            row.push((nx * size + ny, p * inv_n));
                        }
                    }
                }
                row
            },
        )
        .collect();
    TransitionMatrix::from_rows(rows)
}

/// `P[tau <= t]` from every start pair of the product chain with `states`
/// profiles per coordinate.
pub fn coalescence_probabilities(product: &TransitionMatrix, states: usize, t: u64) -> Result<Vec<f64>> {
    if states * states != product.size() {
        return Err(Error::Dimension { expected: product.size(), found: states * states });
    }
    // h_t(s) = sum_s' P(s, s') h_{t-1}(s'), h_0 = indicator of the diagonal;
    // the diagonal is closed so h_t is the probability of having coalesced
    let mut h: Vec<f64> = (0..product.size()).map(|k| if k / states == k % states { 1.0 } else { 0.0 }).collect();
    let mut next = vec![0.0; h.len()];
    for _ in 0..t {
        for (s, out) in next.iter_mut().enumerate() {
            *out = product.row(s).map(|(c, v)| v * h[c]).sum();
        }
        std::mem::swap(&mut h, &mut next);
    }
    Ok(h)
}

/// First time the coupled chains agree, or `None` past `horizon`.
pub fn coalescence_time<R: Rng>(
    game: &GameSpec,
    x: &Profile,
    y: &Profile,
    beta: Beta,
    rng: &mut R,
    horizon: u64,
) -> Result<Option<u64>> {
    require_two_strategies(game)?;
    game.check_profile(x.as_slice())?;
    game.check_profile(y.as_slice())?;
    let mut xs = x.as_slice().to_vec();
    let mut ys = y.as_slice().to_vec();
    let mut t = 0;
    while xs != ys {
        if t >= horizon {
            return Ok(None);
        }
        step_raw(game, &mut xs, &mut ys, beta.value(), rng);
        t += 1;
    }
    Ok(Some(t))
}

/// Upper end of the Wilson score interval for `k` successes in `n` trials.
pub fn wilson_upper(k: u64, n: u64, z: f64) -> f64 {
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre + half) / (1.0 + z2 / nf)).min(1.0)
}

/// Lower end of the Wilson score interval.
pub fn wilson_lower(k: u64, n: u64, z: f64) -> f64 {
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half) / (1.0 + z2 / nf)).max(0.0)
}

/// Start pairs for coalescence campaigns: every ordered pair of distinct
/// profiles when that is at most `all_pairs_cap`, otherwise complementary
/// pairs from the all-zeros profile and `extra` random profiles, plus
/// `extra` uniformly random pairs.
pub fn start_pairs(game: &GameSpec, all_pairs_cap: usize, extra: usize, seed: u64) -> Result<Vec<(Profile, Profile)>> {
    require_two_strategies(game)?;
    let n = game.n_players();
    if let Ok(space) = ProfileSpace::new(game, all_pairs_cap) {
        if (space.size() as u128).pow(2) <= all_pairs_cap as u128 {
            let mut out = Vec::new();
            for a in 0..space.size() {
                for b in 0..space.size() {
                    if a != b {
                        out.push((space.decode(a), space.decode(b)));
                    }
                }
            }
            return Ok(out);
        }
    }
    let flip = |x: &Profile| Profile::new(x.as_slice().iter().map(|s| 1 - s).collect());
    let mut rng = rng_for(seed, u64::MAX);
    let zero = Profile::zeros(n);
    let mut out = vec![(zero.clone(), flip(&zero))];
    for _ in 0..extra {
        let x = Profile::new((0..n).map(|_| rng.gen_range(0..2)).collect());
        let y = flip(&x);
        out.push((x, y));
    }
    for _ in 0..extra {
        let x = Profile::new((0..n).map(|_| rng.gen_range(0..2)).collect());
        let y = Profile::new((0..n).map(|_| rng.gen_range(0..2)).collect());
        if x != y {
            out.push((x, y));
        }
    }
    Ok(out)
}

/// Coalescence times of `trials` independent runs from one start pair.
/// Trial `k` of pair `p` uses generator stream `p * trials + k`.
pub fn coalescence_sample(
    game: &GameSpec,
    pair: &(Profile, Profile),
    pair_index: u64,
    beta: Beta,
    trials: u64,
    horizon: u64,
    seed: u64,
) -> Result<Vec<Option<u64>>> {
    require_two_strategies(game)?;
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, pair_index * trials + k);
            coalescence_time(game, &pair.0, &pair.1, beta, &mut rng, horizon)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEstimate {
    /// Smallest t at which the Wilson upper bound of `P[tau > t]` is at most
    /// epsilon for every sampled start pair.
    pub t_upper: u64,
    pub pairs: usize,
    pub trials: u64,
    /// Worst-pair mean coalescence time.
    pub worst_mean: f64,
}

/// Empirical coupling bound on `t_mix(epsilon)`.
///
/// This is an estimate with a 95% one-sided margin per start pair, not a
/// proof: it relies on the sampled pairs including the worst one.
pub fn coupling_tmix_upper(
    game: &GameSpec,
    beta: Beta,
    trials: u64,
    horizon: u64,
    epsilon: f64,
    seed: u64,
) -> Result<CouplingEstimate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameters(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    // largest number of late runs whose Wilson upper bound stays under epsilon
    let allowed = (0..=trials).take_while(|&k| wilson_upper(k, trials, WILSON_Z) <= epsilon).last();
    let allowed = allowed
        .ok_or_else(|| Error::InvalidParameters(format!("{trials} trials cannot certify epsilon = {epsilon}")))?;
    let pairs = start_pairs(game, 1024, 8, seed)?;
    let mut t_upper = 0;
    let mut worst_mean = 0.0f64;
    for (p, pair) in pairs.iter().enumerate() {
        let sample = coalescence_sample(game, pair, p as u64, beta, trials, horizon, seed)?;
        let mut times: Vec<u64> = Vec::with_capacity(sample.len());
        let mut timeouts = 0u64;
        for s in &sample {
            match s {
                Some(t) => times.push(*t),
                None => timeouts += 1,
            }
        }
        if timeouts > allowed {
            return Err(Error::Horizon { horizon, last: timeouts as f64 / trials as f64 });
        }
        times.sort_unstable();
        // need #{tau > t} <= allowed, timeouts count as late
        let keep = trials - allowed;
        let t = if keep == 0 { 0 } else { times[keep as usize - 1] };
        t_upper = t_upper.max(t);
        let mean = times.iter().sum::<u64>() as f64 / times.len().max(1) as f64;
        worst_mean = worst_mean.max(mean);
    }
    Ok(CouplingEstimate { t_upper, pairs: pairs.len(), trials, worst_mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::*;
    use crate::logit::{transition_matrix, update_distribution};

    fn b(v: f64) -> Beta {
        Beta::new(v).unwrap()
    }

    #[test]
    fn joint_update_marginals_exhaustive() {
        let games = [make_ck(), make_or(3).unwrap(), make_xor(3).unwrap(), make_matching_pennies()];
        for g in &games {
            let space = g.space().unwrap();
            for beta in [0.0, 0.5, 2.0, 10.0] {
                for x in space.iter() {
                    for y in space.iter() {
                        for i in 0..g.n_players() {
                            let ju = joint_update(g, &x, &y, i, b(beta)).unwrap();
                            let sx = update_distribution(g, &x, i, b(beta)).unwrap();
                            let sy = update_distribution(g, &y, i, b(beta)).unwrap();
                            assert!((ju.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                            assert!(ju.probs[2] == 0.0 || ju.probs[3] == 0.0);
                            for s in 0..2 {
                                assert!((ju.marginal_x(s) - sx[s]).abs() < 1e-12);
                                assert!((ju.marginal_y(s) - sy[s]).abs() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn joint_update_examples() {
        let g = make_or(2).unwrap();
        let beta = 1.3;
        // player 0 sees OR = 1 in y whatever she plays, so her update there is uniform
        let ju = joint_update(&g, &Profile::zeros(2), &Profile::new(vec![0, 1]), 0, b(beta)).unwrap();
        assert!((ju.probs[0] - 0.5).abs() < 1e-15);
        assert!((ju.probs[1] - 1.0 / (1.0 + f64::exp(beta))).abs() < 1e-15);
        let ju = joint_update(&g, &Profile::zeros(2), &Profile::ones(2), 0, b(0.0)).unwrap();
        assert_eq!(ju.probs, [0.5, 0.5, 0.0, 0.0]);
        let ju = joint_update(&g, &Profile::ones(2), &Profile::new(vec![1, 0]), 1, b(2.0)).unwrap();
        assert_eq!(ju.mismatch(), 0.0);
    }

    #[test]
    fn unsupported_games() {
        let three = GameSpec::new("three", vec![3, 2], |_, _| 0.0).unwrap();
        let x = Profile::zeros(2);
        assert!(matches!(joint_update(&three, &x, &x, 0, b(1.0)), Err(Error::Unsupported(_))));
        assert!(matches!(coupling_product_matrix(&three, b(1.0)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn coalesced_pairs_stay_together() {
        let g = make_ck();
        let mut rng = rng_for(3, 0);
        let mut s = CoupledState::new(&g, Profile::new(vec![1, 0, 1]), Profile::new(vec![1, 0, 1])).unwrap();
        for _ in 0..200 {
            s = coupled_step(&g, &s, b(1.0), &mut rng).unwrap();
            assert!(s.is_coalesced());
        }
    }

    #[test]
    fn ck_matching_updates_never_separate() {
        let g = make_ck();
        let space = g.space().unwrap();
        for beta in [0.0, 1.0, 5.0] {
            for x in space.iter() {
                for y in space.iter() {
                    for i in 0..3 {
                        let ju = joint_update(&g, &x, &y, i, b(beta)).unwrap();
                        for (&(a, c), &p) in JointUpdate::OUTCOMES.iter().zip(&ju.probs) {
                            if p > 0.0 && a == c {
                                assert!(x.with(i, a).hamming(&y.with(i, c)) <= x.hamming(&y));
                            }
                        }
                    }
                }
            }
        }
        // from the antipodal pair a matched step removes one disagreement
        let (x, y) = (Profile::zeros(3), Profile::ones(3));
        let ju = joint_update(&g, &x, &y, 0, b(1.0)).unwrap();
        assert!(ju.probs[0] + ju.probs[1] > 0.0);
        assert_eq!(x.with(0, 0).hamming(&y.with(0, 0)), 2);
    }

    #[test]
    fn product_marginalises_to_single_chain() {
        for g in [make_ck(), make_or(3).unwrap(), make_matching_pennies()] {
            for beta in [0.0, 0.7, 4.0] {
                let single = transition_matrix(&g, b(beta)).unwrap();
                let prod = coupling_product_matrix(&g, b(beta)).unwrap();
                let n = single.size();
                assert!(prod.max_row_sum_error() < 1e-12);
                for x in 0..n {
                    for y in 0..n {
                        let mut first = vec![0.0; n];
                        let mut second = vec![0.0; n];
                        for (c, v) in prod.row(x * n + y) {
                            first[c / n] += v;
                            second[c % n] += v;
                        }
                        for z in 0..n {
                            assert!((first[z] - single.get(x, z)).abs() < 1e-12);
                            assert!((second[z] - single.get(y, z)).abs() < 1e-12);
                        }
                        if x == y {
                            assert!(prod.row(x * n + y).all(|(c, _)| c / n == c % n));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ck_three_step_coalescence() {
        let g = make_ck();
        for beta in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
            let prod = coupling_product_matrix(&g, b(beta)).unwrap();
            assert_eq!(prod.size(), 64);
            let h = coalescence_probabilities(&prod, 8, 3).unwrap();
            assert!(h.iter().all(|&p| p >= 1.0 / 36.0), "beta={beta} min={}", h.iter().cloned().fold(1.0, f64::min));
        }
    }

    #[test]
    fn coalescence_time_basics() {
        let g = make_ck();
        let x = Profile::new(vec![0, 1, 0]);
        let mut rng = rng_for(1, 0);
        assert_eq!(coalescence_time(&g, &x, &x, b(2.0), &mut rng, 10).unwrap(), Some(0));
        let y = Profile::ones(3);
        let t = coalescence_time(&g, &Profile::zeros(3), &y, b(2.0), &mut rng, 100_000).unwrap();
        assert!(t.unwrap() > 0);
        assert_eq!(coalescence_time(&g, &Profile::zeros(3), &y, b(2.0), &mut rng, 0).unwrap(), None);
    }

    #[test]
    fn wilson_interval() {
        assert!(wilson_upper(0, 100, WILSON_Z) > 0.0);
        assert!(wilson_lower(0, 100, WILSON_Z) < 1e-12);
        let (lo, hi) = (wilson_lower(30, 100, WILSON_Z), wilson_upper(30, 100, WILSON_Z));
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((hi - 0.3958).abs() < 1e-3);
    }

    #[test]
    fn uniform_play_coalesces_quickly() {
        let g = make_or(4).unwrap();
        let est = coupling_tmix_upper(&g, b(0.0), 400, 100_000, 0.25, 11).unwrap();
        assert!(est.t_upper > 0 && est.t_upper < 60, "{est:?}");
        let again = coupling_tmix_upper(&g, b(0.0), 400, 100_000, 0.25, 11).unwrap();
        assert_eq!(est, again);
        assert!(coupling_tmix_upper(&g, b(0.0), 3, 100, 0.25, 1).is_err());
    }
}
