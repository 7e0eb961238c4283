//! The Hamming distance between two coupled XOR chains.
//!
//! For the XOR game the distance of the coupled pair is itself a Markov
//! chain on `{0, ..., n}`. Expected passage times between its levels have
//! closed forms; this module computes both and checks the lumping.

use nalgebra::{DMatrix, DVector};

use crate::coupling::{joint_update_raw, JointUpdate};
use crate::error::{Error, Result};
use crate::game::{make_xor, ProfileSpace};

/// Largest n for which the lumping is checked over every profile pair.
pub const EXHAUSTIVE_MAX_N: usize = 10;

/// The distance chain of the coupled XOR dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceChain {
    pub n: usize,
    pub beta: f64,
}

/// One-step law from a distance `d`: probabilities of `d - 1`, `d`, `d + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceStep {
    pub down: f64,
    pub stay: f64,
    pub up: f64,
}

impl DistanceChain {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("XOR needs at least one player".into()));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameters(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(DistanceChain { n, beta })
    }

    /// Probability that the selected player ends up equal in both chains when
    /// her update laws are mirror images.
    fn agree(&self) -> f64 {
        2.0 / (1.0 + self.beta.exp())
    }

    pub fn step(&self, d: usize) -> Result<DistanceStep> {
        if d > self.n {
            return Err(Error::InvalidParameters(format!("distance {d} exceeds n = {}", self.n)));
        }
        let nf = self.n as f64;
        let df = d as f64;
        if d == 0 {
            return Ok(DistanceStep { down: 0.0, stay: 1.0, up: 0.0 });
        }
        if d.is_multiple_of(2) {
            let down = df / nf * self.agree();
            Ok(DistanceStep { down, stay: 1.0 - down, up: 0.0 })
        } else {
            let down = df / nf;
            let stay = (nf - df) / nf * self.agree();
            let up = (1.0 - down - stay).max(0.0);
            Ok(DistanceStep { down, stay, up })
        }
    }

    /// Expected time to reach `target` from every `d > target` (index
    /// `d - target - 1`), by a direct linear solve.
    pub fn passage_times(&self, target: usize) -> Result<Vec<f64>> {
        if target >= self.n {
            return Err(Error::InvalidParameters(format!("target {target} must be below n = {}", self.n)));
        }
        let m = self.n - target;
        // unknowns h(d) for d = target+1..=n; h(target) = 0
        let mut a = DMatrix::<f64>::zeros(m, m);
        let b = DVector::<f64>::from_element(m, 1.0);
        for row in 0..m {
            let d = target + 1 + row;
            let s = self.step(d)?;
            a[(row, row)] += 1.0 - s.stay;
            if row > 0 {
                a[(row, row - 1)] -= s.down;
            }
            if d < self.n {
                a[(row, row + 1)] -= s.up;
            }
        }
        let sol = a.lu().solve(&b).ok_or_else(|| {
            Error::Numerical(format!("singular passage system (n = {}, beta = {})", self.n, self.beta))
        })?;
        if sol.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numerical("passage times are not finite".into()));
        }
        Ok(sol.iter().copied().collect())
    }
}

/// Law of the next distance from distance `d`.
pub fn distance_step_distribution(n: usize, beta: f64, d: usize) -> Result<DistanceStep> {
    DistanceChain::new(n, beta)?.step(d)
}

fn check_ell(n: usize, ell: usize, top: usize) -> Result<()> {
    if ell == 0 || ell > top {
        return Err(Error::InvalidParameters(format!("level {ell} is outside 1..={top} for n = {n}")));
    }
    Ok(())
}

/// `nu_l = (n/(2l-1)) (1 + ((n-2l+1)/(2l)) (e^beta - 1)/2)`, the expected
/// time from `2l - 1` to `2l - 2`; needs `2l - 1 <= n`.
pub fn nu_closed_form(n: usize, beta: f64, ell: usize) -> Result<f64> {
    check_ell(n, ell, n.div_ceil(2))?;
    let (nf, l) = (n as f64, ell as f64);
    Ok(nf / (2.0 * l - 1.0) * (1.0 + (nf - 2.0 * l + 1.0) / (2.0 * l) * (beta.exp() - 1.0) / 2.0))
}

/// `mu_l = nu_l + (n/(2l)) (1 + e^beta)/2`, the expected time from `2l` to
/// `2l - 2`; needs `2l <= n`.
pub fn mu_closed_form(n: usize, beta: f64, ell: usize) -> Result<f64> {
    check_ell(n, ell, n / 2)?;
    let (nf, l) = (n as f64, ell as f64);
    Ok(nu_closed_form(n, beta, ell)? + nf / (2.0 * l) * (1.0 + beta.exp()) / 2.0)
}

/// Passage times from the linear system: `nu[l-1]` and `mu[l-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimes {
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
}

pub fn distance_hitting_times(n: usize, beta: f64) -> Result<HittingTimes> {
    let chain = DistanceChain::new(n, beta)?;
    let mut nu = Vec::new();
    let mut mu = Vec::new();
    for ell in 1..=n.div_ceil(2) {
        let h = chain.passage_times(2 * ell - 2)?;
        nu.push(h[0]);
        if 2 * ell <= n {
            mu.push(h[1]);
        }
    }
    Ok(HittingTimes { nu, mu })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalescenceBound {
    /// `1 + E[tau]` from distance n, assembled from the closed forms.
    pub sum: f64,
    /// `(n^2/2)(n (e^beta - 1)/2 + 2) + 1`.
    pub envelope: f64,
}

impl CoalescenceBound {
    /// `4 (1 + E[tau])`: Markov's inequality makes `P[tau > t] <= 1/4` there.
    pub fn mixing_bound(&self) -> f64 {
        4.0 * self.sum
    }
}

/// `1 + sum_{l=1}^{floor(n/2)} mu_l`, plus `nu_{(n+1)/2}` for odd n.
pub fn expected_coalescence_bound(n: usize, beta: f64) -> Result<CoalescenceBound> {
    DistanceChain::new(n, beta)?;
    let mut sum = 1.0;
    for ell in 1..=n / 2 {
        sum += mu_closed_form(n, beta, ell)?;
    }
    if n % 2 == 1 {
        sum += nu_closed_form(n, beta, n.div_ceil(2))?;
    }
    let nf = n as f64;
    let envelope = nf * nf / 2.0 * (nf * (beta.exp() - 1.0) / 2.0 + 2.0) + 1.0;
    Ok(CoalescenceBound { sum, envelope })
}

/// Expected coalescence time from distance `n`, by linear solve.
pub fn expected_coalescence_exact(n: usize, beta: f64) -> Result<f64> {
    let h = DistanceChain::new(n, beta)?.passage_times(0)?;
    Ok(*h.last().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub pairs_checked: u64,
    pub max_error: f64,
    pub exhaustive: bool,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.max_error <= 1e-12
    }
}

/// Compares the coupled XOR step, projected to Hamming distance, with the
/// distance chain. Every profile pair is examined for `n <= EXHAUSTIVE_MAX_N`;
/// larger games use the pairs `(0, 1^d 0^{n-d})`.
pub fn verify_xor_coupling_law(n: usize, beta: f64) -> Result<LawReport> {
    let chain = DistanceChain::new(n, beta)?;
    let game = make_xor(n)?;
    let mut max_error = 0.0f64;
    let mut pairs = 0u64;
    let mut check = |x: &mut [usize], y: &mut [usize]| -> Result<()> {
        let d = x.iter().zip(y.iter()).filter(|(a, b)| a != b).count();
        let mut law = [0.0f64; 3];
        for i in 0..n {
            let ju = joint_update_raw(&game, x, y, i, beta);
            let differs = x[i] != y[i];
            for (&(a, b), &p) in JointUpdate::OUTCOMES.iter().zip(&ju.probs) {
                let after = d - usize::from(differs) + usize::from(a != b);
                law[after + 1 - d] += p / n as f64;
            }
        }
        let s = chain.step(d)?;
        let err = (law[0] - s.down).abs().max((law[1] - s.stay).abs()).max((law[2] - s.up).abs());
        max_error = max_error.max(err);
        pairs += 1;
        Ok(())
    };
    let exhaustive = n <= EXHAUSTIVE_MAX_N;
    if exhaustive {
        let space = ProfileSpace::from_counts(vec![2; n], 1 << EXHAUSTIVE_MAX_N)?;
        let mut x = vec![0; n];
        let mut y = vec![0; n];
        for kx in 0..space.size() {
            space.decode_into(kx, &mut x);
            for ky in 0..space.size() {
                space.decode_into(ky, &mut y);
                check(&mut x, &mut y)?;
            }
        }
    } else {
        for d in 0..=n {
            let mut x = vec![0; n];
            let mut y: Vec<usize> = (0..n).map(|i| usize::from(i < d)).collect();
            check(&mut x, &mut y)?;
        }
    }
    Ok(LawReport { pairs_checked: pairs, max_error, exhaustive })
}
