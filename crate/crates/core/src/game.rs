//! Finite strategic games, profiles and the concrete games analysed by this crate.
//!
//! A game is a utility oracle over profiles of strategy indices. Profiles are
//! enumerated with a mixed-radix code in which player 0 is the least
//! significant digit, so index `k` of every matrix and distribution built from
//! a game always refers to the same profile.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the number of profiles an enumeration may visit.
pub const ENUMERATION_CAP: usize = 1 << 20;

/// Absolute tolerance used when comparing utility and potential differences.
pub const POTENTIAL_TOL: f64 = 1e-12;

pub type UtilityFn = dyn Fn(usize, &[usize]) -> f64 + Send + Sync;
pub type PotentialFn = dyn Fn(&[usize]) -> f64 + Send + Sync;

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(Vec<usize>);

impl Profile {
    pub fn new(strategies: Vec<usize>) -> Self {
        Profile(strategies)
    }

    pub fn zeros(n: usize) -> Self {
        Profile(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        Profile(vec![1; n])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Returns `(x_{-i}, s)`.
    pub fn with(&self, i: usize, s: usize) -> Profile {
        let mut v = self.0.clone();
        v[i] = s;
        Profile(v)
    }

    pub fn set(&mut self, i: usize, s: usize) {
        self.0[i] = s;
    }

    /// Number of players not at strategy 0 (`|x|` for 0/1 profiles).
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }

    pub fn hamming(&self, other: &Profile) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for Profile {
    fn from(v: Vec<usize>) -> Self {
        Profile(v)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A finite strategic game given by a utility oracle.
///
/// Cloning is cheap; the oracles are shared. Oracles must be pure.
#[derive(Clone)]
pub struct GameSpec {
    name: String,
    strategy_counts: Vec<usize>,
    utility: Arc<UtilityFn>,
    potential: Option<Arc<PotentialFn>>,
    symmetric: bool,
}

impl fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameSpec")
            .field("name", &self.name)
            .field("strategy_counts", &self.strategy_counts)
            .field("has_potential", &self.potential.is_some())
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl GameSpec {
    pub fn new<F>(name: impl Into<String>, strategy_counts: Vec<usize>, utility: F) -> Result<Self>
    where
        F: Fn(usize, &[usize]) -> f64 + Send + Sync + 'static,
    {
        if strategy_counts.is_empty() {
            return Err(Error::InvalidParameters("a game needs at least one player".into()));
        }
        if strategy_counts.contains(&0) {
            return Err(Error::InvalidParameters("every player needs a strategy".into()));
        }
        Ok(GameSpec {
            name: name.into(),
            strategy_counts,
            utility: Arc::new(utility),
            potential: None,
            symmetric: false,
        })
    }

    /// Attaches an exact potential. Use [`verify_exact_potential`] to check it.
    pub fn with_potential<F>(mut self, phi: F) -> Self
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        self.potential = Some(Arc::new(phi));
        self
    }

    /// Declares that relabelling players leaves the game unchanged.
    ///
    /// Analysis routines only exploit the claim after
    /// [`verify_player_symmetry`] confirms it.
    pub fn declare_symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    pub fn is_two_strategy(&self) -> bool {
        self.strategy_counts.iter().all(|&c| c == 2)
    }

    pub fn check_profile(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.n_players() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} entries, game `{}` has {} players",
                x.len(),
                self.name,
                self.n_players()
            )));
        }
        if let Some((i, (&s, &c))) = x.iter().zip(&self.strategy_counts).enumerate().find(|(_, (&s, &c))| s >= c) {
            return Err(Error::InvalidProfile(format!("player {i} plays strategy {s} but has only {c}")));
        }
        Ok(())
    }

    pub fn check_player(&self, i: usize) -> Result<()> {
        if i >= self.n_players() {
            return Err(Error::InvalidProfile(format!("player {i} out of range for {} players", self.n_players())));
        }
        Ok(())
    }

    pub fn utility(&self, i: usize, x: &Profile) -> Result<f64> {
        self.check_player(i)?;
        self.check_profile(x.as_slice())?;
        Ok((self.utility)(i, x.as_slice()))
    }

    /// Utility without validity checks; `x` must be a valid profile.
    #[inline]
    pub fn utility_raw(&self, i: usize, x: &[usize]) -> f64 {
        (self.utility)(i, x)
    }

    pub fn potential(&self, x: &Profile) -> Option<f64> {
        self.potential.as_ref().map(|phi| phi(x.as_slice()))
    }

    #[inline]
    pub fn potential_raw(&self, x: &[usize]) -> Option<f64> {
        self.potential.as_ref().map(|phi| phi(x))
    }

    pub fn space(&self) -> Result<ProfileSpace> {
        ProfileSpace::new(self, ENUMERATION_CAP)
    }

    /// Same game with `c_i` added to every utility of player `i`.
    pub fn translated(&self, shifts: Vec<f64>) -> Result<GameSpec> {
        if shifts.len() != self.n_players() {
            return Err(Error::Dimension { expected: self.n_players(), found: shifts.len() });
        }
        let inner = Arc::clone(&self.utility);
        Ok(GameSpec {
            name: format!("{}+shift", self.name),
            strategy_counts: self.strategy_counts.clone(),
            utility: Arc::new(move |i, x| inner(i, x) + shifts[i]),
            potential: None,
            symmetric: false,
        })
    }

    /// Same game with every utility multiplied by `alpha`.
    pub fn rescaled(&self, alpha: f64) -> GameSpec {
        let inner = Arc::clone(&self.utility);
        GameSpec {
            name: format!("{}*{alpha}", self.name),
            strategy_counts: self.strategy_counts.clone(),
            utility: Arc::new(move |i, x| alpha * inner(i, x)),
            potential: self.potential.as_ref().map(|phi| {
                let phi = Arc::clone(phi);
                Arc::new(move |x: &[usize]| alpha * phi(x)) as Arc<PotentialFn>
            }),
            symmetric: self.symmetric,
        }
    }
}

/// Bijection between profiles and `0..size` (player 0 least significant).
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    counts: Vec<usize>,
    size: usize,
}

impl ProfileSpace {
    pub fn new(game: &GameSpec, cap: usize) -> Result<Self> {
        Self::from_counts(game.strategy_counts().to_vec(), cap)
    }

    pub fn from_counts(counts: Vec<usize>, cap: usize) -> Result<Self> {
        let size = counts.iter().fold(1u128, |acc, &c| acc.saturating_mul(c as u128));
        if size > cap as u128 {
            return Err(Error::Capacity { what: "profile space", size, cap: cap as u128 });
        }
        Ok(ProfileSpace { counts, size: size as usize })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_players(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        let mut k = 0;
        for (&s, &c) in x.iter().zip(&self.counts).rev() {
            k = k * c + s;
        }
        k
    }

    pub fn decode(&self, k: usize) -> Profile {
        let mut v = vec![0; self.counts.len()];
        self.decode_into(k, &mut v);
        Profile(v)
    }

    pub fn decode_into(&self, mut k: usize, out: &mut [usize]) {
        for (slot, &c) in out.iter_mut().zip(&self.counts) {
            *slot = k % c;
            k /= c;
        }
    }

    /// Index stride of player `i`: changing `x_i` by one moves the index by this.
    pub fn stride(&self, i: usize) -> usize {
        self.counts[..i].iter().product()
    }

    pub fn iter(&self) -> impl Iterator<Item = Profile> + '_ {
        (0..self.size).map(move |k| self.decode(k))
    }

    /// One index per orbit of the player-permutation group: the profiles whose
    /// strategies are nondecreasing in the player index.
    pub fn orbit_representatives(&self) -> Vec<usize> {
        let mut buf = vec![0; self.counts.len()];
        (0..self.size)
            .filter(|&k| {
                self.decode_into(k, &mut buf);
                buf.windows(2).all(|w| w[0] <= w[1])
            })
            .collect()
    }
}

pub fn social_welfare(game: &GameSpec, x: &Profile) -> Result<f64> {
    game.check_profile(x.as_slice())?;
    Ok(welfare_raw(game, x.as_slice()))
}

#[inline]
pub(crate) fn welfare_raw(game: &GameSpec, x: &[usize]) -> f64 {
    (0..game.n_players()).map(|i| game.utility_raw(i, x)).sum()
}

/// Checks `u_i(x) - u_i(y) = phi(x) - phi(y)` for every unilateral deviation.
pub fn verify_exact_potential<F>(game: &GameSpec, phi: F) -> Result<bool>
where
    F: Fn(&[usize]) -> f64,
{
    verify_exact_potential_capped(game, phi, ENUMERATION_CAP)
}

pub fn verify_exact_potential_capped<F>(game: &GameSpec, phi: F, cap: usize) -> Result<bool>
where
    F: Fn(&[usize]) -> f64,
{
    Ok(max_potential_defect(game, phi, cap)? <= POTENTIAL_TOL)
}

/// Largest `|(u_i(x) - u_i(y)) - (phi(x) - phi(y))|` over unilateral deviations.
pub fn max_potential_defect<F>(game: &GameSpec, phi: F, cap: usize) -> Result<f64>
where
    F: Fn(&[usize]) -> f64,
{
    let space = ProfileSpace::new(game, cap)?;
    let mut x = vec![0; game.n_players()];
    let mut worst = 0.0f64;
    for k in 0..space.size() {
        space.decode_into(k, &mut x);
        let phi_x = phi(&x);
        for i in 0..game.n_players() {
            let own = x[i];
            let u_x = game.utility_raw(i, &x);
            for s in own + 1..game.strategy_counts()[i] {
                x[i] = s;
                let defect = ((u_x - game.utility_raw(i, &x)) - (phi_x - phi(&x))).abs();
                worst = worst.max(defect);
            }
            x[i] = own;
        }
    }
    Ok(worst)
}

/// Checks the game's own attached potential.
pub fn verify_attached_potential(game: &GameSpec) -> Result<bool> {
    match &game.potential {
        Some(phi) => verify_exact_potential(game, |x| phi(x)),
        None => Err(Error::MissingPotential(game.name.clone())),
    }
}

/// All profiles where no player has a strictly improving unilateral deviation.
pub fn pure_nash_equilibria(game: &GameSpec) -> Result<Vec<Profile>> {
    let space = game.space()?;
    let mut x = vec![0; game.n_players()];
    let mut out = Vec::new();
    for k in 0..space.size() {
        space.decode_into(k, &mut x);
        let mut stable = true;
        'players: for i in 0..game.n_players() {
            let own = x[i];
            let u = game.utility_raw(i, &x);
            for s in 0..game.strategy_counts()[i] {
                if s == own {
                    continue;
                }
                x[i] = s;
                let better = game.utility_raw(i, &x) > u + POTENTIAL_TOL;
                x[i] = own;
                if better {
                    stable = false;
                    break 'players;
                }
            }
        }
        if stable {
            out.push(Profile(x.clone()));
        }
    }
    Ok(out)
}

/// Exhaustively checks that swapping any two adjacent players (together with
/// their strategies) maps utilities onto each other.
pub fn verify_player_symmetry(game: &GameSpec) -> Result<bool> {
    let n = game.n_players();
    if game.strategy_counts().windows(2).any(|w| w[0] != w[1]) {
        return Ok(false);
    }
    let space = game.space()?;
    let mut x = vec![0; n];
    let mut swapped = vec![0; n];
    for k in 0..space.size() {
        space.decode_into(k, &mut x);
        for i in 0..n.saturating_sub(1) {
            swapped.copy_from_slice(&x);
            swapped.swap(i, i + 1);
            for j in 0..n {
                let image = if j == i {
                    i + 1
                } else if j == i + 1 {
                    i
                } else {
                    j
                };
                let d = game.utility_raw(j, &x) - game.utility_raw(image, &swapped);
                if d.abs() > POTENTIAL_TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn ones(x: &[usize]) -> usize {
    x.iter().filter(|&&s| s != 0).count()
}

fn require_players(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be at least 1".into()));
    }
    Ok(())
}

/// Three-player linear congestion game on facilities `g_0..g_2`, `h_0..h_2`.
///
/// Strategy 0 of player `i` uses `(g_i, h_i)`; strategy 1 uses
/// `(g_{i+1}, h_{i-1}, h_{i+1})`. A facility costs its load; utilities are
/// minus the summed cost. The attached potential is the negated Rosenthal sum.
pub fn make_ck() -> GameSpec {
    fn facilities(i: usize, s: usize) -> &'static [usize] {
        // g_j -> j, h_j -> 3 + j
        const TABLE: [[&[usize]; 2]; 3] = [[&[0, 3], &[1, 5, 4]], [&[1, 4], &[2, 3, 5]], [&[2, 5], &[0, 4, 3]]];
        TABLE[i][s]
    }
    fn loads(x: &[usize]) -> [usize; 6] {
        let mut l = [0; 6];
        for (i, &s) in x.iter().enumerate() {
            for &f in facilities(i, s) {
                l[f] += 1;
            }
        }
        l
    }
    GameSpec::new("ck", vec![2; 3], |i, x| {
        let l = loads(x);
        -(facilities(i, x[i]).iter().map(|&f| l[f]).sum::<usize>() as f64)
    })
    .expect("static game")
    .with_potential(|x| {
        let l = loads(x);
        -(l.iter().map(|&c| c * (c + 1) / 2).sum::<usize>() as f64)
    })
}

/// Symmetric 2x2 game with row payoffs `[[a, c], [d, b]]`.
fn two_by_two(name: &str, a: f64, b: f64, c: f64, d: f64) -> GameSpec {
    let row = [[a, c], [d, b]];
    let (big, small) = (a - d, b - c);
    let mut game = GameSpec::new(name, vec![2, 2], move |i, x| if i == 0 { row[x[0]][x[1]] } else { row[x[1]][x[0]] })
        .expect("static game")
        .with_potential(move |x| match (x[0], x[1]) {
            (0, 0) => big,
            (1, 1) => small,
            _ => 0.0,
        });
    game.symmetric = true;
    game
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameters("payoffs must be finite".into()));
    }
    Ok(())
}

/// 2x2 coordination game; requires `a > d`, `b > c` and `a - d >= b - c`.
pub fn make_coordination(a: f64, b: f64, c: f64, d: f64) -> Result<GameSpec> {
    check_finite(&[a, b, c, d])?;
    if !(a > d && b > c && a - d >= b - c) {
        return Err(Error::InvalidParameters(format!(
            "coordination game needs a > d, b > c, a - d >= b - c (got a={a}, b={b}, c={c}, d={d})"
        )));
    }
    Ok(two_by_two("coordination", a, b, c, d))
}

/// 2x2 anti-coordination game; requires `d > a`, `c > b` and `d - a >= c - b`.
pub fn make_anti_coordination(a: f64, b: f64, c: f64, d: f64) -> Result<GameSpec> {
    check_finite(&[a, b, c, d])?;
    if !(d > a && c > b && d - a >= c - b) {
        return Err(Error::InvalidParameters(format!(
            "anti-coordination game needs d > a, c > b, d - a >= c - b (got a={a}, b={b}, c={c}, d={d})"
        )));
    }
    Ok(two_by_two("anti_coordination", a, b, c, d))
}

/// Matching Pennies; strategy 0 is heads. The row player wins on a match.
pub fn make_matching_pennies() -> GameSpec {
    GameSpec::new("matching_pennies", vec![2, 2], |i, x| {
        let row = if x[0] == x[1] { 1.0 } else { -1.0 };
        if i == 0 {
            row
        } else {
            -row
        }
    })
    .expect("static game")
}

/// Stairs game: potential `|x|` and utilities `u_i = |x|`.
pub fn make_stairs(n: usize) -> Result<GameSpec> {
    require_players(n)?;
    Ok(GameSpec::new("stairs", vec![2; n], |_, x| ones(x) as f64)?
        .with_potential(|x| ones(x) as f64)
        .declare_symmetric())
}

/// OR game: every player gets 0 at the all-zero profile and -1 elsewhere.
pub fn make_or(n: usize) -> Result<GameSpec> {
    require_players(n)?;
    let or = |x: &[usize]| if x.iter().all(|&s| s == 0) { 0.0 } else { -1.0 };
    Ok(GameSpec::new("or", vec![2; n], move |_, x| or(x))?.with_potential(or).declare_symmetric())
}

/// XOR game: every player gets 0 on even parity and -1 on odd parity.
pub fn make_xor(n: usize) -> Result<GameSpec> {
    require_players(n)?;
    let xor = |x: &[usize]| if ones(x).is_multiple_of(2) { 0.0 } else { -1.0 };
    Ok(GameSpec::new("xor", vec![2; n], move |_, x| xor(x))?.with_potential(xor).declare_symmetric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[usize]) -> Profile {
        Profile::new(v.to_vec())
    }

    #[test]
    fn ck_welfare_levels() {
        let g = make_ck();
        assert_eq!(social_welfare(&g, &p(&[0, 0, 0])).unwrap(), -6.0);
        for x in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert_eq!(social_welfare(&g, &p(&x)).unwrap(), -13.0);
        }
        for x in [[1, 1, 0], [0, 1, 1], [1, 0, 1]] {
            assert_eq!(social_welfare(&g, &p(&x)).unwrap(), -16.0);
        }
        assert_eq!(social_welfare(&g, &p(&[1, 1, 1])).unwrap(), -15.0);
    }

    #[test]
    fn ck_utilities_at_equilibria() {
        let g = make_ck();
        for i in 0..3 {
            assert_eq!(g.utility(i, &p(&[0, 0, 0])).unwrap(), -2.0);
            assert_eq!(g.utility(i, &p(&[1, 1, 1])).unwrap(), -5.0);
        }
        assert!(verify_attached_potential(&g).unwrap());
        assert_eq!(g.potential(&p(&[0, 0, 0])), Some(-6.0));
    }

    #[test]
    fn ck_equilibria() {
        let ne = pure_nash_equilibria(&make_ck()).unwrap();
        assert_eq!(ne, vec![p(&[0, 0, 0]), p(&[1, 1, 1])]);
    }

    #[test]
    fn welfare_rejects_bad_profiles() {
        let g = make_xor(4).unwrap();
        assert_eq!(social_welfare(&g, &p(&[0, 0, 0, 0])).unwrap(), 0.0);
        assert!(matches!(social_welfare(&g, &p(&[0, 0, 0])), Err(Error::InvalidProfile(_))));
        assert!(matches!(social_welfare(&g, &p(&[0, 0, 2, 0])), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn potentials_of_generated_games() {
        let or5 = make_or(5).unwrap();
        assert!(verify_exact_potential(&or5, |x| if x.iter().all(|&s| s == 0) { 0.0 } else { -1.0 }).unwrap());
        let stairs = make_stairs(6).unwrap();
        assert!(verify_exact_potential(&stairs, |x| ones(x) as f64).unwrap());
        for g in [make_ck(), make_or(4).unwrap(), make_xor(5).unwrap(), make_stairs(3).unwrap()] {
            assert!(verify_attached_potential(&g).unwrap(), "{}", g.name());
        }
    }

    #[test]
    fn matching_pennies_has_no_potential() {
        let mp = make_matching_pennies();
        assert_eq!(mp.utility(0, &p(&[0, 0])).unwrap(), 1.0);
        assert_eq!(mp.utility(1, &p(&[0, 0])).unwrap(), -1.0);
        for c in [-3.0, 0.0, 1.0, 7.5] {
            assert!(!verify_exact_potential(&mp, |_| c).unwrap());
        }
        for x in mp.space().unwrap().iter() {
            assert_eq!(social_welfare(&mp, &x).unwrap(), 0.0);
        }
        assert!(matches!(verify_attached_potential(&mp), Err(Error::MissingPotential(_))));
    }

    #[test]
    fn coordination_game() {
        let g = make_coordination(3.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(g.potential(&p(&[0, 0])), Some(3.0));
        assert_eq!(g.potential(&p(&[1, 1])), Some(2.0));
        assert_eq!(g.potential(&p(&[0, 1])), Some(0.0));
        assert!(verify_attached_potential(&g).unwrap());
        assert_eq!(pure_nash_equilibria(&g).unwrap(), vec![p(&[0, 0]), p(&[1, 1])]);
        assert!(verify_player_symmetry(&g).unwrap());
        // row player gets c against column 1, column player gets d
        let g = make_coordination(5.0, 4.0, 1.0, 2.0).unwrap();
        assert_eq!(g.utility(0, &p(&[0, 1])).unwrap(), 1.0);
        assert_eq!(g.utility(1, &p(&[0, 1])).unwrap(), 2.0);
        assert_eq!(g.utility(0, &p(&[1, 0])).unwrap(), 2.0);
        assert_eq!(g.utility(1, &p(&[1, 0])).unwrap(), 1.0);
    }

    #[test]
    fn coordination_parameter_checks() {
        assert!(matches!(make_coordination(1.0, 3.0, 0.0, 0.0), Err(Error::InvalidParameters(_))));
        assert!(matches!(make_coordination(0.0, 1.0, 0.0, 1.0), Err(Error::InvalidParameters(_))));
        assert!(make_coordination(2.0, 2.0, 0.0, 0.0).is_ok());
        assert!(matches!(make_anti_coordination(3.0, 2.0, 0.0, 0.0), Err(Error::InvalidParameters(_))));
        assert!(matches!(make_or(0), Err(Error::InvalidParameters(_))));
        assert!(matches!(make_xor(0), Err(Error::InvalidParameters(_))));
        assert!(matches!(make_stairs(0), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn anti_coordination_game() {
        let g = make_anti_coordination(0.0, 0.0, 2.0, 3.0).unwrap();
        assert_eq!(pure_nash_equilibria(&g).unwrap(), vec![p(&[1, 0]), p(&[0, 1])]);
        assert!(verify_attached_potential(&g).unwrap());
        let phi = |v: &[usize]| g.potential(&p(v)).unwrap();
        assert!(phi(&[0, 1]) > phi(&[0, 0]) && phi(&[0, 1]) > phi(&[1, 1]));
        assert_eq!(phi(&[0, 1]), phi(&[1, 0]));
        assert_eq!(g.utility(0, &p(&[0, 0])).unwrap(), 0.0);
        assert_eq!(g.utility(0, &p(&[0, 1])).unwrap(), 2.0);
        assert_eq!(g.utility(0, &p(&[1, 0])).unwrap(), 3.0);
        assert_eq!(g.utility(0, &p(&[1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn small_game_values() {
        let or3 = make_or(3).unwrap();
        assert_eq!(or3.potential(&p(&[0, 0, 0])), Some(0.0));
        assert_eq!(or3.potential(&p(&[0, 1, 0])), Some(-1.0));
        let xor3 = make_xor(3).unwrap();
        assert_eq!(xor3.utility(2, &p(&[1, 1, 0])).unwrap(), 0.0);
        assert_eq!(xor3.utility(0, &p(&[1, 0, 0])).unwrap(), -1.0);
        let st = make_stairs(3).unwrap();
        assert_eq!(st.potential(&p(&[1, 1, 0])), Some(2.0));
    }

    #[test]
    fn equilibrium_counts() {
        for n in 2..=10 {
            let or = pure_nash_equilibria(&make_or(n).unwrap()).unwrap();
            assert_eq!(or.len(), (1 << n) - n, "OR n={n}");
            let xor = pure_nash_equilibria(&make_xor(n).unwrap()).unwrap();
            assert_eq!(xor.len(), 1 << (n - 1), "XOR n={n}");
            assert!(xor.iter().all(|x| x.weight() % 2 == 0));
        }
    }

    #[test]
    fn symmetry_detection() {
        assert!(verify_player_symmetry(&make_or(4).unwrap()).unwrap());
        assert!(verify_player_symmetry(&make_xor(5).unwrap()).unwrap());
        assert!(verify_player_symmetry(&make_stairs(4).unwrap()).unwrap());
        assert!(!verify_player_symmetry(&make_ck()).unwrap());
        assert!(!verify_player_symmetry(&make_matching_pennies()).unwrap());
    }

    #[test]
    fn space_capacity() {
        let g = make_or(21).unwrap();
        assert!(matches!(g.space(), Err(Error::Capacity { .. })));
        let reps = make_or(4).unwrap().space().unwrap().orbit_representatives();
        assert_eq!(reps, vec![0, 8, 12, 14, 15]);
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(counts in prop::collection::vec(1usize..5, 1..6), seed in any::<u64>()) {
            let space = ProfileSpace::from_counts(counts, ENUMERATION_CAP).unwrap();
            let k = (seed as usize) % space.size();
            let x = space.decode(k);
            prop_assert_eq!(space.encode(x.as_slice()), k);
            for (i, &c) in space.counts().iter().enumerate() {
                prop_assert!(x.get(i) < c);
            }
        }
    }

    #[test]
    fn encode_decode_exhaustive() {
        let space = ProfileSpace::from_counts(vec![2, 3, 1, 4], ENUMERATION_CAP).unwrap();
        for k in 0..space.size() {
            assert_eq!(space.encode(space.decode(k).as_slice()), k);
        }
        assert_eq!(space.decode(1).into_vec(), vec![1, 0, 0, 0]);
        assert_eq!(space.stride(1), 2);
        assert_eq!(space.stride(3), 6);
    }
}
