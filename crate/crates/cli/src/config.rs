//! Experiment configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use logit_core::game::{
    make_anti_coordination, make_ck, make_coordination, make_matching_pennies, make_or, make_stairs, make_xor,
};
use logit_core::GameSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Game names accepted in `[game] name`.
pub const GAME_NAMES: [&str; 7] =
    ["ck", "coordination", "anti_coordination", "matching_pennies", "stairs", "or", "xor"];

/// A grid point: a number, or `"c ln n"` resolved against the player count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Value(f64),
    Expr(String),
}

impl BetaSpec {
    /// Parses a command-line token such as `2`, `0.5`, `ln n` or `2 ln n`.
    pub fn parse(token: &str) -> Result<Self> {
        let token = token.trim();
        if let Ok(v) = token.parse::<f64>() {
            let spec = BetaSpec::Value(v);
            spec.resolve(2)?;
            return Ok(spec);
        }
        let spec = BetaSpec::Expr(token.to_string());
        spec.log_coefficient()?;
        Ok(spec)
    }

    fn log_coefficient(&self) -> Result<f64> {
        let BetaSpec::Expr(s) = self else { unreachable!() };
        let norm = s.to_lowercase().replace('*', " ");
        let norm = norm.trim();
        let head = norm
            .strip_suffix("ln n")
            .or_else(|| norm.strip_suffix("log n"))
            .ok_or_else(|| CliError::Config(format!("cannot read beta `{s}`; expected a number or `c ln n`")))?
            .trim();
        let c = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().map_err(|_| CliError::Config(format!("bad coefficient in beta `{s}`")))?
        };
        if !c.is_finite() || c < 0.0 {
            return Err(CliError::Config(format!("beta `{s}` has a negative or non-finite coefficient")));
        }
        Ok(c)
    }

    /// The value for a game with `n` players.
    pub fn resolve(&self, n: usize) -> Result<f64> {
        let v = match self {
            BetaSpec::Value(v) => *v,
            BetaSpec::Expr(_) => self.log_coefficient()? * (n as f64).ln(),
        };
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::Config(format!("beta must be finite and >= 0, got {v}")));
        }
        Ok(v)
    }
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Value(v) => write!(f, "{v}"),
            BetaSpec::Expr(s) => f.write_str(s),
        }
    }
}

/// `{0, 0.1, 0.5, 1, 2, ln n, 2 ln n, 5, 10}`.
pub fn default_beta_grid() -> Vec<BetaSpec> {
    let mut grid: Vec<BetaSpec> = [0.0, 0.1, 0.5, 1.0, 2.0].into_iter().map(BetaSpec::Value).collect();
    grid.push(BetaSpec::Expr("ln n".into()));
    grid.push(BetaSpec::Expr("2 ln n".into()));
    grid.push(BetaSpec::Value(5.0));
    grid.push(BetaSpec::Value(10.0));
    grid
}

/// Resolves a grid for `n` players, dropping repeated values.
pub fn resolve_grid(grid: &[BetaSpec], n: usize) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(grid.len());
    for spec in grid {
        let v = spec.resolve(n)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameConfig {
    pub name: String,
    /// Player count for the n-player families; ignored by fixed-size games.
    pub n: usize,
    /// `[a, b, c, d]` for the two coordination families.
    pub params: Vec<f64>,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig { name: "or".into(), n: 6, params: Vec::new() }
    }
}

impl GameConfig {
    /// Builds the game, with `n` in place of the configured player count.
    pub fn build_with_n(&self, n: usize) -> Result<GameSpec> {
        let coord = |f: fn(f64, f64, f64, f64) -> logit_core::Result<GameSpec>| -> Result<GameSpec> {
            let p = match self.params.len() {
                0 => [3.0, 2.0, 0.0, 0.0],
                4 => [self.params[0], self.params[1], self.params[2], self.params[3]],
                k => return Err(CliError::Config(format!("{} needs 4 params [a, b, c, d], got {k}", self.name))),
            };
            f(p[0], p[1], p[2], p[3]).map_err(|e| CliError::Config(e.to_string()))
        };
        let sized = |f: fn(usize) -> logit_core::Result<GameSpec>| f(n).map_err(|e| CliError::Config(e.to_string()));
        match self.name.as_str() {
            "ck" => Ok(make_ck()),
            "coordination" => coord(make_coordination),
            "anti_coordination" => coord(make_anti_coordination),
            "matching_pennies" => Ok(make_matching_pennies()),
            "stairs" => sized(make_stairs),
            "or" => sized(make_or),
            "xor" => sized(make_xor),
            other => Err(CliError::Config(format!("unknown game `{other}`; known: {}", GAME_NAMES.join(", ")))),
        }
    }

    pub fn build(&self) -> Result<GameSpec> {
        self.build_with_n(self.n)
    }

    /// Whether the family takes a player count.
    pub fn is_sized(&self) -> bool {
        matches!(self.name.as_str(), "stairs" | "or" | "xor")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    /// Largest state count for exact single-chain work.
    pub states: usize,
    /// Step horizon for exact mixing-time searches.
    pub horizon: u64,
    /// Largest pair count for the coupled product chain.
    pub pairs: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { states: 4096, horizon: 10_000_000, pairs: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

/// Grids for the verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Halves one large-beta weight so that an edge inequality breaks.
    pub corrupt_schedule: bool,
    /// Horizon for exact mixing times inside the suite.
    pub horizon: u64,
    pub welfare_n: Vec<usize>,
    pub coordination_params: Vec<[f64; 4]>,
    pub bottleneck_n: Vec<usize>,
    pub domination_n: Vec<usize>,
    pub schedule_n: Vec<usize>,
    pub small_beta_eps: f64,
    pub recursion_n: Vec<usize>,
    pub recursion_beta: Vec<BetaSpec>,
    pub log_beta_n: Vec<usize>,
    pub log_beta_c: Vec<u32>,
    pub xor_law_n: Vec<usize>,
    pub xor_n: Vec<usize>,
    /// Extra inverse-noise values for the CK coalescence check.
    pub ck_extra_beta: Vec<f64>,
    pub stairs_exact_n: Vec<usize>,
    pub stairs_n: Vec<usize>,
    pub stairs_trials: u64,
    /// Largest allowed max/min spread of a growth ratio.
    pub growth_factor: f64,
    /// Player counts for the game and kernel invariant sweeps.
    pub invariant_n: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let v = |x: f64| BetaSpec::Value(x);
        VerifyConfig {
            corrupt_schedule: false,
            horizon: 1 << 50,
            welfare_n: (2..=10).collect(),
            coordination_params: vec![
                [3.0, 2.0, 0.0, 0.0],
                [2.0, 2.0, 0.0, 0.0],
                [4.0, 1.0, 0.0, 0.0],
                [5.0, 3.0, 1.0, 0.0],
                [2.5, 1.5, 0.5, 1.0],
            ],
            bottleneck_n: (3..=10).collect(),
            domination_n: (3..=12).collect(),
            schedule_n: vec![3, 4, 5, 6, 8, 10, 12, 16, 24, 32, 48, 64],
            small_beta_eps: 0.2,
            recursion_n: (4..=64).collect(),
            recursion_beta: vec![
                v(0.0),
                v(0.1),
                v(1.0),
                BetaSpec::Expr("ln n".into()),
                BetaSpec::Expr("2 ln n".into()),
                v(10.0),
            ],
            log_beta_n: vec![16, 32, 64],
            log_beta_c: vec![1, 2],
            xor_law_n: (2..=10).collect(),
            xor_n: (4..=10).collect(),
            ck_extra_beta: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0],
            stairs_exact_n: vec![2, 4, 6, 8],
            stairs_n: vec![4, 8, 16, 32, 64],
            stairs_trials: 400,
            growth_factor: 10.0,
            invariant_n: (2..=8).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Runs per start pair.
    pub trials: u64,
    /// Step cap per run; longer runs are recorded as timeouts.
    pub horizon: u64,
    /// Player counts to sweep; empty means `[game] n` only.
    pub n_values: Vec<usize>,
    /// Random antipodal and random pairs added when not all pairs are run.
    pub extra_pairs: usize,
    /// Run every ordered pair when `|states|^2` is at most this.
    pub all_pairs_cap: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { trials: 200, horizon: 1_000_000, n_values: Vec::new(), extra_pairs: 8, all_pairs_cap: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { n_values: vec![4, 8, 16, 32, 64] }
    }
}

/// Everything a run needs. Scalars come first so the struct serialises to
/// valid TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub epsilon: f64,
    pub beta_grid: Vec<BetaSpec>,
    pub game: GameConfig,
    pub caps: Caps,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
    pub simulate: SimulateConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 2024,
            epsilon: 0.25,
            beta_grid: default_beta_grid(),
            game: GameConfig::default(),
            caps: Caps::default(),
            output: OutputConfig::default(),
            verify: VerifyConfig::default(),
            simulate: SimulateConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Command-line values that replace config entries when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub game: Option<String>,
    pub n: Option<usize>,
    pub params: Option<Vec<f64>>,
    pub beta: Option<Vec<BetaSpec>>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub corrupt_schedule: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = &o.game {
            self.game.name = g.clone();
        }
        if let Some(n) = o.n {
            self.game.n = n;
        }
        if let Some(p) = &o.params {
            self.game.params = p.clone();
        }
        if let Some(b) = &o.beta {
            self.beta_grid = b.clone();
        }
        if let Some(e) = o.epsilon {
            self.epsilon = e;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if o.corrupt_schedule {
            self.verify.corrupt_schedule = true;
        }
    }

    /// Rejects configs that no subcommand could run.
    pub fn validate(&self) -> Result<()> {
        if self.beta_grid.is_empty() {
            return Err(CliError::Config("beta_grid is empty".into()));
        }
        for spec in &self.beta_grid {
            spec.resolve(2)?;
        }
        for spec in &self.verify.recursion_beta {
            spec.resolve(2)?;
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(CliError::Config(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if !GAME_NAMES.contains(&self.game.name.as_str()) {
            return Err(CliError::Config(format!(
                "unknown game `{}`; known: {}",
                self.game.name,
                GAME_NAMES.join(", ")
            )));
        }
        if self.caps.states == 0 || self.caps.horizon == 0 || self.caps.pairs == 0 {
            return Err(CliError::Config("caps must be positive".into()));
        }
        if self.simulate.trials == 0 {
            return Err(CliError::Config("simulate.trials must be positive".into()));
        }
        if !(self.verify.small_beta_eps > 0.0 && self.verify.small_beta_eps < 1.0) {
            return Err(CliError::Config("verify.small_beta_eps must lie in (0, 1)".into()));
        }
        if !(self.verify.growth_factor >= 1.0) {
            return Err(CliError::Config("verify.growth_factor must be at least 1".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the TOML form with the output directory blanked, so
    /// the same experiment hashes the same wherever it is written.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        let digest = Sha256::digest(c.to_toml()?.as_bytes());
        Ok(hex::encode(digest))
    }

    /// Resolved beta grid for the configured game.
    pub fn betas_for(&self, n: usize) -> Result<Vec<f64>> {
        resolve_grid(&self.beta_grid, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_specs() {
        assert_eq!(BetaSpec::parse("2.5").unwrap(), BetaSpec::Value(2.5));
        let b = BetaSpec::parse("2 ln n").unwrap();
        assert!((b.resolve(8).unwrap() - 2.0 * 8f64.ln()).abs() < 1e-15);
        assert!((BetaSpec::parse("ln n").unwrap().resolve(3).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((BetaSpec::parse("0.5*log n").unwrap().resolve(4).unwrap() - 0.5 * 4f64.ln()).abs() < 1e-15);
        assert!(BetaSpec::parse("-1").is_err());
        assert!(BetaSpec::parse("sqrt n").is_err());
        assert!(BetaSpec::parse("-2 ln n").is_err());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = ExperimentConfig::from_toml("seed = 7\nbeta_grid = [1, \"2 ln n\"]\n[game]\nname = \"xor\"\nn = 5\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.game.n, 5);
        assert_eq!(c.betas_for(5).unwrap(), vec![1.0, 2.0 * 5f64.ln()]);
        assert_eq!(c.caps, Caps::default());
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::default();
        c.beta_grid.clear();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let mut c = ExperimentConfig::default();
        c.epsilon = 0.5;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.game.name = "chess".into();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let g = GameConfig { name: "coordination".into(), n: 2, params: vec![1.0, 2.0] };
        assert!(g.build().is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.seed += 1;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }

    #[test]
    fn overrides_apply() {
        let mut c = ExperimentConfig::default();
        c.apply(&Overrides {
            game: Some("ck".into()),
            beta: Some(vec![BetaSpec::Value(1.0)]),
            seed: Some(9),
            corrupt_schedule: true,
            ..Default::default()
        });
        assert_eq!(c.game.name, "ck");
        assert_eq!(c.beta_grid.len(), 1);
        assert_eq!(c.seed, 9);
        assert!(c.verify.corrupt_schedule);
    }
}
