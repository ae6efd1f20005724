//! Experiment descriptions: TOML parsing, validation, and resolution of default hyperparameters.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::learner::default_params;
use crate::regularizer::{p_star, q_star, Regularizer};

/// A hyperparameter given either as a number or as a token (`"default"`, `"star"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Value(f64),
    Token(String),
}

impl Default for Param {
    fn default() -> Self {
        Param::Token("default".into())
    }
}

impl Param {
    /// The numeric value of a resolved parameter.
    pub fn value(&self) -> Option<f64> {
        match self {
            Param::Value(v) => Some(*v),
            Param::Token(_) => None,
        }
    }

    fn resolve(&self, token: &str, path: &str, auto: impl FnOnce() -> f64) -> Result<f64> {
        match self {
            Param::Value(v) if v.is_finite() => Ok(*v),
            Param::Value(v) => Err(config_err(path, format!("{v} is not a finite number"))),
            Param::Token(t) if t == token => Ok(auto()),
            Param::Token(t) => Err(config_err(path, format!("expected a number or \"{token}\", got \"{t}\""))),
        }
    }
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Selfplay,
    Adversarial,
    Landscape,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Coftrl,
    Safeguarded,
    Oftrl,
    Mwu,
    Omwu,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularizerSpec {
    #[default]
    NegEntropy,
    Log,
    SquaredLp {
        #[serde(default = "star")]
        p: Param,
    },
    Tsallis {
        #[serde(default = "star")]
        q: Param,
    },
    Combination {
        parts: Vec<WeightedPart>,
    },
}

fn star() -> Param {
    Param::Token("star".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPart {
    pub weight: f64,
    pub regularizer: RegularizerSpec,
}

impl RegularizerSpec {
    /// Replaces `"star"` tokens with `p*(d)`, `q*(d)`.
    fn resolve(&self, dim: usize, path: &str) -> Result<RegularizerSpec> {
        Ok(match self {
            RegularizerSpec::SquaredLp { p } => {
                let p = p.resolve("star", &format!("{path}.p"), || p_star(dim))?;
                if !(p > 1.0 && p <= 2.0) {
                    return Err(config_err(&format!("{path}.p"), format!("p = {p} must lie in (1, 2]")));
                }
                RegularizerSpec::SquaredLp { p: Param::Value(p) }
            }
            RegularizerSpec::Tsallis { q } => {
                let q = q.resolve("star", &format!("{path}.q"), || q_star(dim))?;
                if !(q > 0.0 && q < 1.0) {
                    return Err(config_err(&format!("{path}.q"), format!("q = {q} must lie in (0, 1)")));
                }
                RegularizerSpec::Tsallis { q: Param::Value(q) }
            }
            RegularizerSpec::Combination { parts } => {
                if parts.is_empty() {
                    return Err(config_err(&format!("{path}.parts"), "a combination needs at least one part"));
                }
                let mut out = Vec::with_capacity(parts.len());
                for (k, part) in parts.iter().enumerate() {
                    let at = format!("{path}.parts[{k}]");
                    if !(part.weight > 0.0 && part.weight.is_finite()) {
                        return Err(config_err(&format!("{at}.weight"), "weight must be positive"));
                    }
                    out.push(WeightedPart {
                        weight: part.weight,
                        regularizer: part.regularizer.resolve(dim, &format!("{at}.regularizer"))?,
                    });
                }
                RegularizerSpec::Combination { parts: out }
            }
            other => other.clone(),
        })
    }

    /// Builds the regularizer of a resolved spec.
    pub fn build(&self, dim: usize) -> Result<Regularizer> {
        let need = |p: &Param, name: &str| {
            p.value().ok_or_else(|| Error::InvalidParameter(format!("unresolved {name} parameter")))
        };
        match self {
            RegularizerSpec::NegEntropy => Ok(Regularizer::neg_entropy(dim)),
            RegularizerSpec::Log => Ok(Regularizer::log_barrier(dim)),
            RegularizerSpec::SquaredLp { p } => Regularizer::squared_lp(dim, need(p, "p")?),
            RegularizerSpec::Tsallis { q } => Regularizer::tsallis(dim, need(q, "q")?),
            RegularizerSpec::Combination { parts } => Regularizer::combine(
                parts.iter().map(|w| w.regularizer.build(dim).map(|r| (w.weight, r))).collect::<Result<_>>()?,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub regularizer: RegularizerSpec,
    #[serde(default)]
    pub eta: Param,
    #[serde(default)]
    pub alpha: Param,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// `nu^t = (1, -1, 1, ...)` on odd rounds and its negation on even rounds.
    Alternating,
    Zero,
    /// Independent uniform entries in `[-1, 1]`, seeded.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub actions: usize,
    /// Player count assumed by the safeguard threshold and default rates.
    #[serde(default = "two")]
    pub players: usize,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSpec {
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "four")]
    pub alpha: f64,
    #[serde(default = "minus_ten")]
    pub lo: f64,
    #[serde(default = "ten")]
    pub hi: f64,
    #[serde(default = "forty_one")]
    pub points: usize,
    #[serde(default = "landscape_regularizers")]
    pub regularizers: Vec<RegularizerSpec>,
}

fn one() -> f64 {
    1.0
}
fn four() -> f64 {
    4.0
}
fn minus_ten() -> f64 {
    -10.0
}
fn ten() -> f64 {
    10.0
}
fn forty_one() -> usize {
    41
}

fn landscape_regularizers() -> Vec<RegularizerSpec> {
    vec![
        RegularizerSpec::NegEntropy,
        RegularizerSpec::Log,
        RegularizerSpec::SquaredLp { p: Param::Value(2.0) },
        RegularizerSpec::Tsallis { q: Param::Value(0.5) },
    ]
}

impl Default for LandscapeSpec {
    fn default() -> Self {
        Self { eta: 1.0, alpha: 4.0, lo: -10.0, hi: 10.0, points: 41, regularizers: landscape_regularizers() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "all_suites")]
    pub suite: String,
    #[serde(default = "ten_thousand")]
    pub samples: usize,
    #[serde(default = "unit")]
    pub gamma_scale: f64,
}

fn all_suites() -> String {
    "all".into()
}
fn ten_thousand() -> usize {
    10_000
}
fn unit() -> f64 {
    1.0
}

/// A complete experiment. After [`parse_config`] every `"default"`/`"star"` token is replaced by its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Smoothness constant `L` of the utilities.
    #[serde(default = "one")]
    pub smoothness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landscape: Option<LandscapeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub learners: Vec<LearnerSpec>,
}

fn default_horizon() -> usize {
    1024
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(
        mut self,
        seed: Option<u64>,
        horizon: Option<usize>,
        output: Option<PathBuf>,
    ) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(h) = horizon {
            self.horizon = h;
        }
        if let Some(o) = output {
            self.output = o;
        }
        resolve(self)
    }

    /// Serializes the resolved config; parsing the result yields an equal config.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err("<document>", e.to_string()))
    }

    /// Action counts of the players whose learners this config describes.
    pub fn learner_dims(&self) -> Vec<usize> {
        match (self.kind, &self.game, &self.adversary) {
            (ExperimentKind::Selfplay, Some(g), _) => game_dims(g),
            (ExperimentKind::Adversarial, _, Some(a)) => vec![a.actions],
            _ => Vec::new(),
        }
    }

    /// Player count used for default rates.
    pub fn player_count(&self) -> usize {
        match (self.kind, &self.game, &self.adversary) {
            (ExperimentKind::Selfplay, Some(g), _) => g.player_count(),
            (ExperimentKind::Adversarial, _, Some(a)) => a.players,
            _ => 0,
        }
    }
}

fn game_dims(spec: &GameSpec) -> Vec<usize> {
    match spec {
        GameSpec::MatchingPennies => vec![2, 2],
        GameSpec::RockPaperScissors => vec![3, 3],
        GameSpec::RandomGeneralSum { players, actions } => vec![*actions; *players],
        GameSpec::RandomZeroSum { actions } => vec![*actions; 2],
    }
}

/// Parses and resolves a TOML experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let path = e
            .span()
            .map(|s| {
                let line = text[..s.start].lines().count().max(1);
                format!("line {line}")
            })
            .unwrap_or_else(|| "<document>".into());
        config_err(&path, message)
    })?;
    resolve(raw)
}

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn resolve(mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
    if cfg.horizon == 0 && matches!(cfg.kind, ExperimentKind::Selfplay | ExperimentKind::Adversarial) {
        return Err(config_err("horizon", "horizon must be at least 1"));
    }
    if !(cfg.smoothness > 0.0 && cfg.smoothness.is_finite()) {
        return Err(config_err("smoothness", "smoothness must be positive"));
    }
    match cfg.kind {
        ExperimentKind::Selfplay => {
            let game = cfg.game.as_ref().ok_or_else(|| config_err("game", "selfplay needs a [game] table"))?;
            if let GameSpec::RandomGeneralSum { players, actions } = game {
                if *players < 2 || *actions < 2 {
                    return Err(config_err("game", "random games need at least 2 players and 2 actions"));
                }
            }
            if let GameSpec::RandomZeroSum { actions } = game {
                if *actions < 2 {
                    return Err(config_err("game.actions", "need at least 2 actions"));
                }
            }
            let n = game.player_count();
            if cfg.learners.len() == 1 {
                cfg.learners = vec![cfg.learners[0].clone(); n];
            }
            if cfg.learners.len() != n {
                return Err(config_err(
                    "learners",
                    format!("{} learners given for a {n}-player game", cfg.learners.len()),
                ));
            }
        }
        ExperimentKind::Adversarial => {
            let adv = cfg
                .adversary
                .as_ref()
                .ok_or_else(|| config_err("adversary", "adversarial runs need an [adversary] table"))?;
            if adv.actions < 2 {
                return Err(config_err("adversary.actions", "need at least 2 actions"));
            }
            if adv.players == 0 {
                return Err(config_err("adversary.players", "players must be positive"));
            }
            if cfg.learners.len() != 1 {
                return Err(config_err("learners", "adversarial runs take exactly one learner"));
            }
        }
        ExperimentKind::Landscape => {
            let spec = cfg.landscape.get_or_insert_with(LandscapeSpec::default);
            if !(spec.eta > 0.0) || !(spec.alpha > 0.0) {
                return Err(config_err("landscape", "eta and alpha must be positive"));
            }
            if !(spec.lo < spec.hi) || spec.points < 2 {
                return Err(config_err("landscape", "need lo < hi and at least 2 points"));
            }
            let mut resolved = Vec::with_capacity(spec.regularizers.len());
            for (k, r) in spec.regularizers.iter().enumerate() {
                resolved.push(r.resolve(2, &format!("landscape.regularizers[{k}]"))?);
            }
            spec.regularizers = resolved;
        }
        ExperimentKind::Verify => {
            let spec = cfg.verify.get_or_insert_with(|| VerifySpec {
                suite: all_suites(),
                samples: ten_thousand(),
                gamma_scale: unit(),
            });
            spec.suite.parse::<crate::verify::Suite>().map_err(|e| config_err("verify.suite", e.to_string()))?;
            if !(spec.gamma_scale > 0.0) {
                return Err(config_err("verify.gamma_scale", "must be positive"));
            }
        }
    }

    let dims = cfg.learner_dims();
    let players = cfg.player_count();
    let smoothness = cfg.smoothness;
    for (i, (learner, &dim)) in cfg.learners.iter_mut().zip(&dims).enumerate() {
        let at = format!("learners[{i}]");
        learner.regularizer = learner.regularizer.resolve(dim, &format!("{at}.regularizer"))?;
        if matches!(learner.algorithm, Algorithm::Mwu | Algorithm::Omwu)
            && learner.regularizer != RegularizerSpec::NegEntropy
        {
            return Err(config_err(&format!("{at}.regularizer"), "mwu and omwu use the entropy regularizer"));
        }
        let reg =
            learner.regularizer.build(dim).map_err(|e| config_err(&format!("{at}.regularizer"), e.to_string()))?;
        let defaults = default_params(&reg, players, smoothness);
        let eta = learner.eta.resolve("default", &format!("{at}.eta"), || defaults.eta)?;
        if !(eta > 0.0) {
            return Err(config_err(&format!("{at}.eta"), format!("eta = {eta} must be positive")));
        }
        let alpha = learner.alpha.resolve("default", &format!("{at}.alpha"), || defaults.alpha)?;
        let gamma = reg.constants().gamma;
        if matches!(learner.algorithm, Algorithm::Coftrl | Algorithm::Safeguarded) && !(alpha > gamma) {
            return Err(config_err(&format!("{at}.alpha"), format!("alpha = {alpha} must exceed gamma = {gamma}")));
        }
        learner.eta = Param::Value(eta);
        learner.alpha = Param::Value(alpha);
    }
    Ok(cfg)
}
