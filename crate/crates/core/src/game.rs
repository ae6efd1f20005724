//! Finite n-player normal-form games.
//!
//! Utilities are stored as one flat row-major tensor per player, indexed by the
//! pure joint action `(s_1, ..., s_n)` with the last player varying fastest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    utilities: Vec<Vec<f64>>,
    smoothness: f64,
}

impl NormalFormGame {
    /// Builds a game from per-player flat utility tensors with smoothness `L = 1`.
    pub fn new(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_smoothness(action_counts, utilities, 1.0)
    }

    pub fn with_smoothness(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>, smoothness: f64) -> Result<Self> {
        let n = action_counts.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 players, got {n}")));
        }
        if let Some(d) = action_counts.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidInput(format!("every player needs >= 2 actions, got {d}")));
        }
        if utilities.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} utility tensors, got {}", utilities.len())));
        }
        if !(smoothness > 0.0 && smoothness.is_finite()) {
            return Err(Error::InvalidInput(format!("smoothness must be positive, got {smoothness}")));
        }
        let size: usize = action_counts.iter().product();
        for (i, u) in utilities.iter().enumerate() {
            if u.len() != size {
                return Err(Error::InvalidInput(format!("player {i} tensor has {} entries, expected {size}", u.len())));
            }
            if let Some(v) = u.iter().find(|v| !(v.abs() <= 1.0)) {
                return Err(Error::InvalidInput(format!("player {i} utility {v} outside [-1, 1]")));
            }
        }
        let mut strides = vec![1; n];
        for j in (0..n - 1).rev() {
            strides[j] = strides[j + 1] * action_counts[j + 1];
        }
        Ok(Self { action_counts, strides, utilities, smoothness })
    }

    /// Two-player game from payoff matrices (`rows` = player 0's actions).
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        if b.len() != rows || a.iter().chain(b).any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("bimatrix shapes disagree".into()));
        }
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<_>>();
        Self::new(vec![rows, cols], vec![flat(a), flat(b)])
    }

    pub fn player_count(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn actions(&self, player: usize) -> usize {
        self.action_counts[player]
    }

    /// Number of pure joint actions.
    pub fn joint_size(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    /// Payoff of `player` at a pure joint action.
    pub fn payoff(&self, player: usize, joint: &[usize]) -> f64 {
        let idx: usize = joint.iter().zip(&self.strides).map(|(s, st)| s * st).sum();
        self.utilities[player][idx]
    }

    /// Flat-index stride of each player's action.
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Decodes a flat joint index into per-player actions.
    pub fn decode(&self, mut flat: usize, out: &mut [usize]) {
        for (j, &st) in self.strides.iter().enumerate() {
            out[j] = flat / st;
            flat %= st;
        }
    }

    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    /// Copy of this game with a different smoothness constant.
    pub fn with_smoothness_bound(mut self, smoothness: f64) -> Result<Self> {
        if !(smoothness > 0.0 && smoothness.is_finite()) {
            return Err(Error::InvalidInput(format!("smoothness must be positive, got {smoothness}")));
        }
        self.smoothness = smoothness;
        Ok(self)
    }

    fn check_profile(&self, profile: &MixedProfile, player: usize) -> Result<()> {
        if player >= self.player_count() {
            return Err(Error::InvalidInput(format!(
                "player {player} out of range for {}-player game",
                self.player_count()
            )));
        }
        if profile.strategies.len() != self.player_count() {
            return Err(Error::InvalidInput(format!(
                "profile has {} strategies, game has {} players",
                profile.strategies.len(),
                self.player_count()
            )));
        }
        for (j, (x, &d)) in profile.strategies.iter().zip(&self.action_counts).enumerate() {
            if x.len() != d {
                return Err(Error::InvalidInput(format!("strategy {j} has length {}, expected {d}", x.len())));
            }
        }
        Ok(())
    }

    /// Expected payoff of each pure action of `player` against the others' mixed strategies.
    pub fn utility_gradient(&self, profile: &MixedProfile, player: usize) -> Result<Vec<f64>> {
        self.check_profile(profile, player)?;
        let mut out = vec![0.0; self.action_counts[player]];
        self.gradient_into(&profile.strategies, player, &mut out);
        Ok(out)
    }

    /// Unchecked gradient kernel; `strategies` must match the game's shape.
    pub(crate) fn gradient_into(&self, strategies: &[Vec<f64>], player: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let n = self.player_count();
        let u = &self.utilities[player];
        if n == 2 {
            let (rows, cols) = (self.action_counts[0], self.action_counts[1]);
            if player == 0 {
                let y = &strategies[1];
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &u[i * cols..(i + 1) * cols];
                    *o = row.iter().zip(y).map(|(a, b)| a * b).sum();
                }
            } else {
                let x = &strategies[0];
                for (i, &xi) in x.iter().enumerate().take(rows) {
                    let row = &u[i * cols..(i + 1) * cols];
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += xi * a;
                    }
                }
            }
            return;
        }
        let mut joint = vec![0usize; n];
        for (flat, &val) in u.iter().enumerate() {
            self.decode(flat, &mut joint);
            let mut w = val;
            for (j, (&s, x)) in joint.iter().zip(strategies).enumerate() {
                if j != player {
                    w *= x[s];
                }
            }
            out[joint[player]] += w;
        }
    }

    /// `nu_i(x) = <x_i, grad_i>`.
    pub fn expected_utility(&self, profile: &MixedProfile, player: usize) -> Result<f64> {
        let g = self.utility_gradient(profile, player)?;
        Ok(dot(&g, &profile.strategies[player]))
    }

    /// Stored smoothness constant `L`.
    pub fn smoothness_bound(&self) -> f64 {
        self.smoothness
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    strategies: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(strategies: Vec<Vec<f64>>) -> Result<Self> {
        for (i, x) in strategies.iter().enumerate() {
            check_distribution(x, SIMPLEX_TOL).map_err(|e| Error::InvalidInput(format!("strategy {i}: {e}")))?;
        }
        Ok(Self { strategies })
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        Self { strategies: action_counts.iter().map(|&d| vec![1.0 / d as f64; d]).collect() }
    }

    pub fn strategies(&self) -> &[Vec<f64>] {
        &self.strategies
    }

    pub fn strategy(&self, player: usize) -> &[f64] {
        &self.strategies[player]
    }
}

/// Checks that `x` is a probability vector within `tol`.
pub(crate) fn check_distribution(x: &[f64], tol: f64) -> std::result::Result<(), String> {
    if x.is_empty() {
        return Err("empty vector".into());
    }
    if let Some(v) = x.iter().find(|v| !(**v >= -tol) || !v.is_finite()) {
        return Err(format!("entry {v} is negative or not finite"));
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(format!("entries sum to {s}, not 1"));
    }
    Ok(())
}

/// Descriptor for the built-in game generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    MatchingPennies,
    RockPaperScissors,
    RandomGeneralSum { players: usize, actions: usize },
    RandomZeroSum { actions: usize },
}

impl GameSpec {
    pub fn player_count(&self) -> usize {
        match self {
            GameSpec::RandomGeneralSum { players, .. } => *players,
            _ => 2,
        }
    }
}

/// Builds the game described by `spec`; random generators are deterministic in `seed`.
pub fn make_game(spec: &GameSpec, seed: u64) -> Result<NormalFormGame> {
    match *spec {
        GameSpec::MatchingPennies => {
            let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
            let b = negate(&a);
            NormalFormGame::bimatrix(&a, &b)
        }
        GameSpec::RockPaperScissors => {
            let a = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
            let b = negate(&a);
            NormalFormGame::bimatrix(&a, &b)
        }
        GameSpec::RandomGeneralSum { players, actions } => {
            if players < 2 || actions < 2 {
                return Err(Error::InvalidSpec(format!(
                    "random_general_sum needs n >= 2 and d >= 2, got n = {players}, d = {actions}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let size = actions.pow(players as u32);
            let utilities = (0..players).map(|_| (0..size).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
            NormalFormGame::new(vec![actions; players], utilities)
        }
        GameSpec::RandomZeroSum { actions } => {
            if actions < 2 {
                return Err(Error::InvalidSpec(format!("random_zero_sum needs d >= 2, got {actions}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u: Vec<f64> = (0..actions * actions).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let v = u.iter().map(|x| -x).collect();
            NormalFormGame::new(vec![actions, actions], vec![u, v])
        }
    }
}

fn negate(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(|v| -v).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies_layout() {
        let g = make_game(&GameSpec::MatchingPennies, 0).unwrap();
        assert_eq!(g.action_counts(), &[2, 2]);
        assert_eq!(g.utilities(0), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(g.utilities(1), &[-1.0, 1.0, 1.0, -1.0]);
        let p = MixedProfile::uniform(&[2, 2]);
        assert_eq!(g.utility_gradient(&p, 0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(g.utility_gradient(&p, 1).unwrap(), vec![0.0, 0.0]);
        assert_eq!(g.expected_utility(&p, 0).unwrap(), 0.0);
    }

    #[test]
    fn identity_matrix_gradient() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let g = NormalFormGame::bimatrix(&a, &a).unwrap();
        let p = MixedProfile::new(vec![vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        let grad = g.utility_gradient(&p, 0).unwrap();
        assert!((grad[0] - 0.3).abs() < 1e-15 && (grad[1] - 0.7).abs() < 1e-15);
        assert!((g.expected_utility(&p, 0).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn random_games_are_deterministic() {
        let spec = GameSpec::RandomGeneralSum { players: 3, actions: 4 };
        assert_eq!(make_game(&spec, 7).unwrap(), make_game(&spec, 7).unwrap());
        assert_ne!(make_game(&spec, 7).unwrap(), make_game(&spec, 8).unwrap());
    }

    #[test]
    fn zero_sum_generator() {
        let g = make_game(&GameSpec::RandomZeroSum { actions: 5 }, 3).unwrap();
        for k in 0..g.joint_size() {
            assert_eq!(g.utilities(0)[k] + g.utilities(1)[k], 0.0);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            make_game(&GameSpec::RandomGeneralSum { players: 1, actions: 3 }, 0),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(make_game(&GameSpec::RandomZeroSum { actions: 1 }, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn smoothness_pass_through() {
        let g = make_game(&GameSpec::MatchingPennies, 0).unwrap();
        assert_eq!(g.smoothness_bound(), 1.0);
        let g = g.with_smoothness_bound(0.1).unwrap();
        assert_eq!(g.smoothness_bound(), 0.1);
        let a = vec![vec![0.5, -0.5], vec![-0.5, 0.5]];
        let b = negate(&a);
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<_>>();
        let g = NormalFormGame::with_smoothness(vec![2, 2], vec![flat(&a), flat(&b)], 0.5).unwrap();
        assert_eq!(g.smoothness_bound(), 0.5);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = make_game(&GameSpec::MatchingPennies, 0).unwrap();
        let p = MixedProfile::uniform(&[3, 2]);
        assert!(matches!(g.utility_gradient(&p, 0), Err(Error::InvalidInput(_))));
        let p = MixedProfile::uniform(&[2, 2]);
        assert!(matches!(g.utility_gradient(&p, 2), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn out_of_range_utilities_rejected() {
        assert!(NormalFormGame::new(vec![2, 2], vec![vec![0.0, 1.5, 0.0, 0.0], vec![0.0; 4]]).is_err());
    }
}
