//! Self-play and adversarial runs, regret metrics, and CSV export.

use std::io::Write;

use crate::error::{Error, Result};
use crate::game::{check_distribution, dot, NormalFormGame};
use crate::learner::Learner;

/// Tolerance for the two nonnegative-regret computations to agree.
pub const NONNEG_TOL: f64 = 1e-8;

/// Per-round record of a repeated game or an online run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    game: Option<NormalFormGame>,
    dims: Vec<usize>,
    /// Per player, strategies flattened round-major.
    xs: Vec<Vec<f64>>,
    nus: Vec<Vec<f64>>,
    lambdas: Vec<Vec<Option<f64>>>,
    horizon: usize,
}

impl Trajectory {
    fn empty(dims: Vec<usize>, game: Option<NormalFormGame>, capacity: usize) -> Self {
        let n = dims.len();
        Self {
            xs: dims.iter().map(|d| Vec::with_capacity(d * capacity)).collect(),
            nus: dims.iter().map(|d| Vec::with_capacity(d * capacity)).collect(),
            lambdas: vec![Vec::with_capacity(capacity); n],
            game,
            dims,
            horizon: 0,
        }
    }

    /// Builds a trajectory from explicit per-player, per-round records.
    pub fn from_records(xs: Vec<Vec<Vec<f64>>>, nus: Vec<Vec<Vec<f64>>>, game: Option<NormalFormGame>) -> Result<Self> {
        if xs.is_empty() || xs.len() != nus.len() {
            return Err(Error::InvalidInput("need matching, non-empty strategy and utility records".into()));
        }
        let horizon = xs[0].len();
        let dims: Vec<usize> = xs.iter().map(|p| p.first().map_or(0, Vec::len)).collect();
        if let Some(g) = &game {
            if g.action_counts() != dims.as_slice() {
                return Err(Error::InvalidInput("records do not match the game's action counts".into()));
            }
        }
        let mut traj = Self::empty(dims.clone(), game, horizon);
        for (i, (px, pn)) in xs.iter().zip(&nus).enumerate() {
            if px.len() != horizon || pn.len() != horizon {
                return Err(Error::InvalidInput(format!("player {i} has records of unequal length")));
            }
            for (t, (x, nu)) in px.iter().zip(pn).enumerate() {
                if x.len() != dims[i] || nu.len() != dims[i] {
                    return Err(Error::InvalidInput(format!("player {i} round {t}: wrong vector length")));
                }
                check_distribution(x, 1e-9).map_err(|m| Error::InvalidInput(format!("player {i} round {t}: {m}")))?;
                traj.xs[i].extend_from_slice(x);
                traj.nus[i].extend_from_slice(nu);
                traj.lambdas[i].push(None);
            }
        }
        traj.horizon = horizon;
        Ok(traj)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn player_count(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn game(&self) -> Option<&NormalFormGame> {
        self.game.as_ref()
    }

    /// Strategy of `player` at round `t` (0-based).
    pub fn x(&self, player: usize, t: usize) -> &[f64] {
        let d = self.dims[player];
        &self.xs[player][t * d..(t + 1) * d]
    }

    pub fn nu(&self, player: usize, t: usize) -> &[f64] {
        let d = self.dims[player];
        &self.nus[player][t * d..(t + 1) * d]
    }

    pub fn lambda(&self, player: usize, t: usize) -> Option<f64> {
        self.lambdas[player][t]
    }

    pub fn lambdas(&self, player: usize) -> &[Option<f64>] {
        &self.lambdas[player]
    }

    fn push(&mut self, player: usize, x: &[f64], nu: &[f64], lambda: Option<f64>) {
        self.xs[player].extend_from_slice(x);
        self.nus[player].extend_from_slice(nu);
        self.lambdas[player].push(lambda);
    }
}

fn at_round(round: usize, player: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Round { round, player, source: Box::new(e) }
}

/// Repeated play of `game` where every player runs its own learner.
///
/// Each round all learners commit, then each observes the gradient of its
/// utility at the joint profile.
pub fn self_play(game: &NormalFormGame, learners: &mut [Box<dyn Learner>], horizon: usize) -> Result<Trajectory> {
    if learners.len() != game.player_count() {
        return Err(Error::InvalidInput(format!(
            "{} learners for a {}-player game",
            learners.len(),
            game.player_count()
        )));
    }
    for (i, l) in learners.iter().enumerate() {
        if l.dim() != game.actions(i) {
            return Err(Error::InvalidInput(format!(
                "learner {i} has dimension {}, player has {} actions",
                l.dim(),
                game.actions(i)
            )));
        }
    }
    let mut traj = Trajectory::empty(game.action_counts().to_vec(), Some(game.clone()), horizon);
    let mut profile: Vec<Vec<f64>> = game.action_counts().iter().map(|&d| vec![0.0; d]).collect();
    let mut nus = profile.clone();
    for t in 0..horizon {
        for (i, l) in learners.iter_mut().enumerate() {
            profile[i] = l.step().map_err(at_round(t + 1, i))?;
        }
        for (i, l) in learners.iter_mut().enumerate() {
            game.gradient_into(&profile, i, &mut nus[i]);
            l.observe(&nus[i]).map_err(at_round(t + 1, i))?;
            traj.push(i, &profile[i], &nus[i], l.learning_rate());
        }
        traj.horizon += 1;
    }
    Ok(traj)
}

/// A single learner facing utilities chosen by `adversary(t, x^t)`, with `t` 1-based.
pub fn adversarial_play<F>(learner: &mut dyn Learner, mut adversary: F, horizon: usize) -> Result<Trajectory>
where
    F: FnMut(usize, &[f64]) -> Vec<f64>,
{
    let mut traj = Trajectory::empty(vec![learner.dim()], None, horizon);
    for t in 0..horizon {
        let x = learner.step().map_err(at_round(t + 1, 0))?;
        let nu = adversary(t + 1, &x);
        learner.observe(&nu).map_err(at_round(t + 1, 0))?;
        traj.push(0, &x, &nu, learner.learning_rate());
        traj.horizon += 1;
    }
    Ok(traj)
}

/// Running sums behind every metric, advanced one round at a time.
struct Accumulator<'a> {
    traj: &'a Trajectory,
    t: usize,
    nu_sum: Vec<Vec<f64>>,
    corrected: Vec<Vec<f64>>,
    earned: Vec<f64>,
    path: Vec<f64>,
    /// Sum over rounds of the product distribution on joint actions.
    joint: Option<Vec<f64>>,
}

impl<'a> Accumulator<'a> {
    fn new(traj: &'a Trajectory) -> Self {
        Self {
            t: 0,
            nu_sum: traj.dims.iter().map(|&d| vec![0.0; d]).collect(),
            corrected: traj.dims.iter().map(|&d| vec![0.0; d]).collect(),
            earned: vec![0.0; traj.player_count()],
            path: vec![0.0; traj.player_count()],
            joint: traj.game.as_ref().map(|g| vec![0.0; g.joint_size()]),
            traj,
        }
    }

    fn advance(&mut self) {
        let t = self.t;
        let traj = self.traj;
        for i in 0..traj.player_count() {
            let (x, nu) = (traj.x(i, t), traj.nu(i, t));
            let v = dot(nu, x);
            self.earned[i] += v;
            for ((s, c), &n) in self.nu_sum[i].iter_mut().zip(self.corrected[i].iter_mut()).zip(nu) {
                *s += n;
                *c += n - v;
            }
            if t > 0 {
                let step: f64 = x.iter().zip(traj.x(i, t - 1)).map(|(a, b)| (a - b).abs()).sum();
                self.path[i] += step * step;
            }
        }
        if let (Some(joint), Some(game)) = (self.joint.as_mut(), traj.game.as_ref()) {
            let mut actions = vec![0usize; traj.player_count()];
            for (flat, cell) in joint.iter_mut().enumerate() {
                game.decode(flat, &mut actions);
                let mut w = 1.0;
                for (i, &s) in actions.iter().enumerate() {
                    w *= traj.x(i, t)[s];
                }
                *cell += w;
            }
        }
        self.t += 1;
    }

    fn regret(&self, i: usize) -> f64 {
        let best = self.nu_sum[i].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        best - self.earned[i]
    }

    /// `max over {0} and the vertices of <sum_t u^t, y>`; the learner's own term vanishes since `u^t` is orthogonal to `x^t`.
    fn lifted_nonnegative(&self, i: usize) -> f64 {
        self.corrected[i].iter().fold(0.0f64, |m, &v| m.max(v))
    }

    fn nonnegative(&self, i: usize) -> Result<f64> {
        let direct = self.regret(i).max(0.0);
        let lifted = self.lifted_nonnegative(i);
        let scale = 1.0 + direct.abs();
        if (direct - lifted).abs() > NONNEG_TOL * scale {
            return Err(Error::Inconsistent(format!(
                "player {i}: nonnegative regret {direct} vs lifted comparator {lifted}"
            )));
        }
        Ok(direct)
    }

    /// Largest gain from a fixed unilateral deviation under the empirical joint distribution.
    fn cce_gap(&self) -> Option<f64> {
        let (joint, game) = (self.joint.as_ref()?, self.traj.game.as_ref()?);
        let total = self.t as f64;
        let n = game.player_count();
        let mut actions = vec![0usize; n];
        let mut gap = f64::NEG_INFINITY;
        for i in 0..n {
            let u = game.utilities(i);
            let stride = game.strides()[i];
            let d = game.actions(i);
            let mut deviation = vec![0.0; d];
            let mut realized = 0.0;
            for (flat, &w) in joint.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                game.decode(flat, &mut actions);
                realized += w * u[flat];
                let base = flat - actions[i] * stride;
                for (s, dev) in deviation.iter_mut().enumerate() {
                    *dev += w * u[base + s * stride];
                }
            }
            let best = deviation.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            gap = gap.max((best - realized) / total);
        }
        Some(gap)
    }
}

/// `max_k sum_t nu^t[k] - sum_t <nu^t, x^t>`.
pub fn external_regret(traj: &Trajectory, player: usize) -> f64 {
    let mut acc = Accumulator::new(traj);
    acc.joint = None;
    for _ in 0..traj.horizon {
        acc.advance();
    }
    acc.regret(player)
}

/// `max{0, Reg}`, cross-checked against the lifted-comparator computation.
pub fn nonnegative_regret(traj: &Trajectory, player: usize) -> Result<f64> {
    let mut acc = Accumulator::new(traj);
    acc.joint = None;
    for _ in 0..traj.horizon {
        acc.advance();
    }
    acc.nonnegative(player)
}

pub fn social_regret(traj: &Trajectory) -> f64 {
    (0..traj.player_count()).map(|i| external_regret(traj, i)).sum()
}

/// `sum_i sum_t ||x_i^{t+1} - x_i^t||_1^2`.
pub fn path_length(traj: &Trajectory) -> f64 {
    let mut total = 0.0;
    for i in 0..traj.player_count() {
        for t in 1..traj.horizon {
            let step: f64 = traj.x(i, t).iter().zip(traj.x(i, t - 1)).map(|(a, b)| (a - b).abs()).sum();
            total += step * step;
        }
    }
    total
}

/// Unclipped CCE gap of the empirical play; `None` without a game or rounds.
pub fn cce_gap(traj: &Trajectory) -> Option<f64> {
    if traj.horizon == 0 {
        return None;
    }
    let mut acc = Accumulator::new(traj);
    for _ in 0..traj.horizon {
        acc.advance();
    }
    acc.cce_gap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub t: usize,
    pub regret: Vec<f64>,
    pub nonnegative_regret: Vec<f64>,
    /// Clipped at zero.
    pub cce_gap: Option<f64>,
    /// Per-player path length up to `t`.
    pub path_length: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub horizon: usize,
    pub external_regret: Vec<f64>,
    pub nonnegative_regret: Vec<f64>,
    pub social_regret: f64,
    /// Clipped at zero.
    pub cce_gap: Option<f64>,
    pub path_length: f64,
    /// Samples at `t = 1, 2, 4, ...` and at the horizon.
    pub series: Vec<SeriesPoint>,
}

impl Metrics {
    pub fn max_regret(&self) -> f64 {
        self.external_regret.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Series point at round `t`, if sampled.
    pub fn at(&self, t: usize) -> Option<&SeriesPoint> {
        self.series.iter().find(|p| p.t == t)
    }
}

/// All metrics in one pass over the trajectory.
pub fn compute_metrics(traj: &Trajectory) -> Result<Metrics> {
    let mut acc = Accumulator::new(traj);
    let mut series = Vec::new();
    let mut next = 1usize;
    let n = traj.player_count();
    for t in 1..=traj.horizon {
        acc.advance();
        if t == next || t == traj.horizon {
            series.push(SeriesPoint {
                t,
                regret: (0..n).map(|i| acc.regret(i)).collect(),
                nonnegative_regret: (0..n).map(|i| acc.nonnegative(i)).collect::<Result<_>>()?,
                cce_gap: acc.cce_gap().map(|g| g.max(0.0)),
                path_length: acc.path.clone(),
            });
            if t == next {
                next *= 2;
            }
        }
    }
    let external_regret: Vec<f64> = (0..n).map(|i| acc.regret(i)).collect();
    let nonnegative_regret = (0..n).map(|i| acc.nonnegative(i)).collect::<Result<Vec<_>>>()?;
    Ok(Metrics {
        horizon: traj.horizon,
        social_regret: external_regret.iter().sum(),
        cce_gap: if traj.horizon == 0 { None } else { acc.cce_gap().map(|g| g.max(0.0)) },
        path_length: acc.path.iter().sum(),
        external_regret,
        nonnegative_regret,
        series,
    })
}

/// `(128 eta / mu)(3n + n (alpha log T + R) / eta)`.
pub fn path_length_bound(eta: f64, alpha: f64, mu: f64, range: f64, players: usize, horizon: usize) -> f64 {
    let n = players as f64;
    (128.0 * eta / mu) * (3.0 * n + n * (alpha * (horizon as f64).ln() + range) / eta)
}

pub(crate) fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub const TRAJECTORY_COLUMNS_FIXED: [&str; 2] = ["t", "player"];
pub const METRICS_COLUMNS: [&str; 6] = ["t", "player", "regret", "nonneg_regret", "cce_gap", "path_length"];

/// Header of the trajectory CSV for a given largest action count.
pub fn trajectory_header(max_dim: usize) -> Vec<String> {
    let mut h: Vec<String> = TRAJECTORY_COLUMNS_FIXED.iter().map(|s| s.to_string()).collect();
    h.extend((0..max_dim).map(|k| format!("x_{k}")));
    h.push("lambda".into());
    h.extend((0..max_dim).map(|k| format!("nu_{k}")));
    h
}

/// Rows `t, player, x_*, lambda, nu_*` with `t` 1-based; short vectors and missing rates are left empty.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let max_dim = traj.dims.iter().copied().max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(max_dim))?;
    for t in 0..traj.horizon {
        for i in 0..traj.player_count() {
            let mut row = vec![(t + 1).to_string(), i.to_string()];
            let pad = |v: &[f64], row: &mut Vec<String>| {
                row.extend(v.iter().map(|&a| fmt_float(a)));
                row.extend(std::iter::repeat_n(String::new(), max_dim - v.len()));
            };
            pad(traj.x(i, t), &mut row);
            row.push(traj.lambda(i, t).map(fmt_float).unwrap_or_default());
            pad(traj.nu(i, t), &mut row);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows `t, player, regret, nonneg_regret, cce_gap, path_length` at every series point.
pub fn write_metrics_csv<W: Write>(metrics: &Metrics, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_COLUMNS)?;
    for p in &metrics.series {
        for i in 0..p.regret.len() {
            w.write_record([
                p.t.to_string(),
                i.to_string(),
                fmt_float(p.regret[i]),
                fmt_float(p.nonnegative_regret[i]),
                p.cce_gap.map(fmt_float).unwrap_or_default(),
                fmt_float(p.path_length[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_game, GameSpec};
    use crate::learner::{BaselineLearner, CoftrlLearner};
    use crate::regularizer::Regularizer;

    fn single(xs: Vec<Vec<f64>>, nus: Vec<Vec<f64>>) -> Trajectory {
        Trajectory::from_records(vec![xs], vec![nus], None).unwrap()
    }

    #[test]
    fn regret_examples() {
        let t = single(vec![vec![0.5, 0.5]], vec![vec![1.0, 0.0]]);
        assert_eq!(external_regret(&t, 0), 0.5);
        let t = single(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(external_regret(&t, 0), -1.0);
        assert_eq!(nonnegative_regret(&t, 0).unwrap(), 0.0);
        let t = single(vec![vec![0.9, 0.1]], vec![vec![1.0, 0.0]]);
        assert!((nonnegative_regret(&t, 0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn path_length_examples() {
        let t = single(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0; 2]; 2]);
        assert_eq!(path_length(&t), 4.0);
        let t = single(vec![vec![0.3, 0.7]; 5], vec![vec![0.1, -0.2]; 5]);
        assert_eq!(path_length(&t), 0.0);
    }

    #[test]
    fn matching_pennies_fixed_point() {
        let game = make_game(&GameSpec::MatchingPennies, 0).unwrap();
        let mut learners: Vec<Box<dyn Learner>> = (0..2)
            .map(|_| {
                Box::new(CoftrlLearner::with_defaults(Regularizer::neg_entropy(2), 2, 1.0).unwrap()) as Box<dyn Learner>
            })
            .collect();
        let traj = self_play(&game, &mut learners, 64).unwrap();
        for t in 0..64 {
            assert_eq!(traj.x(0, t), &[0.5, 0.5]);
        }
        let m = compute_metrics(&traj).unwrap();
        assert_eq!(m.social_regret, 0.0);
        assert_eq!(m.cce_gap, Some(0.0));
        assert_eq!(m.series.iter().map(|p| p.t).collect::<Vec<_>>(), vec![1, 2, 4, 8, 16, 32, 64]);
    }

    #[test]
    fn single_round_gap_equals_regret() {
        let game = make_game(&GameSpec::RandomGeneralSum { players: 2, actions: 3 }, 5).unwrap();
        let mut learners: Vec<Box<dyn Learner>> =
            vec![Box::new(BaselineLearner::omwu(3, 0.3).unwrap()), Box::new(BaselineLearner::mwu(3, 0.3).unwrap())];
        let traj = self_play(&game, &mut learners, 1).unwrap();
        let worst = external_regret(&traj, 0).max(external_regret(&traj, 1));
        assert!((cce_gap(&traj).unwrap() - worst).abs() < 1e-14);
    }

    #[test]
    fn mismatched_learners_rejected() {
        let game = make_game(&GameSpec::RockPaperScissors, 0).unwrap();
        let mut learners: Vec<Box<dyn Learner>> = vec![Box::new(BaselineLearner::mwu(2, 0.1).unwrap())];
        assert!(self_play(&game, &mut learners, 3).is_err());
    }

    #[test]
    fn adversary_errors_carry_round() {
        let mut l = BaselineLearner::mwu(2, 0.1).unwrap();
        let err = adversarial_play(&mut l, |t, _| if t == 3 { vec![2.0, 0.0] } else { vec![0.0, 0.0] }, 5).unwrap_err();
        assert!(matches!(err, Error::Round { round: 3, player: 0, .. }));
    }

    #[test]
    fn csv_layout() {
        let t = single(vec![vec![0.25, 0.75]], vec![vec![1.0, -1.0]]);
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,player,x_0,x_1,lambda,nu_0,nu_1");
        assert_eq!(
            lines.next().unwrap(),
            "1,0,2.5000000000000000e-1,7.5000000000000000e-1,,1.0000000000000000e0,-1.0000000000000000e0"
        );
    }
}
