//! Learners: cautious-optimistic FTRL, fixed-rate baselines, and the safeguarded variant.

use crate::error::{Error, Result};
use crate::game::dot;
use crate::regularizer::Regularizer;
use crate::solver::{argmax_raw, lr_control_solve, softmax, DEFAULT_FTRL_TOL, DEFAULT_LR_TOL};

/// Slack allowed on `||nu||_inf <= 1`.
pub const UTILITY_SLACK: f64 = 1e-9;

/// A full-information online learner over the simplex.
pub trait Learner {
    fn dim(&self) -> usize;
    /// Commits to this round's strategy.
    fn step(&mut self) -> Result<Vec<f64>>;
    /// Receives this round's utility vector.
    fn observe(&mut self, nu: &[f64]) -> Result<()>;
    /// Learning rate used by the most recent step, if any.
    fn learning_rate(&self) -> Option<f64>;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoftrlParams {
    pub eta: f64,
    pub alpha: f64,
}

/// `alpha = 4 gamma + mu` and `eta = min{3 gamma / 80, mu / (32 sqrt 2), mu / (L n 32 sqrt 6)}`.
///
/// Locally Lipschitz regularizers (the log barrier) also cap `eta` at 1/8.
pub fn default_params(reg: &Regularizer, players: usize, smoothness: f64) -> CoftrlParams {
    let c = reg.constants();
    let n = players as f64;
    let mut eta =
        (3.0 * c.gamma / 80.0).min(c.mu / (32.0 * 2f64.sqrt())).min(c.mu / (smoothness * n * 32.0 * 6f64.sqrt()));
    if c.is_local {
        eta = eta.min(0.125);
    }
    CoftrlParams { eta, alpha: 4.0 * c.gamma + c.mu }
}

fn check_utility(nu: &[f64], dim: usize) -> Result<()> {
    if nu.len() != dim {
        return Err(Error::InvalidInput(format!("utility has length {}, expected {dim}", nu.len())));
    }
    if nu.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("utility has non-finite entries".into()));
    }
    let norm = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm > 1.0 + UTILITY_SLACK {
        return Err(Error::UnboundedUtility(norm));
    }
    Ok(())
}

/// Shared bookkeeping: `U` and `u_prev` with the step/observe alternation.
#[derive(Debug, Clone)]
struct RegretState {
    cumulative: Vec<f64>,
    last_correction: Vec<f64>,
    last_x: Vec<f64>,
    rounds: u64,
    awaiting_observe: bool,
}

impl RegretState {
    fn new(dim: usize) -> Self {
        Self {
            cumulative: vec![0.0; dim],
            last_correction: vec![0.0; dim],
            last_x: vec![1.0 / dim as f64; dim],
            rounds: 0,
            awaiting_observe: false,
        }
    }

    fn begin_step(&self) -> Result<()> {
        if self.awaiting_observe {
            return Err(Error::OutOfOrder("step called twice without observe"));
        }
        Ok(())
    }

    fn optimistic(&self) -> Vec<f64> {
        self.cumulative.iter().zip(&self.last_correction).map(|(a, b)| a + b).collect()
    }

    fn commit(&mut self, x: Vec<f64>) {
        self.last_x = x;
        self.awaiting_observe = true;
    }

    fn absorb(&mut self, nu: &[f64]) -> Result<()> {
        if !self.awaiting_observe {
            return Err(Error::OutOfOrder("observe called before step"));
        }
        check_utility(nu, self.cumulative.len())?;
        let v = dot(nu, &self.last_x);
        for ((c, u), &n) in self.cumulative.iter_mut().zip(self.last_correction.iter_mut()).zip(nu) {
            *u = n - v;
            *c += *u;
        }
        self.rounds += 1;
        self.awaiting_observe = false;
        Ok(())
    }
}

/// Cautious optimistic FTRL.
#[derive(Debug, Clone)]
pub struct CoftrlLearner {
    reg: Regularizer,
    eta: f64,
    alpha: f64,
    state: RegretState,
    last_lambda: Option<f64>,
    max_signal_change: f64,
    last_signal: Option<Vec<f64>>,
}

impl CoftrlLearner {
    pub fn new(reg: Regularizer, eta: f64, alpha: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        let gamma = reg.constants().gamma;
        if !(alpha > gamma && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed gamma = {gamma}")));
        }
        let dim = reg.dim();
        Ok(Self {
            reg,
            eta,
            alpha,
            state: RegretState::new(dim),
            last_lambda: None,
            max_signal_change: 0.0,
            last_signal: None,
        })
    }

    /// Learner with [`default_params`] for an `n`-player game with smoothness `L`.
    pub fn with_defaults(reg: Regularizer, players: usize, smoothness: f64) -> Result<Self> {
        let p = default_params(&reg, players, smoothness);
        Self::new(reg, p.eta, p.alpha)
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.reg
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `U`, the accumulated corrected utilities.
    pub fn cumulative(&self) -> &[f64] {
        &self.state.cumulative
    }

    /// `u_prev`, the most recent correction.
    pub fn last_correction(&self) -> &[f64] {
        &self.state.last_correction
    }

    pub fn last_strategy(&self) -> &[f64] {
        &self.state.last_x
    }

    pub fn rounds(&self) -> u64 {
        self.state.rounds
    }

    /// Largest `||r^{t+1} - r^t||_inf` seen so far.
    pub fn max_signal_change(&self) -> f64 {
        self.max_signal_change
    }

    /// Returns `(x, lambda)` for this round.
    pub fn step_with_rate(&mut self) -> Result<(Vec<f64>, f64)> {
        self.state.begin_step()?;
        let r = self.state.optimistic();
        if let Some(prev) = &self.last_signal {
            let change = r.iter().zip(prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            self.max_signal_change = self.max_signal_change.max(change);
        }
        let sol = lr_control_solve(&self.reg, &r, self.eta, self.alpha, DEFAULT_LR_TOL)?;
        self.last_signal = Some(r);
        self.last_lambda = Some(sol.lambda);
        self.state.commit(sol.x.clone());
        Ok((sol.x, sol.lambda))
    }
}

impl Learner for CoftrlLearner {
    fn dim(&self) -> usize {
        self.reg.dim()
    }

    fn step(&mut self) -> Result<Vec<f64>> {
        self.step_with_rate().map(|(x, _)| x)
    }

    fn observe(&mut self, nu: &[f64]) -> Result<()> {
        self.state.absorb(nu)
    }

    fn learning_rate(&self) -> Option<f64> {
        self.last_lambda
    }

    fn name(&self) -> String {
        format!("coftrl-{}", self.reg.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineKind {
    /// Optimistic FTRL at a fixed rate: `x = argmax <eta (U + u_prev), x> - psi(x)`.
    FixedOftrl(Regularizer, f64),
    /// Multiplicative weights: `x ~ exp(eta U)`.
    Mwu(f64),
    /// Optimistic multiplicative weights: `x ~ exp(eta (U + u_prev))`.
    Omwu(f64),
}

#[derive(Debug, Clone)]
pub struct BaselineLearner {
    kind: BaselineKind,
    state: RegretState,
}

impl BaselineLearner {
    pub fn new(kind: BaselineKind, dim: usize) -> Result<Self> {
        let eta = match &kind {
            BaselineKind::FixedOftrl(reg, eta) => {
                if reg.dim() != dim {
                    return Err(Error::InvalidInput(format!("regularizer dimension {} != {dim}", reg.dim())));
                }
                *eta
            }
            BaselineKind::Mwu(eta) | BaselineKind::Omwu(eta) => *eta,
        };
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        if dim < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 actions, got {dim}")));
        }
        Ok(Self { kind, state: RegretState::new(dim) })
    }

    pub fn mwu(dim: usize, eta: f64) -> Result<Self> {
        Self::new(BaselineKind::Mwu(eta), dim)
    }

    pub fn omwu(dim: usize, eta: f64) -> Result<Self> {
        Self::new(BaselineKind::Omwu(eta), dim)
    }

    pub fn oftrl(reg: Regularizer, eta: f64) -> Result<Self> {
        let dim = reg.dim();
        Self::new(BaselineKind::FixedOftrl(reg, eta), dim)
    }

    pub fn kind(&self) -> &BaselineKind {
        &self.kind
    }

    pub fn eta(&self) -> f64 {
        match &self.kind {
            BaselineKind::FixedOftrl(_, eta) | BaselineKind::Mwu(eta) | BaselineKind::Omwu(eta) => *eta,
        }
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.state.cumulative
    }
}

impl Learner for BaselineLearner {
    fn dim(&self) -> usize {
        self.state.cumulative.len()
    }

    fn step(&mut self) -> Result<Vec<f64>> {
        self.state.begin_step()?;
        let x = match &self.kind {
            BaselineKind::FixedOftrl(reg, eta) => {
                let g: Vec<f64> = self.state.optimistic().iter().map(|v| eta * v).collect();
                argmax_raw(reg, &g, DEFAULT_FTRL_TOL)?
            }
            BaselineKind::Mwu(eta) => softmax(&self.state.cumulative.iter().map(|v| eta * v).collect::<Vec<_>>()),
            BaselineKind::Omwu(eta) => softmax(&self.state.optimistic().iter().map(|v| eta * v).collect::<Vec<_>>()),
        };
        self.state.commit(x.clone());
        Ok(x)
    }

    fn observe(&mut self, nu: &[f64]) -> Result<()> {
        self.state.absorb(nu)
    }

    fn learning_rate(&self) -> Option<f64> {
        (self.state.rounds > 0 || self.state.awaiting_observe).then(|| self.eta())
    }

    fn name(&self) -> String {
        match &self.kind {
            BaselineKind::FixedOftrl(reg, _) => format!("oftrl-{}", reg.name()),
            BaselineKind::Mwu(_) => "mwu".into(),
            BaselineKind::Omwu(_) => "omwu".into(),
        }
    }
}

/// COFTRL that hands over to a fresh MWU once observed utilities vary more than self-play allows.
#[derive(Debug, Clone)]
pub struct SafeguardedLearner {
    inner: CoftrlLearner,
    fallback: BaselineLearner,
    switched: bool,
    switch_round: Option<u64>,
    variation_sum: f64,
    last_nu: Option<Vec<f64>>,
    players: usize,
    smoothness: f64,
    rounds: u64,
}

impl SafeguardedLearner {
    /// `horizon` sets the fallback rate `sqrt(8 ln d / T)`.
    pub fn new(inner: CoftrlLearner, players: usize, smoothness: f64, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if players == 0 || !(smoothness > 0.0) {
            return Err(Error::InvalidParameter("players and smoothness must be positive".into()));
        }
        let d = inner.dim();
        let eta = (8.0 * (d as f64).ln() / horizon as f64).sqrt();
        Ok(Self {
            inner,
            fallback: BaselineLearner::mwu(d, eta)?,
            switched: false,
            switch_round: None,
            variation_sum: 0.0,
            last_nu: None,
            players,
            smoothness,
            rounds: 0,
        })
    }

    pub fn inner(&self) -> &CoftrlLearner {
        &self.inner
    }

    pub fn switched(&self) -> bool {
        self.switched
    }

    /// Round after which the fallback took over.
    pub fn switch_round(&self) -> Option<u64> {
        self.switch_round
    }

    /// `sum_t ||nu^{t+1} - nu^t||_inf^2` over the rounds seen so far.
    pub fn variation_sum(&self) -> f64 {
        self.variation_sum
    }

    /// `L^2 n^2 (128 eta / mu)(3 + (alpha log t + R) / eta)`.
    pub fn threshold(&self, t: u64) -> f64 {
        let c = self.inner.regularizer().constants();
        let (eta, alpha) = (self.inner.eta(), self.inner.alpha());
        let n = self.players as f64;
        let t = t.max(1);
        self.smoothness.powi(2) * n * n * (128.0 * eta / c.mu) * (3.0 + (alpha * (t as f64).ln() + c.range(t)) / eta)
    }

    /// Flips to the fallback when the variation exceeds the threshold at round `t`.
    pub fn safeguard_check(&mut self, t: u64) -> bool {
        if !self.switched && self.variation_sum > self.threshold(t) {
            self.switched = true;
            self.switch_round = Some(t);
        }
        self.switched
    }
}

impl Learner for SafeguardedLearner {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn step(&mut self) -> Result<Vec<f64>> {
        if self.switched {
            self.fallback.step()
        } else {
            self.inner.step()
        }
    }

    fn observe(&mut self, nu: &[f64]) -> Result<()> {
        if self.switched {
            self.fallback.observe(nu)?;
        } else {
            self.inner.observe(nu)?;
        }
        if let Some(prev) = &self.last_nu {
            let change = nu.iter().zip(prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            self.variation_sum += change * change;
        }
        self.last_nu = Some(nu.to_vec());
        self.rounds += 1;
        self.safeguard_check(self.rounds);
        Ok(())
    }

    fn learning_rate(&self) -> Option<f64> {
        if self.switched {
            self.fallback.learning_rate()
        } else {
            self.inner.learning_rate()
        }
    }

    fn name(&self) -> String {
        format!("safeguarded-{}", self.inner.regularizer().name())
    }
}
