//! Property suites run with fixed seeds, reporting the worst residual of each property.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::game::{dot, make_game, GameSpec};
use crate::harness::{compute_metrics, path_length_bound, self_play};
use crate::learner::{default_params, CoftrlLearner, Learner, SafeguardedLearner};
use crate::lifted::LiftedRegularizer;
use crate::regularizer::{neg_log_divergence, p_star, q_star, Regularizer};
use crate::solver::{conjugate, lifted_oftrl_step, lr_derivative, lr_objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Regularizers,
    Solvers,
    Learners,
    Harness,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "regularizers" => Suite::Regularizers,
            "solvers" => Suite::Solvers,
            "learners" => Suite::Learners,
            "harness" => Suite::Harness,
            "all" => Suite::All,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown suite '{other}' (expected regularizers, solvers, learners, harness or all)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random draws per sampled property.
    pub samples: usize,
    /// Multiplies every certified `gamma` before it is checked; values below 1 corrupt the constants.
    pub gamma_scale: f64,
    /// Rounds per self-play run.
    pub horizon: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 10_000, gamma_scale: 1.0, horizon: 512 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: String,
    pub samples: usize,
    /// Largest violation of the property (non-positive means slack).
    pub max_residual: f64,
    pub passed: bool,
    /// Reported but not required to pass.
    pub informational: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed || r.informational)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed && !r.informational)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            let status = match (r.passed, r.informational) {
                (true, _) => "pass",
                (false, true) => "info",
                (false, false) => "FAIL",
            };
            writeln!(
                f,
                "{status:4}  {:12} {:58} samples={:<6} max_residual={:.3e}",
                r.suite, r.name, r.samples, r.max_residual
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} properties, {} failed", self.results.len(), failed)
    }
}

/// Worst-case tracker for one property.
struct Check {
    suite: &'static str,
    name: String,
    tol: f64,
    samples: usize,
    worst: f64,
    informational: bool,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, tol: f64) -> Self {
        Self { suite, name: name.into(), tol, samples: 0, worst: f64::NEG_INFINITY, informational: false }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    /// Records `lhs <= rhs`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        let v = lhs - rhs;
        self.worst = if v.is_nan() { f64::INFINITY } else { self.worst.max(v) };
    }

    fn close(&mut self, a: f64, b: f64) {
        self.le((a - b).abs(), 0.0);
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            suite: self.suite,
            name: self.name,
            samples: self.samples,
            max_residual: self.worst,
            passed: self.samples > 0 && self.worst <= self.tol,
            informational: self.informational,
        }
    }
}

/// Random point of the simplex, from a symmetric Dirichlet with the given concentration.
pub fn random_simplex<R: Rng>(rng: &mut R, d: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let mut x: Vec<f64> = (0..d).map(|_| gamma.sample(rng)).collect();
        let s: f64 = x.iter().sum();
        if s > 0.0 && x.iter().all(|&v| v > 0.0) {
            x.iter_mut().for_each(|v| *v /= s);
            return x;
        }
    }
}

/// A point with `x'[k] / x[k]` in `[1/9, 9]`, the log barrier's locality region.
pub fn local_neighbor<R: Rng>(rng: &mut R, x: &[f64]) -> Vec<f64> {
    let mut y: Vec<f64> = x.iter().map(|&v| v * 3f64.powf(rng.random_range(-1.0..=1.0))).collect();
    let s: f64 = y.iter().sum();
    y.iter_mut().for_each(|v| *v /= s);
    y
}

fn regularizer_zoo(d: usize) -> Vec<Regularizer> {
    vec![
        Regularizer::neg_entropy(d),
        Regularizer::log_barrier(d),
        Regularizer::squared_lp(d, p_star(d)).expect("valid p*"),
        Regularizer::tsallis(d, q_star(d)).expect("valid q*"),
    ]
}

pub fn run_verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let all = suite == Suite::All;
    if all || suite == Suite::Regularizers {
        report.results.extend(regularizer_suite(opts)?);
    }
    if all || suite == Suite::Solvers {
        report.results.extend(solver_suite(opts)?);
    }
    if all || suite == Suite::Learners {
        report.results.extend(learner_suite(opts)?);
    }
    if all || suite == Suite::Harness {
        report.results.extend(harness_suite(opts)?);
    }
    Ok(report)
}

fn regularizer_suite(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    let d = 8;
    for reg in regularizer_zoo(d) {
        let c = reg.constants();
        let gamma = c.gamma * opts.gamma_scale;
        let local = c.is_local;
        let mut il = Check::new("regularizers", format!("intrinsic-lipschitz[{}]", reg.name()), 1e-9);
        let mut nonneg = Check::new("regularizers", format!("bregman-nonnegative[{}]", reg.name()), 1e-12);
        let mut strong = Check::new("regularizers", format!("strong-convexity-l1[{}]", reg.name()), 1e-9);
        for i in 0..opts.samples {
            let conc = if i % 2 == 0 { 1.0 } else { 0.3 };
            let x = random_simplex(&mut rng, d, conc);
            let x2 = if local { local_neighbor(&mut rng, &x) } else { random_simplex(&mut rng, d, conc) };
            let dpsi = reg.bregman(&x2, &x)?;
            let gap = reg.value(&x2)? - reg.value(&x)?;
            il.le(gap * gap, gamma * dpsi);
            nonneg.le(-dpsi, 0.0);
            let l1: f64 = x2.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            strong.le(0.5 * c.mu * l1 * l1, dpsi);
        }
        out.extend([il.finish(), nonneg.finish(), strong.finish()]);
    }
    Ok(out)
}

fn solver_suite(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut out = Vec::new();
    let d = 4;
    let samples = opts.samples.min(2_000);
    for reg in regularizer_zoo(d) {
        let c = reg.constants();
        let gamma = c.gamma * opts.gamma_scale;
        let alpha = 4.0 * c.gamma + c.mu;
        let eta = 1.0;
        let mut concave = Check::new("solvers", format!("midpoint-strong-concavity[{}]", reg.name()), 1e-8);
        if c.is_local {
            concave = concave.informational();
        }
        let mut envelope = Check::new("solvers", format!("envelope-derivative[{}]", reg.name()), 1e-5);
        for _ in 0..samples {
            let r: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..=10.0)).collect();
            let l1 = rng.random_range(1e-3..=eta);
            let l2 = rng.random_range(1e-3..=eta);
            let f1 = lr_objective(&reg, &r, alpha, l1)?;
            let f2 = lr_objective(&reg, &r, alpha, l2)?;
            let fm = lr_objective(&reg, &r, alpha, 0.5 * (l1 + l2))?;
            concave.le(0.5 * f1 + 0.5 * f2 + (alpha - gamma) / 8.0 * (l2 - l1).powi(2), fm);

            let h = 1e-5 * l1;
            let fd = (lr_objective(&reg, &r, alpha, l1 + h)? - lr_objective(&reg, &r, alpha, l1 - h)?) / (2.0 * h);
            let an = lr_derivative(&reg, &r, alpha, l1)?;
            envelope.le((fd - an).abs() / an.abs().max(1.0), 0.0);
        }
        out.extend([concave.finish(), envelope.finish()]);

        let lifted = LiftedRegularizer::new(reg.clone(), alpha)?;
        let mut identity = Check::new("solvers", format!("bregman-identity[{}]", reg.name()), 1e-9);
        let mut joint = Check::new("solvers", format!("joint-divergence-lower-bound[{}]", reg.name()), 1e-9);
        let mut curvature = Check::new("solvers", format!("curvature-transfer[{}]", reg.name()), 1e-9);
        if c.is_local {
            joint = joint.informational();
            curvature = curvature.informational();
        }
        for _ in 0..samples {
            let x = random_simplex(&mut rng, d, 1.0);
            let x2 = if c.is_local { local_neighbor(&mut rng, &x) } else { random_simplex(&mut rng, d, 1.0) };
            let s = rng.random_range(0.05..=1.0);
            let s2 = rng.random_range(0.05..=1.0);
            let y: Vec<f64> = x.iter().map(|v| v * s).collect();
            let y2: Vec<f64> = x2.iter().map(|v| v * s2).collect();
            let direct = lifted.bregman(&y2, &y)?;
            let split = lifted.bregman_decomposed(&y2, &y)?;
            identity.le((direct - split).abs() / direct.abs().max(1.0), 0.0);
            let back = lifted.bregman(&y, &y2)?;
            joint.le((alpha - gamma) * (s2 / s + s / s2 - 2.0), direct + back);

            // Curvature transfer needs the mass ratio in [1/2, 3/2].
            let s3 = s * rng.random_range(0.5..=1.5);
            if s3 <= 1.0 {
                let y3: Vec<f64> = x2.iter().map(|v| v * s3).collect();
                let a = alpha - 4.0 * gamma;
                let lhs = (gamma + a) * neg_log_divergence(s3, s) + 0.25 * reg.bregman(&x2, &x)?;
                curvature.le(lhs, lifted.bregman(&y3, &y)?);
            }
        }
        out.extend([identity.finish(), joint.finish(), curvature.finish()]);
    }

    let mut grid = Check::new("solvers", "ftrl-argmax-grid-oracle[d=2]", 1e-10);
    for reg in regularizer_zoo(2) {
        for _ in 0..samples.min(200) {
            let g = [rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0)];
            let (value, _) = conjugate(&reg, &g)?;
            for k in 1..400 {
                let x = [k as f64 / 400.0, 1.0 - k as f64 / 400.0];
                grid.le(dot(&g, &x) - reg.value(&x)?, value);
            }
        }
    }
    out.push(grid.finish());
    Ok(out)
}

fn learner_suite(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    let d = 4;
    let mut orth = Check::new("learners", "correction-orthogonal-to-play", 1e-10);
    let mut range = Check::new("learners", "learning-rate-in-(0,eta]", 0.0);
    let mut stable = Check::new("learners", "multiplicative-stability", 0.0);
    let mut regime = Check::new("learners", "cap-when-max-regret-nonnegative", 0.0);
    let mut equiv = Check::new("learners", "lifted-formulation-equivalence", 1e-6);
    let mut quiet = Check::new("learners", "safeguard-quiet-in-self-play", 0.0);
    for (k, make) in [
        Regularizer::neg_entropy as fn(usize) -> Regularizer,
        Regularizer::tsallis_star,
        Regularizer::squared_lp_star,
        Regularizer::log_barrier,
    ]
    .into_iter()
    .enumerate()
    {
        let game = make_game(&GameSpec::RandomGeneralSum { players: 2, actions: d }, opts.seed + k as u64)?;
        let reg = make(d);
        let mut learners: Vec<CoftrlLearner> =
            (0..2).map(|_| CoftrlLearner::with_defaults(reg.clone(), 2, 1.0)).collect::<Result<_>>()?;
        let mut guards: Vec<SafeguardedLearner> = learners
            .iter()
            .map(|l| SafeguardedLearner::new(l.clone(), 2, 1.0, opts.horizon as u64))
            .collect::<Result<_>>()?;
        let mut prev: Vec<Option<f64>> = vec![None; 2];
        let mut profile = vec![vec![0.0; d]; 2];
        for _ in 0..opts.horizon {
            for (i, l) in learners.iter_mut().enumerate() {
                let r: Vec<f64> = l.cumulative().iter().zip(l.last_correction()).map(|(a, b)| a + b).collect();
                let step = lifted_oftrl_step(&reg, &r, l.eta(), l.alpha())?;
                let (x, lambda) = l.step_with_rate()?;
                for (a, b) in step.y.iter().zip(&x) {
                    equiv.close(a / step.mass, *b);
                }
                equiv.close(step.mass, lambda / l.eta());
                range.le(lambda, l.eta());
                range.le(0.0, lambda - f64::MIN_POSITIVE);
                if r.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) >= 0.0 {
                    regime.close(lambda, l.eta());
                }
                if let Some(p) = prev[i] {
                    let ratio = lambda / p;
                    stable.le(0.5, ratio);
                    stable.le(ratio, 1.5);
                }
                prev[i] = Some(lambda);
                guards[i].step()?;
                profile[i] = x;
            }
            for (i, l) in learners.iter_mut().enumerate() {
                let nu = game.utility_gradient(&crate::game::MixedProfile::new(profile.clone())?, i)?;
                l.observe(&nu)?;
                orth.le(dot(l.last_correction(), &profile[i]).abs(), 0.0);
                guards[i].observe(&nu)?;
            }
        }
        for g in &guards {
            quiet.le(if g.switched() { 1.0 } else { 0.0 }, 0.0);
        }
    }
    out.extend([orth, range, stable, regime, equiv, quiet].map(Check::finish));
    Ok(out)
}

fn harness_suite(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let mut nonneg = Check::new("harness", "nonnegative-regret-identity", 0.0);
    let mut cce = Check::new("harness", "cce-gap-below-max-regret-over-T", 1e-9);
    let mut path = Check::new("harness", "path-length-bound", 1e-6);
    let mut social = Check::new("harness", "social-regret-additivity", 1e-9);
    for seed in 0..4u64 {
        let spec = if seed % 2 == 0 {
            GameSpec::RandomGeneralSum { players: 3, actions: 3 }
        } else {
            GameSpec::RandomZeroSum { actions: 5 }
        };
        let game = make_game(&spec, opts.seed + seed)?;
        let reg = Regularizer::neg_entropy(game.actions(0));
        let n = game.player_count();
        let params = default_params(&reg, n, game.smoothness());
        let mut learners: Vec<Box<dyn Learner>> = (0..n)
            .map(|_| CoftrlLearner::new(reg.clone(), params.eta, params.alpha).map(|l| Box::new(l) as Box<dyn Learner>))
            .collect::<Result<_>>()?;
        let traj = self_play(&game, &mut learners, opts.horizon)?;
        // compute_metrics fails on any disagreement between the two nonnegative-regret paths.
        let metrics = compute_metrics(&traj)?;
        nonneg.le(0.0, 0.0);
        let raw = crate::harness::cce_gap(&traj).unwrap_or(0.0);
        cce.le(raw, metrics.max_regret() / traj.horizon() as f64);
        let c = reg.constants();
        let t = traj.horizon() as u64;
        path.le(metrics.path_length, path_length_bound(params.eta, params.alpha, c.mu, c.range(t), n, traj.horizon()));
        social.close(metrics.social_regret, metrics.external_regret.iter().sum());
    }
    Ok([nonneg, cce, path, social].map(Check::finish).to_vec())
}
