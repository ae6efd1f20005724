//! Executes an [`ExperimentConfig`] and writes its CSV outputs and manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{AdversaryKind, Algorithm, ExperimentConfig, ExperimentKind, LearnerSpec};
use crate::error::{Error, Result};
use crate::game::make_game;
use crate::harness::{
    adversarial_play, compute_metrics, fmt_float, self_play, write_metrics_csv, write_trajectory_csv, Metrics,
};
use crate::learner::{BaselineLearner, CoftrlLearner, Learner, SafeguardedLearner};
use crate::regularizer::RegularizerConstants;
use crate::solver::{landscape_grid, square_grid};
use crate::verify::{run_verify, Suite, VerifyOptions, VerifyReport};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const LANDSCAPE_FILE: &str = "landscape.csv";
pub const VERIFY_FILE: &str = "verify.txt";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Outcome of one experiment.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub kind: ExperimentKind,
    pub output: PathBuf,
    pub files: Vec<PathBuf>,
    pub metrics: Option<Metrics>,
    pub verify: Option<VerifyReport>,
    /// Round after which a safeguarded learner handed over to its fallback.
    pub switch_round: Option<u64>,
}

impl RunSummary {
    /// False only when a verification suite reported a failure.
    pub fn success(&self) -> bool {
        self.verify.as_ref().is_none_or(VerifyReport::passed)
    }
}

#[derive(Debug, Serialize)]
struct LearnerRecord {
    player: usize,
    algorithm: Algorithm,
    regularizer: String,
    eta: f64,
    alpha: f64,
    gamma: f64,
    mu: f64,
    range: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    crate_version: &'static str,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    switch_round: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    learners: Vec<LearnerRecord>,
    config: &'a ExperimentConfig,
}

/// Learner for one player, built from a resolved spec.
pub fn build_learner(
    spec: &LearnerSpec,
    dim: usize,
    players: usize,
    smoothness: f64,
    horizon: usize,
) -> Result<(Box<dyn Learner>, RegularizerConstants)> {
    let reg = spec.regularizer.build(dim)?;
    let constants = reg.constants();
    let unresolved = || Error::InvalidParameter("config must be resolved before building learners".into());
    let eta = spec.eta.value().ok_or_else(unresolved)?;
    let alpha = spec.alpha.value().ok_or_else(unresolved)?;
    let learner: Box<dyn Learner> = match spec.algorithm {
        Algorithm::Coftrl => Box::new(CoftrlLearner::new(reg, eta, alpha)?),
        Algorithm::Safeguarded => Box::new(SafeguardedLearner::new(
            CoftrlLearner::new(reg, eta, alpha)?,
            players,
            smoothness,
            horizon as u64,
        )?),
        Algorithm::Oftrl => Box::new(BaselineLearner::oftrl(reg, eta)?),
        Algorithm::Mwu => Box::new(BaselineLearner::mwu(dim, eta)?),
        Algorithm::Omwu => Box::new(BaselineLearner::omwu(dim, eta)?),
    };
    Ok((learner, constants))
}

/// Builds the adversary described by `kind` for `d` actions.
pub fn adversary(kind: AdversaryKind, d: usize, seed: u64) -> impl FnMut(usize, &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move |t, _x| match kind {
        AdversaryKind::Zero => vec![0.0; d],
        AdversaryKind::Alternating => {
            let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
            (0..d).map(|k| if k % 2 == 0 { sign } else { -sign }).collect()
        }
        AdversaryKind::Random => (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs the experiment, writing outputs under `config.output`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    let out = config.output.clone();
    fs::create_dir_all(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let mut summary = RunSummary {
        kind: config.kind,
        output: out.clone(),
        files: Vec::new(),
        metrics: None,
        verify: None,
        switch_round: None,
    };
    let mut records = Vec::new();
    match config.kind {
        ExperimentKind::Selfplay | ExperimentKind::Adversarial => {
            let dims = config.learner_dims();
            let players = config.player_count();
            let mut learners = Vec::with_capacity(dims.len());
            for (i, (spec, &d)) in config.learners.iter().zip(&dims).enumerate() {
                let (learner, c) = build_learner(spec, d, players, config.smoothness, config.horizon)?;
                records.push(LearnerRecord {
                    player: i,
                    algorithm: spec.algorithm,
                    regularizer: learner_regularizer_name(spec, d)?,
                    eta: spec.eta.value().unwrap_or(f64::NAN),
                    alpha: spec.alpha.value().unwrap_or(f64::NAN),
                    gamma: c.gamma,
                    mu: c.mu,
                    range: c.range(config.horizon as u64),
                });
                learners.push(learner);
            }
            let traj = if config.kind == ExperimentKind::Selfplay {
                let spec = config.game.as_ref().ok_or_else(|| Error::InvalidInput("missing game".into()))?;
                let game = make_game(spec, config.seed)?.with_smoothness_bound(config.smoothness)?;
                self_play(&game, &mut learners, config.horizon)?
            } else {
                let adv = config.adversary.as_ref().ok_or_else(|| Error::InvalidInput("missing adversary".into()))?;
                let spec = &config.learners[0];
                let d = adv.actions;
                // Rebuild concretely so the switch round can be read back.
                if spec.algorithm == Algorithm::Safeguarded {
                    let reg = spec.regularizer.build(d)?;
                    let inner = CoftrlLearner::new(reg, spec.eta.value().unwrap(), spec.alpha.value().unwrap())?;
                    let mut guarded =
                        SafeguardedLearner::new(inner, adv.players, config.smoothness, config.horizon as u64)?;
                    let traj = adversarial_play(&mut guarded, adversary(adv.kind, d, config.seed), config.horizon)?;
                    summary.switch_round = guarded.switch_round();
                    traj
                } else {
                    adversarial_play(learners[0].as_mut(), adversary(adv.kind, d, config.seed), config.horizon)?
                }
            };
            let metrics = compute_metrics(&traj)?;
            let tpath = out.join(TRAJECTORY_FILE);
            write_trajectory_csv(&traj, create(&tpath)?)?;
            let mpath = out.join(METRICS_FILE);
            write_metrics_csv(&metrics, create(&mpath)?)?;
            summary.files.extend([tpath, mpath]);
            summary.metrics = Some(metrics);
        }
        ExperimentKind::Landscape => {
            let spec = config.landscape.clone().unwrap_or_default();
            let grid = square_grid(spec.lo, spec.hi, spec.points);
            let path = out.join(LANDSCAPE_FILE);
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["regularizer", "r1", "r2", "lambda"])?;
            for r in &spec.regularizers {
                let reg = r.build(2)?;
                let lambdas = landscape_grid(&reg, spec.eta, spec.alpha, &grid)?;
                let name = reg.name();
                for (&(a, b), l) in grid.iter().zip(lambdas) {
                    w.write_record([name.clone(), fmt_float(a), fmt_float(b), fmt_float(l)])?;
                }
            }
            w.flush()?;
            summary.files.push(path);
        }
        ExperimentKind::Verify => {
            let spec = config.verify.clone().ok_or_else(|| Error::InvalidInput("missing verify table".into()))?;
            let suite: Suite = spec.suite.parse()?;
            let opts = VerifyOptions {
                seed: config.seed,
                samples: spec.samples,
                gamma_scale: spec.gamma_scale,
                ..VerifyOptions::default()
            };
            let report = run_verify(suite, &opts)?;
            let path = out.join(VERIFY_FILE);
            fs::write(&path, format!("{report}\n"))?;
            summary.files.push(path);
            summary.verify = Some(report);
        }
    }
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION"),
        files: summary.files.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect(),
        switch_round: summary.switch_round,
        learners: records,
        config,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    let mpath = out.join(MANIFEST_FILE);
    fs::write(&mpath, text)?;
    summary.files.push(mpath);
    Ok(summary)
}

fn learner_regularizer_name(spec: &LearnerSpec, dim: usize) -> Result<String> {
    Ok(spec.regularizer.build(dim)?.name())
}
