//! The empirical play distribution approaches a coarse correlated equilibrium.

use coftrl::harness::{cce_gap, compute_metrics, self_play};
use coftrl::learner::{CoftrlLearner, Learner};
use coftrl::{make_game, GameSpec, Regularizer};

fn main() -> coftrl::Result<()> {
    let game = make_game(&GameSpec::RandomGeneralSum { players: 2, actions: 3 }, 5)?;
    let mut learners: Vec<Box<dyn Learner>> = Vec::new();
    for _ in 0..2 {
        learners.push(Box::new(CoftrlLearner::new(Regularizer::neg_entropy(3), 0.5, 20.0)?));
    }
    let traj = self_play(&game, &mut learners, 1 << 13)?;
    let metrics = compute_metrics(&traj)?;
    for p in metrics.series.iter().filter(|p| p.t >= 16) {
        let bound = p.regret.iter().cloned().fold(0.0, f64::max) / p.t as f64;
        println!("t={:5} gap={:.3e} max_regret/t={:.3e}", p.t, p.cce_gap.unwrap_or(f64::NAN), bound);
    }
    println!("raw gap at horizon: {:?}", cce_gap(&traj));
    Ok(())
}
