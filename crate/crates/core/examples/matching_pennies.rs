//! Two COFTRL learners with entropic regularization play a biased matching-pennies game.

use coftrl::harness::{compute_metrics, self_play};
use coftrl::learner::{CoftrlLearner, Learner};
use coftrl::{NormalFormGame, Regularizer};

fn main() -> coftrl::Result<()> {
    // Equilibrium is x = (0.3, 0.7) for both players.
    let a = vec![vec![1.0, -0.75], vec![-0.75, 0.0]];
    let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let game = NormalFormGame::bimatrix(&a, &b)?;
    let mut learners: Vec<Box<dyn Learner>> = Vec::new();
    for _ in 0..2 {
        learners.push(Box::new(CoftrlLearner::new(Regularizer::neg_entropy(2), 0.5, 20.0)?));
    }
    let traj = self_play(&game, &mut learners, 4096)?;
    let metrics = compute_metrics(&traj)?;
    for p in &metrics.series {
        println!(
            "t={:5} regret=({:+.4}, {:+.4}) cce_gap={:.3e}",
            p.t,
            p.regret[0],
            p.regret[1],
            p.cce_gap.unwrap_or(f64::NAN)
        );
    }
    let t = traj.horizon() - 1;
    println!("last strategies: {:?} {:?}", traj.x(0, t), traj.x(1, t));
    Ok(())
}
