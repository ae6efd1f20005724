//! Maximum regret of COFTRL with default parameters as the horizon doubles.

use coftrl::harness::{compute_metrics, self_play};
use coftrl::learner::{CoftrlLearner, Learner};
use coftrl::{make_game, GameSpec, Regularizer};

fn main() -> coftrl::Result<()> {
    let spec = GameSpec::RandomGeneralSum { players: 2, actions: 10 };
    let horizon = 1 << 14;
    for seed in 0..4 {
        let game = make_game(&spec, seed)?;
        let mut learners: Vec<Box<dyn Learner>> = (0..2)
            .map(|_| -> coftrl::Result<Box<dyn Learner>> {
                Ok(Box::new(CoftrlLearner::with_defaults(Regularizer::neg_entropy(10), 2, game.smoothness())?))
            })
            .collect::<coftrl::Result<_>>()?;
        let metrics = compute_metrics(&self_play(&game, &mut learners, horizon)?)?;
        let row: Vec<String> = metrics
            .series
            .iter()
            .filter(|p| p.t >= 64)
            .map(|p| format!("{:.1}", p.regret.iter().cloned().fold(f64::NEG_INFINITY, f64::max)))
            .collect();
        println!("seed {seed}: max regret at t=64,128,..: {}", row.join(" "));
    }
    Ok(())
}
