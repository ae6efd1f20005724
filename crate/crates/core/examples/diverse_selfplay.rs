//! Three players with different regularizers in a random general-sum game.

use coftrl::harness::{compute_metrics, self_play};
use coftrl::learner::{BaselineLearner, CoftrlLearner, Learner};
use coftrl::{make_game, GameSpec, Regularizer};

fn main() -> coftrl::Result<()> {
    let game = make_game(&GameSpec::RandomGeneralSum { players: 3, actions: 5 }, 11)?;
    let l = game.smoothness();
    let mut learners: Vec<Box<dyn Learner>> = vec![
        Box::new(CoftrlLearner::with_defaults(Regularizer::log_barrier(5), 3, l)?),
        Box::new(CoftrlLearner::with_defaults(Regularizer::squared_lp(5, 2.0)?, 3, l)?),
        Box::new(BaselineLearner::omwu(5, 0.1)?),
    ];
    let names: Vec<String> = learners.iter().map(|x| x.name()).collect();
    let metrics = compute_metrics(&self_play(&game, &mut learners, 8192)?)?;
    for (name, r) in names.iter().zip(&metrics.external_regret) {
        println!("{name:<32} regret {r:9.3}");
    }
    println!("social regret {:.3}", metrics.social_regret);
    Ok(())
}
