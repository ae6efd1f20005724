//! A safeguarded learner facing an alternating adversary hands over to its fallback.

use coftrl::config::AdversaryKind;
use coftrl::harness::{adversarial_play, compute_metrics};
use coftrl::learner::{CoftrlLearner, SafeguardedLearner};
use coftrl::runner::adversary;
use coftrl::Regularizer;

fn main() -> coftrl::Result<()> {
    let horizon = 1 << 14;
    let inner = CoftrlLearner::with_defaults(Regularizer::neg_entropy(2), 2, 1.0)?;
    let mut learner = SafeguardedLearner::new(inner, 2, 1.0, horizon as u64)?;
    let traj = adversarial_play(&mut learner, adversary(AdversaryKind::Alternating, 2, 0), horizon)?;
    match learner.switch_round() {
        Some(t) => println!("switched after round {t} (threshold {:.1})", learner.threshold(t)),
        None => println!("never switched"),
    }
    println!("variation sum: {:.1}", learner.variation_sum());
    let metrics = compute_metrics(&traj)?;
    println!("regret after {horizon} rounds: {:.3}", metrics.external_regret[0]);
    println!("sqrt(T ln d) for comparison: {:.3}", (horizon as f64 * 2f64.ln()).sqrt());
    Ok(())
}
