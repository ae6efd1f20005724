//! Constants and default step sizes for each regularizer family.

use coftrl::learner::default_params;
use coftrl::Regularizer;

fn main() -> coftrl::Result<()> {
    let d = 16;
    let regs = [
        Regularizer::neg_entropy(d),
        Regularizer::log_barrier(d),
        Regularizer::squared_lp(d, 2.0)?,
        Regularizer::squared_lp_star(d),
        Regularizer::tsallis(d, 0.5)?,
        Regularizer::tsallis_star(d),
    ];
    println!("{:<34} {:>10} {:>8} {:>8} {:>10} {:>10}", "regularizer", "gamma", "mu", "range", "eta", "alpha");
    for reg in &regs {
        let c = reg.constants();
        let p = default_params(reg, 2, 1.0);
        println!(
            "{:<34} {:>10.4} {:>8.4} {:>8.4} {:>10.3e} {:>10.3}",
            reg.name(),
            c.gamma,
            c.mu,
            c.range(1024),
            p.eta,
            p.alpha
        );
    }
    Ok(())
}
