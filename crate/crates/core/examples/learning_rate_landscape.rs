//! Prints the learning-rate map lambda(r) on a coarse grid of two-action signals.

use coftrl::solver::{landscape_grid, square_grid};
use coftrl::Regularizer;

fn main() -> coftrl::Result<()> {
    let n = 9;
    let grid = square_grid(-10.0, 10.0, n);
    for reg in [Regularizer::neg_entropy(2), Regularizer::log_barrier(2), Regularizer::tsallis(2, 0.5)?] {
        println!("{}", reg.name());
        let lambdas = landscape_grid(&reg, 1.0, 4.0, &grid)?;
        for row in lambdas.chunks(n) {
            let cells: Vec<String> = row.iter().map(|l| format!("{l:5.3}")).collect();
            println!("  {}", cells.join(" "));
        }
    }
    Ok(())
}
