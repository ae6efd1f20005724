//! Loads a TOML experiment, applies overrides and writes its outputs.
//!
//! `cargo run --example run_from_config -- configs/matching_pennies.toml /tmp/mp`

use std::path::PathBuf;

use coftrl::config::load_config;
use coftrl::runner::run_experiment;

fn main() -> coftrl::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "configs/matching_pennies.toml".into());
    let out = args.next().map(PathBuf::from);
    let config = load_config(path.as_ref())?.with_overrides(None, None, out)?;
    print!("{}", config.to_toml()?);
    let summary = run_experiment(&config)?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
