//! Run a scenario file through the same pipeline as the binary and list the
//! produced files without writing them.
//!
//! cargo run --example run_scenario -- crates/core/scenarios/moduli.toml

use shapesphere::cli::{run, Command, RunOptions};

fn main() -> shapesphere::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "crates/core/scenarios/moduli.toml".into());
    let opts = RunOptions { config: Some(path.into()), ..RunOptions::default() };
    let out = run(Command::Reduce, &opts)?;
    for (name, bytes) in &out.files {
        println!("{name}: {} bytes", bytes.len());
    }
    for line in &out.report {
        println!("{line}");
    }
    Ok(())
}
