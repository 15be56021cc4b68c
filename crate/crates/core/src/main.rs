use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shapesphere::cli::{exit_code, run, Command, RunOptions};
use shapesphere::Error;

#[derive(Parser)]
#[command(name = "shapesphere", version, about = "Three-body dynamics on the shape sphere")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Integrate Newton's equations in the plane.
    Simulate(Flags),
    /// Integrate the reduced moduli-cone system.
    Reduce(Flags),
    /// Integrate the third-order shape equation.
    Shape(Flags),
    /// Frames, monotonicity, segments and classification along a trajectory.
    Analyze(Flags),
    /// Local series of a shape curve from intrinsic data.
    Series(Flags),
    /// Homothetic rays and total-collision asymptotics.
    Collision(Flags),
    /// Run the acceptance suite.
    Verify(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed from the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Relative integration tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, f) = match cli.command {
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Reduce(f) => (Command::Reduce, f),
        Sub::Shape(f) => (Command::Shape, f),
        Sub::Analyze(f) => (Command::Analyze, f),
        Sub::Series(f) => (Command::Series, f),
        Sub::Collision(f) => (Command::Collision, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    let opts = RunOptions { config: f.config, seed: f.seed, out: f.out, tol: f.tol };
    let res = run(cmd, &opts);
    let code = exit_code(&res);
    match res {
        Ok(out) => {
            if let Err(e) = out.write(&opts.out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            for line in &out.report {
                println!("{line}");
            }
            if out.failures > 0 {
                eprintln!("{} check(s) failed", out.failures);
                return ExitCode::from(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::StepSizeUnderflow { state, .. } = &e {
                eprintln!("state at failure: {state:?}");
            }
        }
    }
    ExitCode::from(code as u8)
}
