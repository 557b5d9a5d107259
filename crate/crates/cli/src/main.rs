//! kirchhoff: reproducible command line runs of the positive-solution
//! toolkit. Every command reads flags over an optional key=value config file,
//! writes JSON/CSV artifacts into the output directory (--out, config `out`,
//! or $KIRCHHOFF_OUT), and exits 0 on success, 2 on input errors, 3 on solver
//! failures, and 4 when a computation falsifies a stated assertion (after
//! writing falsification.json).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use commands::CmdError;
use config::Coupling;

#[derive(Parser)]
#[command(
    name = "kirchhoff",
    version,
    about = "Positive-solution structure of the Kirchhoff equation \
             -(a|grad u|^2 + b) Lap u + u = f(x)|u|^(p-2)u on R^N"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Space dimension N >= 1
    #[arg(long = "N")]
    n: Option<u32>,

    /// Exponent p in (2, min(4, 2N/(N-2)))
    #[arg(long)]
    p: Option<f64>,

    /// Kirchhoff coupling a >= 0, or "auto" for the per-command canonical
    /// value (probe: the theorem's window; pohozaev/nonauto: Lambda/2)
    #[arg(long)]
    a: Option<Coupling>,

    /// Diffusion offset b > 0
    #[arg(long)]
    b: Option<f64>,

    /// Limit value of the coefficient f at infinity
    #[arg(long = "f-inf")]
    f_inf: Option<f64>,

    /// Infimum of f (nonauto: must equal f-inf)
    #[arg(long = "f-min")]
    f_min: Option<f64>,

    /// Supremum of f (nonauto/pohozaev: bump height of the gaussian family)
    #[arg(long = "f-max")]
    f_max: Option<f64>,

    /// Ground-state bisection tolerance, or the assertion tolerance for
    /// pohozaev/nonauto residual checks
    #[arg(long)]
    tol: Option<f64>,

    /// Output directory (default: config `out`, then $KIRCHHOFF_OUT, then .)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Artifact selection: json, csv or both
    #[arg(long)]
    format: Option<config::OutputFormat>,

    /// Coupling grid, log:lo:hi:n or lin:lo:hi:n
    #[arg(long = "a-grid")]
    a_grid: Option<String>,

    /// Seed for randomized property sweeps
    #[arg(long)]
    seed: Option<u64>,

    /// Theorem tag for probe: t0-1, t0-2, t1 or t5
    #[arg(long)]
    theorem: Option<String>,

    /// key=value configuration file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FiberingArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Analyze the Nehari-normalized limit ground state instead of running
    /// the random-data property sweep
    #[arg(long = "from-ground-state")]
    from_ground_state: bool,

    /// Number of random draws in the property sweep
    #[arg(long)]
    count: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the limit problem's radial ground state by shooting
    GroundState(CommonArgs),
    /// Roots of the autonomous branch equation, or a diagram over --a-grid
    Branch(CommonArgs),
    /// Every named threshold of the (a, p, N) landscape with provenance
    Thresholds(CommonArgs),
    /// Fibering-map critical points, or a seeded random property sweep
    Fibering(FiberingArgs),
    /// Certify one theorem's statement at the given parameters
    Probe(CommonArgs),
    /// Pohozaev identity audit of every computed solution
    Pohozaev(CommonArgs),
    /// One-dimensional nonautonomous grid minimizer
    Nonauto(CommonArgs),
    /// Regenerate both parameter-landscape summary tables with witnesses
    Table(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GroundState(args) => commands::cmd_ground_state(args),
        Command::Branch(args) => commands::cmd_branch(args),
        Command::Thresholds(args) => commands::cmd_thresholds(args),
        Command::Fibering(args) => commands::cmd_fibering(args),
        Command::Probe(args) => commands::cmd_probe(args),
        Command::Pohozaev(args) => commands::cmd_pohozaev(args),
        Command::Nonauto(args) => commands::cmd_nonauto(args),
        Command::Table(args) => commands::cmd_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
        Err(CmdError::Falsified(msg)) => {
            eprintln!("falsified: {msg} (see falsification.json)");
            ExitCode::from(4)
        }
    }
}
