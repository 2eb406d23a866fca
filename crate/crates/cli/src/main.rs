use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use entropy_wb_cli::{parse_n_list, run_command, CliError, Command, Method, Mode, RunConfig};

/// Couplings with fixed marginals: entropy extremes and limits.
#[derive(Parser)]
#[command(name = "entropy-wb", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build one coupling and report its entropies.
    Couple(Args),
    /// Independence and Fréchet-bound tables against the entropy bounds.
    Bounds(Args),
    /// Greedy against the exact minimum; exits 2 if greedy is beaten.
    Compare(Args),
    /// Look for a coupling whose entropy equals the larger marginal entropy.
    Partition(Args),
    /// Shifted entropies of discretized densities as the grid refines.
    Converge(Args),
    /// Exact minimum by vertex enumeration.
    Oracle(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    Independence,
    Cograduation,
    Contrograduation,
    Oracle,
    Partition,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Joint,
    Mincoupling,
}

#[derive(clap::Args)]
struct Args {
    #[arg(long, value_name = "PATH")]
    marginal_x: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    marginal_y: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "greedy")]
    method: MethodArg,
    /// Table or series CSV; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report JSON.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Resolutions, e.g. `16,32,64` or the doubling range `2..256`.
    #[arg(long = "n", value_name = "LIST", value_parser = parse_resolutions)]
    n_list: Option<Resolutions>,
    /// Density family for `converge`: uniform, normal or exponential.
    #[arg(long)]
    family: Option<String>,
    /// Family or sweep parameters as KEY=VALUE.
    #[arg(long, value_name = "K=V", num_args = 1.., value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long, value_enum, default_value = "mincoupling")]
    mode: ModeArg,
    /// Seed for `compare` sweeps.
    #[arg(long)]
    seed: Option<u64>,
    /// Marginal validation tolerance, or window tolerance for `converge`.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone)]
struct Resolutions(Vec<usize>);

fn parse_resolutions(s: &str) -> Result<Resolutions, String> {
    parse_n_list(s).map(Resolutions)
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v = v.parse::<f64>().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn config(command: Command, a: Args) -> RunConfig {
    RunConfig {
        command,
        marginal_x: a.marginal_x,
        marginal_y: a.marginal_y,
        method: match a.method {
            MethodArg::Greedy => Method::Greedy,
            MethodArg::Independence => Method::Independence,
            MethodArg::Cograduation => Method::Cograduation,
            MethodArg::Contrograduation => Method::Contrograduation,
            MethodArg::Oracle => Method::Oracle,
            MethodArg::Partition => Method::Partition,
        },
        out: a.out,
        report: a.report,
        n_list: a.n_list.map(|r| r.0),
        family: a.family,
        params: a.params.into_iter().collect::<BTreeMap<_, _>>(),
        mode: match a.mode {
            ModeArg::Joint => Mode::Joint,
            ModeArg::Mincoupling => Mode::MinCoupling,
        },
        seed: a.seed,
        tol: a.tol,
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("ENTROPY_WB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("ENTROPY_WB_THREADS={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Cmd::Couple(a) => config(Command::Couple, a),
        Cmd::Bounds(a) => config(Command::Bounds, a),
        Cmd::Compare(a) => config(Command::Compare, a),
        Cmd::Partition(a) => config(Command::Partition, a),
        Cmd::Converge(a) => config(Command::Converge, a),
        Cmd::Oracle(a) => config(Command::Oracle, a),
    };
    match init_threads().and_then(|()| run_command(&cfg)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("entropy-wb: error: {e}");
            ExitCode::from(1)
        }
    }
}
