mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use strom::config::FlavorChoice;
use strom::{Flavor, ProblemKind};

#[derive(Debug, Parser)]
#[command(name = "strom", version, about = "Space-time reduced order models for parameterized linear PDEs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel phases (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Assemble reduced operators through the dense space-time basis.
    #[arg(long, global = true)]
    pub naive: bool,
    /// Largest `N_s·N_t` allowed on dense paths.
    #[arg(long, global = true)]
    pub oracle_cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full-order runs at the training parameters, then the space-time POD.
    Train(TrainArgs),
    /// Reduced solve at one parameter, compared against a fresh full-order run.
    Predict(PredictArgs),
    /// Reduced models over the test-parameter grid and reduced dimensions.
    Sweep(SweepArgs),
    /// Oracle suite on small problems.
    Verify(VerifyArgs),
    /// Stability constant against the number of time steps.
    BoundStudy(BoundArgs),
    /// Block against naive assembly time as the mesh grows.
    ComplexityStudy(ComplexityArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Spatial modes kept (default: largest config value).
    #[arg(long)]
    pub n_s: Option<usize>,
    /// Temporal modes kept per spatial mode (default: largest config value).
    #[arg(long)]
    pub n_t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Basis bundle directory (default: `<out>/basis`).
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Parameter as `mu1,mu2` (default: the config's `target_mu`).
    #[arg(long, value_parser = parse_mu, allow_hyphen_values = true)]
    pub mu: Option<[f64; 2]>,
    #[arg(long)]
    pub n_s: Option<usize>,
    #[arg(long)]
    pub n_t: Option<usize>,
    /// `galerkin`, `pg` or `both` (default: config).
    #[arg(long, value_parser = parse_flavors)]
    pub flavor: Option<FlavorChoice>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Comma list replacing the config's `n_s` values.
    #[arg(long, value_delimiter = ',')]
    pub n_s: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub n_t: Option<Vec<usize>>,
    /// Also report total speed-up with training amortized over the sweep.
    #[arg(long)]
    pub total: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Problems to check (default: all).
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<ProblemKind>>,
    /// Mesh intervals per axis; an empty string gives an empty grid.
    #[arg(long, value_parser = parse_list)]
    pub meshes: Option<List>,
    #[arg(long, value_parser = parse_list)]
    pub time_steps: Option<List>,
    #[arg(long, value_parser = parse_list)]
    pub n_s: Option<List>,
    #[arg(long, value_parser = parse_list)]
    pub n_t: Option<List>,
    /// Negate the temporal entries at `k,j` before block assembly.
    #[arg(long, value_parser = parse_pair)]
    pub inject_flip: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Problem structure (default: config problem, else diffusion2d).
    #[arg(long)]
    pub problem: Option<ProblemKind>,
    /// Mesh intervals per axis (default: config mesh, else 70).
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,30,40")]
    pub nt: Vec<usize>,
    /// Parameter (default: the problem's target parameter).
    #[arg(long, value_parser = parse_mu, allow_hyphen_values = true)]
    pub mu: Option<[f64; 2]>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[arg(long, default_value = "convdiff2d")]
    pub problem: ProblemKind,
    #[arg(long, value_delimiter = ',', default_value = "21,31,41,51")]
    pub meshes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub nt: usize,
    #[arg(long, default_value_t = 4)]
    pub n_s: usize,
    #[arg(long, default_value_t = 2)]
    pub n_t: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
}

fn parse_mu(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("bad mu1 {a:?}: {e}"))?,
            b.parse().map_err(|e| format!("bad mu2 {b:?}: {e}"))?,
        ]),
        _ => Err(format!("expected mu1,mu2, got {s:?}")),
    }
}

/// Comma-separated integers, possibly none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List(pub Vec<usize>);

fn parse_list(s: &str) -> Result<List, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|e| format!("bad integer {p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected k,j, got {s:?}"))?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_flavors(s: &str) -> Result<FlavorChoice, String> {
    if s.eq_ignore_ascii_case("both") {
        return Ok(FlavorChoice::Both);
    }
    match s.parse::<Flavor>().map_err(|e| e.to_string())? {
        Flavor::Galerkin => Ok(FlavorChoice::Galerkin),
        Flavor::PetrovGalerkin => Ok(FlavorChoice::Pg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(&cli.global, &a),
        Command::Predict(a) => commands::predict(&cli.global, &a),
        Command::Sweep(a) => commands::sweep(&cli.global, &a),
        Command::Verify(a) => commands::verify(&cli.global, &a),
        Command::BoundStudy(a) => commands::bound_study(&cli.global, &a),
        Command::ComplexityStudy(a) => commands::complexity_study(&cli.global, &a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
