//! `rsimex` command line: run cases, convergence studies, Riemann comparisons
//! against the explicit reference solver, and exact vortex profiles.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsimex::cases::VortexKind;

use rsimex_cli::commands;
use rsimex_cli::config::{ConfigFile, Potentials, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "rsimex", version, about = "Two-fluid single-temperature solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write field snapshots and per-step reports.
    Run(RunArgs),
    /// Mesh-refinement study on the exact vortex.
    Convergence(ConvergenceArgs),
    /// Run a Riemann problem with both solvers and write paired CSVs.
    RiemannCompare(RiemannArgs),
    /// Write the radial profile of the exact vortex.
    VortexProfile(ProfileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Compressible,
    WeaklyCompressible,
}

impl From<Kind> for VortexKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Compressible => VortexKind::Compressible,
            Kind::WeaklyCompressible => VortexKind::WeaklyCompressible,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialsArg {
    NewState,
    Linearized,
}

/// Inline settings. Each one given overrides the config file.
#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    order: Option<u8>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Output directory (the environment variable takes precedence).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    potentials: Option<PotentialsArg>,
    #[arg(long)]
    phase_speed_bound: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<ConfigFile> {
        let mut c = match (&self.config, &self.case) {
            (Some(p), _) => ConfigFile::load(p)?,
            (None, Some(name)) => ConfigFile::new(name),
            (None, None) => anyhow::bail!("give --config or --case"),
        };
        if let Some(name) = &self.case {
            c.case.name = name.clone();
        }
        if let Some(n) = self.n {
            c.grid.n = n;
        }
        if let Some(o) = self.order {
            c.time.order = o;
        }
        if let Some(nu) = self.nu {
            c.time.cfl_nu = nu;
        }
        if self.t_final.is_some() {
            c.time.t_final = self.t_final;
        }
        if self.max_steps.is_some() {
            c.time.max_steps = self.max_steps;
        }
        if let Some(d) = &self.out {
            c.output.dir = d.clone();
        }
        if let Some(p) = self.potentials {
            c.solver.potentials = match p {
                PotentialsArg::NewState => Potentials::NewState,
                PotentialsArg::Linearized => Potentials::Linearized,
            };
        }
        c.solver.phase_speed_bound |= self.phase_speed_bound;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, value_enum, default_value = "compressible")]
    kind: Kind,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    resolutions: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    order: u8,
    #[arg(long, default_value_t = 0.25)]
    nu: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RiemannArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Reference resolution; a multiple of `n` also prints L1 distances.
    #[arg(long, default_value_t = 10_000)]
    ref_n: usize,
    #[arg(long, default_value_t = 0.2)]
    ref_nu: f64,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_enum, default_value = "compressible")]
    kind: Kind,
    #[arg(long, default_value = "vortex_profile.csv")]
    out: PathBuf,
}

fn env_dir(default: PathBuf) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()).map(PathBuf::from).unwrap_or(default)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(a) => {
            let c = a.resolve()?;
            if a.print_config {
                print!("{}", c.to_toml()?);
                return Ok(());
            }
            commands::run(&c)?;
        }
        Command::Convergence(a) => {
            commands::convergence(a.kind.into(), &a.resolutions, a.order, a.nu, &env_dir(a.out))?;
        }
        Command::RiemannCompare(a) => {
            let c = a.run.resolve()?;
            commands::riemann_compare(&c, a.ref_n, a.ref_nu)?;
        }
        Command::VortexProfile(a) => {
            let path = match std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
                Some(d) => PathBuf::from(d).join(a.out.file_name().unwrap_or(a.out.as_os_str())),
                None => a.out,
            };
            commands::vortex_profile(a.kind.into(), &path)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
