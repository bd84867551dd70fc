use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use fieldbridge::bench::{
    self, BcDemoSpec, HeatSpec, ProfileHeatSpec, ReportFormat, StressBenchSpec, DEFAULT_TIMEOUT,
};
use fieldbridge::{Error, LawKind, TransferStrategy};
use fieldbridge_core::heat::{DEFAULT_MAX_ITERS, DEFAULT_TOL};
use fieldbridge_core::{make_grid, BoundaryConditions, HeatConfig, Patch, PatchBc, StructuredGrid};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INVALID_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fieldbridge",
    version,
    about = "Scripted field solvers and transfer-strategy benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time scripted stress laws against the native law.
    StressBench(StressArgs),
    /// Solve the steady heat problem natively and through the guest.
    Heat(HeatArgs),
    /// Sample the scripted boundary profile and optionally drive a heat run.
    BcDemo(BcArgs),
}

#[derive(Args)]
struct Common {
    /// Guest script replacing the built-in one.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Directory for CSV artifacts; nothing is written when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

#[derive(Args)]
struct StressArgs {
    #[command(flatten)]
    common: Common,
    /// Transfer strategies to time (repeatable); all when absent.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<TransferStrategy>,
    /// Element counts (repeatable).
    #[arg(long, value_delimiter = ',')]
    size: Vec<usize>,
    /// Scripted laws: analytic, nn (repeatable); both when absent.
    #[arg(long, value_delimiter = ',')]
    law: Vec<LawKind>,
    #[arg(long, default_value_t = bench::MIN_REPEATS)]
    repeats: usize,
    #[arg(long, default_value_t = bench::MIN_WARMUP)]
    warmup: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight bundle JSON for the nn law.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Per-row budget in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs_f64())]
    timeout: f64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 20)]
    nx: usize,
    #[arg(long, default_value_t = 20)]
    ny: usize,
    #[arg(long, default_value_t = 0.1)]
    lx: f64,
    #[arg(long, default_value_t = 0.1)]
    ly: f64,
    /// Pseudo-time step, s.
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
    /// Thermal diffusivity, m^2/s.
    #[arg(long, default_value_t = 4e-5)]
    diffusivity: f64,
    /// Boundary temperature `<patch>=<K>` (repeatable). Defaults: left, bottom
    /// and right 273 K, top 373 K.
    #[arg(long, value_parser = parse_bc)]
    bc: Vec<(Patch, f64)>,
}

impl GridArgs {
    fn grid(&self) -> Result<StructuredGrid, Error> {
        Ok(make_grid(self.nx, self.ny, self.lx, self.ly)?)
    }

    fn bc(&self) -> BoundaryConditions {
        let mut bc = BoundaryConditions::uniform(273.0, 273.0, 273.0, 373.0);
        for (patch, value) in &self.bc {
            *bc.get_mut(*patch) = PatchBc::Uniform(*value);
        }
        bc
    }
}

#[derive(Args)]
struct HeatArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "whole-field")]
    strategy: TransferStrategy,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

#[derive(Args)]
struct BcArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "top", value_parser = parse_patch)]
    patch: Patch,
    /// Sample times, s.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 1.5, 2.5])]
    times: Vec<f64>,
    /// Sweeps of the profile-driven heat run; skipped when 0.
    #[arg(long, default_value_t = 0)]
    heat_sweeps: usize,
    /// Temperature swing per unit profile velocity, K.
    #[arg(long, default_value_t = 50.0)]
    amplitude: f64,
}

fn parse_patch(s: &str) -> Result<Patch, String> {
    Patch::from_name(s).ok_or_else(|| format!("unknown patch {s:?} (left, right, bottom, top)"))
}

fn parse_bc(s: &str) -> Result<(Patch, f64), String> {
    let (patch, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <patch>=<K>, got {s:?}"))?;
    let value: f64 = value
        .parse()
        .map_err(|_| format!("boundary value {value:?} is not a number"))?;
    Ok((parse_patch(patch)?, value))
}

fn stress_bench(args: StressArgs) -> Result<u8, Error> {
    if !(args.timeout > 0.0 && args.timeout.is_finite()) {
        return Err(Error::Config(format!(
            "timeout must be positive, got {}",
            args.timeout
        )));
    }
    let defaults = StressBenchSpec::default();
    let spec = StressBenchSpec {
        laws: if args.law.is_empty() {
            defaults.laws.clone()
        } else {
            args.law
        },
        strategies: if args.strategy.is_empty() {
            defaults.strategies.clone()
        } else {
            args.strategy
        },
        sizes: if args.size.is_empty() {
            defaults.sizes.clone()
        } else {
            args.size
        },
        repeats: args.repeats,
        warmup: args.warmup,
        seed: args.seed,
        timeout: Duration::from_secs_f64(args.timeout),
        script: args.common.script,
        weights: args.weights,
        ..defaults
    };
    let report = bench::cmd_stress_bench(&spec)?;
    if let Some(dir) = &args.common.out {
        let path = bench::write_bench_artifacts(&report, args.common.format, dir)?;
        eprintln!("wrote {}", path.display());
    }
    print!("{}", bench::render_markdown(&report));
    for s in &report.startup {
        println!("startup {} {}: {:.6} s", s.law, s.phase, s.time_s);
    }
    Ok(0)
}

fn heat(args: HeatArgs) -> Result<u8, Error> {
    let mut config = HeatConfig::new(
        args.grid.grid()?,
        args.grid.diffusivity,
        args.grid.dt,
        args.grid.bc(),
    );
    config.tol = args.tol;
    config.max_iters = args.max_iters;
    let spec = HeatSpec {
        config,
        strategy: args.strategy,
        script: args.common.script,
    };
    let outcome = bench::cmd_heat(&spec)?;
    if let Some(dir) = &args.common.out {
        bench::write_heat_artifacts(&outcome, dir)?;
    }
    for (name, r) in [("native", &outcome.native), ("scripted", &outcome.scripted)] {
        println!(
            "{name}: converged={} iterations={} final_residual={:e} centre_T={}",
            r.converged,
            r.iterations,
            r.final_residual().unwrap_or(f64::NAN),
            r.centre_value(&outcome.grid)
        );
    }
    println!(
        "native vs scripted: l2_mean={:e} linf={:e}",
        outcome.norms.l2_mean, outcome.norms.linf
    );
    Ok(if outcome.converged() {
        0
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn bc_demo(args: BcArgs) -> Result<u8, Error> {
    let heat = (args.heat_sweeps > 0).then(|| ProfileHeatSpec {
        diffusivity: args.grid.diffusivity,
        dt: args.grid.dt,
        bc: args.grid.bc(),
        amplitude: args.amplitude,
        sweeps: args.heat_sweeps,
    });
    let spec = BcDemoSpec {
        grid: args.grid.grid()?,
        patch: args.patch,
        times: args.times,
        script: args.common.script,
        heat,
    };
    let outcome = bench::cmd_bc_demo(&spec)?;
    if let Some(dir) = &args.common.out {
        bench::write_bc_artifacts(&outcome, dir)?;
    }
    println!(
        "samples={} max|guest - host|={:e}",
        outcome.samples.len(),
        outcome.max_abs_diff
    );
    if let Some(r) = &outcome.heat {
        println!(
            "profile heat run: sweeps={} final_residual={:e}",
            r.iterations,
            r.final_residual().unwrap_or(f64::NAN)
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_INVALID_CONFIG
            } else {
                0
            });
        }
    };
    let result = match cli.command {
        Command::StressBench(a) => stress_bench(a),
        Command::Heat(a) => heat(a),
        Command::BcDemo(a) => bc_demo(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
