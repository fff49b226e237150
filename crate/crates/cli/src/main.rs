use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fockgen::specfun::KernelKind;
use fockgen_cli::config::parse_override;
use fockgen_cli::tables::{self, Initial, KernelRequest, StateSpec};
use fockgen_cli::{cmd_verify, CliError, RunConfig, EXIT_PASS};

#[derive(Parser)]
#[command(name = "fockgen", version, about = "Lattice Poincare generators of a free scalar field: checks and tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`). Tables go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override `check=tol`; repeatable.
    #[arg(long = "override", global = true, value_name = "CHECK=TOL")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and write report.json.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate an analytic kernel against its lattice counterpart.
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "omega")]
        kind: KindArg,
        /// Axis for the velocity kernel.
        #[arg(long, default_value_t = 0)]
        component: usize,
        /// Time shift for the time-translation kernel.
        #[arg(long, default_value_t = 0.5)]
        y0: f64,
        /// Exponent for the general power kernel `omega^(2 lambda)`.
        #[arg(long, default_value_t = -0.25, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        r_min: f64,
        #[arg(long, default_value_t = 4.0)]
        r_max: f64,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        /// Compare the raw lattice sum (no zone-edge filter).
        #[arg(long)]
        raw: bool,
    },
    /// Position amplitudes of an evolving one-particle state.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        initial: InitialArgs,
        /// Comma-separated times.
        #[arg(long, default_value = "0,0.5,1", allow_hyphen_values = true)]
        times: String,
    },
    /// k-particle position amplitude of a state.
    Amplitude {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "vacuum")]
        state: StateArg,
        /// Sites of a product state, `i,j,k;i,j,k`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        sites: String,
        #[command(flatten)]
        initial: InitialArgs,
        /// Query positions, `i,j,k;i,j,k`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        positions: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Omega,
    Velocity,
    Time,
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    Vacuum,
    Product,
    Gaussian,
}

#[derive(Args, Clone)]
struct InitialArgs {
    /// Localized initial site `i,j,k` (used unless --sigma is given).
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    delta: String,
    /// Gaussian momentum width; selects a Gaussian initial state.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    p0: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    x0: String,
}

impl InitialArgs {
    fn initial(&self, n: usize) -> Result<Initial, CliError> {
        Ok(match self.sigma {
            Some(sigma) => Initial::Gaussian { sigma, p0: tables::parse_list(&self.p0)?, x0: tables::parse_list(&self.x0)? },
            None => Initial::Delta(
                tables::parse_sites(&self.delta, n)?
                    .pop()
                    .ok_or_else(|| CliError::Config("empty --delta".into()))?,
            ),
        })
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    for o in &common.overrides {
        let (name, tol) = parse_override(o)?;
        config.tolerance_overrides.insert(name, tol);
    }
    Ok(config)
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify { common } => {
            let config = load_config(&common)?;
            let outcome = cmd_verify(&config, &config.output_dir)?;
            for c in &outcome.report.checks {
                let err = c.error.map_or("-".to_string(), |e| format!("{e:.3e}"));
                let tol = c.tolerance.map_or("-".to_string(), |t| format!("{t:.3e}"));
                let status = serde_json::to_value(c.status).expect("status serializes");
                eprintln!("{:<28} {:<22} error {err:>10}  tol {tol:>10}", c.check, status.as_str().unwrap_or(""));
            }
            let s = outcome.report.summary;
            eprintln!(
                "{} passed, {} failed, {} uncalibrated, {} skipped; report in {}",
                s.passed,
                s.failed,
                s.uncalibrated,
                s.skipped,
                config.output_dir.join("report.json").display()
            );
            Ok(outcome.exit_code())
        }
        Command::Kernel { common, kind, component, y0, lambda, r_min, r_max, steps, raw } => {
            let config = load_config(&common)?;
            let kind = match kind {
                KindArg::Omega => KernelKind::Omega,
                KindArg::Velocity => KernelKind::VelocityComponent { j: component },
                KindArg::Time => KernelKind::TimeTranslation { y0 },
                KindArg::Power => KernelKind::GeneralPower { lambda },
            };
            let req = KernelRequest { kind, r_min, r_max, steps, filtered: !raw };
            emit(common.out.as_deref(), "kernel.csv", &tables::cmd_kernel(&config, &req)?)?;
            Ok(EXIT_PASS)
        }
        Command::Evolve { common, initial, times } => {
            let config = load_config(&common)?;
            let initial = initial.initial(config.grid.n)?;
            let text = tables::cmd_evolve(&config, &initial, &tables::parse_list(&times)?)?;
            emit(common.out.as_deref(), "evolve.csv", &text)?;
            Ok(EXIT_PASS)
        }
        Command::Amplitude { common, state, sites, initial, positions, t } => {
            let config = load_config(&common)?;
            let n = config.grid.n;
            let spec = match state {
                StateArg::Vacuum => StateSpec::Vacuum,
                StateArg::Product => StateSpec::Product(tables::parse_sites(&sites, n)?),
                StateArg::Gaussian => StateSpec::OneParticle(Initial::Gaussian {
                    sigma: initial.sigma.unwrap_or(1.0),
                    p0: tables::parse_list(&initial.p0)?,
                    x0: tables::parse_list(&initial.x0)?,
                }),
            };
            let text = tables::cmd_amplitude(&config, &spec, &tables::parse_sites(&positions, n)?, t)?;
            emit(common.out.as_deref(), "amplitude.json", &text)?;
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fockgen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
