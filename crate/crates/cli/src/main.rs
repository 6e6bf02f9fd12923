mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use error::CliError;
use output::Format;

/// Homoclinic tangles of the periodically forced Duffing-type oscillator:
/// integrals, return-map constants, regime classification and map dynamics.
#[derive(Parser, Debug)]
#[command(name = "tanglelab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Io {
    /// `key = value` file with defaults for this command's flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Parameter point. A preset supplies every value; explicit flags override it.
#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, visible_alias = "epsilon")]
    pub eps: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// ρ as a multiple of the map constant c.
    #[arg(long)]
    pub rho_c: Option<f64>,
    /// Replace the phase constant a of the reduced map.
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParamArg {
    A,
    Mu,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Closed forms against quadrature: K(s), A, C(ω) and S(ω).
    VerifyIntegrals {
        /// Pass threshold for K and A; quadrature runs 100x tighter.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        io: Io,
    },
    /// γ_λ by shooting.
    Gamma {
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1e-12)]
        integrator_tol: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Samples of the homoclinic loop (closed form at λ = 0).
    Orbit {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, visible_alias = "epsilon", default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        ds: f64,
        /// Output covers |s| ≤ span.
        #[arg(long, default_value_t = 10.0)]
        span: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Integrals and reduced-map constants at one parameter point.
    Constants {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Regime of one point, or of an ω × ρ grid with --grid.
    Classify {
        #[command(flatten)]
        point: PointArgs,
        /// Points per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        omega_from: Option<f64>,
        #[arg(long)]
        omega_to: Option<f64>,
        #[arg(long)]
        rho_from: Option<f64>,
        #[arg(long)]
        rho_to: Option<f64>,
        #[command(flatten)]
        io: Io,
    },
    /// Orbit of the reduced map.
    Iterate {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 100)]
        n_iter: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Bifurcation scan in a or μ.
    Scan {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = ScanParamArg::A)]
        param: ScanParamArg,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        to: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        n_iter: usize,
        #[arg(long, default_value_t = 1_000)]
        n_transient: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Lyapunov exponents of one orbit.
    Lyapunov {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 0.3)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 100_000)]
        n_iter: usize,
        #[arg(long, default_value_t = 1_000)]
        n_transient: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Attracting invariant curve by graph transform.
    Curve {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 2048)]
        grid_n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Full-shift certification of the reduced map.
    ShiftCheck {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 20)]
        w_max: usize,
        #[arg(long, default_value_t = 32)]
        samples_per_branch: usize,
        #[arg(long, default_value_t = 5)]
        x_slices: usize,
        /// Sampling refinement factor.
        #[arg(long, default_value_t = 1)]
        refine: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Periodic sinks found from a grid of seeds.
    Sinks {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 64)]
        seeds: usize,
        #[arg(long, default_value_t = 2_000)]
        n_iter: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Integrated return through the sections against the reduced map.
    SectionCompare {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: Io,
    },
}

impl Cmd {
    fn io(&self) -> &Io {
        match self {
            Cmd::VerifyIntegrals { io, .. }
            | Cmd::Gamma { io, .. }
            | Cmd::Orbit { io, .. }
            | Cmd::Constants { io, .. }
            | Cmd::Classify { io, .. }
            | Cmd::Iterate { io, .. }
            | Cmd::Scan { io, .. }
            | Cmd::Lyapunov { io, .. }
            | Cmd::Curve { io, .. }
            | Cmd::ShiftCheck { io, .. }
            | Cmd::Sinks { io, .. }
            | Cmd::SectionCompare { io, .. } => io,
        }
    }
}

fn command() -> clap::Command {
    // a repeated flag keeps its last value, which is how flags override the config file
    Cli::command().mut_subcommands(|s| s.args_override_self(true))
}

fn clap_error(e: clap::Error) -> Result<ArgMatches, CliError> {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            std::process::exit(0);
        }
        ErrorKind::InvalidSubcommand
        | ErrorKind::UnknownArgument
        | ErrorKind::MissingSubcommand
        | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Err(CliError::Usage(e.render().to_string())),
        _ => Err(CliError::BadValue(e.render().to_string())),
    }
}

fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let first = command().try_get_matches_from(&argv).or_else(clap_error)?;
    let cli = Cli::from_arg_matches(&first).map_err(|e| CliError::BadValue(e.to_string()))?;
    let Some(path) = cli.cmd.io().config.clone() else {
        return Ok(cli);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| CliError::BadValue(format!("config {}: {e}", path.display())))?;
    let name = first.subcommand_name().expect("subcommand is required");
    let root = command();
    let sub = root.find_subcommand(name).expect("parsed subcommand exists");
    let extra = config::to_args(&config::parse(&text)?, sub)?;
    let at = argv.iter().position(|a| a.to_str() == Some(name)).expect("subcommand in argv") + 1;
    let mut merged = argv[..at].to_vec();
    merged.extend(extra.into_iter().map(OsString::from));
    merged.extend_from_slice(&argv[at..]);
    let m = command().try_get_matches_from(merged).or_else(clap_error)?;
    Cli::from_arg_matches(&m).map_err(|e| CliError::BadValue(e.to_string()))
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("TANGLELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::BadValue(format!("TANGLELAB_THREADS = {v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Domain(e.to_string()))
}

fn run() -> Result<i32, CliError> {
    let cli = parse(std::env::args_os().collect())?;
    init_threads()?;
    let io = cli.cmd.io().clone();
    let report = commands::run(cli.cmd)?;
    let format = io.format.unwrap_or_else(|| report.default_format());
    output::emit(&report.render(format), io.out.as_deref())?;
    Ok(if report.verified { 0 } else { 2 })
}

fn main() {
    let code = run().unwrap_or_else(|e| {
        eprintln!("tanglelab: {}", e.to_string().trim_end());
        e.exit_code()
    });
    std::process::exit(code);
}
