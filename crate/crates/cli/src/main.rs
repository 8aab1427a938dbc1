use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dit_cli::config::{ApertureSpec, LoadedConfig};
use dit_cli::{run, scenarios, CliError};
use dit_core::propagator::{evaluate, k_general_route_a, k_general_route_b};
use dit_core::verify::run_suite;
use dit_core::{ApertureFunction, PhysicalConstants, PropagatorQuery, QuadratureSettings, Route};

/// Worker-thread cap for the computation pool.
const THREADS_VAR: &str = "DIT_THREADS";

#[derive(Parser)]
#[command(name = "dit", version, about = "Propagation through a time-dependent absorbing shutter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML config file or a bundled scenario name.
    Run {
        scenario: String,
        /// Output directory (default: `output.directory`, else dit-out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the residual checks on seeded random samples.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace every tolerance by this value.
        #[arg(long)]
        tol: Option<f64>,
        /// Print the reports as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate K(x, x'; t) at one point.
    Kpoint {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        xp: f64,
        #[arg(long)]
        t: f64,
        /// Aperture as TOML, e.g. '{ type = "staircase", breakpoints = [0.5], levels = [0, 1] }'.
        #[arg(long, conflicts_with = "aperture_file", required_unless_present = "aperture_file")]
        aperture: Option<String>,
        #[arg(long)]
        aperture_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, value_enum, default_value_t = RouteChoice::Auto)]
        route: RouteChoice,
    },
    /// List bundled scenarios, or print one.
    Scenarios { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteChoice {
    /// Closed form for staircases, erf quadrature otherwise.
    Auto,
    /// Huygens–Fresnel integral along steepest-descent contours.
    Contour,
    /// Integrated-by-parts erf form (sampled apertures).
    Erf,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn load(scenario: &str) -> Result<LoadedConfig, CliError> {
    let path = Path::new(scenario);
    if path.exists() {
        return LoadedConfig::from_file(path);
    }
    match scenarios::bundled(scenario) {
        Some(text) => LoadedConfig::from_text(text, &format!("bundled:{scenario}")),
        None => Err(CliError::Usage(format!(
            "{scenario:?} is neither a config file nor a bundled scenario ({})",
            scenarios::names().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn cmd_run(scenario: &str, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let loaded = load(scenario)?;
    let outcome = run::run(&loaded, out)?;
    let m = &outcome.metadata;
    let o = &m.observables;
    println!("scenario     {}", m.scenario);
    println!("route        {}", m.route);
    println!("transmitted  {:.12e}", o.transmitted);
    println!("reflected    {:.12e}", o.reflected);
    println!("absorbed     {:.12e}", o.absorbed);
    if let Some(f) = &m.free_oracle {
        println!("free-oracle  max {:.3e}  L2 {:.3e}", f.max_abs_error, f.l2_error);
    }
    if let Some(h) = &m.husimi {
        println!("husimi-max   {:.6e} at (q, p) = ({}, {})", h.global_max.value, h.global_max.q, h.global_max.p);
    }
    for p in &m.outputs {
        println!("wrote        {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(seed: u64, tol: Option<f64>, json: bool) -> Result<ExitCode, CliError> {
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    let reports = run_suite(seed, tol).map_err(|e| CliError::numerical("verify", e))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialise"));
    } else {
        for r in &reports {
            let status = if r.passed { "PASS" } else { "FAIL" };
            print!("{status}  {:<32} residual {:.3e}  tol {:.1e}  samples {}", r.name, r.max_residual, r.tolerance, r.samples);
            match &r.error {
                Some(e) => println!("  error: {e}"),
                None => println!(),
            }
        }
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} of {} checks failed: {}", failed.len(), reports.len(), failed.join(", "));
        Ok(ExitCode::from(1))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_kpoint(
    x: f64,
    xp: f64,
    t: f64,
    aperture: Option<&str>,
    aperture_file: Option<&Path>,
    mass: f64,
    hbar: f64,
    route: RouteChoice,
) -> Result<ExitCode, CliError> {
    if x == 0.0 || xp == 0.0 {
        return Err(CliError::Usage(
            "x and x' must be nonzero: the shutter sits at x = 0, where the propagator jumps and has no single value".into(),
        ));
    }
    let spec = match (aperture, aperture_file) {
        (Some(text), _) => ApertureSpec::from_toml(text)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
            ApertureSpec::from_toml(&text)?
        }
        (None, None) => return Err(CliError::Usage("give --aperture or --aperture-file".into())),
    };
    let pc = PhysicalConstants::new(mass, hbar).map_err(|e| CliError::Usage(e.to_string()))?;
    let q = PropagatorQuery::new(x, xp, t, pc).map_err(|e| CliError::Usage(e.to_string()))?;
    let qs = QuadratureSettings::default();
    let a = spec.aperture();
    let (k, used) = match (route, a) {
        (RouteChoice::Auto, _) => evaluate(&q, a, &qs),
        (RouteChoice::Contour, _) => k_general_route_a(&q, a, &qs).map(|k| (k, Route::ContourQuadrature)),
        (RouteChoice::Erf, ApertureFunction::Sampled(s)) => k_general_route_b(&q, s, &qs).map(|k| (k, Route::ErfQuadrature)),
        (RouteChoice::Erf, ApertureFunction::Staircase(_)) => {
            return Err(CliError::Usage("--route erf needs a sampled aperture; staircases use the closed form".into()))
        }
    }
    .map_err(|e| CliError::numerical("kpoint", e))?;
    println!("re     {:.14e}", k.re);
    println!("im     {:.14e}", k.im);
    println!("route  {used}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_scenarios(name: Option<&str>) -> Result<ExitCode, CliError> {
    match name {
        None => scenarios::names().for_each(|n| println!("{n}")),
        Some(n) => match scenarios::bundled(n) {
            Some(text) => print!("{text}"),
            None => return Err(CliError::Usage(format!("no bundled scenario {n:?}"))),
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out.as_deref()),
        Command::Verify { seed, tol, json } => cmd_verify(*seed, *tol, *json),
        Command::Kpoint { x, xp, t, aperture, aperture_file, mass, hbar, route } => {
            cmd_kpoint(*x, *xp, *t, aperture.as_deref(), aperture_file.as_deref(), *mass, *hbar, *route)
        }
        Command::Scenarios { name } => cmd_scenarios(name.as_deref()),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
