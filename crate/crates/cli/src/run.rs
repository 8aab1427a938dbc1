//! Executing a scenario and writing its tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dit_core::evolution::{
    coherent_state, evolve, free_coherent_amplitude, husimi, observables, Observables, PhaseSpaceGrid, SpaceGrid,
    Wavefunction,
};
use dit_core::{ApertureFunction, Complex64, Route};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{local_maxima, Feature};
use crate::config::{InitialState, LoadedConfig, ScenarioConfig};
use crate::error::CliError;

/// Husimi overlaps reach this far (in units of the coherent-state width)
/// into the wavefunction grid.
const HUSIMI_REACH: f64 = 9.0;

/// Comparison with the closed-form freely evolving coherent state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeOracle {
    pub max_abs_error: f64,
    pub l2_error: f64,
}

#[derive(Debug, Clone)]
pub struct Computation {
    pub psi0: Wavefunction,
    pub psi: Wavefunction,
    pub route: Route,
    pub observables: Observables,
    pub husimi: Option<PhaseSpaceGrid>,
    pub free_oracle: Option<FreeOracle>,
    pub evolve_seconds: f64,
    pub husimi_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HusimiSummary {
    pub global_max: Feature,
    /// Local maxima above 1% of the global maximum, largest first.
    pub local_maxima: Vec<Feature>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub evolve_s: f64,
    pub husimi_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub origin: String,
    pub config_sha256: String,
    pub config: ScenarioConfig,
    pub route: Route,
    pub threads: usize,
    pub source_points: usize,
    pub output_points: usize,
    pub observables: Observables,
    /// Largest `|Ψ|` on the edge of the output grid relative to its peak.
    pub output_edge_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_oracle: Option<FreeOracle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub husimi: Option<HusimiSummary>,
    pub outputs: Vec<PathBuf>,
    pub timings: Timings,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub computation: Computation,
    pub metadata: RunMetadata,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read_table(path: &Path) -> Result<Wavefunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut xs = vec![];
    let mut amps = vec![];
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}:{}: {e} in {s:?}", path.display(), n + 1)))
        };
        if cols.len() != 3 {
            return Err(CliError::Config(format!(
                "{}:{}: expected 3 columns (x re im), found {}",
                path.display(),
                n + 1,
                cols.len()
            )));
        }
        xs.push(parse(cols[0])?);
        amps.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    if xs.len() < 2 {
        return Err(CliError::Config(format!("{}: need at least two rows", path.display())));
    }
    let grid = SpaceGrid::new(xs[0], xs[xs.len() - 1], xs.len()).map_err(|e| CliError::Config(e.to_string()))?;
    let dx = grid.dx();
    for (k, (x, g)) in xs.iter().zip(grid.points()).enumerate() {
        if *x == 0.0 || (x - g).abs() > 1e-9 * dx.max(1.0) {
            return Err(CliError::Config(format!(
                "{}: row {} at x = {x} breaks the uniform grid avoiding x = 0",
                path.display(),
                k + 1
            )));
        }
    }
    Wavefunction::new(grid, amps, 0.0).map_err(|e| CliError::Config(e.to_string()))
}

fn initial_state(loaded: &LoadedConfig) -> Result<Wavefunction, CliError> {
    let c = &loaded.config;
    match &c.initial {
        InitialState::Coherent { q, p } => {
            coherent_state(*q, *p, &c.source_grid.grid("source_grid")?).map_err(|e| CliError::Config(e.to_string()))
        }
        InitialState::Table { path } => read_table(&loaded.base_dir.join(path)),
    }
}

fn fully_open(a: &ApertureFunction) -> bool {
    match a {
        ApertureFunction::Staircase(s) => s.levels().iter().all(|&l| l == 1.0),
        ApertureFunction::Sampled(s) => s.values().iter().all(|&v| v == 1.0),
    }
}

/// Evolve, and evaluate the Husimi distribution and free-case oracle when they apply.
pub fn compute(loaded: &LoadedConfig) -> Result<Computation, CliError> {
    let c = &loaded.config;
    let psi0 = initial_state(loaded)?;
    let out = c.output_grid.grid("output_grid")?;
    let aperture = c.aperture.aperture();

    let start = Instant::now();
    let (psi, route) =
        evolve(&psi0, aperture, c.time, &out, &c.constants, &c.evolution).map_err(|e| CliError::numerical("evolve", e))?;
    let evolve_seconds = start.elapsed().as_secs_f64();
    let observables = observables(&psi, psi0.norm_sqr()).map_err(|e| CliError::numerical("observables", e))?;

    let free_oracle = match (&c.initial, fully_open(aperture)) {
        (InitialState::Coherent { q, p }, true) => {
            let (mut max_abs, mut sq) = (0.0f64, 0.0);
            for (x, z) in psi.points().into_iter().zip(&psi.amplitudes) {
                let d = (z - free_coherent_amplitude(*q, *p, c.time, x, &c.constants)).norm();
                max_abs = max_abs.max(d);
                sq += d * d * out.dx();
            }
            Some(FreeOracle { max_abs_error: max_abs, l2_error: sq.sqrt() })
        }
        _ => None,
    };

    let start = Instant::now();
    let husimi = match &c.husimi {
        Some(axes) => {
            if axes.q_min - HUSIMI_REACH < out.x_min || axes.q_max + HUSIMI_REACH > out.x_max {
                log::warn!(
                    "Husimi q-range [{}, {}] is not covered by the output grid [{}, {}] with margin {HUSIMI_REACH}; edge values are truncated",
                    axes.q_min,
                    axes.q_max,
                    out.x_min,
                    out.x_max
                );
            }
            Some(husimi(&psi, axes).map_err(|e| CliError::numerical("husimi", e))?)
        }
        None => None,
    };
    let husimi_seconds = start.elapsed().as_secs_f64();

    Ok(Computation { psi0, psi, route, observables, husimi, free_oracle, evolve_seconds, husimi_seconds })
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn header(loaded: &LoadedConfig, quantity: &str, route: Route, columns: &[&str], delim: char) -> String {
    let c = &loaded.config;
    let e = &c.evolution;
    let q = &e.quadrature;
    let mut s = String::new();
    let _ = writeln!(s, "# dit {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# scenario: {}", c.display_name());
    let _ = writeln!(s, "# quantity: {quantity}");
    let _ = writeln!(s, "# config-sha256: {}", config_hash(&loaded.source_text));
    let _ = writeln!(s, "# propagator-route: {route}");
    let _ = writeln!(s, "# time: {}", num(c.time));
    let _ = writeln!(s, "# constants: mass={} hbar={}", num(c.constants.mass), num(c.constants.hbar));
    let _ = writeln!(
        s,
        "# source-quadrature: rule={} tail_tolerance={} negligible={}",
        format!("{:?}", e.rule).to_lowercase(),
        num(e.tail_tolerance),
        num(e.negligible)
    );
    let _ = writeln!(
        s,
        "# propagator-quadrature: rel_tol={} abs_tol={} max_subdivisions={}",
        num(q.rel_tol),
        num(q.abs_tol),
        q.max_subdivisions
    );
    let _ = writeln!(s, "{}", columns.join(&delim.to_string()));
    s
}

fn density_table(loaded: &LoadedConfig, comp: &Computation, delim: char) -> String {
    let mut s = header(loaded, "density", comp.route, &["x", "re", "im", "density"], delim);
    for (x, z) in comp.psi.points().into_iter().zip(&comp.psi.amplitudes) {
        let _ = writeln!(s, "{}{delim}{}{delim}{}{delim}{}", num(x), num(z.re), num(z.im), num(z.norm_sqr()));
    }
    s
}

fn husimi_table(loaded: &LoadedConfig, comp: &Computation, h: &PhaseSpaceGrid, delim: char) -> String {
    let mut s = header(loaded, "husimi (trapezoid overlap on the output grid)", comp.route, &["q", "p", "H"], delim);
    for i in 0..h.axes.q_count {
        for j in 0..h.axes.p_count {
            let _ = writeln!(s, "{}{delim}{}{delim}{}", num(h.axes.q(i)), num(h.axes.p(j)), num(h.value(i, j)));
        }
    }
    s
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn default_output_dir(config: &ScenarioConfig) -> PathBuf {
    config.output.directory.clone().unwrap_or_else(|| Path::new("dit-out").join(config.display_name()))
}

/// Run a scenario and write `density`, `husimi` (if requested) and
/// `run.json` into `out_dir`, or the configured directory.
pub fn run(loaded: &LoadedConfig, out_dir: Option<&Path>) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let c = &loaded.config;
    let comp = compute(loaded)?;

    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| default_output_dir(c));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let format = c.output.format;
    let delim = format.delimiter();
    let mut outputs = vec![];

    let density_path = dir.join(format!("density.{}", format.extension()));
    write(&density_path, &density_table(loaded, &comp, delim))?;
    outputs.push(density_path);

    let husimi_summary = match &comp.husimi {
        Some(h) => {
            let path = dir.join(format!("husimi.{}", format.extension()));
            write(&path, &husimi_table(loaded, &comp, h, delim))?;
            outputs.push(path);
            let peaks = local_maxima(h, 0.01);
            Some(HusimiSummary { global_max: peaks[0], local_maxima: peaks })
        }
        None => None,
    };

    let meta_path = dir.join("run.json");
    outputs.push(meta_path.clone());
    let metadata = RunMetadata {
        tool: "dit",
        version: env!("CARGO_PKG_VERSION"),
        scenario: c.display_name().to_string(),
        origin: loaded.origin.clone(),
        config_sha256: config_hash(&loaded.source_text),
        config: c.clone(),
        route: comp.route,
        threads: rayon::current_num_threads(),
        source_points: comp.psi0.grid.n_points,
        output_points: comp.psi.grid.n_points,
        observables: comp.observables,
        output_edge_ratio: comp.psi.edge_ratio(),
        free_oracle: comp.free_oracle,
        husimi: husimi_summary,
        outputs,
        timings: Timings {
            evolve_s: comp.evolve_seconds,
            husimi_s: comp.husimi_seconds,
            total_s: start.elapsed().as_secs_f64(),
        },
    };
    let json = serde_json::to_string_pretty(&metadata).expect("metadata serialises");
    write(&meta_path, &(json + "\n"))?;
    Ok(RunOutcome { computation: comp, metadata })
}
