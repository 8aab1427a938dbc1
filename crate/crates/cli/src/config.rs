//! Scenario configuration (TOML). Unknown keys are rejected everywhere.
//!
//! ```toml
//! name = "fig2a"
//! time = 3.0
//!
//! [constants]            # optional; atomic units by default
//! mass = 1.0
//! hbar = 1.0
//!
//! [aperture]             # staircase | sampled | grating
//! type = "grating"
//! cell = [0.0, 1.0]      # one level per slot
//! dt = 0.056
//! periods = 27
//!
//! [initial]              # coherent | table
//! type = "coherent"
//! q = -10.0
//! p = 5.0
//!
//! [source_grid]          # give exactly one of dx / n_points
//! x_min = -22.0
//! x_max = 0.0
//! dx = 0.02
//!
//! [output_grid]
//! x_min = -50.0
//! x_max = 70.0
//! dx = 0.01
//!
//! [husimi]               # optional
//! q_min = -40.0
//! q_max = 60.0
//! q_count = 201
//! p_min = -25.0
//! p_max = 25.0
//! p_count = 201
//!
//! [evolution]            # optional
//! rule = "trapezoid"     # or "simpson"
//! tail_tolerance = 1e-8
//!
//! [evolution.quadrature] # optional; used for sampled apertures
//! rel_tol = 1e-8
//!
//! [output]               # optional
//! directory = "out/fig2a"
//! format = "tsv"         # or "csv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use dit_core::evolution::{EvolutionSettings, PhaseSpaceAxes, SpaceGrid};
use dit_core::{ApertureFunction, DitError, PhysicalConstants, SampledAperture, StaircaseAperture};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub constants: PhysicalConstants,
    /// Evaluation time `t`.
    pub time: f64,
    pub aperture: ApertureSpec,
    pub initial: InitialState,
    pub source_grid: GridSpec,
    pub output_grid: GridSpec,
    #[serde(default)]
    pub husimi: Option<PhaseSpaceAxes>,
    #[serde(default)]
    pub evolution: EvolutionSettings,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Aperture as written in a config; validated while parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ApertureRepr", into = "ApertureRepr")]
pub struct ApertureSpec {
    repr: ApertureRepr,
    aperture: ApertureFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ApertureRepr {
    Staircase { breakpoints: Vec<f64>, levels: Vec<f64> },
    Sampled { times: Vec<f64>, values: Vec<f64> },
    /// `cell` holds one level per slot of width `dt`; the cell is repeated
    /// `periods` times and its last level is held afterwards.
    Grating { cell: Vec<f64>, dt: f64, periods: usize },
}

impl TryFrom<ApertureRepr> for ApertureSpec {
    type Error = DitError;
    fn try_from(repr: ApertureRepr) -> Result<Self, DitError> {
        let aperture = match &repr {
            ApertureRepr::Staircase { breakpoints, levels } => {
                StaircaseAperture::new(breakpoints.clone(), levels.clone())?.into()
            }
            ApertureRepr::Sampled { times, values } => SampledAperture::new(times.clone(), values.clone())?.into(),
            ApertureRepr::Grating { cell, dt, periods } => {
                StaircaseAperture::grating_from_slots(cell, *dt, *periods)?.into()
            }
        };
        Ok(Self { repr, aperture })
    }
}

impl From<ApertureSpec> for ApertureRepr {
    fn from(s: ApertureSpec) -> Self {
        s.repr
    }
}

impl ApertureSpec {
    pub fn aperture(&self) -> &ApertureFunction {
        &self.aperture
    }

    /// Parse an aperture from TOML text: either a bare table
    /// (`type = "staircase"` …) or an inline table (`{ type = "staircase", … }`).
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wrapped {
            aperture: ApertureSpec,
        }
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            toml::from_str::<Wrapped>(&format!("aperture = {trimmed}"))
                .map(|w| w.aperture)
                .map_err(|e| CliError::Config(format!("invalid aperture: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("invalid aperture: {e}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    /// `ψ_{q,p}(x) = π^{-1/4} exp[−(x−q)²/2 + i p (x−q)]`
    Coherent { q: f64, p: f64 },
    /// Whitespace- or comma-separated columns `x re im` on a uniform grid
    /// avoiding `x = 0`; `#` starts a comment. Relative paths are taken
    /// from the config file's directory.
    Table { path: PathBuf },
}

/// Uniform grid over `[x_min, x_max]`, by spacing or by node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
}

impl GridSpec {
    pub fn grid(&self, what: &str) -> Result<SpaceGrid, CliError> {
        let g = match (self.dx, self.n_points) {
            (Some(dx), None) => SpaceGrid::with_spacing(self.x_min, self.x_max, dx),
            (None, Some(n)) => SpaceGrid::new(self.x_min, self.x_max, n),
            _ => return Err(CliError::Config(format!("{what}: give exactly one of `dx` and `n_points`"))),
        };
        g.map_err(|e| CliError::Config(format!("{what}: {e}")))
    }

    /// Same range at half the spacing.
    pub fn refined(&self) -> Self {
        match (self.dx, self.n_points) {
            (Some(dx), _) => Self { dx: Some(0.5 * dx), ..*self },
            (None, Some(n)) => Self { n_points: Some(2 * n - 1), ..*self },
            (None, None) => *self,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Tsv,
    Csv,
}

impl TableFormat {
    pub fn delimiter(&self) -> char {
        match self {
            TableFormat::Tsv => '\t',
            TableFormat::Csv => ',',
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Tsv => "tsv",
            TableFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Defaults to `dit-out/<name>`.
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub format: TableFormat,
}

/// A parsed config together with the text it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub source_text: String,
    /// Directory against which relative paths in the config are resolved.
    pub base_dir: PathBuf,
    pub origin: String,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |e: DitError| CliError::Config(format!("config: {e}"));
        self.constants.validate().map_err(bad)?;
        if !(self.time > 0.0 && self.time.is_finite()) {
            return Err(CliError::Config(format!("config: time must be positive, got {}", self.time)));
        }
        self.source_grid.grid("source_grid")?;
        self.output_grid.grid("output_grid")?;
        if let Some(h) = &self.husimi {
            h.validate().map_err(bad)?;
        }
        self.evolution.quadrature.validate().map_err(bad)?;
        if !(self.evolution.tail_tolerance > 0.0) || !(self.evolution.negligible >= 0.0) {
            return Err(CliError::Config("config: evolution tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }
}

impl LoadedConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let config = ScenarioConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, source_text: text, base_dir, origin: path.display().to_string() })
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self, CliError> {
        let config = ScenarioConfig::parse(text)?;
        Ok(Self { config, source_text: text.to_string(), base_dir: PathBuf::from("."), origin: origin.to_string() })
    }
}
