//! Aperture functions `χ(τ) ∈ [0, 1]`: the transparency of the shutter.
//!
//! Two representations are supported. A [`StaircaseAperture`] is piecewise
//! constant and right-continuous, `χ(τ) = χ_n` on `[t_n, t_{n+1})`. A
//! [`SampledAperture`] interpolates linearly between samples and holds its
//! last value afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{DitError, Result};

fn check_level(v: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(DitError::InvalidAperture(format!(
            "{what} {v} is outside [0, 1]; aperture values must lie in [0, 1]"
        )))
    }
}

fn check_increasing(times: &[f64], what: &str) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(DitError::InvalidAperture(format!("{what} must be finite")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DitError::InvalidAperture(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(DitError::Domain(format!("aperture evaluated at τ = {tau}; needs τ ≥ 0")))
    }
}

/// A discontinuity of a staircase: at `time` the level changes by `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub weight: f64,
}

/// On `(start, end)` the aperture equals `offset + slope · τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub start: f64,
    pub end: f64,
    pub offset: f64,
    pub slope: f64,
}

impl LinearPiece {
    #[inline]
    pub fn value(&self, tau: f64) -> f64 {
        self.offset + self.slope * tau
    }
}

/// Piecewise-constant aperture ("time grating").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StaircaseRepr", into = "StaircaseRepr")]
pub struct StaircaseAperture {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StaircaseRepr {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl TryFrom<StaircaseRepr> for StaircaseAperture {
    type Error = DitError;
    fn try_from(r: StaircaseRepr) -> Result<Self> {
        Self::new(r.breakpoints, r.levels)
    }
}

impl From<StaircaseAperture> for StaircaseRepr {
    fn from(a: StaircaseAperture) -> Self {
        Self {
            breakpoints: a.breakpoints,
            levels: a.levels,
        }
    }
}

impl StaircaseAperture {
    /// `levels[0]` holds on `[0, t₁)`, `levels[n]` on `[t_n, t_{n+1})`, and the
    /// last level from the last breakpoint on.
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(DitError::InvalidAperture(format!(
                "a staircase with {} breakpoints needs {} levels, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                levels.len()
            )));
        }
        check_increasing(&breakpoints, "breakpoints")?;
        if let Some(&first) = breakpoints.first() {
            if first <= 0.0 {
                return Err(DitError::InvalidAperture(format!(
                    "breakpoints must be positive, got {first}; encode the initial state in the first level"
                )));
            }
        }
        for &l in &levels {
            check_level(l, "level")?;
        }
        Ok(Self { breakpoints, levels })
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![level])
    }

    /// Shutter closed until `t1`, open afterwards.
    pub fn moshinsky(t1: f64) -> Result<Self> {
        Self::new(vec![t1], vec![0.0, 1.0])
    }

    /// Cell with one level per slot of length `dt`: slot `k` covers `[k·dt, (k+1)·dt)`.
    /// Equal neighbouring slots are merged.
    pub fn from_slots(levels: &[f64], dt: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(DitError::InvalidAperture("a cell needs at least one slot".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DitError::InvalidAperture(format!("slot width must be positive, got {dt}")));
        }
        let breakpoints = (1..levels.len()).map(|k| k as f64 * dt).collect();
        Ok(Self::new(breakpoints, levels.to_vec())?.merged())
    }

    /// Repeat `cell` (whose breakpoints lie in `(0, period)`) `periods` times.
    /// After the last period the final level of the cell is held.
    pub fn grating(cell: &StaircaseAperture, period: f64, periods: usize) -> Result<Self> {
        if periods == 0 {
            return Err(DitError::InvalidAperture("a grating needs at least one period".into()));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(DitError::InvalidAperture(format!("period must be positive, got {period}")));
        }
        if let Some(&last) = cell.breakpoints.last() {
            if last >= period {
                return Err(DitError::InvalidAperture(format!(
                    "cell breakpoint {last} does not fit in period {period}; consecutive cells would overlap"
                )));
            }
        }
        let mut breakpoints = Vec::with_capacity(periods * (cell.breakpoints.len() + 1));
        let mut levels = Vec::with_capacity(breakpoints.capacity() + 1);
        levels.push(cell.levels[0]);
        for k in 0..periods {
            let origin = k as f64 * period;
            if k > 0 {
                breakpoints.push(origin);
                levels.push(cell.levels[0]);
            }
            for (b, l) in cell.breakpoints.iter().zip(&cell.levels[1..]) {
                breakpoints.push(origin + b);
                levels.push(*l);
            }
        }
        Ok(Self::new(breakpoints, levels)?.merged())
    }

    /// Grating built from per-slot levels, tiled `periods` times.
    pub fn grating_from_slots(cell_levels: &[f64], dt: f64, periods: usize) -> Result<Self> {
        let cell = Self::from_slots(cell_levels, dt)?;
        Self::grating(&cell, cell_levels.len() as f64 * dt, periods)
    }

    fn merged(self) -> Self {
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut levels = vec![self.levels[0]];
        for (b, l) in self.breakpoints.iter().zip(&self.levels[1..]) {
            if *l != *levels.last().unwrap() {
                breakpoints.push(*b);
                levels.push(*l);
            }
        }
        Self { breakpoints, levels }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn initial_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn final_level(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.value_at(tau))
    }

    /// Right-continuous evaluation without argument checks.
    #[inline]
    pub fn value_at(&self, tau: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= tau);
        self.levels[idx]
    }

    /// Jump weights `Δ_n = χ_n − χ_{n−1}` at each breakpoint.
    pub fn jumps(&self) -> Vec<Jump> {
        self.breakpoints
            .iter()
            .zip(self.levels.windows(2))
            .map(|(&time, w)| Jump { time, weight: w[1] - w[0] })
            .filter(|j| j.weight != 0.0)
            .collect()
    }

    /// Last time at which the shutter is not fully open, if it ends up open.
    pub fn open_after(&self) -> Option<f64> {
        if self.final_level() != 1.0 {
            return None;
        }
        Some(self.breakpoints.last().copied().unwrap_or(0.0))
    }

    /// The aperture seen by a clock started at `offset`: `τ ↦ χ(τ + offset)`.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        check_tau(offset)?;
        let start = self.value_at(offset);
        let mut breakpoints = Vec::new();
        let mut levels = vec![start];
        for (b, l) in self.breakpoints.iter().zip(&self.levels[1..]) {
            if *b > offset {
                breakpoints.push(b - offset);
                levels.push(*l);
            }
        }
        Ok(Self { breakpoints, levels }.merged())
    }

    /// Replace every jump by a linear ramp of width `ramp` starting at the jump.
    pub fn to_sampled(&self, ramp: f64) -> Result<SampledAperture> {
        if !(ramp > 0.0) {
            return Err(DitError::InvalidAperture(format!("ramp width must be positive, got {ramp}")));
        }
        let min_gap = self
            .breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if ramp >= min_gap {
            return Err(DitError::InvalidAperture(format!(
                "ramp width {ramp} exceeds the smallest breakpoint gap {min_gap}"
            )));
        }
        let mut times = vec![0.0];
        let mut values = vec![self.levels[0]];
        for (b, l) in self.breakpoints.iter().zip(&self.levels[1..]) {
            times.push(*b);
            values.push(*values.last().unwrap());
            times.push(b + ramp);
            values.push(*l);
        }
        SampledAperture::new(times, values)
    }

    /// Constant pieces of χ on `[0, horizon]`.
    pub fn pieces(&self, horizon: f64) -> Vec<LinearPiece> {
        let mut out = Vec::with_capacity(self.breakpoints.len() + 1);
        let mut start = 0.0;
        for (i, &level) in self.levels.iter().enumerate() {
            let end = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY).min(horizon);
            if end > start {
                out.push(LinearPiece { start, end, offset: level, slope: 0.0 });
            }
            if end >= horizon {
                break;
            }
            start = end;
        }
        out
    }
}

/// Piecewise-linear aperture through `(times[k], values[k])`, constant after
/// the last sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledRepr", into = "SampledRepr")]
pub struct SampledAperture {
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledRepr {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<SampledRepr> for SampledAperture {
    type Error = DitError;
    fn try_from(r: SampledRepr) -> Result<Self> {
        Self::new(r.times, r.values)
    }
}

impl From<SampledAperture> for SampledRepr {
    fn from(a: SampledAperture) -> Self {
        Self { times: a.times, values: a.values }
    }
}

impl SampledAperture {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(DitError::InvalidAperture(format!(
                "need matching non-empty sample arrays, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(DitError::InvalidAperture(format!("first sample must be at τ = 0, got {}", times[0])));
        }
        check_increasing(&times, "sample times")?;
        for &v in &values {
            check_level(v, "sample value")?;
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.value_at(tau))
    }

    #[inline]
    pub fn value_at(&self, tau: f64) -> f64 {
        let idx = self.times.partition_point(|&s| s <= tau);
        if idx >= self.times.len() {
            return *self.values.last().unwrap();
        }
        let (s0, s1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (tau - s0) / (s1 - s0)
    }

    /// Slope of the interpolant. Knots are rejected: integrals of `dχ/dτ`
    /// must be split there.
    pub fn derivative(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if self.times.iter().any(|&s| s == tau) {
            return Err(DitError::Domain(format!(
                "derivative requested at knot τ = {tau}; split the integration interval there"
            )));
        }
        let idx = self.times.partition_point(|&s| s <= tau);
        if idx >= self.times.len() {
            return Ok(0.0);
        }
        Ok((self.values[idx] - self.values[idx - 1]) / (self.times[idx] - self.times[idx - 1]))
    }

    pub fn initial_level(&self) -> f64 {
        self.values[0]
    }

    pub fn final_level(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn open_after(&self) -> Option<f64> {
        if self.final_level() != 1.0 {
            return None;
        }
        let mut last = 0.0;
        for (s, v) in self.times.iter().zip(&self.values) {
            if *v != 1.0 {
                last = *s;
            }
        }
        // The ramp into the final value ends at the next knot.
        let idx = self.times.partition_point(|&s| s <= last);
        Some(self.times.get(idx).copied().unwrap_or(last))
    }

    pub fn shifted(&self, offset: f64) -> Result<Self> {
        check_tau(offset)?;
        let mut times = vec![0.0];
        let mut values = vec![self.value_at(offset)];
        for (s, v) in self.times.iter().zip(&self.values) {
            if *s > offset {
                times.push(s - offset);
                values.push(*v);
            }
        }
        Self::new(times, values)
    }

    /// Linear pieces of χ on `[0, horizon]`.
    pub fn pieces(&self, horizon: f64) -> Vec<LinearPiece> {
        let mut out = Vec::with_capacity(self.times.len());
        for k in 0..self.times.len() {
            let start = self.times[k];
            if start >= horizon {
                break;
            }
            let piece = match self.times.get(k + 1) {
                Some(&next) => {
                    let slope = (self.values[k + 1] - self.values[k]) / (next - start);
                    LinearPiece {
                        start,
                        end: next.min(horizon),
                        offset: self.values[k] - slope * start,
                        slope,
                    }
                }
                None => LinearPiece { start, end: horizon, offset: self.values[k], slope: 0.0 },
            };
            out.push(piece);
        }
        out
    }
}

/// Either aperture representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ApertureFunction {
    Staircase(StaircaseAperture),
    Sampled(SampledAperture),
}

impl From<StaircaseAperture> for ApertureFunction {
    fn from(a: StaircaseAperture) -> Self {
        Self::Staircase(a)
    }
}

impl From<SampledAperture> for ApertureFunction {
    fn from(a: SampledAperture) -> Self {
        Self::Sampled(a)
    }
}

impl ApertureFunction {
    pub fn eval(&self, tau: f64) -> Result<f64> {
        match self {
            Self::Staircase(a) => a.eval(tau),
            Self::Sampled(a) => a.eval(tau),
        }
    }

    #[inline]
    pub fn value_at(&self, tau: f64) -> f64 {
        match self {
            Self::Staircase(a) => a.value_at(tau),
            Self::Sampled(a) => a.value_at(tau),
        }
    }

    pub fn pieces(&self, horizon: f64) -> Vec<LinearPiece> {
        match self {
            Self::Staircase(a) => a.pieces(horizon),
            Self::Sampled(a) => a.pieces(horizon),
        }
    }

    /// Time after which χ ≡ 1, if the shutter is eventually switched off.
    pub fn open_after(&self) -> Option<f64> {
        match self {
            Self::Staircase(a) => a.open_after(),
            Self::Sampled(a) => a.open_after(),
        }
    }

    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Ok(match self {
            Self::Staircase(a) => Self::Staircase(a.shifted(offset)?),
            Self::Sampled(a) => Self::Sampled(a.shifted(offset)?),
        })
    }
}
