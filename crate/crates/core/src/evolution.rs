//! Wave packets through the shutter: `Ψ(x, t) = ∫ dx' K(x, x'; t) Ψ₀(x')`.
//!
//! Also coherent states, densities, Husimi distributions and the split of
//! the probability into transmitted, reflected and absorbed parts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aperture::ApertureFunction;
use crate::error::{DitError, Result};
use crate::math::PhysicalConstants;
use crate::propagator::{PreparedKernel, Route};
use crate::quadrature::QuadratureSettings;

/// Uniform grid on `[x_min, x_max]`.
///
/// If a node would land exactly on the shutter, every node is moved by
/// `Δx/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n_points };
        g.validate()?;
        Ok(g)
    }

    /// Grid with spacing close to `dx` covering `[x_min, x_max]`.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(DitError::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        let n = ((x_max - x_min) / dx).round() as usize + 1;
        Self::new(x_min, x_max, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(DitError::InvalidGrid(format!(
                "need finite x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < 2 {
            return Err(DitError::InvalidGrid(format!("need at least 2 points, got {}", self.n_points)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Offset applied to all nodes, `0` or `Δx/2`.
    pub fn shift(&self) -> f64 {
        let dx = self.dx();
        let k = -self.x_min / dx;
        let hits_zero = k >= -0.5 && k <= (self.n_points - 1) as f64 + 0.5 && (k - k.round()).abs() < 1e-9;
        if hits_zero {
            0.5 * dx
        } else {
            0.0
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx() + self.shift()
    }

    pub fn points(&self) -> Vec<f64> {
        let (dx, s) = (self.dx(), self.shift());
        (0..self.n_points).map(|i| self.x_min + i as f64 * dx + s).collect()
    }
}

/// Complex amplitudes on a [`SpaceGrid`] at a given time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefunction {
    pub grid: SpaceGrid,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl Wavefunction {
    pub fn new(grid: SpaceGrid, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        grid.validate()?;
        if amplitudes.len() != grid.n_points {
            return Err(DitError::InvalidGrid(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points
            )));
        }
        if let Some(i) = amplitudes.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(DitError::Domain(format!("non-finite amplitude at grid index {i}")));
        }
        Ok(Self { grid, amplitudes, time })
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// `Σ |Ψ|² Δx`
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Largest amplitude at either grid edge, relative to the largest overall.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.amplitudes[0].norm();
        let last = self.amplitudes[self.amplitudes.len() - 1].norm();
        first.max(last) / peak
    }
}

/// `ψ_{q,p}(x) = π^{-1/4} exp[−(x−q)²/2 + i p (x−q)]`
pub fn coherent_amplitude(q: f64, p: f64, x: f64) -> Complex64 {
    let d = x - q;
    Complex64::from_polar(PI.powf(-0.25) * (-0.5 * d * d).exp(), p * d)
}

pub fn coherent_state(q: f64, p: f64, grid: &SpaceGrid) -> Result<Wavefunction> {
    grid.validate()?;
    let amps = grid.points().into_iter().map(|x| coherent_amplitude(q, p, x)).collect();
    Wavefunction::new(*grid, amps, 0.0)
}

/// A coherent state evolved freely for time `t`, at position `x`.
pub fn free_coherent_amplitude(q: f64, p: f64, t: f64, x: f64, pc: &PhysicalConstants) -> Complex64 {
    let tau = pc.hbar * t / pc.mass;
    let one_it = Complex64::new(1.0, tau);
    let d = x - q;
    let spread = d - tau * p;
    let exponent = Complex64::new(0.0, p * d - 0.5 * tau * p * p) - spread * spread / (one_it * 2.0);
    exponent.exp() * PI.powf(-0.25) / one_it.sqrt()
}

/// Quadrature rule over the source grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceRule {
    /// Spectrally accurate for smooth packets that vanish at the grid edges.
    #[default]
    Trapezoid,
    Simpson,
}

impl SourceRule {
    /// Weights for `n` equally spaced nodes of spacing `dx`.
    pub fn weights(&self, n: usize, dx: f64) -> Vec<f64> {
        let mut w = vec![dx; n];
        match self {
            SourceRule::Trapezoid => {
                w[0] *= 0.5;
                w[n - 1] *= 0.5;
            }
            SourceRule::Simpson if n < 3 => {
                w[0] *= 0.5;
                w[n - 1] *= 0.5;
            }
            SourceRule::Simpson => {
                // Composite 1/3 rule; with an even node count the last three
                // intervals use the 3/8 rule.
                let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
                w.iter_mut().for_each(|v| *v = 0.0);
                let mut i = 0;
                while i + 2 <= simpson_end {
                    w[i] += dx / 3.0;
                    w[i + 1] += 4.0 * dx / 3.0;
                    w[i + 2] += dx / 3.0;
                    i += 2;
                }
                if n % 2 == 0 {
                    let s = simpson_end;
                    for (k, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
                        w[s + k] += c * dx / 8.0;
                    }
                }
            }
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSettings {
    pub rule: SourceRule,
    /// Largest edge amplitude of `Ψ₀`, relative to its peak, that is accepted.
    pub tail_tolerance: f64,
    /// Source points below this fraction of the peak amplitude are skipped.
    pub negligible: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        Self {
            rule: SourceRule::Trapezoid,
            tail_tolerance: 1e-8,
            negligible: 1e-15,
            quadrature: QuadratureSettings::default(),
        }
    }
}

/// Evolve `psi0` through the shutter up to time `t`, sampling the result on
/// `out_grid`. Returns the wavefunction and the route used for `K`.
pub fn evolve(
    psi0: &Wavefunction,
    a: &ApertureFunction,
    t: f64,
    out_grid: &SpaceGrid,
    pc: &PhysicalConstants,
    settings: &EvolutionSettings,
) -> Result<(Wavefunction, Route)> {
    pc.validate()?;
    settings.quadrature.validate()?;
    out_grid.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(DitError::Domain(format!("evolution time must be positive, got {t}")));
    }
    let edge = psi0.edge_ratio();
    if edge > settings.tail_tolerance {
        return Err(DitError::Truncation(format!(
            "initial state reaches {edge:e} of its peak at the grid edge (tolerance {:e})",
            settings.tail_tolerance
        )));
    }

    let peak = psi0.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let weights = settings.rule.weights(psi0.grid.n_points, psi0.grid.dx());
    let mut sources = Vec::new();
    for ((x, amp), w) in psi0.points().into_iter().zip(&psi0.amplitudes).zip(weights) {
        if amp.norm() <= settings.negligible * peak {
            continue;
        }
        if x == 0.0 {
            log::warn!("source point on the shutter skipped");
            continue;
        }
        sources.push((x, amp * w));
    }

    let kernel = PreparedKernel::new(a, t, *pc, &settings.quadrature);
    let out_points = out_grid.points();
    let amps = out_points
        .par_iter()
        .map(|&x| {
            if x == 0.0 {
                return Err(DitError::InvalidGrid("output grid has a node on the shutter".into()));
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for &(xs, f) in &sources {
                sum += kernel.eval(x, xs)? * f;
            }
            Ok(sum)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Wavefunction::new(*out_grid, amps, psi0.time + t)?, kernel.route()))
}

/// `|Ψ|²` at every grid point.
pub fn density(psi: &Wavefunction) -> Vec<f64> {
    psi.amplitudes.iter().map(|z| z.norm_sqr()).collect()
}

/// Axes of a rectangular `(q, p)` lattice, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceAxes {
    pub q_min: f64,
    pub q_max: f64,
    pub q_count: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: usize,
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

impl PhaseSpaceAxes {
    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64, n: usize| lo.is_finite() && hi.is_finite() && n >= 1 && (lo < hi || (n == 1 && lo == hi));
        if !ok(self.q_min, self.q_max, self.q_count) || !ok(self.p_min, self.p_max, self.p_count) {
            return Err(DitError::InvalidGrid(format!("invalid phase-space axes {self:?}")));
        }
        Ok(())
    }

    pub fn q(&self, i: usize) -> f64 {
        axis(self.q_min, self.q_max, self.q_count, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        axis(self.p_min, self.p_max, self.p_count, j)
    }
}

/// Husimi values on a lattice, stored with `p` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub axes: PhaseSpaceAxes,
    pub values: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes.p_count + j]
    }

    /// Largest value and its `(i, j)` index.
    pub fn max(&self) -> (f64, usize, usize) {
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        (v, k / self.axes.p_count, k % self.axes.p_count)
    }
}

/// `H(q, p) = |∫ dx ψ*_{q,p}(x) Ψ(x)|²`, with trapezoid weights on the grid of `Ψ`.
pub fn husimi(psi: &Wavefunction, axes: &PhaseSpaceAxes) -> Result<PhaseSpaceGrid> {
    axes.validate()?;
    let xs = psi.points();
    let weights = SourceRule::Trapezoid.weights(xs.len(), psi.grid.dx());
    // Beyond 9 widths the Gaussian factor is below e^{-40}.
    const REACH: f64 = 9.0;
    let rows: Vec<Vec<f64>> = (0..axes.q_count)
        .into_par_iter()
        .map(|i| {
            let q = axes.q(i);
            let local: Vec<(f64, Complex64)> = xs
                .iter()
                .zip(&psi.amplitudes)
                .zip(&weights)
                .filter(|((x, _), _)| (*x - q).abs() < REACH)
                .map(|((&x, &amp), &w)| {
                    let d = x - q;
                    (d, amp * (w * PI.powf(-0.25) * (-0.5 * d * d).exp()))
                })
                .collect();
            (0..axes.p_count)
                .map(|j| {
                    let p = axes.p(j);
                    local
                        .iter()
                        .map(|&(d, g)| g * Complex64::cis(-p * d))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(PhaseSpaceGrid { axes: *axes, values: rows.concat() })
}

/// Probability budget of an evolved state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub norm_sqr: f64,
    /// Probability on `x > 0`, relative to the initial norm.
    pub transmitted: f64,
    /// Probability on `x < 0`, relative to the initial norm.
    pub reflected: f64,
    /// `1 − norm²/initial norm²`
    pub absorbed: f64,
}

pub fn observables(psi: &Wavefunction, initial_norm_sqr: f64) -> Result<Observables> {
    if !(initial_norm_sqr > 0.0 && initial_norm_sqr.is_finite()) {
        return Err(DitError::Domain(format!("initial norm² must be positive, got {initial_norm_sqr}")));
    }
    let dx = psi.grid.dx();
    let (mut right, mut left) = (0.0, 0.0);
    for (x, z) in psi.points().into_iter().zip(&psi.amplitudes) {
        if x > 0.0 {
            right += z.norm_sqr() * dx;
        } else {
            left += z.norm_sqr() * dx;
        }
    }
    let norm_sqr = right + left;
    Ok(Observables {
        norm_sqr,
        transmitted: right / initial_norm_sqr,
        reflected: left / initial_norm_sqr,
        absorbed: 1.0 - norm_sqr / initial_norm_sqr,
    })
}
