//! Feature extraction from Husimi tables: peaks and near-zero minima.

use dit_core::evolution::PhaseSpaceGrid;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feature {
    pub q: f64,
    pub p: f64,
    pub value: f64,
    /// `value` over the global maximum.
    pub fraction: f64,
    #[serde(skip)]
    pub i: usize,
    #[serde(skip)]
    pub j: usize,
}

fn feature(h: &PhaseSpaceGrid, i: usize, j: usize, peak: f64) -> Feature {
    let value = h.value(i, j);
    Feature { q: h.axes.q(i), p: h.axes.p(j), value, fraction: value / peak, i, j }
}

fn neighbours(h: &PhaseSpaceGrid, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let (nq, np) = (h.axes.q_count as isize, h.axes.p_count as isize);
    (-1isize..=1)
        .flat_map(|di| (-1isize..=1).map(move |dj| (di, dj)))
        .filter(|&d| d != (0, 0))
        .map(move |(di, dj)| (i as isize + di, j as isize + dj))
        .filter(move |&(a, b)| a >= 0 && b >= 0 && a < nq && b < np)
        .map(|(a, b)| (a as usize, b as usize))
}

/// Local maxima over the 8-neighbourhood (edges included) that reach
/// `min_fraction` of the global maximum, largest first. On a plateau only
/// the first node counts.
pub fn local_maxima(h: &PhaseSpaceGrid, min_fraction: f64) -> Vec<Feature> {
    let (peak, _, _) = h.max();
    let mut out = vec![];
    for i in 0..h.axes.q_count {
        for j in 0..h.axes.p_count {
            let v = h.value(i, j);
            if v < min_fraction * peak {
                continue;
            }
            let is_max = neighbours(h, i, j).all(|(a, b)| {
                let w = h.value(a, b);
                if (a, b) < (i, j) {
                    v > w
                } else {
                    v >= w
                }
            });
            if is_max {
                out.push(feature(h, i, j, peak));
            }
        }
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    out
}

/// Strict interior local minima below `max_fraction` of the global maximum
/// that sit between lobes: inside the bounding box of the local maxima
/// reaching `lobe_fraction`.
pub fn naughts(h: &PhaseSpaceGrid, max_fraction: f64, lobe_fraction: f64) -> Vec<Feature> {
    let (peak, _, _) = h.max();
    let lobes = local_maxima(h, lobe_fraction);
    if lobes.len() < 2 {
        return vec![];
    }
    let span = |f: fn(&Feature) -> f64| {
        lobes.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (q_lo, q_hi) = span(|f| f.q);
    let (p_lo, p_hi) = span(|f| f.p);
    let mut out = vec![];
    for i in 1..h.axes.q_count.saturating_sub(1) {
        for j in 1..h.axes.p_count.saturating_sub(1) {
            let v = h.value(i, j);
            let (q, p) = (h.axes.q(i), h.axes.p(j));
            if v >= max_fraction * peak || q < q_lo || q > q_hi || p < p_lo || p > p_hi {
                continue;
            }
            if neighbours(h, i, j).all(|(a, b)| h.value(a, b) > v) {
                out.push(feature(h, i, j, peak));
            }
        }
    }
    out
}
