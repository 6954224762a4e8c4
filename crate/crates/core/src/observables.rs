//! Scalar diagnostics of states and trajectories: occupations, mean photon
//! number, fidelity, extrema and first-return detection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::StateVector;
use crate::propagation::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtremumKind {
    Max,
    Min,
}

/// A local extremum of a sampled observable, refined by a three-point
/// quadratic fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremumRecord {
    pub r_location: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// |c_k|^2.
pub fn occupation(state: &StateVector, k: usize) -> Result<f64> {
    if k >= state.dim() {
        return Err(Error::IndexOutOfRange {
            index: k,
            dim: state.dim(),
        });
    }
    Ok(state.amplitude(k).norm_sqr())
}

/// Sum_k k |c_k|^2.
pub fn mean_photon(state: &StateVector) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| k as f64 * c.norm_sqr())
        .sum()
}

/// |<a|b>|^2.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Photon index maximizing |c_k|^2, ties broken toward smaller k.
pub fn argmax_occupation(state: &StateVector) -> usize {
    let mut best = 0usize;
    let mut best_p = state.amplitude(0).norm_sqr();
    for (k, c) in state.amplitudes().iter().enumerate().skip(1) {
        let p = c.norm_sqr();
        if p > best_p {
            best = k;
            best_p = p;
        }
    }
    best
}

/// Vertex of the parabola through three samples. Returns (location, value).
fn quadratic_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curv = (d1 - d0) / (x2 - x0);
    if curv == 0.0 {
        return (x1, y1);
    }
    // Newton-form quadratic y0 + d0 (x-x0) + curv (x-x0)(x-x1)
    let xv = (x0 + x1) / 2.0 - d0 / (2.0 * curv);
    let yv = y0 + d0 * (xv - x0) + curv * (xv - x0) * (xv - x1);
    (xv, yv)
}

/// Interior local extrema of a sampled series, with locations refined by a
/// three-point quadratic fit. Endpoints are excluded. A run of exactly equal
/// values flanked by lower (or higher) samples counts as one extremum; such
/// plateaus of width two arise whenever a smooth peak falls exactly midway
/// between two samples.
pub fn find_extrema(series: &[(f64, f64)]) -> Result<Vec<ExtremumRecord>> {
    if series.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: series.len(),
        });
    }
    for w in series.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidParameter(
                "series r values must be strictly increasing".into(),
            ));
        }
    }
    let mut out = Vec::new();
    let mut i = 1;
    while i < series.len() - 1 {
        let here = series[i].1;
        let mut end = i;
        while end + 1 < series.len() && series[end + 1].1 == here {
            end += 1;
        }
        if end + 1 >= series.len() {
            break;
        }
        let prev = series[i - 1].1;
        let next = series[end + 1].1;
        let kind = if here > prev && here > next {
            Some(ExtremumKind::Max)
        } else if here < prev && here < next {
            Some(ExtremumKind::Min)
        } else {
            None
        };
        if let Some(kind) = kind {
            let (r_location, value) = quadratic_vertex(series[i - 1], series[i], series[end + 1]);
            out.push(ExtremumRecord {
                r_location,
                value,
                kind,
            });
        }
        i = end + 1;
    }
    Ok(out)
}

/// The first local maximum of the vacuum probability after its first local
/// minimum: the oscillation period point.
pub fn first_return(trajectory: &Trajectory) -> Result<ExtremumRecord> {
    let series = trajectory.vacuum_probability_series();
    let extrema = find_extrema(&series)?;
    let first_min = extrema
        .iter()
        .position(|e| e.kind == ExtremumKind::Min)
        .ok_or(Error::NoReturnFound)?;
    extrema[first_min..]
        .iter()
        .find(|e| e.kind == ExtremumKind::Max)
        .copied()
        .ok_or(Error::NoReturnFound)
}
