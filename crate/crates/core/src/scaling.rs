//! Truncation-size and order sweeps, and the least-squares fitting toolkit:
//! power law, logarithmic, exponential-in-order, and gap extrapolation.
//!
//! All fits are plain linear least squares in transformed coordinates;
//! `r_squared` and `residuals` always refer to those coordinates.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{build_generator, subspace_view, Cutoff, Family, GeneratorSpec};
use crate::observables::{find_extrema, first_return, ExtremumKind};
use crate::propagation::{trajectory_observables, StepSchedule};
use crate::spectral::{dominant_gap, eigensystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingQuantity {
    MaxMeanPhoton,
    DominantGap,
}

/// One point of a sweep over truncation size.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub dim: usize,
    pub cutoff: Cutoff,
    pub quantity: ScalingQuantity,
    pub value: f64,
    /// Location of the first-oscillation maximum (MaxMeanPhoton only).
    pub r_at_max: Option<f64>,
}

/// Fitted parameters; the variant doubles as the model tag.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum FitParams {
    /// value = amplitude * N^exponent
    PowerLaw { exponent: f64, amplitude: f64 },
    /// value = slope * ln(N) + intercept
    Logarithmic { slope: f64, intercept: f64 },
    /// value = amplitude * exp(-rate * n)
    ExponentialInOrder { rate: f64, amplitude: f64 },
    /// value = asymptote + coefficient * N^(-exponent)
    GapConvergence {
        asymptote: f64,
        coefficient: f64,
        exponent: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: FitParams,
    pub r_squared: f64,
    /// Residuals in the transformed linear coordinates, input order.
    pub residuals: Vec<f64>,
}

/// Slope, intercept, r_squared and residuals of the least-squares line.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (slope * x + intercept))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r_squared, residuals)
}

fn check_arity(len: usize, needed: usize) -> Result<()> {
    if len < needed {
        return Err(Error::TooFewSamples { needed, got: len });
    }
    Ok(())
}

/// Least squares on (ln N, ln value); the exponent is the slope.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    check_arity(points.len(), 3)?;
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::FitFailure(
            "power-law fit needs strictly positive data".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared, residuals) = linear_fit(&xs, &ys);
    Ok(FitResult {
        params: FitParams::PowerLaw {
            exponent: slope,
            amplitude: intercept.exp(),
        },
        r_squared,
        residuals,
    })
}

/// Least squares on (ln N, value).
pub fn fit_logarithmic(points: &[(f64, f64)]) -> Result<FitResult> {
    check_arity(points.len(), 3)?;
    if points.iter().any(|&(x, _)| x <= 0.0) {
        return Err(Error::FitFailure(
            "logarithmic fit needs positive abscissae".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept, r_squared, residuals) = linear_fit(&xs, &ys);
    Ok(FitResult {
        params: FitParams::Logarithmic { slope, intercept },
        r_squared,
        residuals,
    })
}

/// Least squares on (n, ln value) for value = A e^{-b n}.
pub fn fit_exponential_in_order(points: &[(f64, f64)]) -> Result<FitResult> {
    check_arity(points.len(), 3)?;
    if points.iter().any(|&(_, y)| y <= 0.0) {
        return Err(Error::FitFailure(
            "exponential fit needs strictly positive values".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared, residuals) = linear_fit(&xs, &ys);
    Ok(FitResult {
        params: FitParams::ExponentialInOrder {
            rate: -slope,
            amplitude: intercept.exp(),
        },
        r_squared,
        residuals,
    })
}

const GAP_SCAN_STEP: f64 = 1e-4;
const GAP_MIN_R_SQUARED: f64 = 0.9;

/// Fits value(N) = asymptote + c N^{-beta} by scanning the asymptote below
/// min(value) and keeping the scan point that maximizes the linearity of
/// log(value - asymptote) vs log N.
pub fn extrapolate_gap(points: &[(f64, f64)]) -> Result<FitResult> {
    check_arity(points.len(), 4)?;
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::FitFailure(
            "gap extrapolation needs strictly positive data".into(),
        ));
    }
    let min_value = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let mut best: Option<(f64, FitResult)> = None;
    let steps = (min_value / GAP_SCAN_STEP).floor() as usize;
    for i in 0..steps {
        let asymptote = i as f64 * GAP_SCAN_STEP;
        if points.iter().any(|&(_, y)| y - asymptote <= 0.0) {
            break;
        }
        let ys: Vec<f64> = points.iter().map(|p| (p.1 - asymptote).ln()).collect();
        let (slope, intercept, r_squared, residuals) = linear_fit(&xs, &ys);
        if best.as_ref().map_or(true, |(r, _)| r_squared > *r) {
            best = Some((
                r_squared,
                FitResult {
                    params: FitParams::GapConvergence {
                        asymptote,
                        coefficient: intercept.exp(),
                        exponent: -slope,
                    },
                    r_squared,
                    residuals,
                },
            ));
        }
    }
    match best {
        Some((r, fit)) if r >= GAP_MIN_R_SQUARED => Ok(fit),
        _ => Err(Error::FitFailure(format!(
            "no asymptote below {min_value} linearizes the decay (best r^2 {:.4})",
            best.map_or(f64::NAN, |(r, _)| r)
        ))),
    }
}

fn at_dim<T>(dim: usize, result: Result<T>) -> Result<T> {
    result.map_err(|e| Error::AtDimension {
        dim,
        source: Box::new(e),
    })
}

/// Maximum mean photon number in the first oscillation (and its location)
/// for each truncation size. Dimensions run in parallel.
pub fn sweep_max_mean_photon(
    n: usize,
    dims: &[usize],
    cutoff: Cutoff,
    r_max: f64,
    dr: f64,
) -> Result<Vec<ScalingPoint>> {
    dims.par_iter()
        .map(|&dim| {
            let point = (|| -> Result<ScalingPoint> {
                let spec = GeneratorSpec::new(n, dim, cutoff, Family::Standard)?;
                let gen = build_generator(&spec)?;
                let schedule = StepSchedule::new(r_max, dr)?;
                let traj = trajectory_observables(&gen, &schedule, &[])?;
                // the first oscillation ends where the vacuum probability
                // returns; if that lies beyond r_max, the whole range is the
                // first oscillation
                let window_end = match first_return(&traj) {
                    Ok(ret) => ret.r_location,
                    Err(Error::NoReturnFound) => r_max,
                    Err(e) => return Err(e),
                };
                let best = find_extrema(&traj.mean_photon_series())?
                    .into_iter()
                    .filter(|e| e.kind == ExtremumKind::Max && e.r_location <= window_end)
                    .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
                    .ok_or_else(|| {
                        Error::FitFailure("no mean-photon maximum in first oscillation".into())
                    })?;
                Ok(ScalingPoint {
                    n,
                    dim,
                    cutoff,
                    quantity: ScalingQuantity::MaxMeanPhoton,
                    value: best.value,
                    r_at_max: Some(best.r_location),
                })
            })();
            at_dim(dim, point)
        })
        .collect()
}

/// Dominant gap of the vacuum ladder for each truncation size.
pub fn sweep_dominant_gap(n: usize, dims: &[usize], cutoff: Cutoff) -> Result<Vec<ScalingPoint>> {
    dims.par_iter()
        .map(|&dim| {
            let point = (|| -> Result<ScalingPoint> {
                let spec = GeneratorSpec::new(n, dim, cutoff, Family::Standard)?;
                let gen = build_generator(&spec)?;
                let data = eigensystem(&subspace_view(&gen, 0)?)?;
                Ok(ScalingPoint {
                    n,
                    dim,
                    cutoff,
                    quantity: ScalingQuantity::DominantGap,
                    value: dominant_gap(&data)?,
                    r_at_max: None,
                })
            })();
            at_dim(dim, point)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn power_law_recovers_exact_square() {
        let points: Vec<(f64, f64)> = [2.0, 5.0, 11.0, 31.0].iter().map(|&x| (x, x * x)).collect();
        let fit = fit_power_law(&points).unwrap();
        let FitParams::PowerLaw { exponent, amplitude } = fit.params else {
            panic!("wrong model")
        };
        assert_abs_diff_eq!(exponent, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(amplitude, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn power_law_rejects_nonpositive() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -1.0), (3.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn logarithmic_recovers_exact_slope() {
        let points: Vec<(f64, f64)> = [3.0_f64, 7.0, 20.0, 55.0]
            .iter()
            .map(|&x| (x, 3.0 * x.ln() + 0.4))
            .collect();
        let fit = fit_logarithmic(&points).unwrap();
        let FitParams::Logarithmic { slope, intercept } = fit.params else {
            panic!("wrong model")
        };
        assert_abs_diff_eq!(slope, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn exponential_roundtrip() {
        let (a, b) = (7.3, 1.42);
        let points: Vec<(f64, f64)> = (3..=6)
            .map(|n| (n as f64, a * (-b * n as f64).exp()))
            .collect();
        let fit = fit_exponential_in_order(&points).unwrap();
        let FitParams::ExponentialInOrder { rate, amplitude } = fit.params else {
            panic!("wrong model")
        };
        assert_abs_diff_eq!(rate, b, epsilon = 1e-10);
        assert_abs_diff_eq!(amplitude, a, epsilon = 1e-9);
    }

    #[test]
    fn gap_extrapolation_roundtrip() {
        let points: Vec<(f64, f64)> = [500.0_f64, 1000.0, 2000.0, 4000.0, 8000.0]
            .iter()
            .map(|&x| (x, 3.5 + 10.0 * x.powf(-0.7)))
            .collect();
        let fit = extrapolate_gap(&points).unwrap();
        let FitParams::GapConvergence { asymptote, coefficient, exponent } = fit.params else {
            panic!("wrong model")
        };
        assert_abs_diff_eq!(asymptote, 3.5, epsilon = 1e-3);
        assert!((exponent - 0.7).abs() < 0.02);
        assert!((coefficient - 10.0).abs() < 0.5);
    }

    #[test]
    fn gap_extrapolation_rejects_hopeless_data() {
        // alternating values: no asymptote linearizes this
        let points = vec![(100.0, 2.0), (200.0, 3.0), (400.0, 2.0), (800.0, 3.0)];
        assert!(extrapolate_gap(&points).is_err());
    }

    #[test]
    fn fits_are_order_invariant() {
        let points = vec![(600.0, 21.0), (1200.0, 30.5), (3000.0, 49.0), (6000.0, 71.0)];
        let mut shuffled = points.clone();
        shuffled.swap(0, 3);
        shuffled.swap(1, 2);
        let a = fit_power_law(&points).unwrap();
        let b = fit_power_law(&shuffled).unwrap();
        let FitParams::PowerLaw { exponent: ea, .. } = a.params else { panic!() };
        let FitParams::PowerLaw { exponent: eb, .. } = b.params else { panic!() };
        assert_eq!(ea, eb);
        assert_eq!(a.r_squared, b.r_squared);
    }

    #[test]
    fn log_data_prefers_log_model_over_one_decade() {
        let points: Vec<(f64, f64)> = [100.0_f64, 180.0, 320.0, 560.0, 1000.0]
            .iter()
            .map(|&x| (x, 2.0 * x.ln() + 1.0))
            .collect();
        let log_fit = fit_logarithmic(&points).unwrap();
        let pow_fit = fit_power_law(&points).unwrap();
        assert!(log_fit.r_squared > pow_fit.r_squared);
    }

    #[test]
    fn trisqueeze_peak_location_approaches_balanced_point() {
        // the argmax creeps upward with truncation (0.79 at dim 300, 0.85 at
        // dim 6000) toward its large-size limit near 0.86
        let points = sweep_max_mean_photon(3, &[300, 600], Cutoff::Hard, 1.2, 0.01).unwrap();
        for p in &points {
            let r = p.r_at_max.unwrap();
            assert!((0.75..0.88).contains(&r), "dim {}: r_at_max {r}", p.dim);
            assert!(p.value > 0.0);
        }
        assert!(points[1].r_at_max.unwrap() > points[0].r_at_max.unwrap());
        assert!(points[1].value > points[0].value);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let a = sweep_max_mean_photon(3, &[300, 600], Cutoff::Soft, 1.2, 0.01).unwrap();
        let b = sweep_max_mean_photon(3, &[300, 600], Cutoff::Soft, 1.2, 0.01).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
            assert_eq!(x.r_at_max.unwrap().to_bits(), y.r_at_max.unwrap().to_bits());
        }
    }

    #[test]
    fn gap_sweep_decreases_with_dimension() {
        let points = sweep_dominant_gap(3, &[300, 600, 1200], Cutoff::Hard).unwrap();
        assert!(points[0].value > points[1].value);
        assert!(points[1].value > points[2].value);
        for p in &points {
            assert!(p.value > 3.528);
        }
    }

    #[test]
    fn sweep_errors_carry_offending_dimension() {
        let err = sweep_dominant_gap(3, &[300, 601], Cutoff::Hard).unwrap_err();
        match err {
            Error::AtDimension { dim, .. } => assert_eq!(dim, 601),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
