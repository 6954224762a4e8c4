//! Husimi Q and Wigner functions on rectangular phase-space grids.
//!
//! Coordinate convention: alpha = x + i p, so the vacuum Q function has a
//! 1/e^2 radius of 1 in these units. Alternative sqrt(2) conventions rescale
//! the plots.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::StateVector;
use crate::linalg::SymTridiag;

/// Largest Fock index used when evaluating phase-space kernels.
pub const EVALUATION_CAP: usize = 512;

const TAIL_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    Husimi,
    Wigner,
}

/// Rectangular grid over (x, p).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, points_per_axis: usize) -> Result<Self> {
        if !(x_min < x_max) || !(p_min < p_max) {
            return Err(Error::InvalidParameter(
                "grid bounds must satisfy x_min < x_max and p_min < p_max".into(),
            ));
        }
        if points_per_axis < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            p_min,
            p_max,
            points_per_axis,
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        (0..n)
            .map(|i| self.x_min + (self.x_max - self.x_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        (0..n)
            .map(|i| self.p_min + (self.p_max - self.p_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

impl Default for GridSpec {
    /// The default display domain: [-5, 5]^2 with 201 points per axis.
    fn default() -> Self {
        Self {
            x_min: -5.0,
            x_max: 5.0,
            p_min: -5.0,
            p_max: 5.0,
            points_per_axis: 201,
        }
    }
}

/// Real field values over a grid; row-major with p as the outer (row) index.
#[derive(Debug, Clone)]
pub struct PhaseSpaceField {
    grid: GridSpec,
    kind: FieldKind,
    values: Vec<f64>,
}

impl PhaseSpaceField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at grid indices (ix along x, ip along p).
    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.points_per_axis + ix]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid-rule integral of the field over its grid.
    pub fn grid_integral(&self) -> f64 {
        let n = self.grid.points_per_axis;
        let dx = (self.grid.x_max - self.grid.x_min) / (n - 1) as f64;
        let dp = (self.grid.p_max - self.grid.p_min) / (n - 1) as f64;
        let mut total = 0.0;
        for ip in 0..n {
            let wp = if ip == 0 || ip == n - 1 { 0.5 } else { 1.0 };
            for ix in 0..n {
                let wx = if ix == 0 || ix == n - 1 { 0.5 } else { 1.0 };
                total += wp * wx * self.value(ix, ip);
            }
        }
        total * dx * dp
    }
}

/// Smallest truncation K with tail probability below 1e-12, capped at
/// [`EVALUATION_CAP`]. Errors if the cap leaks more than the limit.
fn evaluation_truncation(state: &StateVector) -> Result<usize> {
    let probs: Vec<f64> = state.amplitudes().iter().map(|c| c.norm_sqr()).collect();
    let mut tail = 0.0;
    let mut k = probs.len();
    // walk down while the tail stays below the limit
    while k > 0 {
        let next = tail + probs[k - 1];
        if next >= TAIL_LIMIT {
            break;
        }
        tail = next;
        k -= 1;
    }
    if k > EVALUATION_CAP {
        let leaked: f64 = probs[EVALUATION_CAP..].iter().sum();
        return Err(Error::TailLeak {
            leaked,
            truncation: EVALUATION_CAP,
        });
    }
    Ok(k.max(1))
}

/// Husimi Q(x, p) = (1/pi) |<alpha|psi>|^2 with alpha = x + i p.
pub fn q_function(state: &StateVector, grid: &GridSpec) -> Result<PhaseSpaceField> {
    let trunc = evaluation_truncation(state)?;
    let amps = &state.amplitudes()[..trunc];
    let xs = grid.xs();
    let ps = grid.ps();
    let n = grid.points_per_axis;
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .zip(ps.par_iter())
        .for_each(|(row, &p)| {
            for (ix, &x) in xs.iter().enumerate() {
                row[ix] = husimi_point(amps, x, p);
            }
        });
    Ok(PhaseSpaceField {
        grid: *grid,
        kind: FieldKind::Husimi,
        values,
    })
}

fn husimi_point(amps: &[Complex64], x: f64, p: f64) -> f64 {
    let alpha = Complex64::new(x, p);
    let w = alpha.conj();
    // term_k = e^{-|alpha|^2/2} conj(alpha)^k / sqrt(k!), always bounded by 1
    let mut term = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    let mut acc = Complex64::ZERO;
    for (k, c) in amps.iter().enumerate() {
        acc += term * c;
        term *= w / ((k + 1) as f64).sqrt();
    }
    acc.norm_sqr() / std::f64::consts::PI
}

/// Wigner W(alpha) = (2/pi) sum_k (-1)^k |<k|D(-alpha)|psi>|^2.
///
/// The displaced state D(-alpha)|psi> is computed by unitary evolution: with
/// beta = -alpha = b e^{i theta}, D(beta) = R(theta) exp(b (adag - a))
/// R(-theta), and exp(b (adag - a)) is applied through the eigendecomposition
/// of the (real, gauged) single-photon ladder truncated at a working dimension
/// large enough to hold the displaced support. Every factor is unitary, so
/// the parity sum is a probability-weighted average and the computed values
/// respect the universal bounds |W| <= 2/pi up to rounding.
pub fn wigner_function(state: &StateVector, grid: &GridSpec) -> Result<PhaseSpaceField> {
    let trunc = evaluation_truncation(state)?;
    let amps = &state.amplitudes()[..trunc];
    let xs = grid.xs();
    let ps = grid.ps();
    let n = grid.points_per_axis;
    let b_max = {
        let x = xs[0].abs().max(xs[n - 1].abs());
        let p = ps[0].abs().max(ps[n - 1].abs());
        x.hypot(p)
    };
    let k_work = displacement_work_dim(trunc, b_max);
    let ladder = SymTridiag::new(
        vec![0.0; k_work],
        (1..k_work).map(|k| (k as f64).sqrt()).collect(),
    );
    let eigen = ladder.eigh()?;
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .zip(ps.par_iter())
        .for_each(|(row, &p)| {
            let mut w = vec![Complex64::ZERO; trunc];
            let mut u = vec![Complex64::ZERO; k_work];
            let mut phi = vec![Complex64::ZERO; k_work];
            for (ix, &x) in xs.iter().enumerate() {
                row[ix] = wigner_point(amps, x, p, &eigen, &mut w, &mut u, &mut phi);
            }
        });
    Ok(PhaseSpaceField {
        grid: *grid,
        kind: FieldKind::Wigner,
        values,
    })
}

/// Working dimension holding the support of any grid state displaced by up to
/// `b_max`: mean photon number at most (sqrt(trunc) + b_max)^2, plus a tail
/// margin of several standard deviations.
fn displacement_work_dim(trunc: usize, b_max: f64) -> usize {
    let reach = (trunc as f64).sqrt() + b_max;
    let mean = reach * reach;
    (mean + 8.0 * (mean.sqrt() + 1.0) + 16.0).ceil() as usize
}

#[allow(clippy::too_many_arguments)]
fn wigner_point(
    amps: &[Complex64],
    x: f64,
    p: f64,
    eigen: &crate::linalg::TridiagEigen,
    w: &mut [Complex64],
    u: &mut [Complex64],
    phi: &mut [Complex64],
) -> f64 {
    let beta = -Complex64::new(x, p); // displacement D(-alpha)
    let b = beta.norm();
    let theta = beta.arg();
    // rotate into the real-displacement frame and apply the (-i)^m gauge that
    // makes the ladder real symmetric: w_m = ((-i) e^{-i theta})^m psi_m
    let step = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -theta);
    let mut ph = Complex64::new(1.0, 0.0);
    for (wm, am) in w.iter_mut().zip(amps) {
        *wm = ph * am;
        ph *= step;
    }
    let m = eigen.dim();
    let vecs = eigen.vectors_flat();
    let vals = eigen.values();
    // u = e^{-i lambda b} V^T w; w is supported on the first trunc rungs
    for (j, (uj, lam)) in u.iter_mut().zip(vals).enumerate() {
        let col = &vecs[j * m..j * m + w.len()];
        let mut acc = Complex64::ZERO;
        for (vk, wk) in col.iter().zip(w.iter()) {
            acc += wk * *vk;
        }
        *uj = acc * Complex64::from_polar(1.0, -lam * b);
    }
    // phi = V u: the displaced state's Fock amplitudes up to unimodular phases
    phi.fill(Complex64::ZERO);
    for (j, uj) in u.iter().enumerate() {
        if uj.norm_sqr() < 1e-34 {
            continue;
        }
        let col = &vecs[j * m..(j + 1) * m];
        for (pk, vk) in phi.iter_mut().zip(col) {
            *pk += uj * *vk;
        }
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for pk in phi.iter() {
        sum += sign * pk.norm_sqr();
        sign = -sign;
    }
    sum * 2.0 / std::f64::consts::PI
}

/// Sum_k (-1)^k P_k; equals (pi/2) W(0, 0).
pub fn parity_expectation(state: &StateVector) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { c.norm_sqr() } else { -c.norm_sqr() })
        .sum()
}

/// 1 - |<psi| R(2 pi / n) |psi>|^2 where R(theta) multiplies c_k by
/// e^{i theta k}. Zero exactly when the support lies on multiples of n.
pub fn rotation_symmetry_error(state: &StateVector, n: usize) -> f64 {
    let theta = 2.0 * std::f64::consts::PI / n as f64;
    let overlap: Complex64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| Complex64::from_polar(c.norm_sqr(), theta * k as f64))
        .sum();
    (1.0 - overlap.norm_sqr()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{build_generator, Cutoff, Family, GeneratorSpec, StateVector};
    use crate::propagation::evolve_spectral;
    use crate::reference::coherent_amplitudes;
    use approx::assert_abs_diff_eq;

    const PI: f64 = std::f64::consts::PI;

    fn small_grid() -> GridSpec {
        GridSpec::new(-5.0, 5.0, -5.0, 5.0, 81).unwrap()
    }

    fn trisqueezed(r: f64) -> StateVector {
        let spec = GeneratorSpec::new(3, 300, Cutoff::Soft, Family::Standard).unwrap();
        let g = build_generator(&spec).unwrap();
        evolve_spectral(&StateVector::vacuum(300), &g, r).unwrap()
    }

    #[test]
    fn vacuum_husimi_peak() {
        let q = q_function(&StateVector::vacuum(8), &small_grid()).unwrap();
        // origin is a grid point of the 81-point symmetric grid
        assert_abs_diff_eq!(q.value(40, 40), 1.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn coherent_husimi_peak_location() {
        let beta = 2.0;
        let state = coherent_amplitudes(beta, 64).unwrap();
        let q = q_function(&state, &small_grid()).unwrap();
        let grid = small_grid();
        let xs = grid.xs();
        let ps = grid.ps();
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for ip in 0..grid.points_per_axis {
            for ix in 0..grid.points_per_axis {
                if q.value(ix, ip) > best.2 {
                    best = (ix, ip, q.value(ix, ip));
                }
            }
        }
        assert!((xs[best.0] - beta).abs() < 0.0626);
        assert!(ps[best.1].abs() < 0.0626);
        assert_abs_diff_eq!(best.2, 1.0 / PI, epsilon = 2e-3);
    }

    #[test]
    fn husimi_cauchy_schwarz_bound() {
        for state in [trisqueezed(0.5), coherent_amplitudes(1.5, 64).unwrap()] {
            let q = q_function(&state, &small_grid()).unwrap();
            assert!(q.max_value() <= 1.0 / PI + 1e-12);
        }
    }

    #[test]
    fn vacuum_wigner_peak() {
        let w = wigner_function(&StateVector::vacuum(8), &small_grid()).unwrap();
        assert_abs_diff_eq!(w.value(40, 40), 2.0 / PI, epsilon = 1e-13);
    }

    #[test]
    fn single_photon_wigner_origin() {
        let one = StateVector::basis_state(8, 1).unwrap();
        let w = wigner_function(&one, &small_grid()).unwrap();
        assert_abs_diff_eq!(w.value(40, 40), -2.0 / PI, epsilon = 1e-13);
    }

    #[test]
    fn trisqueezed_wigner_negativity() {
        let w = wigner_function(&trisqueezed(0.5), &small_grid()).unwrap();
        assert!(w.min_value() < 0.0);
        // Wigner values stay within the universal bounds
        assert!(w.min_value() >= -2.0 / PI - 1e-12);
        assert!(w.max_value() <= 2.0 / PI + 1e-12);
    }

    #[test]
    fn wigner_origin_matches_parity() {
        for state in [
            trisqueezed(0.7),
            coherent_amplitudes(1.0, 64).unwrap(),
            StateVector::basis_state(16, 3).unwrap(),
        ] {
            let grid = small_grid();
            let w = wigner_function(&state, &grid).unwrap();
            let parity = parity_expectation(&state);
            assert_abs_diff_eq!(w.value(40, 40), 2.0 / PI * parity, epsilon = 1e-12);
        }
    }

    #[test]
    fn wigner_integral_is_unity_for_in_domain_states() {
        // the unit-integral invariant only applies to states whose Husimi
        // mass sits inside the domain; that is checked (not assumed) first
        for state in [
            coherent_amplitudes(1.0, 64).unwrap(),
            StateVector::basis_state(16, 3).unwrap(),
        ] {
            let grid = GridSpec::new(-5.0, 5.0, -5.0, 5.0, 121).unwrap();
            let q = q_function(&state, &grid).unwrap();
            assert!(q.grid_integral() >= 1.0 - 1e-6, "state leaks the domain");
            let w = wigner_function(&state, &grid).unwrap();
            assert_abs_diff_eq!(w.grid_integral(), 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn parity_basics() {
        assert_eq!(parity_expectation(&StateVector::vacuum(4)), 1.0);
        assert_eq!(
            parity_expectation(&StateVector::basis_state(4, 1).unwrap()),
            -1.0
        );
        // n=2 evolved vacuum has support on even k only
        let spec = GeneratorSpec::new(2, 400, Cutoff::Hard, Family::Standard).unwrap();
        let g = build_generator(&spec).unwrap();
        let s = evolve_spectral(&StateVector::vacuum(400), &g, 0.3).unwrap();
        assert_abs_diff_eq!(parity_expectation(&s), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_symmetry_of_trisqueezed_states() {
        for r in [0.3, 0.86, 1.5] {
            assert!(rotation_symmetry_error(&trisqueezed(r), 3) <= 1e-12);
        }
        assert_eq!(rotation_symmetry_error(&StateVector::vacuum(8), 5), 0.0);
        let coherent = coherent_amplitudes(1.0, 64).unwrap();
        assert!(rotation_symmetry_error(&coherent, 3) > 0.01);
    }

    #[test]
    fn q_field_invariant_under_symmetry_rotation() {
        // bilinear interpolation of the rotated grid against the field
        let state = trisqueezed(0.7);
        let grid = GridSpec::default();
        let q = q_function(&state, &grid).unwrap();
        let xs = grid.xs();
        let ps = grid.ps();
        let step = xs[1] - xs[0];
        let theta = 2.0 * PI / 3.0;
        let (sin_t, cos_t) = theta.sin_cos();
        let mut worst = 0.0_f64;
        for ip in (0..grid.points_per_axis).step_by(4) {
            for ix in (0..grid.points_per_axis).step_by(4) {
                let (x, p) = (xs[ix], ps[ip]);
                let rx = cos_t * x - sin_t * p;
                let rp = sin_t * x + cos_t * p;
                if rx < xs[0] || rx > xs[xs.len() - 1] || rp < ps[0] || rp > ps[ps.len() - 1] {
                    continue;
                }
                let fx = (rx - xs[0]) / step;
                let fp = (rp - ps[0]) / step;
                let (i0, j0) = (fx.floor() as usize, fp.floor() as usize);
                let (i1, j1) = ((i0 + 1).min(xs.len() - 1), (j0 + 1).min(ps.len() - 1));
                let (tx, tp) = (fx - i0 as f64, fp - j0 as f64);
                let interp = (1.0 - tp)
                    * ((1.0 - tx) * q.value(i0, j0) + tx * q.value(i1, j0))
                    + tp * ((1.0 - tx) * q.value(i0, j1) + tx * q.value(i1, j1));
                worst = worst.max((interp - q.value(ix, ip)).abs());
            }
        }
        assert!(worst <= 1e-3, "rotation symmetry error {worst}");
    }

    #[test]
    fn six_comparable_lobes_at_balanced_r() {
        let state = trisqueezed(0.86);
        let grid = GridSpec::new(-5.0, 5.0, -5.0, 5.0, 121).unwrap();
        let q = q_function(&state, &grid).unwrap();
        let peaks = grid_local_maxima(&q, 0.8);
        assert!(peaks.len() >= 6, "found only {} peaks", peaks.len());
        let top: Vec<f64> = peaks.iter().take(6).map(|&(_, _, v)| v).collect();
        for i in 0..6 {
            for j in 0..6 {
                let ratio = top[i] / top[j];
                assert!(
                    ratio < 1.25 && ratio > 1.0 / 1.25,
                    "lobe ratio {ratio} out of bounds"
                );
            }
        }
    }

    /// Local maxima (x, p, value) separated by at least `min_sep`, strongest
    /// first. Test-only oracle helper.
    fn grid_local_maxima(field: &PhaseSpaceField, min_sep: f64) -> Vec<(f64, f64, f64)> {
        let grid = field.grid();
        let n = grid.points_per_axis;
        let xs = grid.xs();
        let ps = grid.ps();
        let mut candidates = Vec::new();
        for ip in 1..n - 1 {
            for ix in 1..n - 1 {
                let v = field.value(ix, ip);
                let mut is_max = true;
                for dp in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dp == 0 && dx == 0 {
                            continue;
                        }
                        if field.value((ix as i64 + dx) as usize, (ip as i64 + dp) as usize) >= v {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    candidates.push((xs[ix], ps[ip], v));
                }
            }
        }
        candidates.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
        let mut kept: Vec<(f64, f64, f64)> = Vec::new();
        for c in candidates {
            if kept
                .iter()
                .all(|k| ((k.0 - c.0).powi(2) + (k.1 - c.1).powi(2)).sqrt() >= min_sep)
            {
                kept.push(c);
            }
        }
        kept
    }

    #[test]
    fn tail_condition_violation_reports_leak() {
        // uniform state over 600 amplitudes has a fat tail beyond 512
        let amp = num_complex::Complex64::new((1.0 / 600.0_f64).sqrt(), 0.0);
        let state = StateVector::from_amplitudes(vec![amp; 600]).unwrap();
        let err = q_function(&state, &small_grid()).unwrap_err();
        assert!(matches!(err, Error::TailLeak { .. }));
    }
}
