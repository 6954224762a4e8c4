//! Closed-form baselines: coherent and two-photon squeezed vacuum results,
//! the momentum-power mean-photon law, and the classical growth trajectory.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::StateVector;

/// Coherent state |r> truncated to `dim` amplitudes and renormalized:
/// c_k = e^{-r^2/2} r^k / sqrt(k!).
pub fn coherent_amplitudes(r: f64, dim: usize) -> Result<StateVector> {
    if r * r > dim as f64 / 4.0 {
        return Err(Error::InvalidSpec(format!(
            "dimension {dim} too small for coherent amplitude {r}: need r^2 <= dim/4"
        )));
    }
    let mut amps = vec![Complex64::ZERO; dim];
    let mut t = (-r * r / 2.0).exp();
    for (k, a) in amps.iter_mut().enumerate() {
        *a = Complex64::new(t, 0.0);
        t *= r / ((k + 1) as f64).sqrt();
    }
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(amps)
}

/// Mean photon number of the two-photon squeezed vacuum: sinh^2(2r).
///
/// The generator exp{r[(a^dag)^2 - a^2]} carries no 1/2, so the effective
/// squeeze parameter relative to the textbook convention is 2r.
pub fn squeezed_vacuum_mean_photon(r: f64) -> f64 {
    (2.0 * r).sinh().powi(2)
}

/// Product m(m-2)...1 for odd m, with (-1)!! = 1.
pub fn double_factorial(m: i64) -> Result<u64> {
    if m < -1 || m % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "double factorial defined here for odd m >= -1, got {m}"
        )));
    }
    let mut acc: u64 = 1;
    let mut k = m;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    Ok(acc)
}

/// Small-r mean photon number under the momentum-power generator p^n:
/// (2n-3)!! n^2 r^2.
pub fn pn_mean_photon(n: usize, r: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    let df = double_factorial(2 * n as i64 - 3)? as f64;
    Ok(df * (n * n) as f64 * r * r)
}

/// Parameters of the classical growth equation dx/dt = rate * x^{n/2}.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalParams {
    rate: f64,
    x0: f64,
    n: usize,
}

impl ClassicalParams {
    pub fn new(rate: f64, x0: f64, n: usize) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter("rate must be positive".into()));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        if x0 < 0.0 || (n >= 2 && x0 == 0.0) {
            return Err(Error::InvalidParameter(
                "initial position must be nonnegative, and nonzero for n >= 2".into(),
            ));
        }
        Ok(Self { rate, x0, n })
    }

    /// Divergence time of the n >= 3 solution, if any.
    pub fn divergence_time(&self) -> Option<f64> {
        if self.n < 3 {
            return None;
        }
        let q = self.n as f64 / 2.0 - 1.0;
        Some(self.x0.powf(-q) / (q * self.rate))
    }
}

/// Which closed-form branch set to evaluate.
///
/// `AsPrinted` keeps the published n=1 branch (sqrt(x0) + 2 rate t)^2 even
/// though integrating dx/dt = rate sqrt(x) directly gives the `OdeExact`
/// branch (sqrt(x0) + rate t / 2)^2; the two differ by a constant time
/// rescaling and agree for n >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryVariant {
    AsPrinted,
    OdeExact,
}

/// Position x(t) of the classical analogue.
pub fn classical_trajectory(
    params: &ClassicalParams,
    variant: TrajectoryVariant,
    t: f64,
) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter("time must be nonnegative".into()));
    }
    let ClassicalParams { rate, x0, n } = *params;
    match n {
        1 => {
            let speed = match variant {
                TrajectoryVariant::AsPrinted => 2.0 * rate,
                TrajectoryVariant::OdeExact => rate / 2.0,
            };
            Ok((x0.sqrt() + speed * t).powi(2))
        }
        2 => Ok(x0 * (rate * t).exp()),
        _ => {
            let t_star = params.divergence_time().unwrap();
            if t >= t_star {
                return Err(Error::Divergence { t_star, t });
            }
            let q = n as f64 / 2.0 - 1.0;
            Ok((x0.powf(-q) - q * rate * t).powf(-1.0 / q))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{build_generator, Cutoff, Family, GeneratorSpec};
    use crate::observables::{fidelity, mean_photon};
    use crate::propagation::evolve_spectral;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coherent_zero_is_vacuum() {
        let s = coherent_amplitudes(0.0, 8).unwrap();
        assert_eq!(s.amplitude(0).re, 1.0);
        assert_eq!(mean_photon(&s), 0.0);
    }

    #[test]
    fn coherent_mean_photon_is_r_squared() {
        for r in [0.5, 1.0, 2.0] {
            let s = coherent_amplitudes(r, 64).unwrap();
            assert_abs_diff_eq!(mean_photon(&s), r * r, epsilon = 1e-12);
        }
        assert!(coherent_amplitudes(3.0, 16).is_err());
    }

    #[test]
    fn coherent_matches_displaced_vacuum() {
        let spec = GeneratorSpec::new(1, 1000, Cutoff::Hard, Family::Standard).unwrap();
        let g = build_generator(&spec).unwrap();
        let evolved = evolve_spectral(&StateVector::vacuum(1000), &g, 2.0).unwrap();
        let closed = coherent_amplitudes(2.0, 1000).unwrap();
        assert!(fidelity(&evolved, &closed).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn squeezed_vacuum_closed_form() {
        assert_eq!(squeezed_vacuum_mean_photon(0.0), 0.0);
        assert_abs_diff_eq!(squeezed_vacuum_mean_photon(1.0), 13.154, epsilon = 5e-4);
        // small-r limit matches the perturbative law at n=2
        let r = 1e-4;
        assert_abs_diff_eq!(
            squeezed_vacuum_mean_photon(r),
            pn_mean_photon(2, r).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn squeezed_vacuum_matches_propagation() {
        let spec = GeneratorSpec::new(2, 4000, Cutoff::Hard, Family::Standard).unwrap();
        let g = build_generator(&spec).unwrap();
        let evolved = evolve_spectral(&StateVector::vacuum(4000), &g, 1.0).unwrap();
        let expect = squeezed_vacuum_mean_photon(1.0);
        assert!((mean_photon(&evolved) - expect).abs() / expect < 1e-4);
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1).unwrap(), 1);
        assert_eq!(double_factorial(1).unwrap(), 1);
        assert_eq!(double_factorial(5).unwrap(), 15);
        assert_eq!(double_factorial(7).unwrap(), 105);
        assert!(double_factorial(4).is_err());
        assert!(double_factorial(-3).is_err());
    }

    #[test]
    fn perturbative_mean_photon_values() {
        assert_abs_diff_eq!(pn_mean_photon(3, 0.5).unwrap(), 6.75, epsilon = 1e-14);
        assert_abs_diff_eq!(pn_mean_photon(4, 0.1).unwrap(), 2.4, epsilon = 1e-14);
        assert_abs_diff_eq!(pn_mean_photon(1, 0.7).unwrap(), 0.49, epsilon = 1e-14);
    }

    #[test]
    fn momentum_power_dynamics_match_perturbative_law() {
        // The n=4 state's Fock tail decays only like exp(-1.3 k^(1/3)), so a
        // 1e-10 tail would need dim near 4300; dim 1600 reaches 5e-8 which
        // already puts the truncation error far below the 2% comparison band.
        for (n, dim, tail_gate) in [(3usize, 200usize, 1e-10), (4, 1600, 1e-7)] {
            let spec = GeneratorSpec::new(n, dim, Cutoff::Hard, Family::MomentumPower).unwrap();
            let g = build_generator(&spec).unwrap();
            for r in [0.02, 0.05, 0.1] {
                let evolved = evolve_spectral(&StateVector::vacuum(dim), &g, r).unwrap();
                // tail must be negligible for the comparison to be fair
                let tail: f64 = evolved.amplitudes()[dim - 10..]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum();
                assert!(tail < tail_gate, "n={n} r={r} tail {tail}");
                let expect = pn_mean_photon(n, r).unwrap();
                let got = mean_photon(&evolved);
                assert!(
                    (got - expect).abs() / expect < 0.02,
                    "n={n} r={r}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn designer_generator_tracks_two_photon_amplitudes() {
        let dim3 = 600; // 200 rungs
        let dim2 = 400;
        let designer = build_generator(
            &GeneratorSpec::new(3, dim3, Cutoff::Hard, Family::DesignerTrisqueeze).unwrap(),
        )
        .unwrap();
        let standard2 =
            build_generator(&GeneratorSpec::new(2, dim2, Cutoff::Hard, Family::Standard).unwrap())
                .unwrap();
        for r in [0.25, 0.6, 1.0] {
            let a = evolve_spectral(&StateVector::vacuum(dim3), &designer, r).unwrap();
            let b = evolve_spectral(&StateVector::vacuum(dim2), &standard2, r).unwrap();
            for j in 0..150 {
                let da = (a.amplitude(3 * j) - b.amplitude(2 * j)).norm();
                assert!(da <= 1e-10, "r={r} rung {j}: diff {da}");
            }
        }
    }

    #[test]
    fn classical_params_validation() {
        assert!(ClassicalParams::new(0.0, 1.0, 2).is_err());
        assert!(ClassicalParams::new(1.0, -1.0, 1).is_err());
        assert!(ClassicalParams::new(1.0, 0.0, 2).is_err());
        assert!(ClassicalParams::new(1.0, 0.0, 1).is_ok());
    }

    #[test]
    fn classical_trajectory_closed_forms() {
        let p2 = ClassicalParams::new(1.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(
            classical_trajectory(&p2, TrajectoryVariant::OdeExact, 1.0).unwrap(),
            std::f64::consts::E,
            epsilon = 1e-14
        );
        let p4 = ClassicalParams::new(1.0, 1.0, 4).unwrap();
        assert_eq!(p4.divergence_time(), Some(1.0));
        assert!(matches!(
            classical_trajectory(&p4, TrajectoryVariant::OdeExact, 1.0),
            Err(Error::Divergence { .. })
        ));
        for n in [1usize, 2, 3, 4, 6] {
            let p = ClassicalParams::new(0.7, 2.0, n).unwrap();
            for variant in [TrajectoryVariant::AsPrinted, TrajectoryVariant::OdeExact] {
                assert_abs_diff_eq!(
                    classical_trajectory(&p, variant, 0.0).unwrap(),
                    2.0,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn ode_exact_satisfies_growth_equation() {
        let h = 1e-6;
        for n in [1usize, 2, 3, 5] {
            let p = ClassicalParams::new(0.9, 1.3, n).unwrap();
            let t_max = p.divergence_time().map_or(2.0, |t| 0.8 * t);
            for i in 1..8 {
                let t = t_max * i as f64 / 8.0;
                let x = |t| classical_trajectory(&p, TrajectoryVariant::OdeExact, t).unwrap();
                let deriv = (x(t + h) - x(t - h)) / (2.0 * h);
                let expect = 0.9 * x(t).powf(n as f64 / 2.0);
                assert!(
                    (deriv - expect).abs() / expect < 1e-6,
                    "n={n} t={t}: {deriv} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn printed_and_exact_variants_differ_only_for_linear_growth() {
        let p1 = ClassicalParams::new(1.0, 1.0, 1).unwrap();
        let printed = classical_trajectory(&p1, TrajectoryVariant::AsPrinted, 1.0).unwrap();
        let exact = classical_trajectory(&p1, TrajectoryVariant::OdeExact, 1.0).unwrap();
        assert_abs_diff_eq!(printed, 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(exact, 2.25, epsilon = 1e-14);
        let p3 = ClassicalParams::new(1.0, 1.0, 3).unwrap();
        assert_eq!(
            classical_trajectory(&p3, TrajectoryVariant::AsPrinted, 1.0).unwrap(),
            classical_trajectory(&p3, TrajectoryVariant::OdeExact, 1.0).unwrap()
        );
    }
}
