//! Evolution under U_n(r) = exp(-i r H_n): repeated small-step propagation
//! and exact spectral propagation, with trajectory recording.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{Family, GeneratorMatrix, StateVector, SubspaceView};
use crate::linalg::TridiagEigen;

/// Above this subspace size, trajectory drivers switch from repeated
/// small-step application to direct spectral sampling.
pub const STEPWISE_RUNG_LIMIT: usize = 12_000;

/// Squeezing-parameter stepping plan. The paper-fixed default step is 0.01.
#[derive(Debug, Clone, Copy)]
pub struct StepSchedule {
    r_max: f64,
    dr: f64,
    record_stride: usize,
    record_snapshots: bool,
}

impl StepSchedule {
    pub fn new(r_max: f64, dr: f64) -> Result<Self> {
        if !(dr > 0.0) {
            return Err(Error::InvalidSchedule(format!("dr must be > 0, got {dr}")));
        }
        if !(r_max >= 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "r_max must be >= 0, got {r_max}"
            )));
        }
        let steps_exact = r_max / dr;
        let steps = steps_exact.round();
        if (steps_exact - steps).abs() > 1e-9 * steps_exact.max(1.0) {
            return Err(Error::InvalidSchedule(format!(
                "r_max / dr = {steps_exact} does not round to an integer step count"
            )));
        }
        Ok(Self {
            r_max,
            dr,
            record_stride: 1,
            record_snapshots: false,
        })
    }

    /// Schedule with the default dr = 0.01.
    pub fn with_default_step(r_max: f64) -> Result<Self> {
        Self::new(r_max, 0.01)
    }

    pub fn record_every(mut self, stride: usize) -> Result<Self> {
        if stride < 1 {
            return Err(Error::InvalidSchedule("record stride must be >= 1".into()));
        }
        self.record_stride = stride;
        Ok(self)
    }

    pub fn record_snapshots(mut self, keep: bool) -> Self {
        self.record_snapshots = keep;
        self
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    pub fn steps(&self) -> usize {
        (self.r_max / self.dr).round() as usize
    }
}

/// Observables recorded at one sampled r value.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub r: f64,
    /// Occupation probabilities of the tracked photon indices, in order.
    pub occupations: Vec<f64>,
    pub mean_photon: f64,
    pub vacuum_prob: f64,
    pub norm: f64,
}

/// Sampled squeezing-parameter values with recorded observables.
#[derive(Debug, Clone)]
pub struct Trajectory {
    tracked_k: Vec<usize>,
    records: Vec<SampleRecord>,
    snapshots: Option<Vec<StateVector>>,
    final_state: StateVector,
}

impl Trajectory {
    pub fn tracked_k(&self) -> &[usize] {
        &self.tracked_k
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn r_samples(&self) -> Vec<f64> {
        self.records.iter().map(|rec| rec.r).collect()
    }

    pub fn snapshots(&self) -> Option<&[StateVector]> {
        self.snapshots.as_deref()
    }

    pub fn final_state(&self) -> &StateVector {
        &self.final_state
    }

    pub fn vacuum_probability_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|rec| (rec.r, rec.vacuum_prob)).collect()
    }

    pub fn mean_photon_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|rec| (rec.r, rec.mean_photon)).collect()
    }

    /// Series of the occupation probability of tracked photon index `k`.
    pub fn occupation_series(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        let pos = self
            .tracked_k
            .iter()
            .position(|&t| t == k)
            .ok_or(Error::InvalidParameter(format!("photon index {k} is not tracked")))?;
        Ok(self
            .records
            .iter()
            .map(|rec| (rec.r, rec.occupations[pos]))
            .collect())
    }

    /// Largest |norm - 1| over all recorded samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.records
            .iter()
            .map(|rec| (rec.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense step unitary over one invariant subspace, in the Fock rung basis.
#[derive(Debug, Clone)]
pub struct StepOperator {
    dim: usize,
    data: Vec<Complex64>, // row-major
}

impl StepOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex64::ZERO; self.dim];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            *yi = row.iter().zip(x).map(|(u, xk)| u * xk).sum();
        }
        y
    }
}

fn gauge_phase(j: usize) -> Complex64 {
    // (-i)^j
    match j % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// exp(-i dr M) for the subspace matrix M, via the gauge-reduced
/// real-symmetric-tridiagonal eigendecomposition.
pub fn step_operator(view: &SubspaceView, dr: f64) -> Result<StepOperator> {
    if dr < 0.0 {
        return Err(Error::InvalidParameter("dr must be >= 0".into()));
    }
    let eigen = view.matrix().eigh()?;
    let m = view.rungs();
    // W = V e^{-i lambda dr}
    let mut w = vec![Complex64::ZERO; m * m];
    for col in 0..m {
        let phase = Complex64::from_polar(1.0, -eigen.values()[col] * dr);
        for row in 0..m {
            w[col * m + row] = phase * eigen.vector(col)[row];
        }
    }
    // U_gauged = W V^T ; ungauge with D = diag((-i)^j): U = D^-1 U_gauged D
    let mut data = vec![Complex64::ZERO; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Complex64::ZERO;
            for l in 0..m {
                acc += w[l * m + i] * eigen.vector(l)[j];
            }
            data[i * m + j] = gauge_phase(i).conj() * acc * gauge_phase(j);
        }
    }
    Ok(StepOperator { dim: m, data })
}

/// Per-subspace spectral propagator, caching the eigendecomposition.
struct ResiduePropagator {
    residue: usize,
    order: usize,
    eigen: TridiagEigen,
}

impl ResiduePropagator {
    fn build(view: &SubspaceView) -> Result<Self> {
        Ok(Self {
            residue: view.residue(),
            order: view.order(),
            eigen: view.matrix().eigh()?,
        })
    }

    fn gather(&self, state: &StateVector) -> Vec<Complex64> {
        let m = self.eigen.dim();
        (0..m)
            .map(|j| gauge_phase(j) * state.amplitude(self.residue + j * self.order))
            .collect()
    }

    fn scatter(&self, gauged: &[Complex64], out: &mut [Complex64]) {
        for (j, g) in gauged.iter().enumerate() {
            out[self.residue + j * self.order] = gauge_phase(j).conj() * g;
        }
    }

    fn advance(&self, gauged: &[Complex64], r: f64) -> Vec<Complex64> {
        self.eigen.apply_exp(gauged, r, |lam| lam)
    }
}

enum Propagator {
    /// Residue-class propagators for Standard/Designer families.
    Subspaces(Vec<ResiduePropagator>),
    /// Full-space propagator for MomentumPower: eigen of the gauged p matrix,
    /// spectrum of H follows as mu^n.
    Momentum { eigen: TridiagEigen, order: usize },
}

impl Propagator {
    fn build(gen: &GeneratorMatrix, state: &StateVector) -> Result<Self> {
        match gen.spec().family {
            Family::Standard | Family::DesignerTrisqueeze => {
                let n = gen.order();
                let mut props = Vec::new();
                for s in 0..n {
                    let populated = state
                        .amplitudes()
                        .iter()
                        .skip(s)
                        .step_by(n)
                        .any(|c| c.norm_sqr() > 0.0);
                    if populated {
                        let view = crate::fockspace::subspace_view(gen, s)?;
                        props.push(ResiduePropagator::build(&view)?);
                    }
                }
                Ok(Propagator::Subspaces(props))
            }
            Family::MomentumPower => {
                let tp = gen
                    .p_gauge()
                    .expect("momentum_power generator carries its gauged p matrix");
                Ok(Propagator::Momentum {
                    eigen: tp.eigh()?,
                    order: gen.order(),
                })
            }
        }
    }

    fn max_rungs(&self) -> usize {
        match self {
            Propagator::Subspaces(props) => {
                props.iter().map(|p| p.eigen.dim()).max().unwrap_or(0)
            }
            Propagator::Momentum { eigen, .. } => eigen.dim(),
        }
    }
}

fn gauged_components(prop: &Propagator, state: &StateVector) -> Vec<Vec<Complex64>> {
    match prop {
        Propagator::Subspaces(props) => props.iter().map(|p| p.gather(state)).collect(),
        Propagator::Momentum { eigen, .. } => {
            let m = eigen.dim();
            vec![(0..m)
                .map(|k| gauge_phase(k) * state.amplitude(k))
                .collect()]
        }
    }
}

fn assemble(prop: &Propagator, components: &[Vec<Complex64>], dim: usize) -> StateVector {
    let mut amps = vec![Complex64::ZERO; dim];
    match prop {
        Propagator::Subspaces(props) => {
            for (p, comp) in props.iter().zip(components) {
                p.scatter(comp, &mut amps);
            }
        }
        Propagator::Momentum { .. } => {
            for (k, g) in components[0].iter().enumerate() {
                amps[k] = gauge_phase(k).conj() * g;
            }
        }
    }
    StateVector::from_raw(amps)
}

fn advance_components(prop: &Propagator, components: &mut [Vec<Complex64>], r: f64) {
    match prop {
        Propagator::Subspaces(props) => {
            for (p, comp) in props.iter().zip(components.iter_mut()) {
                *comp = p.advance(comp, r);
            }
        }
        Propagator::Momentum { eigen, order } => {
            let n = *order as i32;
            components[0] = eigen.apply_exp(&components[0], r, |mu| mu.powi(n));
        }
    }
}

fn check_dims(state: &StateVector, gen: &GeneratorMatrix) -> Result<()> {
    if state.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: state.dim(),
        });
    }
    Ok(())
}

/// Evolves `state` to squeezing parameter `r` in one spectral step:
/// V e^{-i lambda r} V^T psi on each populated residue class.
pub fn evolve_spectral(state: &StateVector, gen: &GeneratorMatrix, r: f64) -> Result<StateVector> {
    check_dims(state, gen)?;
    let prop = Propagator::build(gen, state)?;
    let mut components = gauged_components(&prop, state);
    advance_components(&prop, &mut components, r);
    Ok(assemble(&prop, &components, gen.dim()))
}

fn record(state: &StateVector, r: f64, tracked: &[usize]) -> SampleRecord {
    let amps = state.amplitudes();
    let occupations = tracked.iter().map(|&k| amps[k].norm_sqr()).collect();
    let mean_photon = amps
        .iter()
        .enumerate()
        .map(|(k, c)| k as f64 * c.norm_sqr())
        .sum();
    SampleRecord {
        r,
        occupations,
        mean_photon,
        vacuum_prob: amps[0].norm_sqr(),
        norm: state.norm(),
    }
}

fn evolve_driver(
    state: &StateVector,
    gen: &GeneratorMatrix,
    schedule: &StepSchedule,
    tracked: &[usize],
) -> Result<Trajectory> {
    check_dims(state, gen)?;
    for &k in tracked {
        if k >= gen.dim() {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: gen.dim(),
            });
        }
    }
    let prop = Propagator::build(gen, state)?;
    let steps = schedule.steps();
    let dr = schedule.dr();
    let stride = schedule.record_stride();
    let spectral_sampling = prop.max_rungs() > STEPWISE_RUNG_LIMIT;

    let initial = gauged_components(&prop, state);
    let mut components = initial.clone();
    let mut records = Vec::new();
    let mut snapshots = if schedule.record_snapshots {
        Some(Vec::new())
    } else {
        None
    };
    let mut current = assemble(&prop, &components, gen.dim());
    records.push(record(&current, 0.0, tracked));
    if let Some(snaps) = snapshots.as_mut() {
        snaps.push(current.clone());
    }
    for step in 1..=steps {
        if spectral_sampling {
            // one spectral jump per recorded sample
            if step % stride != 0 && step != steps {
                continue;
            }
            components = initial.clone();
            advance_components(&prop, &mut components, step as f64 * dr);
        } else {
            advance_components(&prop, &mut components, dr);
            if step % stride != 0 && step != steps {
                continue;
            }
        }
        current = assemble(&prop, &components, gen.dim());
        records.push(record(&current, step as f64 * dr, tracked));
        if let Some(snaps) = snapshots.as_mut() {
            snaps.push(current.clone());
        }
    }
    Ok(Trajectory {
        tracked_k: tracked.to_vec(),
        records,
        snapshots,
        final_state: current,
    })
}

/// Repeated small-step evolution: the step operator is applied to the state
/// amplitudes step by step; the full step-matrix power is never formed.
pub fn evolve_stepwise(
    state: &StateVector,
    gen: &GeneratorMatrix,
    schedule: &StepSchedule,
) -> Result<Trajectory> {
    evolve_driver(state, gen, schedule, &[])
}

/// Evolves the vacuum and records the occupations of `tracked_k`, the vacuum
/// probability, the mean photon number and the norm at each sample.
pub fn trajectory_observables(
    gen: &GeneratorMatrix,
    schedule: &StepSchedule,
    tracked_k: &[usize],
) -> Result<Trajectory> {
    let vacuum = StateVector::vacuum(gen.dim());
    evolve_driver(&vacuum, gen, schedule, tracked_k)
}
