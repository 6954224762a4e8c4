//! Simulation of generalized n-photon squeezing of the vacuum in truncated
//! Fock space: banded generator construction, stepwise and spectral
//! propagation, phase-space portraits, eigenstructure diagnostics,
//! finite-size scaling fits, and closed-form reference models.

pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod observables;
pub mod phasespace;
pub mod propagation;
pub mod reference;
pub mod scaling;
pub mod spectral;

pub use error::{Error, Result};
pub use fockspace::{
    build_generator, subspace_view, vacuum_state, Cutoff, Family, GeneratorMatrix, GeneratorSpec,
    StateVector, SubspaceView,
};
pub use observables::{
    argmax_occupation, fidelity, find_extrema, first_return, mean_photon, occupation,
    ExtremumKind, ExtremumRecord,
};
pub use phasespace::{
    parity_expectation, q_function, rotation_symmetry_error, wigner_function, FieldKind, GridSpec,
    PhaseSpaceField,
};
pub use propagation::{
    evolve_spectral, evolve_stepwise, step_operator, trajectory_observables, SampleRecord,
    StepOperator, StepSchedule, Trajectory, STEPWISE_RUNG_LIMIT,
};
pub use reference::{
    classical_trajectory, coherent_amplitudes, double_factorial, pn_mean_photon,
    squeezed_vacuum_mean_photon, ClassicalParams, TrajectoryVariant,
};
pub use scaling::{
    extrapolate_gap, fit_exponential_in_order, fit_logarithmic, fit_power_law,
    sweep_dominant_gap, sweep_max_mean_photon, FitParams, FitResult, ScalingPoint,
    ScalingQuantity,
};
pub use spectral::{
    amplitude_fraction, dominant_gap, eigensystem, eigenstate_distribution,
    eigenstate_mean_photon, top_pair_indices, vacuum_overlap_ranking, SpectralData,
};
