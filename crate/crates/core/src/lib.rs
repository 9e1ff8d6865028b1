//! State estimation of a qubit from sequences of unsharp (Gaussian)
//! polarization measurements, in discrete and continuous time.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which the Monte Carlo drivers use.

// `!(x <= limit)` is used on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod povm;
pub mod quadrature;
pub mod qubit;
pub mod rng;
pub mod scalar;
pub mod sde;
pub mod sequence;
pub mod summary;

pub use error::{Error, Result};
pub use fidelity::{
    avg_fidelity_baseline, avg_fidelity_curve, avg_fidelity_fixed_apriori, avg_fidelity_projective,
    avg_fidelity_sequence, avg_fidelity_single, drift_purity, saturation_value, time_from_count,
    BaselineEstimator, FidelityEstimate, FidelityMethod,
};
pub use povm::{
    completeness_residual, outcome_pdf, posterior_update, povm_coefficients, projective_posterior,
    pure_estimate, sample_outcome, Effect, EstimateMode, QubitState,
};
pub use quadrature::QuadratureSpec;
pub use rng::{sample_uniform_sphere, RandomStream};
pub use scalar::Real;
pub use sde::{
    compare_propagator_path, integrate_paths, readout_increment, step_bloch, step_bloch_kraus,
    step_bloch_with, step_density, step_density_kraus, step_density_with, step_propagators,
    step_purity, Equation, NoisePath, Observable, PathInitial, Scheme, SdeConfig, TimePoint,
};
pub use sequence::{run_sequence, DirectionPolicy, SamplingSource, SequenceResult};
pub use summary::{merge_summaries, RunSummary};

pub type Vec3 = linalg::Vec3<f64>;
pub type Mat2 = linalg::Mat2<f64>;
pub type BlochVector = qubit::BlochVector<f64>;
pub type Direction = qubit::Direction<f64>;
pub type PureQubit = qubit::PureQubit<f64>;
pub type QubitDensity = qubit::QubitDensity<f64>;
pub type GaussianPovmElement = povm::GaussianPovmElement<f64>;
pub type KrausAccumulator = sequence::KrausAccumulator<f64>;
pub type PropagatorPair = sde::PropagatorPair<f64>;

pub type BlochVector32 = qubit::BlochVector<f32>;
pub type QubitDensity32 = qubit::QubitDensity<f32>;
