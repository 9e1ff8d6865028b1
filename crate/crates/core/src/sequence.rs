//! Exact simulation of `n` sequential unsharp measurements.
//!
//! The composed Kraus operator `G_n = Π_n^{1/2} ⋯ Π_1^{1/2}` decays like
//! `(2πΔ²)^{-n/4}`, so it is carried as a unit-spectral-norm matrix plus a
//! separate log scale.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::povm::{
    log_outcome_pdf, posterior_update_bloch, povm_coefficients, sample_outcome, Effect,
    GaussianPovmElement, QubitState,
};
use crate::qubit::{BlochVector, Direction, QubitDensity};
use crate::rng::{sample_uniform_sphere, RandomStream};
use crate::scalar::Real;

/// Tolerance on the unit spectral norm of [`KrausAccumulator::op`].
pub const SPECTRAL_NORM_TOL: f64 = 1e-9;

/// Running product of measurement square roots: `G = exp(log_weight)·op`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausAccumulator<T> {
    op: Mat2<T>,
    log_weight: T,
}

impl<T: Real> Default for KrausAccumulator<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> KrausAccumulator<T> {
    pub fn identity() -> Self {
        Self {
            op: Mat2::identity(),
            log_weight: T::zero(),
        }
    }

    /// Normalized operator, largest singular value 1.
    pub fn op(&self) -> &Mat2<T> {
        &self.op
    }

    /// ln of the scale removed from the true Kraus operator.
    pub fn log_weight(&self) -> T {
        self.log_weight
    }

    /// `e^{log_weight}·op`; underflows for long sequences.
    pub fn kraus_operator(&self) -> Mat2<T> {
        self.op.scale(self.log_weight.exp())
    }

    /// Left-multiplies by `Π^{1/2}` of `element` and renormalizes.
    pub fn extend(&self, element: &GaussianPovmElement<T>) -> Self {
        let (root, scale) = element.scaled_sqrt_operator();
        let product = root * self.op;
        let top = product.max_singular_value();
        Self {
            op: product.scale(top.recip()),
            log_weight: self.log_weight + scale + top.ln(),
        }
    }

    /// `ln tr Π_n` with `Π_n = G†G`.
    pub fn log_trace_effect(&self) -> T {
        T::lit(2.0) * self.log_weight + (self.op.adjoint() * self.op).trace().re.ln()
    }

    /// `ln tr[Π_n ρ]`, the log density of the whole outcome record under `ρ`.
    pub fn log_probability<S: QubitState<T>>(&self, rho: &S) -> T {
        let rho = rho.bloch_vector().to_density();
        let weighted = self.op.adjoint() * self.op * *rho.matrix();
        T::lit(2.0) * self.log_weight + weighted.trace().re.ln()
    }

    /// `GρG† / tr[Πρ]`.
    pub fn posterior<S: QubitState<T>>(&self, rho: &S) -> Result<QubitDensity<T>> {
        let rho = rho.bloch_vector().to_density();
        QubitDensity::normalized(self.op * *rho.matrix() * self.op.adjoint())
    }

    /// `GG† / tr[GG†]`: where `I/2` is taken by the same operations.
    pub fn hypothetical(&self) -> Result<QubitDensity<T>> {
        QubitDensity::normalized(self.op * self.op.adjoint())
    }
}

impl<T: Real> Effect<T> for KrausAccumulator<T> {
    fn effect_operator(&self) -> Mat2<T> {
        (self.op.adjoint() * self.op).scale((T::lit(2.0) * self.log_weight).exp())
    }

    /// `G†G / tr[G†G]`.
    fn mixed_estimate(&self) -> Result<QubitDensity<T>> {
        QubitDensity::normalized(self.op.adjoint() * self.op)
    }
}

/// One measurement of the record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    pub direction: Direction<T>,
    pub outcome: T,
}

/// How the axis of each measurement is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionPolicy<T> {
    /// Fresh uniform direction on the sphere every step.
    FreshRandom,
    /// Always the same axis (commuting measurements).
    Fixed(Direction<T>),
}

/// Which state the outcomes are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingSource {
    /// The running aposteriori state of the true apriori state.
    TrueState,
    /// The running aposteriori state of the maximally mixed state.
    Hypothetical,
}

/// Incremental state of a measurement sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceState<T> {
    apriori: BlochVector<T>,
    posterior: BlochVector<T>,
    hypothetical: BlochVector<T>,
    accumulator: KrausAccumulator<T>,
    log_probability: T,
    steps: usize,
}

impl<T: Real> SequenceState<T> {
    pub fn new<S: QubitState<T>>(apriori: &S) -> Self {
        let apriori = apriori.bloch_vector();
        Self {
            apriori,
            posterior: apriori,
            hypothetical: BlochVector::origin(),
            accumulator: KrausAccumulator::identity(),
            log_probability: T::zero(),
            steps: 0,
        }
    }

    pub fn apriori(&self) -> BlochVector<T> {
        self.apriori
    }

    /// Running aposteriori state of the true apriori state.
    pub fn posterior(&self) -> BlochVector<T> {
        self.posterior
    }

    /// Running aposteriori state of `I/2`.
    pub fn hypothetical(&self) -> BlochVector<T> {
        self.hypothetical
    }

    pub fn accumulator(&self) -> &KrausAccumulator<T> {
        &self.accumulator
    }

    /// Sum of per-step ln p(σₖ | σ₁…σₖ₋₁) under the true apriori state.
    pub fn log_probability(&self) -> T {
        self.log_probability
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Performs one measurement: draw an axis, draw an outcome from the
    /// chosen source, update both running states and the accumulator.
    pub fn step(
        &mut self,
        delta: T,
        policy: DirectionPolicy<T>,
        source: SamplingSource,
        rng: &mut RandomStream,
    ) -> Result<StepRecord<T>> {
        let direction = match policy {
            DirectionPolicy::FreshRandom => Direction::new(sample_uniform_sphere::<T>(rng))?,
            DirectionPolicy::Fixed(n) => n,
        };
        let outcome = match source {
            SamplingSource::TrueState => sample_outcome(&self.posterior, direction, delta, rng)?,
            SamplingSource::Hypothetical => {
                sample_outcome(&self.hypothetical, direction, delta, rng)?
            }
        };
        self.apply(StepRecord { direction, outcome }, delta)?;
        Ok(StepRecord { direction, outcome })
    }

    /// Applies a given measurement record entry.
    pub fn apply(&mut self, record: StepRecord<T>, delta: T) -> Result<()> {
        let element = povm_coefficients(record.outcome, record.direction, delta)?;
        self.log_probability = self.log_probability
            + log_outcome_pdf(&self.posterior, record.direction, delta, record.outcome)?;
        self.posterior = posterior_update_bloch(&self.posterior, &element)?;
        self.hypothetical = posterior_update_bloch(&self.hypothetical, &element)?;
        self.accumulator = self.accumulator.extend(&element);
        self.steps += 1;
        if !self.log_probability.is_finite() && self.log_probability != T::neg_infinity() {
            return Err(Error::NonFinite("sequence log probability".into()));
        }
        Ok(())
    }
}

/// Outcome of [`run_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult<T> {
    pub steps: Vec<StepRecord<T>>,
    /// ρₙ(σ.) of the true apriori state.
    pub posterior: QubitDensity<T>,
    /// ρₙ? of the maximally mixed apriori state.
    pub hypothetical_posterior: QubitDensity<T>,
    /// ρ′ₙ = Πₙ / tr Πₙ.
    pub mixed_estimate: QubitDensity<T>,
    /// ln pₙ(σ.) under the true apriori state.
    pub log_probability_density: T,
    pub accumulator: KrausAccumulator<T>,
}

/// Simulates `n` sequential measurements of precision `delta`.
pub fn run_sequence<T: Real, S: QubitState<T>>(
    apriori: &S,
    n: usize,
    delta: T,
    policy: DirectionPolicy<T>,
    source: SamplingSource,
    rng: &mut RandomStream,
) -> Result<SequenceResult<T>> {
    if !(delta > T::zero()) {
        return Err(Error::NonPositiveDelta(delta.as_f64()));
    }
    let mut state = SequenceState::new(apriori);
    let mut steps = Vec::with_capacity(n);
    for _ in 0..n {
        steps.push(state.step(delta, policy, source, rng)?);
    }
    Ok(SequenceResult {
        steps,
        posterior: state.posterior.to_density(),
        hypothetical_posterior: state.hypothetical.to_density(),
        mixed_estimate: state.accumulator.mixed_estimate()?,
        log_probability_density: state.log_probability,
        accumulator: state.accumulator,
    })
}

/// Replays a recorded sequence against a different apriori state.
pub fn replay<T: Real, S: QubitState<T>>(
    apriori: &S,
    steps: &[StepRecord<T>],
    delta: T,
) -> Result<SequenceState<T>> {
    let mut state = SequenceState::new(apriori);
    for r in steps {
        state.apply(*r, delta)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_extension() {
        let e = povm_coefficients(0.0f64, Direction::z(), 2.0).unwrap();
        let acc = KrausAccumulator::identity().extend(&e);
        assert!(acc.op().max_abs_diff(&Mat2::identity()) < 1e-15);
        assert!((acc.log_weight() - e.coeff_plus().sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn commuting_steps_combine_exponents() {
        let d = 1.3;
        let (s1, s2) = (0.4, -1.7);
        let e1 = povm_coefficients(s1, Direction::z(), d).unwrap();
        let e2 = povm_coefficients(s2, Direction::z(), d).unwrap();
        let acc = KrausAccumulator::identity().extend(&e1).extend(&e2);
        // √(Π₁Π₂) has coefficients exp(-[(λ-σ₁)²+(λ-σ₂)²]/4Δ²)/√(2πΔ²)
        let coeff = |l: f64| {
            (-((l - s1).powi(2) + (l - s2).powi(2)) / (4.0 * d * d)).exp()
                / (std::f64::consts::TAU * d * d).sqrt()
        };
        let g = acc.kraus_operator();
        assert!((g.m[0][0].re - coeff(1.0)).abs() < 1e-10);
        assert!((g.m[1][1].re - coeff(-1.0)).abs() < 1e-10);
        assert!(g.m[0][1].norm() < 1e-15);
    }

    #[test]
    fn long_products_stay_finite() {
        let mut rng = RandomStream::new(11, 0);
        let mut acc = KrausAccumulator::<f64>::identity();
        for _ in 0..10_000 {
            let n = Direction::new(sample_uniform_sphere(&mut rng)).unwrap();
            let e = povm_coefficients(20.0 * rng.normal(), n, 20.0).unwrap();
            acc = acc.extend(&e);
        }
        assert!(acc.log_weight().is_finite());
        assert!(acc.op().is_finite());
        assert!((acc.op().max_singular_value() - 1.0).abs() < SPECTRAL_NORM_TOL);
        assert!(acc.log_weight() < -1e4);
    }

    #[test]
    fn empty_sequence() {
        let mut rng = RandomStream::new(1, 0);
        let apriori = BlochVector::from_xyz(0.0, 0.6, 0.8).unwrap();
        let r = run_sequence(
            &apriori,
            0,
            5.0,
            DirectionPolicy::FreshRandom,
            SamplingSource::TrueState,
            &mut rng,
        )
        .unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.posterior, apriori.to_density());
        assert_eq!(r.mixed_estimate, QubitDensity::maximally_mixed());
        assert_eq!(r.hypothetical_posterior, QubitDensity::maximally_mixed());
        assert_eq!(r.log_probability_density, 0.0);
    }

    #[test]
    fn rejects_non_positive_delta() {
        let mut rng = RandomStream::new(1, 0);
        let r = run_sequence(
            &BlochVector::<f64>::origin(),
            3,
            0.0,
            DirectionPolicy::FreshRandom,
            SamplingSource::TrueState,
            &mut rng,
        );
        assert!(r.is_err());
    }

    #[test]
    fn commuting_inference_converges() {
        let mut rng = RandomStream::new(9, 0);
        let up = BlochVector::from_xyz(0.0, 0.0, 1.0).unwrap();
        let r = run_sequence(
            &up,
            10_000,
            5.0,
            DirectionPolicy::Fixed(Direction::z()),
            SamplingSource::TrueState,
            &mut rng,
        )
        .unwrap();
        assert!(r.posterior.bloch().vector().z >= 0.999);
        // the eigenstate is a fixed point, so the estimate must lean towards it
        assert!(r.mixed_estimate.bloch().vector().z > 0.99);
    }
}
