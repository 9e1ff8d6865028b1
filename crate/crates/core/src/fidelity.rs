//! Monte Carlo average fidelities of single and sequential unsharp
//! measurements, and the closed-form curves they are compared with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{
    posterior_update, projective_posterior, pure_estimate, sample_outcome, Effect, EstimateMode,
    QubitState,
};
use crate::qubit::{BlochVector, Direction, PureQubit};
use crate::rng::{sample_uniform_sphere, RandomStream};
use crate::sequence::{DirectionPolicy, SamplingSource, SequenceState};
use crate::summary::{ensemble_summaries, ensemble_summary, RunSummary};

/// Which estimator produced a [`FidelityEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    /// Outcome from the true state, pure estimate drawn from the mixed
    /// estimate, fidelity with the true state.
    Direct,
    /// Outcome from `I/2`, weight `2(tr[ρ?ρ])²`.
    Hypothetical,
    /// Outcome from `I/2`, Haar average done analytically:
    /// `1/3 + tr[(ρ?)²]/3`.
    RandomAverage,
    /// Sequence of measurements, hypothetical form.
    Sequence,
    /// Sharp measurement along a random axis.
    ProjectiveBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub method: FidelityMethod,
    pub samples: u64,
}

impl FidelityEstimate {
    fn from_summary(s: &RunSummary, method: FidelityMethod) -> Self {
        Self {
            value: s.mean,
            standard_error: s.standard_error(),
            method,
            samples: s.count,
        }
    }

    /// `|a − b| / √(SEₐ² + SE_b²)`.
    pub fn z_score(&self, other: &Self) -> f64 {
        (self.value - other.value).abs() / self.standard_error.hypot(other.standard_error)
    }
}

/// Pure state drawn from the unitarily invariant measure.
pub fn haar_pure_state(rng: &mut RandomStream) -> PureQubit<f64> {
    let v = sample_uniform_sphere::<f64>(rng);
    PureQubit::new(Direction::from_unit(v).expect("unit sphere sample"))
}

fn random_direction(rng: &mut RandomStream) -> Direction<f64> {
    haar_pure_state(rng).axis()
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        Err(Error::InvalidInput(
            "at least one sample is required".into(),
        ))
    } else {
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDelta(delta))
    }
}

/// Estimate used in [`avg_fidelity_baseline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineEstimator {
    /// Eigenstate found by a sharp measurement along a random axis.
    Projective,
    /// The apriori state itself.
    Oracle,
    /// A fixed state, whatever the apriori state.
    Fixed(PureQubit<f64>),
}

/// Haar-averaged fidelity of a baseline estimator.
pub fn avg_fidelity_baseline(
    estimator: BaselineEstimator,
    samples: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    check_samples(samples)?;
    let s = ensemble_summary(samples, seed, |rng| {
        let rho = haar_pure_state(rng);
        let estimate = match estimator {
            BaselineEstimator::Projective => {
                let n = random_direction(rng);
                projective_posterior(&rho, n, rng).1
            }
            BaselineEstimator::Oracle => rho,
            BaselineEstimator::Fixed(p) => p,
        };
        Ok(estimate.bloch().fidelity(&rho.bloch()))
    })?;
    Ok(FidelityEstimate::from_summary(
        &s,
        FidelityMethod::ProjectiveBaseline,
    ))
}

/// Sharp measurement along a random axis on a Haar-random pure state.
pub fn avg_fidelity_projective(samples: usize, seed: u64) -> Result<FidelityEstimate> {
    avg_fidelity_baseline(BaselineEstimator::Projective, samples, seed)
}

/// Average fidelity of a single measurement of precision `delta` on
/// Haar-random pure states, by one of the three single-shot estimators.
pub fn avg_fidelity_single(
    delta: f64,
    method: FidelityMethod,
    mode: EstimateMode,
    samples: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    check_delta(delta)?;
    check_samples(samples)?;
    let mixed = BlochVector::<f64>::origin();
    let s = match method {
        FidelityMethod::Direct => ensemble_summary(samples, seed, |rng| {
            let rho = haar_pure_state(rng);
            let n = random_direction(rng);
            let sigma = sample_outcome(&rho, n, delta, rng)?;
            let estimate = posterior_update(&mixed, sigma, n, delta)?;
            let pure = pure_estimate(&estimate, mode, rng);
            Ok(pure.bloch().fidelity(&rho.bloch()))
        })?,
        FidelityMethod::Hypothetical => ensemble_summary(samples, seed, |rng| {
            let rho = haar_pure_state(rng);
            let n = random_direction(rng);
            let sigma = sample_outcome(&mixed, n, delta, rng)?;
            let hypo = posterior_update(&mixed, sigma, n, delta)?;
            let f = hypo.bloch().fidelity(&rho.bloch());
            Ok(2.0 * f * f)
        })?,
        FidelityMethod::RandomAverage => ensemble_summary(samples, seed, |rng| {
            let n = random_direction(rng);
            let sigma = sample_outcome(&mixed, n, delta, rng)?;
            let hypo = posterior_update(&mixed, sigma, n, delta)?;
            Ok(fidelity_from_hypothetical_purity(hypo.purity()))
        })?,
        other => {
            return Err(Error::InvalidInput(format!(
                "{other:?} is not a single-measurement estimator"
            )));
        }
    };
    Ok(FidelityEstimate::from_summary(&s, method))
}

/// `F̄ = 1/3 + tr[(ρ?)²]/3`.
pub fn fidelity_from_hypothetical_purity(purity: f64) -> f64 {
    (1.0 + purity) / 3.0
}

/// `F̄ = 1/2 + s²/6`, the same map in Bloch form.
pub fn fidelity_from_s2(s2: f64) -> f64 {
    0.5 + s2 / 6.0
}

/// Average fidelity after `n` measurements of precision `delta`, sampled
/// from the hypothetical state `I/2` with fresh random axes.
pub fn avg_fidelity_sequence(
    n: usize,
    delta: f64,
    trajectories: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    Ok(avg_fidelity_curve(&[n], delta, trajectories, seed)?
        .remove(0)
        .1)
}

/// [`avg_fidelity_sequence`] at several `n`, sharing trajectories: each
/// trajectory is run once to `max(ns)` and read off at every `n`. The value
/// at each `n` is bit-identical to a separate [`avg_fidelity_sequence`] call.
pub fn avg_fidelity_curve(
    ns: &[usize],
    delta: f64,
    trajectories: usize,
    seed: u64,
) -> Result<Vec<(usize, FidelityEstimate)>> {
    check_delta(delta)?;
    check_samples(trajectories)?;
    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by_key(|&i| ns[i]);
    let last = ns.iter().copied().max().unwrap_or(0);
    let mixed = BlochVector::<f64>::origin();
    let summaries = ensemble_summaries(trajectories, seed, ns.len(), |rng, out| {
        let mut state = SequenceState::new(&mixed);
        let mut next = 0;
        for k in 0..=last {
            while next < order.len() && ns[order[next]] == k {
                out[order[next]] = fidelity_from_s2(state.hypothetical().norm_sqr());
                next += 1;
            }
            if k < last {
                state.step(
                    delta,
                    DirectionPolicy::FreshRandom,
                    SamplingSource::Hypothetical,
                    rng,
                )?;
            }
        }
        Ok(())
    })?;
    Ok(ns
        .iter()
        .zip(&summaries)
        .map(|(&n, s)| {
            (
                n,
                FidelityEstimate::from_summary(s, FidelityMethod::Sequence),
            )
        })
        .collect())
}

/// Sequence fidelity for a fixed, non-random apriori state: outcomes drawn
/// from the true state, pure estimate drawn from the mixed estimate
/// `Πₙ / tr Πₙ`. No closed form is known to compare against.
pub fn avg_fidelity_fixed_apriori<S: QubitState<f64>>(
    apriori: &S,
    n: usize,
    delta: f64,
    mode: EstimateMode,
    trajectories: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    check_delta(delta)?;
    check_samples(trajectories)?;
    let rho = apriori.bloch_vector();
    let s = ensemble_summary(trajectories, seed, |rng| {
        let mut state = SequenceState::new(&rho);
        for _ in 0..n {
            state.step(
                delta,
                DirectionPolicy::FreshRandom,
                SamplingSource::TrueState,
                rng,
            )?;
        }
        let estimate = state.accumulator().mixed_estimate()?;
        let pure = pure_estimate(&estimate, mode, rng);
        Ok(pure.bloch().fidelity(&rho))
    })?;
    Ok(FidelityEstimate::from_summary(&s, FidelityMethod::Direct))
}

/// Purity `s²` of the drift-only solution started from `s² = 0`:
/// `(e^{8t} − 1)/(e^{8t} − 1/3)`.
pub fn drift_purity(t: f64) -> f64 {
    if t > 20.0 {
        // e^{8t} overflows long before the ratio leaves 1 in f64
        let x = (-8.0 * t).exp();
        return (1.0 - x) / (1.0 - x / 3.0);
    }
    let e = (8.0 * t).exp_m1();
    e / (e + 2.0 / 3.0)
}

/// Continuum time reached by `n` measurements of precision `delta`
/// under the constant-rate assumption `ν = 12/Δ²`.
pub fn time_from_count(n: usize, delta: f64) -> f64 {
    12.0 * n as f64 / (delta * delta)
}

/// Closed-form saturation curve `1/2 + drift_purity(12n/Δ²)/6`.
pub fn saturation_value(n: usize, delta: f64) -> f64 {
    fidelity_from_s2(drift_purity(time_from_count(n, delta)))
}
