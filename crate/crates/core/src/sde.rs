//! Time stepping of the continuous isotropic polarization measurement:
//! conditional master equation, Bloch and purity diffusions, the
//! measurement readout, and the normalized Kraus propagators `g`, `g′`.
//!
//! All coupled equations of one trajectory are driven by a single 3-vector
//! Wiener increment `dW` per step, with `E[dWᵢ dWⱼ] = δᵢⱼ dt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec3};
use crate::povm::QubitState;
use crate::qubit::{BlochVector, QubitDensity, ROUNDING_OVERSHOOT};
use crate::rng::RandomStream;
use crate::scalar::Real;
use crate::summary::{ensemble_summaries, RunSummary};

/// Largest admissible time step.
pub const MAX_DT: f64 = 1e-2;

/// Overshoot of |s| past 1 (in units of dt) that an Euler step may produce
/// near the sphere. Such steps are projected back onto the sphere; beyond
/// this the step is rejected as too coarse.
pub const OVERSHOOT_PER_DT: f64 = 400.0;

/// Per-step change of the propagator normalizations (in units of dt) beyond
/// which the scheme is considered broken.
pub const NORMALIZATION_DRIFT_PER_DT: f64 = 1000.0;

/// Below this Bloch norm the purity noise direction is undefined.
pub const NOISE_DIRECTION_EPS: f64 = 1e-12;

fn overshoot_limit<T: Real>(dt: T) -> T {
    T::tol(ROUNDING_OVERSHOOT) + T::lit(OVERSHOOT_PER_DT) * dt
}

/// Discretization of the Bloch and density equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `ρ ← MρM / tr` with `M = (1 − 3dt/2)I + σ·(dW + 2⟨σ⟩dt)`. Agrees with
    /// Euler–Maruyama to first order, stays inside the Bloch ball exactly and
    /// keeps pure states pure.
    #[default]
    Kraus,
    /// Plain Euler–Maruyama with radial projection of the O(dt) overshoot.
    /// The projection biases `|s|²` low by O(√dt) once trajectories reach
    /// the sphere.
    Euler,
}

/// Time grid of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record every `record_stride` steps.
    pub record_stride: usize,
    pub scheme: Scheme,
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_end: 1.5,
            record_stride: 500,
            scheme: Scheme::default(),
        }
    }
}

impl SdeConfig {
    pub fn new(dt: f64, t_end: f64, record_stride: usize) -> Result<Self> {
        let c = Self {
            dt,
            t_end,
            record_stride,
            scheme: Scheme::default(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::InvalidInput(format!(
                "dt = {} must lie in (0, {MAX_DT}]",
                self.dt
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "t_end = {} must be positive",
                self.t_end
            )));
        }
        let ratio = self.t_end / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "t_end / dt = {ratio} is not an integer"
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidInput(
                "record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Step indices at which observables are recorded, starting at 0.
    pub fn record_steps(&self) -> Vec<usize> {
        (0..=self.steps()).step_by(self.record_stride).collect()
    }

    pub fn record_times(&self) -> Vec<f64> {
        self.record_steps()
            .iter()
            .map(|&k| k as f64 * self.dt)
            .collect()
    }
}

/// Wiener increment `dW` with independent N(0, dt) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseIncrement<T> {
    pub dw: Vec3<T>,
}

impl<T: Real> NoiseIncrement<T> {
    pub fn sample(rng: &mut RandomStream, dt: T) -> Self {
        Self {
            dw: rng.gaussian_vec3(dt),
        }
    }
}

/// A stored Brownian path on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath<T> {
    pub dt: T,
    pub increments: Vec<Vec3<T>>,
}

impl<T: Real> NoisePath<T> {
    pub fn sample(steps: usize, dt: T, rng: &mut RandomStream) -> Self {
        Self {
            dt,
            increments: (0..steps)
                .map(|_| NoiseIncrement::sample(rng, dt).dw)
                .collect(),
        }
    }

    /// The same path on a grid `factor` times coarser (increments summed).
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.increments.len().is_multiple_of(factor) {
            return Err(Error::InvalidInput(format!(
                "cannot coarsen {} steps by {factor}",
                self.increments.len()
            )));
        }
        Ok(Self {
            dt: self.dt * T::lit(factor as f64),
            increments: self
                .increments
                .chunks(factor)
                .map(|c| c.iter().fold(Vec3::zero(), |a, &b| a + b))
                .collect(),
        })
    }
}

/// `σ⃗_t dt = ⟨σ̂⟩_t dt + ½dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutIncrement<T> {
    pub value: Vec3<T>,
}

pub fn readout_increment<T: Real>(s: &BlochVector<T>, dw: Vec3<T>, dt: T) -> ReadoutIncrement<T> {
    ReadoutIncrement {
        value: s.vector() * dt + dw * T::lit(0.5),
    }
}

/// Euler–Maruyama step `s ← s − 4s dt − 2(s·dW)s + 2dW`. An overshoot past
/// the sphere of up to `1e-9 + 400·dt` is projected back radially.
pub fn step_bloch<T: Real>(s: &BlochVector<T>, dt: T, dw: Vec3<T>) -> Result<BlochVector<T>> {
    let v = s.vector();
    let two = T::lit(2.0);
    let raw = v - v * (T::lit(4.0) * dt) - v * (two * v.dot(dw)) + dw * two;
    BlochVector::clamped(raw, overshoot_limit(dt)).map_err(|_| Error::StepTooCoarse {
        norm: raw.norm().as_f64(),
        dt: dt.as_f64(),
    })
}

/// `s² ← s² + 4(3−s²)(1−s²)dt + 4(1−s²)s·dw`, clamped to [0, 1].
pub fn step_purity<T: Real>(s2: T, dt: T, dw: T) -> T {
    let x = s2.max(T::zero()).min(T::one());
    let four = T::lit(4.0);
    let next =
        x + four * (T::lit(3.0) - x) * (T::one() - x) * dt + four * (T::one() - x) * x.sqrt() * dw;
    next.max(T::zero()).min(T::one())
}

/// One Euler step of the conditional master equation, in matrix form:
/// `ρ ← ρ − ½Σᵢ[σᵢ,[σᵢ,ρ]]dt + Σᵢ{σᵢ − ⟨σᵢ⟩, ρ}dWᵢ`, trace renormalized.
pub fn step_density<T: Real>(rho: &QubitDensity<T>, dt: T, dw: Vec3<T>) -> Result<QubitDensity<T>> {
    let m = *rho.matrix();
    let mean = m.pauli_traces();
    let (c, w) = (mean.to_array(), dw.to_array());
    let mut drift = Mat2::zero();
    let mut noise = Mat2::zero();
    for i in 0..3 {
        let p = Mat2::pauli(i);
        drift = drift + p.commutator(&p.commutator(&m));
        let shifted = p - Mat2::scalar(c[i]);
        noise = noise + shifted.anticommutator(&m).scale(w[i]);
    }
    let next = (m + drift.scale(T::lit(-0.5) * dt) + noise).hermitian_part();
    let tr = next.trace().re;
    if !(tr > T::zero()) || !next.is_finite() {
        return Err(Error::NonFinite("density step trace".into()));
    }
    let next = next.scale(tr.recip());
    let v = next.pauli_traces();
    let norm = v.norm();
    if norm <= T::one() {
        return Ok(QubitDensity::new_unchecked(next));
    }
    let limit = overshoot_limit(dt);
    if norm - T::one() > limit {
        return Err(Error::NegativeEigenvalue {
            eigenvalue: ((T::one() - norm) / T::lit(2.0)).as_f64(),
            dt: dt.as_f64(),
        });
    }
    // same radial projection as the Bloch step
    Ok(BlochVector::clamped(v, limit)?.to_density())
}

/// Positivity-preserving step of the Bloch equation: the Bloch form of
/// `MρM / tr[MρM]` with `M = aI + b·σ`, `a = 1 − 3dt/2`, `b = dW + 2s dt`.
pub fn step_bloch_kraus<T: Real>(s: &BlochVector<T>, dt: T, dw: Vec3<T>) -> Result<BlochVector<T>> {
    let v = s.vector();
    let two = T::lit(2.0);
    let a = T::one() - T::lit(1.5) * dt;
    let b = dw + v * (two * dt);
    let bs = b.dot(v);
    let b2 = b.norm_sqr();
    let den = a * a + b2 + two * a * bs;
    if !(den > T::zero()) {
        return Err(Error::NonFinite("Kraus step normalization".into()));
    }
    let num = v * (a * a - b2) + b * (two * a) + b * (two * bs);
    BlochVector::clamped(num * den.recip(), T::tol(ROUNDING_OVERSHOOT))
}

/// Matrix form of [`step_bloch_kraus`].
pub fn step_density_kraus<T: Real>(
    rho: &QubitDensity<T>,
    dt: T,
    dw: Vec3<T>,
) -> Result<QubitDensity<T>> {
    let m = *rho.matrix();
    let mean = m.pauli_traces();
    let k = Mat2::from_pauli(T::one() - T::lit(1.5) * dt, dw + mean * (T::lit(2.0) * dt));
    let next = (k * m * k.adjoint()).hermitian_part();
    let tr = next.trace().re;
    if !(tr > T::zero()) || !next.is_finite() {
        return Err(Error::NonFinite("Kraus density step trace".into()));
    }
    let next = next.scale(tr.recip());
    let v = next.pauli_traces();
    if v.norm() <= T::one() {
        return Ok(QubitDensity::new_unchecked(next));
    }
    Ok(BlochVector::clamped(v, T::tol(ROUNDING_OVERSHOOT))?.to_density())
}

/// Bloch step by the chosen scheme.
pub fn step_bloch_with<T: Real>(
    scheme: Scheme,
    s: &BlochVector<T>,
    dt: T,
    dw: Vec3<T>,
) -> Result<BlochVector<T>> {
    match scheme {
        Scheme::Kraus => step_bloch_kraus(s, dt, dw),
        Scheme::Euler => step_bloch(s, dt, dw),
    }
}

/// Density step by the chosen scheme.
pub fn step_density_with<T: Real>(
    scheme: Scheme,
    rho: &QubitDensity<T>,
    dt: T,
    dw: Vec3<T>,
) -> Result<QubitDensity<T>> {
    match scheme {
        Scheme::Kraus => step_density_kraus(rho, dt, dw),
        Scheme::Euler => step_density(rho, dt, dw),
    }
}

/// `Σᵢ(σᵢ − cᵢ)² = (3 + |c|²)I − 2c·σ`.
fn shifted_square<T: Real>(c: Vec3<T>) -> Mat2<T> {
    Mat2::from_pauli(T::lit(3.0) + c.norm_sqr(), c * T::lit(-2.0))
}

/// `Σᵢ(σᵢ − cᵢ)dWᵢ`.
fn shifted_noise<T: Real>(c: Vec3<T>, dw: Vec3<T>) -> Mat2<T> {
    Mat2::from_pauli(-c.dot(dw), dw)
}

/// Normalized Kraus propagators and the two expectation vectors they define.
///
/// `g` normalizes `tr[ρ g†g] = 1`; `g′` normalizes `½tr[g′†g′] = 1`. They
/// build the aposteriori state `gρg†`, the estimate `½g′†g′` and the
/// hypothetical state `½g′g′†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorPair<T> {
    pub g: Mat2<T>,
    pub g_prime: Mat2<T>,
    /// `⟨σ̂⟩_t = tr[ρ g†σg]`.
    pub true_mean: BlochVector<T>,
    /// `⟨σ̂⟩?_t = ½tr[g′†σg′]`.
    pub hypo_mean: BlochVector<T>,
    /// `|norm − 1|` of `g` and `g′` before the last renormalization.
    pub last_drift: (T, T),
}

impl<T: Real> PropagatorPair<T> {
    /// `g = g′ = I`.
    pub fn new<S: QubitState<T>>(apriori: &S) -> Self {
        Self {
            g: Mat2::identity(),
            g_prime: Mat2::identity(),
            true_mean: apriori.bloch_vector(),
            hypo_mean: BlochVector::origin(),
            last_drift: (T::zero(), T::zero()),
        }
    }

    fn unnormalized_posterior(&self, apriori: &QubitDensity<T>) -> Mat2<T> {
        self.g * *apriori.matrix() * self.g.adjoint()
    }

    fn unnormalized_estimate(&self) -> Mat2<T> {
        (self.g_prime.adjoint() * self.g_prime).scale(T::lit(0.5))
    }

    fn unnormalized_hypothetical(&self) -> Mat2<T> {
        (self.g_prime * self.g_prime.adjoint()).scale(T::lit(0.5))
    }

    /// `ρ_t = gρg†`.
    pub fn posterior(&self, apriori: &QubitDensity<T>) -> Result<QubitDensity<T>> {
        QubitDensity::normalized(self.unnormalized_posterior(apriori))
    }

    /// `ρ′_t = ½g′†g′`.
    pub fn estimate(&self) -> Result<QubitDensity<T>> {
        QubitDensity::normalized(self.unnormalized_estimate())
    }

    /// `ρ?_t = ½g′g′†`.
    pub fn hypothetical(&self) -> Result<QubitDensity<T>> {
        QubitDensity::normalized(self.unnormalized_hypothetical())
    }

    /// Traces of `ρ_t`, `ρ′_t`, `ρ?_t` as built from the stored operators.
    pub fn traces(&self, apriori: &QubitDensity<T>) -> (T, T, T) {
        (
            self.unnormalized_posterior(apriori).trace().re,
            self.unnormalized_estimate().trace().re,
            self.unnormalized_hypothetical().trace().re,
        )
    }
}

/// One Euler step of the coupled propagator equations, followed by
/// renormalization and recomputation of both means.
pub fn step_propagators<T: Real>(
    p: &PropagatorPair<T>,
    apriori: &QubitDensity<T>,
    dt: T,
    dw: Vec3<T>,
) -> Result<PropagatorPair<T>> {
    let c = p.true_mean.vector();
    let q = p.hypo_mean.vector();
    let beta = c - q;
    let half = T::lit(0.5);

    let gen_g = shifted_square(c).scale(-half * dt) + shifted_noise(c, dw);
    let gen_gp = (shifted_square(q).scale(half) - shifted_square(c)
        + Mat2::scalar(beta.norm_sqr()))
    .scale(dt)
        + shifted_noise(q, dw);

    let g = p.g + gen_g * p.g;
    let gp = p.g_prime + gen_gp * p.g_prime;

    let norm_g = (g * *apriori.matrix() * g.adjoint()).trace().re;
    let norm_gp = half * (gp.adjoint() * gp).trace().re;
    let drift = ((norm_g - T::one()).abs(), (norm_gp - T::one()).abs());
    let limit = T::lit(NORMALIZATION_DRIFT_PER_DT) * dt;
    let worst = drift.0.max(drift.1);
    if !(worst <= limit) || !(norm_g > T::zero()) || !(norm_gp > T::zero()) {
        return Err(Error::NormalizationDrift {
            drift: worst.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let g = g.scale(norm_g.sqrt().recip());
    let gp = gp.scale(norm_gp.sqrt().recip());

    let rho = g * *apriori.matrix() * g.adjoint();
    let hypo = (gp * gp.adjoint()).scale(half);
    let tol = T::tol(ROUNDING_OVERSHOOT);
    Ok(PropagatorPair {
        g,
        g_prime: gp,
        true_mean: BlochVector::clamped(rho.pauli_traces(), tol)?,
        hypo_mean: BlochVector::clamped(hypo.pauli_traces(), tol)?,
        last_drift: drift,
    })
}

/// One recorded point of [`compare_propagator_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSample {
    pub t: f64,
    pub tr_rho: f64,
    pub tr_rho_prime: f64,
    pub tr_rho_hypo: f64,
    /// Max Bloch-component difference between `gρg†` and the direct chain.
    pub bloch_deviation: f64,
}

/// Drives the propagator pair and the direct density chain (integrated by
/// `scheme`) with the same noise path, recording every `record_stride`
/// steps and at t = 0.
pub fn compare_propagator_path<T: Real>(
    apriori: &QubitDensity<T>,
    path: &NoisePath<T>,
    record_stride: usize,
    scheme: Scheme,
) -> Result<Vec<PropagatorSample>> {
    let stride = record_stride.max(1);
    let mut pair = PropagatorPair::new(apriori);
    let mut direct = *apriori;
    let mut out = Vec::with_capacity(path.increments.len() / stride + 1);
    let sample =
        |k: usize, pair: &PropagatorPair<T>, direct: &QubitDensity<T>| -> PropagatorSample {
            let (a, b, c) = pair.traces(apriori);
            PropagatorSample {
                t: k as f64 * path.dt.as_f64(),
                tr_rho: a.as_f64(),
                tr_rho_prime: b.as_f64(),
                tr_rho_hypo: c.as_f64(),
                bloch_deviation: pair
                    .true_mean
                    .vector()
                    .max_abs_diff(direct.raw_bloch())
                    .as_f64(),
            }
        };
    out.push(sample(0, &pair, &direct));
    for (k, &dw) in path.increments.iter().enumerate() {
        pair = step_propagators(&pair, apriori, path.dt, dw)?;
        direct = step_density_with(scheme, &direct, path.dt, dw)?;
        if (k + 1) % stride == 0 {
            out.push(sample(k + 1, &pair, &direct));
        }
    }
    Ok(out)
}

/// Starting point of [`integrate_paths`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathInitial<T> {
    Bloch(BlochVector<T>),
    Density(QubitDensity<T>),
    Propagators { apriori: QubitDensity<T> },
}

impl<T: Real> PathInitial<T> {
    fn bloch(&self) -> BlochVector<T> {
        match self {
            PathInitial::Bloch(s) => *s,
            PathInitial::Density(r) | PathInitial::Propagators { apriori: r } => r.bloch(),
        }
    }
}

/// Which equations [`integrate_paths`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// Bloch diffusion, by the configured scheme.
    Bloch,
    /// Conditional master equation in matrix form, by the configured scheme.
    Density,
    /// Scalar purity diffusion driven by its own noise.
    Purity,
    /// Bloch diffusion plus the purity diffusion driven by the projected
    /// noise `dw = (s·dW)/|s|` of the same path.
    CoupledBlochPurity,
    /// Propagator pair `g`, `g′`.
    Propagators,
}

/// Quantities recorded along the paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// `|s|²` (for [`Equation::Purity`], the integrated `s²` itself).
    S2,
    /// `tr ρ² = (1 + s²)/2`.
    Purity,
    BlochNorm,
    BlochX,
    BlochY,
    BlochZ,
    /// `s²` from the purity equation of a coupled run.
    PuritySde,
    TraceRho,
    TraceRhoPrime,
    TraceRhoHypo,
    /// `|s|²` of the hypothetical state `ρ?_t`.
    HypoS2,
    /// `tr[ρ′_t ρ]`, the expected fidelity of the eigen-sampled estimate.
    EstimateFidelity,
}

impl Equation {
    pub fn observables(self) -> &'static [Observable] {
        use Observable::*;
        match self {
            Equation::Bloch | Equation::Density => &[S2, Purity, BlochNorm, BlochX, BlochY, BlochZ],
            Equation::Purity => &[S2, Purity],
            Equation::CoupledBlochPurity => &[S2, PuritySde],
            Equation::Propagators => &[
                TraceRho,
                TraceRhoPrime,
                TraceRhoHypo,
                S2,
                HypoS2,
                EstimateFidelity,
            ],
        }
    }
}

/// Ensemble statistics at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoint {
    pub t: f64,
    pub summaries: Vec<(Observable, RunSummary)>,
}

impl TimePoint {
    pub fn get(&self, which: Observable) -> Option<&RunSummary> {
        self.summaries
            .iter()
            .find(|(o, _)| *o == which)
            .map(|(_, s)| s)
    }
}

fn bloch_observables<T: Real>(s: &BlochVector<T>, out: &mut [f64]) {
    let v = s.vector();
    let s2 = v.norm_sqr().as_f64();
    out[0] = s2;
    out[1] = 0.5 * (1.0 + s2);
    out[2] = s2.sqrt();
    out[3] = v.x.as_f64();
    out[4] = v.y.as_f64();
    out[5] = v.z.as_f64();
}

/// Runs `ensemble` independent trajectories (stream `i` of `seed` for
/// trajectory `i`) and returns per-time ensemble statistics. Bit-identical
/// for a given seed regardless of the rayon pool size.
pub fn integrate_paths<T: Real>(
    config: &SdeConfig,
    initial: &PathInitial<T>,
    which: Equation,
    ensemble: usize,
    seed: u64,
) -> Result<Vec<TimePoint>> {
    config.validate()?;
    let observables = which.observables();
    let width = observables.len();
    let times = config.record_times();
    let records = times.len();
    let steps = config.steps();
    let stride = config.record_stride;
    let dt = T::lit(config.dt);
    let sqrt_dt = dt.sqrt();

    let summaries = ensemble_summaries(ensemble, seed, width * records, |rng, out| {
        let mut rec = 0;
        match which {
            Equation::Bloch => {
                let mut s = initial.bloch();
                for k in 0..=steps {
                    if k % stride == 0 {
                        bloch_observables(&s, &mut out[rec * width..(rec + 1) * width]);
                        rec += 1;
                    }
                    if k < steps {
                        s = step_bloch_with(
                            config.scheme,
                            &s,
                            dt,
                            NoiseIncrement::sample(rng, dt).dw,
                        )?;
                    }
                }
            }
            Equation::Density => {
                let mut rho = initial.bloch().to_density();
                if let PathInitial::Density(r) = initial {
                    rho = *r;
                }
                for k in 0..=steps {
                    if k % stride == 0 {
                        let s = BlochVector::new_unchecked(rho.raw_bloch());
                        bloch_observables(&s, &mut out[rec * width..(rec + 1) * width]);
                        rec += 1;
                    }
                    if k < steps {
                        rho = step_density_with(
                            config.scheme,
                            &rho,
                            dt,
                            NoiseIncrement::sample(rng, dt).dw,
                        )?;
                    }
                }
            }
            Equation::Purity => {
                let mut x = initial.bloch().norm_sqr();
                for k in 0..=steps {
                    if k % stride == 0 {
                        let s2 = x.as_f64();
                        out[rec * width] = s2;
                        out[rec * width + 1] = 0.5 * (1.0 + s2);
                        rec += 1;
                    }
                    if k < steps {
                        x = step_purity(x, dt, T::lit(rng.normal()) * sqrt_dt);
                    }
                }
            }
            Equation::CoupledBlochPurity => {
                let mut s = initial.bloch();
                let mut x = s.norm_sqr();
                for k in 0..=steps {
                    if k % stride == 0 {
                        out[rec * width] = s.norm_sqr().as_f64();
                        out[rec * width + 1] = x.as_f64();
                        rec += 1;
                    }
                    if k < steps {
                        let dw = NoiseIncrement::sample(rng, dt).dw;
                        let r = s.norm();
                        let scalar = if r < T::lit(NOISE_DIRECTION_EPS) {
                            T::lit(rng.normal()) * sqrt_dt
                        } else {
                            s.vector().dot(dw) / r
                        };
                        x = step_purity(x, dt, scalar);
                        s = step_bloch_with(config.scheme, &s, dt, dw)?;
                    }
                }
            }
            Equation::Propagators => {
                let apriori = match initial {
                    PathInitial::Propagators { apriori } | PathInitial::Density(apriori) => {
                        *apriori
                    }
                    PathInitial::Bloch(s) => s.to_density(),
                };
                let mut pair = PropagatorPair::new(&apriori);
                for k in 0..=steps {
                    if k % stride == 0 {
                        let (a, b, c) = pair.traces(&apriori);
                        let o = &mut out[rec * width..(rec + 1) * width];
                        o[0] = a.as_f64();
                        o[1] = b.as_f64();
                        o[2] = c.as_f64();
                        o[3] = pair.true_mean.norm_sqr().as_f64();
                        o[4] = pair.hypo_mean.norm_sqr().as_f64();
                        o[5] = pair.estimate()?.fidelity(&apriori).as_f64();
                        rec += 1;
                    }
                    if k < steps {
                        pair = step_propagators(
                            &pair,
                            &apriori,
                            dt,
                            NoiseIncrement::sample(rng, dt).dw,
                        )?;
                    }
                }
            }
        }
        Ok(())
    })?;

    Ok(times
        .into_iter()
        .enumerate()
        .map(|(r, t)| TimePoint {
            t,
            summaries: observables
                .iter()
                .enumerate()
                .map(|(j, &o)| (o, summaries[r * width + j]))
                .collect(),
        })
        .collect())
}
