//! Single unsharp polarization measurement.
//!
//! The Gaussian effect `Π(σ) = (2πΔ²)^{-1/2} exp[-(n·σ̂ - σ)²/2Δ²]` is
//! diagonal in the eigenbasis of `n·σ̂`, so it is stored as the two
//! eigenvalue coefficients (in log form, to survive `|σ| ≫ Δ`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec3};
use crate::quadrature::QuadratureSpec;
use crate::qubit::{
    eigensystem, BlochVector, Direction, PureQubit, QubitDensity, ROUNDING_OVERSHOOT,
};
use crate::rng::RandomStream;
use crate::scalar::Real;

/// Anything with a Bloch vector.
pub trait QubitState<T: Real> {
    fn bloch_vector(&self) -> BlochVector<T>;
}

impl<T: Real> QubitState<T> for BlochVector<T> {
    fn bloch_vector(&self) -> BlochVector<T> {
        *self
    }
}

impl<T: Real> QubitState<T> for QubitDensity<T> {
    fn bloch_vector(&self) -> BlochVector<T> {
        self.bloch()
    }
}

impl<T: Real> QubitState<T> for PureQubit<T> {
    fn bloch_vector(&self) -> BlochVector<T> {
        self.bloch()
    }
}

/// How a pure estimate is drawn from a mixed estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    /// Eigenstate `i` with probability `λᵢ`.
    #[default]
    EigenSample,
    /// The eigenstate with the larger eigenvalue.
    MostProbable,
}

/// Positive operator with a closed-form mixed estimate `Π / tr Π`.
pub trait Effect<T: Real> {
    /// The effect operator itself; may underflow for long sequences.
    fn effect_operator(&self) -> Mat2<T>;

    fn mixed_estimate(&self) -> Result<QubitDensity<T>>;
}

/// `Π(σ)` for one outcome `σ` along `direction` at precision `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPovmElement<T> {
    pub direction: Direction<T>,
    pub delta: T,
    pub sigma: T,
    /// ln of the coefficient on the `+1` eigenprojector.
    pub log_coeff_plus: T,
    /// ln of the coefficient on the `−1` eigenprojector.
    pub log_coeff_minus: T,
}

impl<T: Real> GaussianPovmElement<T> {
    pub fn coeff_plus(&self) -> T {
        self.log_coeff_plus.exp()
    }

    pub fn coeff_minus(&self) -> T {
        self.log_coeff_minus.exp()
    }

    /// Coefficients divided by the larger one, and the ln of that divisor.
    pub fn relative_coeffs(&self) -> (T, T, T) {
        let top = self.log_coeff_plus.max(self.log_coeff_minus);
        (
            (self.log_coeff_plus - top).exp(),
            (self.log_coeff_minus - top).exp(),
            top,
        )
    }

    /// `tr Π = c₊ + c₋`.
    pub fn trace(&self) -> T {
        self.coeff_plus() + self.coeff_minus()
    }

    /// `Π^{1/2} = √c₊ P₊ + √c₋ P₋`.
    pub fn sqrt_operator(&self) -> Mat2<T> {
        spectral(
            self.direction,
            (self.log_coeff_plus / T::lit(2.0)).exp(),
            (self.log_coeff_minus / T::lit(2.0)).exp(),
        )
    }

    /// `Π^{1/2}` divided by `exp(scale)`, with the largest coefficient equal to 1.
    pub fn scaled_sqrt_operator(&self) -> (Mat2<T>, T) {
        let (wp, wm, top) = self.relative_coeffs();
        (
            spectral(self.direction, wp.sqrt(), wm.sqrt()),
            top / T::lit(2.0),
        )
    }
}

impl<T: Real> Effect<T> for GaussianPovmElement<T> {
    fn effect_operator(&self) -> Mat2<T> {
        spectral(self.direction, self.coeff_plus(), self.coeff_minus())
    }

    /// Bloch vector `n·tanh((ln c₊ − ln c₋)/2)`.
    fn mixed_estimate(&self) -> Result<QubitDensity<T>> {
        let half = T::lit(0.5);
        let z = ((self.log_coeff_plus - self.log_coeff_minus) * half).tanh();
        if !z.is_finite() {
            return Err(Error::ZeroTrace);
        }
        Ok(
            BlochVector::clamped(self.direction.vector() * z, T::tol(ROUNDING_OVERSHOOT))?
                .to_density(),
        )
    }
}

/// `a·P₊ + b·P₋` with `P± = (I ± n·σ)/2`.
fn spectral<T: Real>(n: Direction<T>, a: T, b: T) -> Mat2<T> {
    let half = T::lit(0.5);
    Mat2::from_pauli((a + b) * half, n.vector() * ((a - b) * half))
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDelta(delta.as_f64()))
    }
}

/// ln N(σ; μ, Δ²).
fn log_normal_density<T: Real>(sigma: T, mean: T, delta: T) -> T {
    let d = sigma - mean;
    -(d * d) / (T::lit(2.0) * delta * delta) - T::lit(0.5) * (T::TAU() * delta * delta).ln()
}

/// Builds `Π(σ)` for outcome `sigma` along `n` at precision `delta`.
pub fn povm_coefficients<T: Real>(
    sigma: T,
    n: Direction<T>,
    delta: T,
) -> Result<GaussianPovmElement<T>> {
    check_delta(delta)?;
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "outcome {sigma} is not finite"
        )));
    }
    Ok(GaussianPovmElement {
        direction: n,
        delta,
        sigma,
        log_coeff_plus: log_normal_density(sigma, T::one(), delta),
        log_coeff_minus: log_normal_density(sigma, -T::one(), delta),
    })
}

/// Branch probabilities `p± = (1 ± n·s)/2`.
fn branch_probabilities<T: Real>(s: &BlochVector<T>, n: Direction<T>) -> (T, T) {
    let proj = n.vector().dot(s.vector()).max(-T::one()).min(T::one());
    let half = T::lit(0.5);
    (half * (T::one() + proj), half * (T::one() - proj))
}

/// `p(σ) = tr[Π(σ)ρ] = p₊N(σ; 1, Δ²) + p₋N(σ; −1, Δ²)`.
pub fn outcome_pdf<T: Real, S: QubitState<T>>(
    rho: &S,
    n: Direction<T>,
    delta: T,
    sigma: T,
) -> Result<T> {
    Ok(log_outcome_pdf(rho, n, delta, sigma)?.exp())
}

/// ln p(σ), evaluated without underflow.
pub fn log_outcome_pdf<T: Real, S: QubitState<T>>(
    rho: &S,
    n: Direction<T>,
    delta: T,
    sigma: T,
) -> Result<T> {
    check_delta(delta)?;
    let (pp, pm) = branch_probabilities(&rho.bloch_vector(), n);
    let lp = pp.ln() + log_normal_density(sigma, T::one(), delta);
    let lm = pm.ln() + log_normal_density(sigma, -T::one(), delta);
    let top = lp.max(lm);
    if top == T::neg_infinity() {
        return Ok(top);
    }
    Ok(top + ((lp - top).exp() + (lm - top).exp()).ln())
}

/// Exact draw from `p(σ)`: pick the ±1 branch, then add N(0, Δ²) noise.
pub fn sample_outcome<T: Real, S: QubitState<T>>(
    rho: &S,
    n: Direction<T>,
    delta: T,
    rng: &mut RandomStream,
) -> Result<T> {
    check_delta(delta)?;
    let (pp, _) = branch_probabilities(&rho.bloch_vector(), n);
    let branch = if rng.bernoulli(pp.as_f64()) {
        T::one()
    } else {
        -T::one()
    };
    Ok(branch + delta * T::lit(rng.normal()))
}

/// Bloch form of `Π^{1/2}ρΠ^{1/2} / tr[Πρ]`.
pub fn posterior_update_bloch<T: Real>(
    s: &BlochVector<T>,
    element: &GaussianPovmElement<T>,
) -> Result<BlochVector<T>> {
    let (wp, wm, _) = element.relative_coeffs();
    let n = element.direction.vector();
    let half = T::lit(0.5);
    let par = n.dot(s.vector());
    let perp = s.vector() - n * par;
    let norm = half * ((wp + wm) + (wp - wm) * par);
    if !(norm > T::zero()) {
        return Err(Error::ZeroTrace);
    }
    let new_par = half * ((wp - wm) + (wp + wm) * par) / norm;
    let shrink = (wp * wm).sqrt() / norm;
    BlochVector::clamped(n * new_par + perp * shrink, T::tol(ROUNDING_OVERSHOOT))
}

/// Aposteriori state after outcome `sigma` of the measurement along `n`.
pub fn posterior_update<T: Real, S: QubitState<T>>(
    rho: &S,
    sigma: T,
    n: Direction<T>,
    delta: T,
) -> Result<QubitDensity<T>> {
    let element = povm_coefficients(sigma, n, delta)?;
    Ok(posterior_update_bloch(&rho.bloch_vector(), &element)?.to_density())
}

/// Sharp measurement of `n·σ̂`: outcome ±1 with probability `(1 ± n·s)/2`
/// and the matching eigenstate.
pub fn projective_posterior<T: Real, S: QubitState<T>>(
    rho: &S,
    n: Direction<T>,
    rng: &mut RandomStream,
) -> (i8, PureQubit<T>) {
    let (pp, _) = branch_probabilities(&rho.bloch_vector(), n);
    if rng.bernoulli(pp.as_f64()) {
        (1, PureQubit::new(n))
    } else {
        (-1, PureQubit::new(n.flipped()))
    }
}

/// Pure estimate drawn from the eigenstates of `estimate`.
pub fn pure_estimate<T: Real, S: QubitState<T>>(
    estimate: &S,
    mode: EstimateMode,
    rng: &mut RandomStream,
) -> PureQubit<T> {
    let [(l0, e0), (_, e1)] = eigensystem(&estimate.bloch_vector());
    match mode {
        EstimateMode::MostProbable => e0,
        EstimateMode::EigenSample => {
            if rng.bernoulli(l0.as_f64()) {
                e0
            } else {
                e1
            }
        }
    }
}

/// `max |∫Π(σ)dσ − I|` by composite Gauss–Legendre over
/// `σ ∈ [−1 − 12Δ, 1 + 12Δ]`.
pub fn completeness_residual(delta: f64, quadrature: QuadratureSpec) -> Result<f64> {
    check_delta(delta)?;
    let n = Direction::new(Vec3::new(1.0, 1.0, 1.0))?;
    let (a, b) = (-1.0 - 12.0 * delta, 1.0 + 12.0 * delta);
    let entry = |pick: fn(&Mat2<f64>) -> f64| {
        quadrature.integrate(a, b, |sigma| {
            let e = povm_coefficients(sigma, n, delta).expect("validated inputs");
            pick(&e.effect_operator())
        })
    };
    let m00 = entry(|m| m.m[0][0].re);
    let m11 = entry(|m| m.m[1][1].re);
    let m01_re = entry(|m| m.m[0][1].re);
    let m01_im = entry(|m| m.m[0][1].im);
    let off = (m01_re * m01_re + m01_im * m01_im).sqrt();
    Ok((m00 - 1.0).abs().max((m11 - 1.0).abs()).max(off))
}
