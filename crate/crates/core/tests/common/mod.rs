//! Brute-force reference implementations shared by the integration tests.
//! Nothing here uses the closed forms of the library.

#![allow(dead_code)]

use num_complex::Complex64;
use weakmeas_core::{Mat2, Vec3};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Max-entry norm, enough to drive the scaling step.
pub fn max_entry(a: &Mat2) -> f64 {
    a.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential by Taylor series with scaling and squaring.
pub fn expm(a: &Mat2) -> Mat2 {
    let norm = max_entry(a);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.scale(scale);
    let mut term = Mat2::identity();
    let mut sum = Mat2::identity();
    for k in 1..30 {
        term = (term * x).scale(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `n·σ̂` assembled from the three Pauli matrices.
pub fn n_dot_sigma(n: Vec3) -> Mat2 {
    Mat2::pauli(0).scale(n.x) + Mat2::pauli(1).scale(n.y) + Mat2::pauli(2).scale(n.z)
}

/// `(2πΔ²)^{-1/2} exp[-(n·σ̂ − σ)²/2Δ²]` by matrix exponential.
pub fn gaussian_effect(n: Vec3, delta: f64, sigma: f64) -> Mat2 {
    let shifted = n_dot_sigma(n) - Mat2::scalar(sigma);
    let exponent = (shifted * shifted).scale(-0.5 / (delta * delta));
    expm(&exponent).scale((std::f64::consts::TAU * delta * delta).powf(-0.5))
}

/// `Π^{1/2}`, again by exponential of half the exponent.
pub fn gaussian_effect_sqrt(n: Vec3, delta: f64, sigma: f64) -> Mat2 {
    let shifted = n_dot_sigma(n) - Mat2::scalar(sigma);
    let exponent = (shifted * shifted).scale(-0.25 / (delta * delta));
    expm(&exponent).scale((std::f64::consts::TAU * delta * delta).powf(-0.25))
}

/// `(I + s·σ)/2`.
pub fn density(s: Vec3) -> Mat2 {
    (Mat2::identity() + n_dot_sigma(s)).scale(0.5)
}

/// Bloch vector `tr[ρσᵢ]` of an arbitrary matrix after trace normalization.
pub fn bloch_of(m: &Mat2) -> Vec3 {
    let tr = m.trace().re;
    let comp = |i: usize| (*m * Mat2::pauli(i)).trace().re / tr;
    Vec3::new(comp(0), comp(1), comp(2))
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}
