//! Two-level system algebra: Bloch vectors, density matrices, purity,
//! fidelity and eigen-decomposition.

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec3};
use crate::scalar::Real;

/// Norm slack accepted when constructing a Bloch vector.
pub const BLOCH_CLAMP_EPS: f64 = 1e-12;
/// Overshoot of |s| past 1 that is attributed to rounding and clamped away.
pub const ROUNDING_OVERSHOOT: f64 = 1e-9;
/// Distance from the unit sphere within which a vector counts as pure.
pub const PURE_EPS: f64 = 1e-9;
/// Below this norm the eigenbasis is degenerate and the ±ẑ axis is used.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Polarization vector `s` of `ρ = (I + s·σ)/2`, with `|s| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector<T>(Vec3<T>);

impl<T: Real> BlochVector<T> {
    /// Rejects vectors longer than `1 + 1e-12`.
    pub fn new(v: Vec3<T>) -> Result<Self> {
        let norm = v.norm();
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("Bloch vector {v:?}")));
        }
        if norm > T::one() + T::tol(BLOCH_CLAMP_EPS) {
            return Err(Error::OutsideBlochBall {
                norm: norm.as_f64(),
                tolerance: BLOCH_CLAMP_EPS,
            });
        }
        Ok(Self(v))
    }

    pub fn from_xyz(x: T, y: T, z: T) -> Result<Self> {
        Self::new(Vec3::new(x, y, z))
    }

    /// The maximally mixed state.
    pub fn origin() -> Self {
        Self(Vec3::zero())
    }

    /// Accepts `v` if `|v| ≤ 1`, projects it radially onto the unit sphere
    /// when the overshoot is at most `tolerance`, and rejects it otherwise.
    pub fn clamped(v: Vec3<T>, tolerance: T) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("Bloch vector {v:?}")));
        }
        let norm = v.norm();
        if norm <= T::one() {
            Ok(Self(v))
        } else if norm - T::one() <= tolerance {
            Ok(Self(v * norm.recip()))
        } else {
            Err(Error::OutsideBlochBall {
                norm: norm.as_f64(),
                tolerance: tolerance.as_f64(),
            })
        }
    }

    /// Wraps without checking; callers guarantee `|v| ≤ 1 + 1e-12`.
    pub(crate) fn new_unchecked(v: Vec3<T>) -> Self {
        Self(v)
    }

    #[inline]
    pub fn vector(&self) -> Vec3<T> {
        self.0
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.0.norm()
    }

    #[inline]
    pub fn norm_sqr(&self) -> T {
        self.0.norm_sqr()
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::tol(PURE_EPS)
    }

    /// Materializes `(I + s·σ)/2`.
    pub fn to_density(&self) -> QubitDensity<T> {
        let half = T::lit(0.5);
        QubitDensity(Mat2::from_pauli(half, self.0 * half))
    }

    pub fn purity(&self) -> T {
        (T::one() + self.norm_sqr()) / T::lit(2.0)
    }

    pub fn fidelity(&self, other: &Self) -> T {
        (T::one() + self.0.dot(other.0)) / T::lit(2.0)
    }
}

/// Unit 3-vector naming a measured polarization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<T>(Vec3<T>);

impl<T: Real> Direction<T> {
    /// Normalizes any nonzero finite vector.
    pub fn new(v: Vec3<T>) -> Result<Self> {
        let norm = v.norm();
        if !v.is_finite() || norm <= T::zero() {
            return Err(Error::InvalidInput(format!(
                "direction needs a nonzero finite vector, got {v:?}"
            )));
        }
        Ok(Self(v * norm.recip()))
    }

    /// Accepts a vector that is already unit to `1e-12`.
    pub fn from_unit(v: Vec3<T>) -> Result<Self> {
        if (v.norm() - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidInput(format!(
                "direction {v:?} is not unit (norm {})",
                v.norm()
            )));
        }
        Ok(Self(v))
    }

    pub fn x() -> Self {
        Self(Vec3::new(T::one(), T::zero(), T::zero()))
    }

    pub fn y() -> Self {
        Self(Vec3::new(T::zero(), T::one(), T::zero()))
    }

    pub fn z() -> Self {
        Self(Vec3::unit_z())
    }

    #[inline]
    pub fn vector(&self) -> Vec3<T> {
        self.0
    }

    pub fn flipped(&self) -> Self {
        Self(-self.0)
    }

    /// `n·σ`.
    pub fn pauli(&self) -> Mat2<T> {
        Mat2::from_pauli(T::zero(), self.0)
    }
}

/// A pure qubit state, represented by its unit Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit<T>(Direction<T>);

impl<T: Real> PureQubit<T> {
    pub fn new(axis: Direction<T>) -> Self {
        Self(axis)
    }

    /// From a Bloch vector within `1e-9` of the unit sphere.
    pub fn from_bloch(s: BlochVector<T>) -> Result<Self> {
        if !s.is_pure() {
            return Err(Error::InvalidInput(format!(
                "Bloch norm {} is not pure",
                s.norm()
            )));
        }
        Ok(Self(Direction::new(s.vector())?))
    }

    pub fn axis(&self) -> Direction<T> {
        self.0
    }

    pub fn bloch(&self) -> BlochVector<T> {
        BlochVector::new_unchecked(self.0.vector())
    }

    pub fn density(&self) -> QubitDensity<T> {
        self.bloch().to_density()
    }

    /// The orthogonal pure state.
    pub fn orthogonal(&self) -> Self {
        Self(self.0.flipped())
    }
}

/// Hermitian, unit-trace, positive 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity<T>(Mat2<T>);

impl<T: Real> QubitDensity<T> {
    /// Validates Hermiticity (1e-12), unit trace (1e-9) and positivity
    /// (eigenvalues ≥ −1e-9).
    pub fn from_matrix(m: Mat2<T>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("density matrix entry".into()));
        }
        let defect = m.hermiticity_defect();
        if defect > T::tol(1e-12) {
            return Err(Error::InvalidDensity(format!(
                "Hermiticity defect {defect:e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > T::tol(1e-9) || tr.im.abs() > T::tol(1e-9) {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let rho = Self(m.hermitian_part());
        let lo = rho.min_eigenvalue();
        if lo < -T::tol(1e-9) {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat2::scalar(T::lit(0.5)))
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.0
    }

    /// Bloch vector `tr[σ ρ]`; rounding overshoot up to 1e-9 is clamped.
    pub fn bloch(&self) -> BlochVector<T> {
        let v = self.raw_bloch();
        match BlochVector::clamped(v, T::tol(ROUNDING_OVERSHOOT)) {
            Ok(b) => b,
            // validated densities have λ_min ≥ -1e-9, i.e. |v| ≤ 1 + 2e-9
            Err(_) => BlochVector::new_unchecked(v * v.norm().recip()),
        }
    }

    pub(crate) fn raw_bloch(&self) -> Vec3<T> {
        self.0.pauli_traces()
    }

    /// `tr[ρ²]`, computed from the matrix entries.
    pub fn purity(&self) -> T {
        (self.0 * self.0).trace().re
    }

    /// `tr[ρ′ρ]`, computed from the matrix entries.
    pub fn fidelity(&self, other: &Self) -> T {
        (self.0 * other.0).trace().re
    }

    fn min_eigenvalue(&self) -> T {
        let tr = self.0.trace().re;
        let v = self.raw_bloch();
        (tr - v.norm()) / T::lit(2.0)
    }

    /// Eigenpairs `((1+|v|)/2, +v̂)` and `((1−|v|)/2, −v̂)`, largest first.
    /// For `|v| < 1e-12` the basis is `±ẑ` with both eigenvalues `1/2`.
    pub fn eigensystem(&self) -> [(T, PureQubit<T>); 2] {
        eigensystem(&self.bloch())
    }

    /// Convex combination `a·self + (1−a)·other`.
    pub fn mix(&self, other: &Self, a: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&a) {
            return Err(Error::InvalidInput(format!(
                "mixing weight {a} outside [0,1]"
            )));
        }
        Ok(Self(self.0.scale(a) + other.0.scale(T::one() - a)))
    }

    /// Wraps a matrix already known to be a density.
    pub(crate) fn new_unchecked(m: Mat2<T>) -> Self {
        Self(m)
    }

    /// `ρ = M / tr M` for a positive operator `M`.
    pub fn normalized(m: Mat2<T>) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > T::zero()) {
            return Err(Error::ZeroTrace);
        }
        let rho = m.hermitian_part().scale(tr.recip());
        if !rho.is_finite() {
            return Err(Error::NonFinite("normalized operator".into()));
        }
        Ok(Self(rho))
    }
}

impl<T: Real> From<BlochVector<T>> for QubitDensity<T> {
    fn from(s: BlochVector<T>) -> Self {
        s.to_density()
    }
}

/// Eigen-decomposition in Bloch form; see [`QubitDensity::eigensystem`].
pub fn eigensystem<T: Real>(s: &BlochVector<T>) -> [(T, PureQubit<T>); 2] {
    let half = T::lit(0.5);
    let norm = s.norm();
    if norm < T::lit(DEGENERATE_NORM) {
        let up = PureQubit::new(Direction::z());
        return [(half, up), (half, up.orthogonal())];
    }
    let up = PureQubit::new(Direction(s.vector() * norm.recip()));
    let r = norm.min(T::one());
    [
        (half * (T::one() + r), up),
        (half * (T::one() - r), up.orthogonal()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn density_from_entries(m: [[Complex<f64>; 2]; 2]) -> Result<QubitDensity<f64>> {
        QubitDensity::from_matrix(Mat2::new(m))
    }

    fn b(x: f64, y: f64, z: f64) -> BlochVector<f64> {
        BlochVector::from_xyz(x, y, z).unwrap()
    }

    #[test]
    fn matrix_of_special_states() {
        let half = Mat2::scalar(0.5);
        assert!(b(0., 0., 0.).to_density().matrix().max_abs_diff(&half) < 1e-15);
        let up = Mat2::from_pauli(0.5, Vec3::new(0., 0., 0.5));
        assert!(b(0., 0., 1.).to_density().matrix().max_abs_diff(&up) < 1e-15);
        let m = b(1., 0., 0.).to_density();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.matrix().m[i][j] - Complex::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_long_vectors() {
        assert!(BlochVector::from_xyz(0.0, 0.0, 1.0 + 1e-6).is_err());
        assert!(BlochVector::from_xyz(0.0, 0.0, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn clamp_policy() {
        let v = Vec3::new(0.0, 0.0, 1.0 + 5e-10);
        let s = BlochVector::clamped(v, ROUNDING_OVERSHOOT).unwrap();
        assert_eq!(s.norm(), 1.0);
        assert!(BlochVector::clamped(Vec3::new(0.0, 0.0, 1.0 + 1e-8), ROUNDING_OVERSHOOT).is_err());
    }

    #[test]
    fn purity_values() {
        assert_eq!(QubitDensity::<f64>::maximally_mixed().purity(), 0.5);
        assert!((b(0.6, 0.0, 0.8).to_density().purity() - 1.0).abs() < 1e-15);
        assert!((b(0., 0., 0.6).to_density().purity() - 0.68).abs() < 1e-15);
    }

    #[test]
    fn fidelity_values() {
        let s = b(0.0, 0.6, 0.8);
        let p = s.to_density();
        let q = b(0.0, -0.6, -0.8).to_density();
        assert!((p.fidelity(&p) - 1.0).abs() < 1e-15);
        assert!(p.fidelity(&q).abs() < 1e-15);
        assert!((QubitDensity::maximally_mixed().fidelity(&p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eigen_pairs() {
        let [(l0, e0), (l1, e1)] = b(0., 0., 0.8).to_density().eigensystem();
        assert!((l0 - 0.9).abs() < 1e-15 && (l1 - 0.1).abs() < 1e-15);
        assert_eq!(e0.axis().vector(), Vec3::unit_z());
        assert_eq!(e1.axis().vector(), -Vec3::unit_z());

        let pure = b(0.6, 0.0, 0.8);
        let [(l0, e0), (l1, _)] = eigensystem(&pure);
        assert!((l0 - 1.0).abs() < 1e-15 && l1.abs() < 1e-15);
        assert!(e0.bloch().vector().max_abs_diff(pure.vector()) < 1e-15);

        let [(l0, e0), (l1, e1)] = eigensystem(&BlochVector::<f64>::origin());
        assert_eq!((l0, l1), (0.5, 0.5));
        assert_eq!(e0.axis().vector(), Vec3::unit_z());
        assert_eq!(e1.axis().vector(), -Vec3::unit_z());
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let c = |r: f64, i: f64| Complex::new(r, i);
        // trace 2
        assert!(density_from_entries([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]).is_err());
        // not Hermitian
        assert!(
            density_from_entries([[c(0.5, 0.), c(0.1, 0.)], [c(0.2, 0.), c(0.5, 0.)]]).is_err()
        );
        // negative eigenvalue
        assert!(
            density_from_entries([[c(0.5, 0.), c(0.6, 0.)], [c(0.6, 0.), c(0.5, 0.)]]).is_err()
        );
    }

    #[test]
    fn single_precision_roundtrip() {
        let s = BlochVector::<f32>::from_xyz(0.1, -0.3, 0.5).unwrap();
        let back = s.to_density().bloch();
        assert!(back.vector().max_abs_diff(s.vector()) < 1e-6);
    }
}
