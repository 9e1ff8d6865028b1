//! Fixed-size real 3-vectors and complex 2×2 matrices.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Real;

/// Plain Cartesian 3-vector; no norm constraint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm_sqr(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, other: Self) -> T {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Converts the components to another scalar type.
    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(m: [[Complex<T>; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self {
            m: [[z, z], [z, z]],
        }
    }

    pub fn identity() -> Self {
        Self::scalar(T::one())
    }

    /// `k·I`.
    pub fn scalar(k: T) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let d = Complex::new(k, T::zero());
        Self {
            m: [[d, z], [z, d]],
        }
    }

    /// Pauli matrix σ_x, σ_y or σ_z for `axis` 0, 1, 2.
    pub fn pauli(axis: usize) -> Self {
        let o = T::zero();
        let l = T::one();
        let c = Complex::new;
        match axis {
            0 => Self::new([[c(o, o), c(l, o)], [c(l, o), c(o, o)]]),
            1 => Self::new([[c(o, o), c(o, -l)], [c(o, l), c(o, o)]]),
            2 => Self::new([[c(l, o), c(o, o)], [c(o, o), c(-l, o)]]),
            _ => panic!("Pauli axis out of range: {axis}"),
        }
    }

    /// `a·I + v·σ`, with real `a` and `v`.
    pub fn from_pauli(a: T, v: Vec3<T>) -> Self {
        let c = Complex::new;
        Self::new([
            [c(a + v.z, T::zero()), c(v.x, -v.y)],
            [c(v.x, v.y), c(a - v.z, T::zero())],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, k: T) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e = *e * k;
            }
        }
        out
    }

    pub fn scale_complex(&self, k: Complex<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e = *e * k;
            }
        }
        out
    }

    /// Expectations `tr[σ_i M]` for i = x, y, z (real parts).
    ///
    /// For a Hermitian `M = (a·I + v·σ)` this returns `2v`.
    pub fn pauli_traces(&self) -> Vec3<T> {
        let m = &self.m;
        // tr[σx M] = m10 + m01, tr[σy M] = i(m01 - m10), tr[σz M] = m00 - m11
        let x = (m[1][0] + m[0][1]).re;
        let y = (m[0][1] - m[1][0]).im * -T::one();
        let z = (m[0][0] - m[1][1]).re;
        Vec3::new(x, y, z)
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sqr(&self) -> T {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .fold(T::zero(), |acc, e| acc + e.norm_sqr())
    }

    /// Largest singular value, from the eigenvalues of `M†M`.
    pub fn max_singular_value(&self) -> T {
        let f = self.frobenius_sqr();
        let d = self.det().norm_sqr();
        let disc = (f * f - T::lit(4.0) * d).max(T::zero());
        ((f + disc.sqrt()) / T::lit(2.0)).sqrt()
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    /// Hermiticity defect `max |M - M†|`.
    pub fn hermiticity_defect(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(T::lit(0.5))
    }

    /// Anticommutator `{A, B}`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Commutator `[A, B]`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .all(|e| e.re.is_finite() && e.im.is_finite())
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][j] + o.m[i][j];
            }
        }
        out
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][j] - o.m[i][j];
            }
        }
        out
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = Mat2::<f64>::pauli(0);
        let y = Mat2::<f64>::pauli(1);
        let z = Mat2::<f64>::pauli(2);
        // σx σy = i σz
        let i_z = z.scale_complex(Complex::new(0.0, 1.0));
        assert!((x * y).max_abs_diff(&i_z) < 1e-15);
        for p in [x, y, z] {
            assert!((p * p).max_abs_diff(&Mat2::identity()) < 1e-15);
        }
    }

    #[test]
    fn pauli_traces_recover_vector() {
        let v = Vec3::new(0.3f64, -0.2, 0.7);
        let m = Mat2::from_pauli(0.5, v);
        let t = m.pauli_traces();
        assert!(t.max_abs_diff(v * 2.0) < 1e-15);
        assert!((m.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_value_of_diagonal() {
        let m = Mat2::from_pauli(0.5f64, Vec3::new(0.0, 0.0, -2.0));
        // diag(-1.5, 2.5)
        assert!((m.max_singular_value() - 2.5).abs() < 1e-14);
    }
}
