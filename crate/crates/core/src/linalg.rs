//! Fixed-size complex matrices for one- and two-qubit operators.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Dense `D x D` complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<const D: usize>(pub [[C64; D]; D]);

pub type Mat2 = Matrix<2>;
pub type Mat4 = Matrix<4>;

impl<const D: usize> Matrix<D> {
    pub fn zeros() -> Self {
        Matrix([[ZERO; D]; D])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..D {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn diagonal(entries: [C64; D]) -> Self {
        let mut m = Self::zeros();
        for (k, v) in entries.into_iter().enumerate() {
            m.0[k][k] = v;
        }
        m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..D {
            for c in 0..D {
                m.0[c][r] = self.0[r][c].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..D).map(|k| self.0[k][k]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= factor);
        m
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise deviation of `U U^dagger` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        (*self * self.adjoint()).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..D).all(|r| (0..D).all(|c| r == c || self.0[r][c].norm() <= tol))
    }

    pub fn apply(&self, v: &[C64; D]) -> [C64; D] {
        let mut out = [ZERO; D];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..D).map(|c| self.0[r][c] * v[c]).sum();
        }
        out
    }
}

impl<const D: usize> Default for Matrix<D> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<const D: usize> Mul for Matrix<D> {
    type Output = Matrix<D>;

    fn mul(self, rhs: Self) -> Self::Output {
        let mut m = Self::zeros();
        for r in 0..D {
            for c in 0..D {
                m.0[r][c] = (0..D).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        m
    }
}

impl<const D: usize> Add for Matrix<D> {
    type Output = Matrix<D>;

    fn add(mut self, rhs: Self) -> Self::Output {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl<const D: usize> Sub for Matrix<D> {
    type Output = Matrix<D>;

    fn sub(mut self, rhs: Self) -> Self::Output {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

/// `a ⊗ b`, with `a` acting on the more significant qubit.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..2 {
                for bc in 0..2 {
                    m.0[2 * ar + br][2 * ac + bc] = a.0[ar][ac] * b.0[br][bc];
                }
            }
        }
    }
    m
}

pub fn pauli_x() -> Mat2 {
    Matrix([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> Mat2 {
    Matrix([[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> Mat2 {
    Matrix([[ONE, ZERO], [ZERO, -ONE]])
}

/// Two-qubit SWAP in the `|q_i q_j>` basis.
pub fn swap() -> Mat4 {
    let mut m = Mat4::zeros();
    m.0[0][0] = ONE;
    m.0[1][2] = ONE;
    m.0[2][1] = ONE;
    m.0[3][3] = ONE;
    m
}
