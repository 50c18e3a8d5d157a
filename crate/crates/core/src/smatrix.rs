// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form linear algebra for 2×2 complex matrices.
//!
//! Singular values come from the eigenvalues of M†M solved by the quadratic
//! formula, so every result is deterministic and exact up to rounding.
//! Basis convention for qubit states: index 1 is the excited level |e⟩,
//! index 0 the ground level |g⟩.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QslError, Result};

/// Absolute tolerance for the Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    entries: [[Complex64; 2]; 2],
}

impl ComplexMatrix2 {
    /// Builds a matrix, rejecting NaN or infinite entries.
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        if entries.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self { entries })
        } else {
            Err(QslError::invalid("matrix has non-finite entries"))
        }
    }

    /// Unchecked constructor for internal arithmetic on known-finite data.
    pub(crate) const fn from_entries(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn from_real(entries: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(entries.map(|row| row.map(|x| Complex64::new(x, 0.0))))
    }

    pub fn zero() -> Self {
        Self::from_entries([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::from_entries([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `diag(d0, d1)` with `d0` at index 0 (ground) and `d1` at index 1 (excited).
    pub fn diag(d0: f64, d1: f64) -> Self {
        Self::from_entries([
            [Complex64::new(d0, 0.0), ZERO],
            [ZERO, Complex64::new(d1, 0.0)],
        ])
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.entries;
        Self::from_entries([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.entries;
        let d00 = m[0][0].im.abs();
        let d11 = m[1][1].im.abs();
        let d01 = (m[0][1] - m[1][0].conj()).norm();
        d00.max(d11).max(d01)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_entries(self.entries.map(|row| row.map(|z| z * s)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> (f64, f64) {
        // (s1 ± s2)² = ‖M‖_F² ± 2|det M|. After a global phase making det
        // real and non-negative both become sums of squared moduli, so
        // nearly equal singular values keep full relative accuracy.
        let det = self.det();
        let phase = if det == Complex64::new(0.0, 0.0) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, -0.5 * det.arg())
        };
        let [[a, b], [c, d]] = self.entries.map(|row| row.map(|x| x * phase));
        let sum = (a + d.conj()).norm().hypot((b - c.conj()).norm());
        let diff = (a - d.conj()).norm().hypot((b + c.conj()).norm());
        (0.5 * (sum + diff), (0.5 * (sum - diff)).max(0.0))
    }

    pub fn schatten_norm(&self, p: SchattenP) -> f64 {
        let (s1, s2) = self.singular_values();
        match p {
            SchattenP::One => s1 + s2,
            SchattenP::Two => s1.hypot(s2),
            SchattenP::Infinity => s1,
        }
    }

    /// Schatten norm for a numeric order; only 1, 2 and ∞ are supported.
    pub fn schatten_norm_p(&self, p: f64) -> Result<f64> {
        Ok(self.schatten_norm(SchattenP::try_from(p)?))
    }

    pub fn trace_norm(&self) -> f64 {
        self.schatten_norm(SchattenP::One)
    }
}

impl Add for ComplexMatrix2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        Self::from_entries([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for ComplexMatrix2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ComplexMatrix2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_entries(self.entries.map(|row| row.map(|z| -z)))
    }
}

impl Mul for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::from_entries(out)
    }
}

impl Mul<Complex64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        Self::from_entries(self.entries.map(|row| row.map(|z| z * rhs)))
    }
}

/// Supported Schatten norm orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchattenP {
    One,
    Two,
    Infinity,
}

impl SchattenP {
    pub const ALL: [SchattenP; 3] = [SchattenP::One, SchattenP::Two, SchattenP::Infinity];
}

impl TryFrom<f64> for SchattenP {
    type Error = QslError;

    fn try_from(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(SchattenP::One)
        } else if p == 2.0 {
            Ok(SchattenP::Two)
        } else if p == f64::INFINITY {
            Ok(SchattenP::Infinity)
        } else {
            Err(QslError::invalid(format!(
                "unsupported Schatten order p = {p} (expected 1, 2 or inf)"
            )))
        }
    }
}

impl FromStr for SchattenP {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(SchattenP::One),
            "2" => Ok(SchattenP::Two),
            "inf" | "infinity" | "∞" => Ok(SchattenP::Infinity),
            other => Err(QslError::invalid(format!("unsupported Schatten order {other:?}"))),
        }
    }
}

impl fmt::Display for SchattenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchattenP::One => "1",
            SchattenP::Two => "2",
            SchattenP::Infinity => "inf",
        })
    }
}

/// A validated qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(ComplexMatrix2);

impl DensityMatrix2 {
    /// Validates Hermiticity, unit trace and positivity, each to [`STATE_TOL`].
    pub fn new(m: ComplexMatrix2) -> Result<Self> {
        if !m.is_finite() {
            return Err(QslError::InvalidState("non-finite entries".into()));
        }
        let herm = m.hermiticity_defect();
        if herm > STATE_TOL {
            return Err(QslError::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QslError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let (lo, _) = hermitian_eigenvalues(&m);
        if lo < -STATE_TOL {
            return Err(QslError::InvalidState(format!(
                "negative eigenvalue {lo:e}"
            )));
        }
        Ok(Self(m))
    }

    /// State with excited population `p_excited` and coherence ρ₁₀ = `coherence`.
    pub fn from_parts(p_excited: f64, coherence: Complex64) -> Result<Self> {
        let m = ComplexMatrix2::new([
            [Complex64::new(1.0 - p_excited, 0.0), coherence.conj()],
            [coherence, Complex64::new(p_excited, 0.0)],
        ])?;
        Self::new(m)
    }

    /// |e⟩⟨e|
    pub fn excited() -> Self {
        Self(ComplexMatrix2::diag(0.0, 1.0))
    }

    /// |g⟩⟨g|
    pub fn ground() -> Self {
        Self(ComplexMatrix2::diag(1.0, 0.0))
    }

    /// Pure state cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩.
    pub fn pure(theta: f64, phi: f64) -> Result<Self> {
        let ce = (theta / 2.0).cos();
        let cg = Complex64::from_polar((theta / 2.0).sin(), phi);
        // ρ₁₀ = ⟨e|ρ|g⟩ = c_e · conj(c_g)
        Self::from_parts(ce * ce, cg.conj() * ce)
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.0
    }

    /// ρ₁₁, the excited-state population.
    pub fn excited_population(&self) -> f64 {
        self.0.get(1, 1).re
    }

    /// ρ₁₀ = ⟨e|ρ|g⟩.
    pub fn coherence(&self) -> Complex64 {
        self.0.get(1, 0)
    }

    /// Tr ρ², equal to 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.0.frobenius_sq()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }
}

impl From<DensityMatrix2> for ComplexMatrix2 {
    fn from(rho: DensityMatrix2) -> Self {
        rho.0
    }
}

/// Eigenvalues (ascending) of a Hermitian 2×2 matrix.
fn hermitian_eigenvalues(m: &ComplexMatrix2) -> (f64, f64) {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(1, 0);
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    (mean - radius, mean + radius)
}

/// Similarity 1 − ¼‖a − b‖₁²: equal to 1 for identical states and 0 for
/// orthogonal pure states.
pub fn trace_distance_measure(a: &DensityMatrix2, b: &DensityMatrix2) -> f64 {
    let diff = a.0 - b.0;
    let t = diff.trace_norm();
    (1.0 - 0.25 * t * t).clamp(0.0, 1.0)
}
