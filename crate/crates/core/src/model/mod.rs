// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Spontaneous decay of a two-level atom into a zero-temperature reservoir
//! with a detuned Lorentzian spectral density.
//!
//! With z = λ − iΔ and d = √(z² − 2γ₀λ) the excited-state amplitude is
//!
//! ```text
//! C(t) = e^{−zt/2} [cosh(dt/2) + (z/d) sinh(dt/2)]
//! Ċ(t) = −(γ₀λ/d) e^{−zt/2} sinh(dt/2)
//! ```
//!
//! Both are even in d, so the principal branch of the square root is used.
//! Units: ħ = 1, all rates share one unit and times are its inverse.

mod oracle;

pub use oracle::{oracle_amplitude, ExponentialKernel, SampledAmplitude};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QslError, Result};
use crate::smatrix::{ComplexMatrix2, DensityMatrix2};

/// Spectral width used by every figure recipe.
pub const DEFAULT_LAMBDA: f64 = 50.0;

/// Below this modulus of C(t) the rate coefficients are reported as singular.
pub const SINGULAR_AMPLITUDE: f64 = 1e-12;

// |dt/2| below which the series forms of cosh and sinh(x)/x are used.
const SERIES_CUTOFF: f64 = 1e-3;
// |Re(dt/2)| above which the amplitude is assembled from its two decaying modes.
const MODE_FORM_CUTOFF: f64 = 30.0;

/// Physical parameters of the reservoir model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    gamma0: f64,
    lambda: f64,
    delta: f64,
    omega0: f64,
}

impl ModelParams {
    /// Coupling `gamma0`, spectral width `lambda`, detuning `delta`; ω₀ = 0.
    pub fn new(gamma0: f64, lambda: f64, delta: f64) -> Result<Self> {
        Self::with_omega0(gamma0, lambda, delta, 0.0)
    }

    /// ω₀ only shifts the centre of J(ω); it never enters C(t).
    pub fn with_omega0(gamma0: f64, lambda: f64, delta: f64, omega0: f64) -> Result<Self> {
        for (name, v) in [("gamma0", gamma0), ("lambda", lambda), ("delta", delta), ("omega0", omega0)] {
            if !v.is_finite() {
                return Err(QslError::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if gamma0 <= 0.0 {
            return Err(QslError::invalid(format!("gamma0 must be positive, got {gamma0}")));
        }
        if lambda <= 0.0 {
            return Err(QslError::invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { gamma0, lambda, delta, omega0 })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// γ₀ < λ/2.
    pub fn is_weak_coupling(&self) -> bool {
        self.gamma0 < 0.5 * self.lambda
    }

    /// Rescales every rate by `s`; times scale by 1/s.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::with_omega0(self.gamma0 * s, self.lambda * s, self.delta * s, self.omega0 * s)
    }

    /// z = λ − iΔ, the complex decay rate of the memory kernel.
    pub fn kernel_rate(&self) -> Complex64 {
        Complex64::new(self.lambda, -self.delta)
    }

    /// d = √((λ − iΔ)² − 2γ₀λ), principal branch.
    pub fn root_d(&self) -> Complex64 {
        let z = self.kernel_rate();
        (z * z - 2.0 * self.gamma0 * self.lambda).sqrt()
    }

    /// J(ω) = ½ γ₀λ² / ((ω₀ − Δ − ω)² + λ²).
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let offset = self.omega0 - self.delta - omega;
        0.5 * self.gamma0 * self.lambda * self.lambda / (offset * offset + self.lambda * self.lambda)
    }

    /// f(τ) = ½ γ₀λ e^{−(λ − iΔ)τ}.
    pub fn memory_kernel(&self, tau: f64) -> Result<Complex64> {
        check_time("tau", tau)?;
        Ok(self.kernel_at(tau))
    }

    fn kernel_at(&self, tau: f64) -> Complex64 {
        0.5 * self.gamma0 * self.lambda * (-self.kernel_rate() * tau).exp()
    }

    pub fn amplitude(&self, t: f64) -> Result<Amplitude> {
        check_time("t", t)?;
        Ok(self.amplitude_at(t))
    }

    pub(crate) fn amplitude_at(&self, t: f64) -> Amplitude {
        self.amplitude_with_root(self.root_d(), t)
    }

    /// Evaluates the closed form with an explicit choice of root `d`
    /// (either sign gives the same result).
    pub fn amplitude_with_root(&self, d: Complex64, t: f64) -> Amplitude {
        let parts = self.parts(d, t);
        let z = self.kernel_rate();
        let g = self.gamma0 * self.lambda;
        Amplitude {
            t,
            c: parts.ecosh + z * parts.esinhc,
            cdot: -g * parts.esinhc,
        }
    }

    /// C̈(t) obtained by differentiating the closed form of Ċ.
    pub fn amplitude_second_derivative(&self, t: f64) -> Result<Complex64> {
        check_time("t", t)?;
        let parts = self.parts(self.root_d(), t);
        let z = self.kernel_rate();
        Ok(-0.5 * self.gamma0 * self.lambda * (parts.ecosh - z * parts.esinhc))
    }

    /// e^{−zt/2}·cosh(dt/2) and e^{−zt/2}·sinh(dt/2)/d.
    fn parts(&self, d: Complex64, t: f64) -> ModeParts {
        let z = self.kernel_rate();
        let x = 0.5 * d * t;
        if x.norm() < SERIES_CUTOFF {
            let decay = (-0.5 * z * t).exp();
            let x2 = x * x;
            let cosh = 1.0 + x2 / 2.0 + x2 * x2 / 24.0;
            let sinhc = 0.5 * t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
            ModeParts { ecosh: decay * cosh, esinhc: decay * sinhc }
        } else if x.re.abs() < MODE_FORM_CUTOFF {
            let decay = (-0.5 * z * t).exp();
            ModeParts { ecosh: decay * x.cosh(), esinhc: decay * x.sinh() / d }
        } else {
            let up = (0.5 * (d - z) * t).exp();
            let down = (-0.5 * (d + z) * t).exp();
            ModeParts { ecosh: 0.5 * (up + down), esinhc: (up - down) / (2.0 * d) }
        }
    }

    /// P(t) = |C(t)|².
    pub fn excited_population(&self, t: f64) -> Result<f64> {
        Ok(self.amplitude(t)?.population())
    }

    /// Ṗ(t) = 2 Re(C̄ Ċ); positive values mean energy flowing back into the atom.
    pub fn population_rate(&self, t: f64) -> Result<f64> {
        Ok(self.amplitude(t)?.population_rate())
    }

    /// γ(t) = −2 Re(Ċ/C).
    pub fn decay_rate(&self, t: f64) -> Result<Rate> {
        check_time("t", t)?;
        let a = self.amplitude_at(t);
        Ok(self.rate_or_singular(&a, |r| -2.0 * r.re))
    }

    /// S(t) = −2 Im(Ċ/C).
    pub fn lamb_shift(&self, t: f64) -> Result<Rate> {
        check_time("t", t)?;
        let a = self.amplitude_at(t);
        Ok(self.rate_or_singular(&a, |r| -2.0 * r.im))
    }

    fn rate_or_singular(&self, a: &Amplitude, f: impl Fn(Complex64) -> f64) -> Rate {
        if a.c.norm() < SINGULAR_AMPLITUDE {
            Rate::Singular { zero_bracket: self.bracket_zero(a.t) }
        } else {
            Rate::Finite(f(a.cdot / a.c))
        }
    }

    /// Brackets the zero of C near `t` by bisection on Re C (or Im C).
    fn bracket_zero(&self, t: f64) -> (f64, f64) {
        let a = self.amplitude_at(t);
        let slope = a.cdot.norm().max(f64::MIN_POSITIVE);
        let half = (4.0 * a.c.norm() / slope).max(1e-15 * t.max(1.0));
        let (lo, hi) = ((t - half).max(0.0), t + half);
        let parts: [fn(Complex64) -> f64; 2] = [|c| c.re, |c| c.im];
        for part in parts {
            let g = |s: f64| part(self.amplitude_at(s).c);
            let (mut a, mut b) = (lo, hi);
            let (mut ga, gb) = (g(a), g(b));
            if ga == 0.0 {
                return (a, a);
            }
            if gb == 0.0 {
                return (b, b);
            }
            if ga.signum() == gb.signum() {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = g(m);
                if gm == 0.0 {
                    return (m, m);
                }
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            return (a, b);
        }
        (t, t)
    }

    /// γ_M = γ₀λ² / (λ² + Δ²), the weak-coupling long-time rate.
    pub fn markov_limit(&self) -> f64 {
        let l2 = self.lambda * self.lambda;
        self.gamma0 * l2 / (l2 + self.delta * self.delta)
    }

    /// Exact long-time decay rate Re(z − d) of the slowest amplitude mode.
    ///
    /// Differs from [`markov_limit`](Self::markov_limit) at order γ₀λ/|z|².
    pub fn asymptotic_decay_rate(&self) -> f64 {
        (self.kernel_rate() - self.root_d()).re
    }

    /// Reduced state at time `t` for the trajectory starting from `rho0`.
    pub fn evolve(&self, rho0: &DensityMatrix2, t: f64) -> Result<DensityMatrix2> {
        check_time("t", t)?;
        let a = self.amplitude_at(t);
        let p11 = rho0.excited_population() * a.population();
        let coh = rho0.coherence() * a.c;
        let m = ComplexMatrix2::from_entries([
            [Complex64::new(1.0 - p11, 0.0), coh.conj()],
            [coh, Complex64::new(p11, 0.0)],
        ]);
        DensityMatrix2::new(m).map_err(|e| e.context(format!("evolved state at t = {t}")))
    }

    /// ρ_t − ρ_s along the trajectory from `rho0`, formed entrywise so that
    /// tiny populations do not cancel against 1 − P.
    pub fn displacement(&self, rho0: &DensityMatrix2, s: f64, t: f64) -> Result<ComplexMatrix2> {
        check_time("s", s)?;
        check_time("t", t)?;
        Ok(self.displacement_between(rho0, &self.amplitude_at(s), &self.amplitude_at(t)))
    }

    pub(crate) fn displacement_between(
        &self,
        rho0: &DensityMatrix2,
        from: &Amplitude,
        to: &Amplitude,
    ) -> ComplexMatrix2 {
        let dp = rho0.excited_population() * (to.population() - from.population());
        let dc = rho0.coherence() * (to.c - from.c);
        ComplexMatrix2::from_entries([
            [Complex64::new(-dp, 0.0), dc.conj()],
            [dc, Complex64::new(dp, 0.0)],
        ])
    }

    /// ρ̇_t = L_t(ρ_t), composed directly from Ċ so it stays finite at zeros of C.
    pub fn liouvillian(&self, rho0: &DensityMatrix2, t: f64) -> Result<ComplexMatrix2> {
        check_time("t", t)?;
        Ok(self.liouvillian_from(rho0, &self.amplitude_at(t)))
    }

    pub(crate) fn liouvillian_from(&self, rho0: &DensityMatrix2, a: &Amplitude) -> ComplexMatrix2 {
        let dp = rho0.excited_population() * a.population_rate();
        let dc = rho0.coherence() * a.cdot;
        ComplexMatrix2::from_entries([
            [Complex64::new(-dp, 0.0), dc.conj()],
            [dc, Complex64::new(dp, 0.0)],
        ])
    }
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(QslError::invalid(format!("{name} must be a finite non-negative time, got {t}")))
    }
}

struct ModeParts {
    ecosh: Complex64,
    esinhc: Complex64,
}

/// Excited-state amplitude and its time derivative at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub t: f64,
    pub c: Complex64,
    pub cdot: Complex64,
}

impl Amplitude {
    pub fn population(&self) -> f64 {
        self.c.norm_sqr()
    }

    pub fn population_rate(&self) -> f64 {
        2.0 * (self.c.conj() * self.cdot).re
    }
}

/// A master-equation coefficient, or a marker at a zero of C(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Finite(f64),
    /// |C(t)| fell below [`SINGULAR_AMPLITUDE`]; the zero of C lies in the bracket.
    Singular { zero_bracket: (f64, f64) },
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Rate::Finite(v) => Some(v),
            Rate::Singular { .. } => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Rate::Singular { .. })
    }
}

/// Right-hand side of the time-local master equation for a given state,
///
/// ```text
/// −(i/2) S [σ₊σ₋, ρ] + γ (σ₋ρσ₊ − ½{σ₊σ₋, ρ})
/// ```
pub fn master_equation_rhs(rho: &ComplexMatrix2, decay_rate: f64, lamb_shift: f64) -> ComplexMatrix2 {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // σ₋ = |g⟩⟨e| lives at (row 0, col 1).
    let lower = ComplexMatrix2::from_entries([[zero, one], [zero, zero]]);
    let raise = lower.adjoint();
    let number = raise * lower;
    let rho = *rho;
    let commutator = number * rho - rho * number;
    let anti = number * rho + rho * number;
    let hamiltonian_part = commutator * Complex64::new(0.0, -0.5 * lamb_shift);
    let jump = lower * rho * raise;
    hamiltonian_part + (jump - anti.scale(0.5)).scale(decay_rate)
}

#[cfg(test)]
mod tests;
