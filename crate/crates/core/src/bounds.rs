// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Speed-limit estimators built on the trace-distance similarity
//! D(t) = 1 − ¼‖ρ_t − ρ_ref‖₁².
//!
//! Over a window [s, s + τ_D] with reference state ρ_ref = ρ_s,
//!
//! ```text
//! Λ¹  = (1/τ_D)  ∫ ‖ρ_t − ρ_ref‖₁ ‖ρ̇_t‖₁ dt
//! Λ²  = (√n/τ_D) ∫ ‖ρ_t − ρ_ref‖₁ ‖ρ̇_t‖₂ dt
//! Λ^∞ = (n/τ_D)  ∫ ‖ρ_t − ρ_ref‖₁ ‖ρ̇_t‖_∞ dt
//! τ_QSL = max{1/Λ¹, 1/Λ², 1/Λ^∞} · 2|1 − D(s + τ_D)|
//! ```
//!
//! with n = 2. The ratio τ_QSL/τ_D lies in (0, 1]; values below one signal
//! capacity for accelerated evolution.

use serde::Serialize;

use crate::error::{QslError, Result};
use crate::model::{Amplitude, ModelParams};
use crate::quad::{find_sign_changes, integrate, Quadrature, QuadratureSpec};
use crate::smatrix::{DensityMatrix2, SchattenP};

/// Hilbert-space dimension of the qubit.
pub const DIMENSION: f64 = 2.0;

/// Ratios below this value are classified as speed-up.
pub const SPEED_UP_THRESHOLD: f64 = 1.0 - 1e-6;

// Probe points per expected oscillation period when locating kinks.
const PROBES_PER_PERIOD: f64 = 64.0;
const MIN_PROBES: usize = 64;

/// Speed-up classification of one ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    SpeedUp,
    NoSpeedUp,
}

impl Classification {
    pub fn of(ratio: f64) -> Self {
        if ratio < SPEED_UP_THRESHOLD {
            Classification::SpeedUp
        } else {
            Classification::NoSpeedUp
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::SpeedUp => "speed_up",
            Classification::NoSpeedUp => "no_speed_up",
        }
    }
}

/// The three Λ-integrals over one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaIntegrals {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_inf: f64,
    /// Summed quadrature error estimate of the three integrals, in Λ units.
    pub quadrature_err: f64,
}

impl LambdaIntegrals {
    /// The Λ selected by max{1/Λ¹, 1/Λ², 1/Λ^∞}.
    pub fn smallest(&self) -> f64 {
        self.lambda1.min(self.lambda2).min(self.lambda_inf)
    }

    pub fn is_stationary(&self) -> bool {
        self.lambda1 == 0.0 && self.lambda2 == 0.0 && self.lambda_inf == 0.0
    }
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_inf: f64,
    /// D(τ_start + τ_D) relative to the reference state at τ_start.
    pub d_measure: f64,
    pub tau_qsl: f64,
    pub ratio: f64,
    /// Bures-angle ratio, available when the reference state is pure.
    pub comparator_ratio: Option<f64>,
    pub tau_d: f64,
    pub tau_start: f64,
    pub quadrature_err: f64,
    /// The state never moved; the ratio is reported as 1.
    pub stationary: bool,
}

impl BoundReport {
    pub fn classification(&self) -> Classification {
        Classification::of(self.ratio)
    }
}

/// Ratio from the population-only form valid for an excited initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolvedRatio {
    pub tau: f64,
    pub tau_d: f64,
    pub ratio: f64,
    pub quadrature_err: f64,
    pub stationary: bool,
}

/// Bures-angle speed limit for a pure reference state.
///
/// With cos²B = ⟨ψ|ρ_{τ_D}|ψ⟩ the bound reads τ_D ≥ sin²B / Λ̃ where
/// Λ̃ = (1/τ_D)∫‖ρ̇_t‖ dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuresReport {
    pub sin2_angle: f64,
    /// sin²B / ∫‖ρ̇‖_∞: the largest of the operator, Hilbert–Schmidt and
    /// trace-norm bounds without dimension factors.
    pub operator_ratio: f64,
    /// sin²B / ∫‖ρ̇‖₁: the best bound once the √n and n factors are applied
    /// to the Hilbert–Schmidt and operator norms.
    pub weighted_ratio: f64,
    /// (1/τ_D)∫‖ρ̇‖_p for p = 1, 2, ∞.
    pub rate1: f64,
    pub rate2: f64,
    pub rate_inf: f64,
    pub quadrature_err: f64,
}

impl BuresReport {
    /// The comparator used in reports and bound comparisons.
    pub fn ratio(&self) -> f64 {
        self.operator_ratio
    }
}

/// Evaluates the speed-limit quantities with a fixed quadrature setup.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QslEstimator {
    pub quadrature: QuadratureSpec,
}

impl QslEstimator {
    pub fn new(quadrature: QuadratureSpec) -> Self {
        Self { quadrature }
    }

    /// Λ¹, Λ², Λ^∞ on [tau_start, tau_start + tau_d] for the trajectory
    /// starting at `rho0` at t = 0, with the reference state at `tau_start`.
    pub fn lambda_integrals(
        &self,
        p: &ModelParams,
        rho0: &DensityMatrix2,
        tau_start: f64,
        tau_d: f64,
    ) -> Result<LambdaIntegrals> {
        check_window(tau_start, tau_d)?;
        let (a, b) = (tau_start, tau_start + tau_d);
        let reference = p.amplitude_at(a);
        let breaks = kinks(p, &reference, a, b);
        let integrand = |norm: SchattenP| {
            move |t: f64| {
                let now = p.amplitude_at(t);
                let moved = p.displacement_between(rho0, &reference, &now).trace_norm();
                moved * p.liouvillian_from(rho0, &now).schatten_norm(norm)
            }
        };
        let weights = [1.0, DIMENSION.sqrt(), DIMENSION];
        let mut out = [0.0; 3];
        let mut err = 0.0;
        for ((norm, w), slot) in SchattenP::ALL.iter().zip(weights).zip(out.iter_mut()) {
            let q = self
                .integrate_scaled(integrand(*norm), a, b, &breaks)
                .map_err(|e| e.context(format!("Λ integral for Schatten-{norm} norm")))?;
            *slot = w * q.value / tau_d;
            err += w * q.err_estimate / tau_d;
        }
        Ok(LambdaIntegrals {
            lambda1: out[0],
            lambda2: out[1],
            lambda_inf: out[2],
            quadrature_err: err,
        })
    }

    /// τ_QSL/τ_D for the window [0, tau_d] starting from `rho0`.
    pub fn qsl_ratio(&self, p: &ModelParams, rho0: &DensityMatrix2, tau_d: f64) -> Result<BoundReport> {
        self.qsl_ratio_from(p, rho0, 0.0, tau_d)
    }

    /// τ_QSL/τ_D for the window [tau_start, tau_start + tau_d] whose
    /// reference state is the evolved state at `tau_start`.
    pub fn qsl_ratio_from(
        &self,
        p: &ModelParams,
        rho0: &DensityMatrix2,
        tau_start: f64,
        tau_d: f64,
    ) -> Result<BoundReport> {
        let lambdas = self.lambda_integrals(p, rho0, tau_start, tau_d)?;
        let moved = p
            .displacement_between(rho0, &p.amplitude_at(tau_start), &p.amplitude_at(tau_start + tau_d))
            .trace_norm();
        // 1 − D = ¼‖Δρ‖₁², kept separate from D to avoid cancellation.
        let one_minus_d = 0.25 * moved * moved;
        let (ratio, stationary) = if lambdas.is_stationary() {
            (1.0, true)
        } else {
            (2.0 * one_minus_d / (tau_d * lambdas.smallest()), false)
        };
        let comparator_ratio = if tau_start == 0.0 && rho0.is_pure(1e-12) {
            Some(self.bures_comparator(p, rho0, tau_d)?.ratio())
        } else {
            None
        };
        Ok(BoundReport {
            lambda1: lambdas.lambda1,
            lambda2: lambdas.lambda2,
            lambda_inf: lambdas.lambda_inf,
            d_measure: 1.0 - one_minus_d,
            tau_qsl: ratio * tau_d,
            ratio,
            comparator_ratio,
            tau_d,
            tau_start,
            quadrature_err: lambdas.quadrature_err,
            stationary,
        })
    }

    /// Population form of the ratio for an atom initially excited:
    ///
    /// ```text
    /// (P_{τ+τ_D} − P_τ)² / (2 ∫_τ^{τ+τ_D} |(P_t − P_τ) Ṗ_t| dt)
    /// ```
    pub fn qsl_ratio_evolved(&self, p: &ModelParams, tau: f64, tau_d: f64) -> Result<EvolvedRatio> {
        check_window(tau, tau_d)?;
        let (a, b) = (tau, tau + tau_d);
        let reference = p.amplitude_at(a);
        let p_ref = reference.population();
        let breaks = kinks(p, &reference, a, b);
        let q = self
            .integrate_scaled(
                |t| {
                    let now = p.amplitude_at(t);
                    ((now.population() - p_ref) * now.population_rate()).abs()
                },
                a,
                b,
                &breaks,
            )
            .map_err(|e| e.context(format!("population integral on [{a}, {b}]")))?;
        if q.value == 0.0 {
            return Ok(EvolvedRatio { tau, tau_d, ratio: 1.0, quadrature_err: 0.0, stationary: true });
        }
        let dp = p.amplitude_at(b).population() - p_ref;
        let ratio = dp * dp / (2.0 * q.value);
        Ok(EvolvedRatio {
            tau,
            tau_d,
            ratio,
            quadrature_err: ratio * q.err_estimate / q.value,
            stationary: false,
        })
    }

    /// Bures-angle comparator for a pure initial state over [0, tau_d].
    pub fn bures_comparator(&self, p: &ModelParams, rho0: &DensityMatrix2, tau_d: f64) -> Result<BuresReport> {
        check_window(0.0, tau_d)?;
        if !rho0.is_pure(1e-12) {
            return Err(QslError::Unsupported(format!(
                "Bures comparator needs a pure initial state (purity {})",
                rho0.purity()
            )));
        }
        let start = p.amplitude_at(0.0);
        let end = p.amplitude_at(tau_d);
        // sin²B = 1 − Tr(ρ₀ρ_τ) = −Tr(ρ₀(ρ_τ − ρ₀)) for pure ρ₀.
        let shift = p.displacement_between(rho0, &start, &end);
        let sin2 = -(*rho0.matrix() * shift).trace().re;
        let sin2 = sin2.clamp(0.0, 1.0);
        let breaks = kinks(p, &start, 0.0, tau_d);
        let mut rates = [0.0; 3];
        let mut err = 0.0;
        for (norm, slot) in SchattenP::ALL.iter().zip(rates.iter_mut()) {
            let q = self
                .integrate_scaled(
                    |t| p.liouvillian_from(rho0, &p.amplitude_at(t)).schatten_norm(*norm),
                    0.0,
                    tau_d,
                    &breaks,
                )
                .map_err(|e| e.context(format!("generator norm integral (Schatten-{norm})")))?;
            *slot = q.value / tau_d;
            err += q.err_estimate / tau_d;
        }
        let [rate1, rate2, rate_inf] = rates;
        let bound = |rate: f64| if rate == 0.0 { 1.0 } else { sin2 / (tau_d * rate) };
        Ok(BuresReport {
            sin2_angle: sin2,
            operator_ratio: bound(rate_inf),
            weighted_ratio: bound(rate1),
            rate1,
            rate2,
            rate_inf,
            quadrature_err: err,
        })
    }

    /// Integrates with the absolute tolerance measured against the
    /// integrand's magnitude bound, so exponentially small windows keep
    /// their relative accuracy.
    fn integrate_scaled<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Result<Quadrature> {
        let probes = 33;
        let peak = (0..probes)
            .map(|k| f(a + (b - a) * k as f64 / (probes - 1) as f64).abs())
            .fold(0.0, f64::max);
        let bound = peak * (b - a);
        let spec = QuadratureSpec {
            abs_tol: self.quadrature.abs_tol * bound.min(1.0),
            breakpoints: breaks.to_vec(),
            ..self.quadrature.clone()
        };
        integrate(f, a, b, &spec)
    }
}

fn check_window(tau_start: f64, tau_d: f64) -> Result<()> {
    if !(tau_start.is_finite() && tau_start >= 0.0) {
        return Err(QslError::invalid(format!("start time must be non-negative, got {tau_start}")));
    }
    if !(tau_d.is_finite() && tau_d > 0.0) {
        return Err(QslError::invalid(format!("tau_d must be positive, got {tau_d}")));
    }
    Ok(())
}

/// Number of probes for sign-change search on a window of length `span`.
pub fn probe_count(p: &ModelParams, span: f64) -> usize {
    let freq = p.root_d().im.abs().max(p.delta().abs());
    let periods = freq * span / std::f64::consts::TAU;
    MIN_PROBES.max((PROBES_PER_PERIOD * periods).ceil() as usize)
}

/// Kinks of the window integrands: zeros of Ṗ and of P_t − P_ref.
fn kinks(p: &ModelParams, reference: &Amplitude, a: f64, b: f64) -> Vec<f64> {
    let n = probe_count(p, b - a);
    let p_ref = reference.population();
    let mut out = find_sign_changes(|t| p.amplitude_at(t).population_rate(), a, b, n);
    out.extend(find_sign_changes(|t| p.amplitude_at(t).population() - p_ref, a, b, n));
    out.sort_by(f64::total_cmp);
    // Quadrature needs strictly increasing interior points.
    let min_gap = 1e-9 * (b - a);
    let mut kept: Vec<f64> = Vec::with_capacity(out.len());
    for x in out {
        let last = kept.last().copied().unwrap_or(a);
        if x - last > min_gap && b - x > min_gap {
            kept.push(x);
        }
    }
    kept
}

/// [`QslEstimator::qsl_ratio`] with default quadrature settings.
pub fn qsl_ratio(p: &ModelParams, rho0: &DensityMatrix2, tau_d: f64) -> Result<BoundReport> {
    QslEstimator::default().qsl_ratio(p, rho0, tau_d)
}

/// [`QslEstimator::qsl_ratio_evolved`] with default quadrature settings.
pub fn qsl_ratio_evolved(p: &ModelParams, tau: f64, tau_d: f64) -> Result<EvolvedRatio> {
    QslEstimator::default().qsl_ratio_evolved(p, tau, tau_d)
}

/// [`QslEstimator::lambda_integrals`] with default quadrature settings.
pub fn lambda_integrals(
    p: &ModelParams,
    rho0: &DensityMatrix2,
    tau_start: f64,
    tau_d: f64,
) -> Result<LambdaIntegrals> {
    QslEstimator::default().lambda_integrals(p, rho0, tau_start, tau_d)
}

/// [`QslEstimator::bures_comparator`] with default quadrature settings.
pub fn bures_comparator(p: &ModelParams, rho0: &DensityMatrix2, tau_d: f64) -> Result<BuresReport> {
    QslEstimator::default().bures_comparator(p, rho0, tau_d)
}
