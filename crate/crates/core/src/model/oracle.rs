// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical solution of the memory equation Ċ(t) = −∫₀ᵗ f(t − s) C(s) ds.
//!
//! For an exponential kernel f(τ) = w·e^{−κτ} the memory integral
//! M(t) = ∫₀ᵗ f(t − s) C(s) ds obeys Ṁ = w·C − κ·M, so the pair (C, M) is
//! advanced with classical RK4 on a uniform grid. Nothing here uses the
//! closed-form solution.

use num_complex::Complex64;

use super::ModelParams;
use crate::error::{QslError, Result};

/// Largest accepted λ·step.
pub const MAX_LAMBDA_STEP: f64 = 0.1;

/// f(τ) = weight · e^{−rate·τ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialKernel {
    pub weight: Complex64,
    pub rate: Complex64,
}

impl ExponentialKernel {
    /// Kernel of the reservoir model, read off from its correlation function.
    pub fn from_model(p: &ModelParams) -> Self {
        Self {
            weight: p.kernel_at(0.0),
            rate: p.kernel_rate(),
        }
    }

    pub fn eval(&self, tau: f64) -> Complex64 {
        self.weight * (-self.rate * tau).exp()
    }
}

/// C(t) sampled on the uniform grid `k·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledAmplitude {
    pub step: f64,
    pub values: Vec<Complex64>,
}

impl SampledAmplitude {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.step)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.times().zip(self.values.iter().copied())
    }
}

/// Integrates the memory equation of `p` on [0, t_max] with fixed `step`.
pub fn oracle_amplitude(p: &ModelParams, t_max: f64, step: f64) -> Result<SampledAmplitude> {
    if !(step.is_finite() && step > 0.0) {
        return Err(QslError::invalid(format!("step must be positive, got {step}")));
    }
    if !(t_max.is_finite() && t_max >= step) {
        return Err(QslError::invalid(format!(
            "t_max must be at least one step ({step}), got {t_max}"
        )));
    }
    if p.lambda() * step > MAX_LAMBDA_STEP {
        return Err(QslError::invalid(format!(
            "step {step} too large: λ·step = {:.3} exceeds {MAX_LAMBDA_STEP}; use step ≤ {:e}",
            p.lambda() * step,
            MAX_LAMBDA_STEP / p.lambda()
        )));
    }
    Ok(solve(&ExponentialKernel::from_model(p), t_max, step))
}

fn solve(kernel: &ExponentialKernel, t_max: f64, step: f64) -> SampledAmplitude {
    let n = (t_max / step * (1.0 + 1e-12)).floor() as usize;
    let (w, k) = (kernel.weight, kernel.rate);
    let rhs = |c: Complex64, m: Complex64| (-m, w * c - k * m);

    let mut values = Vec::with_capacity(n + 1);
    let mut c = Complex64::new(1.0, 0.0);
    let mut m = Complex64::new(0.0, 0.0);
    values.push(c);
    let h = step;
    for _ in 0..n {
        let (k1c, k1m) = rhs(c, m);
        let (k2c, k2m) = rhs(c + 0.5 * h * k1c, m + 0.5 * h * k1m);
        let (k3c, k3m) = rhs(c + 0.5 * h * k2c, m + 0.5 * h * k2m);
        let (k4c, k4m) = rhs(c + h * k3c, m + h * k3m);
        c += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        values.push(c);
    }
    SampledAmplitude { step, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_error(p: &ModelParams, t_max: f64, step: f64) -> f64 {
        let sampled = oracle_amplitude(p, t_max, step).unwrap();
        sampled
            .iter()
            .map(|(t, c)| (c - p.amplitude(t).unwrap().c).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn starts_at_one() {
        let p = ModelParams::new(5.0, 50.0, 0.0).unwrap();
        let s = oracle_amplitude(&p, 0.1, 1e-3).unwrap();
        assert_eq!(s.values[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.values.len(), 101);
    }

    #[test]
    fn kernel_matches_model() {
        let p = ModelParams::new(500.0, 50.0, 300.0).unwrap();
        let k = ExponentialKernel::from_model(&p);
        for tau in [0.0, 0.003, 0.02, 0.1] {
            let diff = (k.eval(tau) - p.memory_kernel(tau).unwrap()).norm();
            assert!(diff < 1e-12 * k.weight.norm());
        }
    }

    #[test]
    fn refuses_coarse_step() {
        let p = ModelParams::new(5.0, 50.0, 0.0).unwrap();
        let err = oracle_amplitude(&p, 1.0, 0.01).unwrap_err();
        assert!(err.to_string().contains("too large"));
        assert!(oracle_amplitude(&p, 1.0, 0.0).is_err());
        assert!(oracle_amplitude(&p, 1e-4, 1e-3).is_err());
    }

    #[test]
    fn agrees_with_closed_form_weak_coupling() {
        let p = ModelParams::new(5.0, 50.0, 0.0).unwrap();
        assert!(max_error(&p, 1.0, 1e-4) < 1e-6);
    }

    #[test]
    fn agrees_with_closed_form_strong_off_resonance() {
        let p = ModelParams::new(500.0, 50.0, 300.0).unwrap();
        assert!(max_error(&p, 1.0, 1e-5) < 1e-6);
    }

    #[test]
    fn fourth_order_convergence() {
        let p = ModelParams::new(500.0, 50.0, 300.0).unwrap();
        let coarse = max_error(&p, 0.2, 2e-4);
        let fine = max_error(&p, 0.2, 1e-4);
        let ratio = coarse / fine;
        assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
    }
}
