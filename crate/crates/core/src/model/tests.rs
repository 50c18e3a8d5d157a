// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;
use std::f64::consts::PI;

const LAMBDA: f64 = 50.0;

fn params(g: f64, delta: f64) -> ModelParams {
    ModelParams::new(g * LAMBDA, LAMBDA, delta * LAMBDA).unwrap()
}

/// Independent on-resonance rate: 2γ₀λ sinh(d₀t/2) / (d₀ cosh(d₀t/2) + λ sinh(d₀t/2)).
fn on_resonance_rate(gamma0: f64, lambda: f64, t: f64) -> f64 {
    let d0 = Complex64::new(lambda * lambda - 2.0 * gamma0 * lambda, 0.0).sqrt();
    let x = 0.5 * d0 * t;
    let num = 2.0 * gamma0 * lambda * x.sinh();
    let den = d0 * x.cosh() + lambda * x.sinh();
    let r = num / den;
    assert!(r.im.abs() <= 1e-9 * r.re.abs().max(1.0));
    r.re
}

#[test]
fn rejects_bad_params() {
    assert!(ModelParams::new(0.0, 50.0, 0.0).is_err());
    assert!(ModelParams::new(1.0, -50.0, 0.0).is_err());
    assert!(ModelParams::new(1.0, 50.0, f64::NAN).is_err());
    assert!(ModelParams::new(1.0, 50.0, -3.0).is_ok());
    assert!(params(0.1, 0.0).is_weak_coupling());
    assert!(!params(10.0, 0.0).is_weak_coupling());
}

#[test]
fn spectral_density_examples() {
    let p = ModelParams::with_omega0(5.0, 50.0, 30.0, 100.0).unwrap();
    let centre = 100.0 - 30.0;
    assert_relative_eq!(p.spectral_density(centre), 2.5, epsilon = 1e-15);
    assert_relative_eq!(p.spectral_density(centre + 50.0), 1.25, epsilon = 1e-15);
    assert_relative_eq!(p.spectral_density(centre - 50.0), 1.25, epsilon = 1e-15);
    assert!(p.spectral_density(centre + 1e4) > 0.0);
    assert!(p.spectral_density(centre + 1.0) < p.spectral_density(centre));
}

#[test]
fn memory_kernel_examples() {
    let p = params(0.1, 0.0);
    let g = p.gamma0() * LAMBDA / 2.0;
    assert_eq!(p.memory_kernel(0.0).unwrap(), Complex64::new(g, 0.0));
    let f = p.memory_kernel(1.0 / LAMBDA).unwrap();
    assert_relative_eq!(f.re, g * (-1.0f64).exp(), epsilon = 1e-14);
    assert_eq!(f.im, 0.0);

    let q = params(0.1, 1.0);
    for tau in [0.001, 0.01, 0.05, 0.3] {
        let f = q.memory_kernel(tau).unwrap();
        let expected = (LAMBDA * tau).rem_euclid(2.0 * PI);
        let got = f.arg().rem_euclid(2.0 * PI);
        let diff = (got - expected).abs();
        assert!(diff.min(2.0 * PI - diff) < 1e-12, "tau {tau}");
        assert_relative_eq!(f.norm(), g * (-LAMBDA * tau).exp(), max_relative = 1e-13);
    }
    assert!(p.memory_kernel(-1e-3).is_err());
}

#[test]
fn amplitude_initial_conditions() {
    for (g, delta) in [(0.1, 0.0), (0.5, 0.0), (10.0, 6.0), (0.3, -4.0)] {
        let a = params(g, delta).amplitude(0.0).unwrap();
        assert_eq!(a.c, Complex64::new(1.0, 0.0));
        assert_eq!(a.cdot, Complex64::new(0.0, 0.0));
    }
    assert!(params(0.1, 0.0).amplitude(-1.0).is_err());
}

#[test]
fn weak_resonant_amplitude_real_and_decreasing() {
    let p = params(0.1, 0.0);
    let mut prev = f64::INFINITY;
    for k in 0..=1000 {
        let t = 10.0 / LAMBDA * k as f64 / 1000.0;
        let c = p.amplitude(t).unwrap().c;
        assert_eq!(c.im, 0.0);
        assert!(c.re < prev || k == 0);
        prev = c.re;
    }
}

#[test]
fn branch_invariance() {
    for (g, delta) in [(0.1, 0.0), (10.0, 0.0), (0.1, 6.0), (10.0, 4.0), (2.0, -3.0)] {
        let p = params(g, delta);
        let d = p.root_d();
        for t in [0.0, 1e-4, 0.003, 0.05, 0.2, 1.0] {
            let a = p.amplitude_with_root(d, t);
            let b = p.amplitude_with_root(-d, t);
            assert!((a.c - b.c).norm() <= 1e-12, "C differs at {t}");
            assert!((a.cdot - b.cdot).norm() <= 1e-12 * (1.0 + a.cdot.norm()), "Ċ differs at {t}");
        }
    }
}

#[test]
fn critical_coupling_series_branch() {
    // γ₀ = λ/2 on resonance gives d = 0.
    let p = params(0.5, 0.0);
    assert_eq!(p.root_d(), Complex64::new(0.0, 0.0));
    for t in [0.0, 0.01, 0.1, 1.0] {
        // Limit d → 0: C = e^{−λt/2}(1 + λt/2), Ċ = −γ₀λ t/2 e^{−λt/2}.
        let a = p.amplitude(t).unwrap();
        let e = (-0.5 * LAMBDA * t).exp();
        assert_relative_eq!(a.c.re, e * (1.0 + 0.5 * LAMBDA * t), max_relative = 1e-13);
        assert_relative_eq!(a.cdot.re, -p.gamma0() * LAMBDA * 0.5 * t * e, max_relative = 1e-13, epsilon = 1e-300);
    }
    // Just off the critical point the closed form stays continuous.
    let q = ModelParams::new(25.0 * (1.0 + 1e-13), LAMBDA, 0.0).unwrap();
    let (a, b) = (p.amplitude(0.1).unwrap(), q.amplitude(0.1).unwrap());
    assert!((a.c - b.c).norm() < 1e-10);
}

#[test]
fn population_zeros_strong_coupling() {
    let p = params(10.0, 0.0);
    let w = p.root_d().im.abs();
    // Zeros of cos(wt/2) + (λ/w) sin(wt/2).
    for k in 0..4 {
        let t = 2.0 * (PI - (w / LAMBDA).atan() + k as f64 * PI) / w;
        let value = (0.5 * w * t).cos() + LAMBDA / w * (0.5 * w * t).sin();
        assert!(value.abs() < 1e-12);
        let pop = p.excited_population(t).unwrap();
        assert!(pop < 1e-26, "P({t}) = {pop}");
        assert!(p.excited_population(t + 1e-3).unwrap() > 1e-12);
    }
}

#[test]
fn population_long_time() {
    assert_eq!(params(0.1, 0.0).excited_population(0.0).unwrap(), 1.0);
    for g in [0.1, 0.5, 2.0, 10.0] {
        let p = params(g, 0.0);
        let late = p.excited_population(50.0 / LAMBDA).unwrap();
        assert!(late < (-5.0f64).exp(), "g {g}: {late}");
    }
    let p = params(0.1, 6.0);
    let t = 50.0 / p.markov_limit();
    assert!(p.excited_population(t).unwrap() < 1e-20);
}

#[test]
fn population_rate_examples() {
    assert_eq!(params(10.0, 0.0).population_rate(0.0).unwrap(), 0.0);
    let weak = params(0.1, 0.0);
    for k in 0..=500 {
        assert!(weak.population_rate(k as f64 * 0.004).unwrap() <= 0.0);
    }
    let h = 1e-6 / LAMBDA;
    for (g, delta) in [(0.1, 0.0), (10.0, 0.0), (0.1, 6.0), (10.0, 6.0)] {
        let p = params(g, delta);
        for t in [0.001, 0.013, 0.05, 0.17, 0.4] {
            let fd = (p.excited_population(t + h).unwrap() - p.excited_population(t - h).unwrap()) / (2.0 * h);
            let exact = p.population_rate(t).unwrap();
            assert!((fd - exact).abs() < 1e-6, "({g},{delta}) t {t}: {fd} vs {exact}");
        }
    }
}

#[test]
fn decay_rate_matches_on_resonance_form() {
    for g in [0.1, 0.3, 0.5 + 1e-3, 2.0, 10.0] {
        let p = params(g, 0.0);
        assert_eq!(p.decay_rate(0.0).unwrap(), Rate::Finite(0.0));
        for k in 1..=400 {
            let t = k as f64 * 0.0025;
            let a = p.amplitude(t).unwrap();
            if a.c.norm() <= 1e-6 {
                continue;
            }
            let got = p.decay_rate(t).unwrap().value().unwrap();
            let want = on_resonance_rate(p.gamma0(), LAMBDA, t);
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-300), "g {g} t {t}: {got} vs {want}");
        }
    }
}

#[test]
fn weak_decay_rate_reaches_slow_mode_rate() {
    let p = params(0.1, 0.0);
    let d0 = (LAMBDA * LAMBDA - 2.0 * p.gamma0() * LAMBDA).sqrt();
    let slow = LAMBDA - d0;
    assert_relative_eq!(p.asymptotic_decay_rate(), slow, max_relative = 1e-12);
    let late = p.decay_rate(10.0 / LAMBDA).unwrap().value().unwrap();
    assert!((late - slow).abs() / slow < 1e-3);
    // The exact rate sits about 5.6 % above the Markov value at γ₀ = 0.1λ.
    assert_relative_eq!(slow / p.markov_limit(), 2.0 / (1.0 + 0.8f64.sqrt()), max_relative = 1e-12);
}

#[test]
fn decay_rate_singular_at_zero_of_amplitude() {
    let p = params(10.0, 0.0);
    let w = p.root_d().im.abs();
    let t0 = 2.0 * (PI - (w / LAMBDA).atan()) / w;
    match p.decay_rate(t0).unwrap() {
        Rate::Singular { zero_bracket: (lo, hi) } => {
            assert!(lo <= hi);
            assert!(hi - lo < 1e-12);
            assert!((0.5 * (lo + hi) - t0).abs() < 1e-12);
        }
        other => panic!("expected singular marker, got {other:?}"),
    }
    assert!(p.lamb_shift(t0).unwrap().is_singular());
    // Either side of the zero the rate is finite with opposite signs.
    let before = p.decay_rate(t0 - 1e-4).unwrap().value().unwrap();
    let after = p.decay_rate(t0 + 1e-4).unwrap().value().unwrap();
    assert!(before > 0.0 && after < 0.0, "{before} {after}");
}

#[test]
fn lamb_shift_examples() {
    let resonant = params(10.0, 0.0);
    for t in [0.0, 0.01, 0.2, 0.9] {
        if let Rate::Finite(s) = resonant.lamb_shift(t).unwrap() {
            assert_eq!(s, 0.0);
        }
    }
    let p = params(2.0, 4.0);
    assert_eq!(p.lamb_shift(0.0).unwrap(), Rate::Finite(0.0));
    let h = 1e-6 / LAMBDA;
    let phase = |t: f64| p.amplitude(t).unwrap().c.arg();
    for t in [0.003, 0.02, 0.07, 0.15] {
        let mut dphi = phase(t + h) - phase(t - h);
        if dphi > PI {
            dphi -= 2.0 * PI;
        } else if dphi < -PI {
            dphi += 2.0 * PI;
        }
        let fd = -2.0 * dphi / (2.0 * h);
        let s = p.lamb_shift(t).unwrap().value().unwrap();
        assert!((fd - s).abs() <= 1e-6 * s.abs().max(1.0), "t {t}: {fd} vs {s}");
    }
}

#[test]
fn markov_limit_examples() {
    assert_eq!(params(0.1, 0.0).markov_limit(), 5.0);
    assert_relative_eq!(params(0.1, 1.0).markov_limit(), 2.5, epsilon = 1e-15);
    let p = ModelParams::new(5.0, 50.0, 300.0).unwrap();
    assert_relative_eq!(p.markov_limit(), 5.0 * 2500.0 / 92500.0, epsilon = 1e-15);
    assert!((p.markov_limit() - 0.13514).abs() < 1e-5);
}

#[test]
fn evolve_examples() {
    let p = params(10.0, 4.0);
    let rho0 = DensityMatrix2::from_parts(0.7, Complex64::new(0.2, -0.3)).unwrap();
    assert_eq!(p.evolve(&rho0, 0.0).unwrap(), rho0);

    let excited = DensityMatrix2::excited();
    for t in [0.01, 0.1, 0.5] {
        let rho = p.evolve(&excited, t).unwrap();
        let pt = p.excited_population(t).unwrap();
        assert_eq!(*rho.matrix(), ComplexMatrix2::diag(1.0 - pt, pt));
    }
    let ground = DensityMatrix2::ground();
    for t in [0.0, 0.01, 0.1, 0.5] {
        assert_eq!(p.evolve(&ground, t).unwrap(), ground);
    }
}

#[test]
fn liouvillian_examples() {
    let p = params(10.0, 6.0);
    let rho0 = DensityMatrix2::from_parts(0.6, Complex64::new(0.1, 0.4)).unwrap();
    assert_eq!(p.liouvillian(&rho0, 0.0).unwrap(), ComplexMatrix2::zero());
    let excited = DensityMatrix2::excited();
    for t in [0.004, 0.05, 0.3] {
        let pdot = p.population_rate(t).unwrap();
        assert_eq!(p.liouvillian(&excited, t).unwrap(), ComplexMatrix2::diag(-pdot, pdot));
    }
}

#[test]
fn liouvillian_matches_master_equation() {
    let states = [
        DensityMatrix2::excited(),
        DensityMatrix2::from_parts(0.6, Complex64::new(0.1, 0.4)).unwrap(),
        DensityMatrix2::pure(1.1, -0.7).unwrap(),
    ];
    for (g, delta) in [(0.1, 0.0), (10.0, 0.0), (0.1, 6.0), (10.0, 4.0), (3.0, -2.0)] {
        let p = params(g, delta);
        for rho0 in &states {
            for k in 1..200 {
                let t = k as f64 * 0.005;
                if p.amplitude(t).unwrap().c.norm() <= 1e-6 {
                    continue;
                }
                let gamma = p.decay_rate(t).unwrap().value().unwrap();
                let shift = p.lamb_shift(t).unwrap().value().unwrap();
                let rho = p.evolve(rho0, t).unwrap();
                let rhs = master_equation_rhs(rho.matrix(), gamma, shift);
                let direct = p.liouvillian(rho0, t).unwrap();
                let scale = direct.frobenius_sq().sqrt().max(1e-300);
                assert!(rhs.max_abs_diff(&direct) <= 1e-8 * scale, "({g},{delta}) t {t}");
            }
        }
    }
}

#[test]
fn displacement_is_state_difference() {
    let p = params(2.0, 3.0);
    let rho0 = DensityMatrix2::from_parts(0.8, Complex64::new(-0.2, 0.25)).unwrap();
    let diff = p.displacement(&rho0, 0.02, 0.11).unwrap();
    let direct = *p.evolve(&rho0, 0.11).unwrap().matrix() - *p.evolve(&rho0, 0.02).unwrap().matrix();
    assert!(diff.max_abs_diff(&direct) < 1e-15);
}

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (0.01f64..20.0, -10.0f64..10.0, 10.0f64..200.0)
        .prop_map(|(g, delta, lambda)| ModelParams::new(g * lambda, lambda, delta * lambda).unwrap())
}

fn arb_state() -> impl Strategy<Value = DensityMatrix2> {
    (0.0f64..=1.0, 0.0f64..PI, 0.0f64..(2.0 * PI)).prop_map(|(r, theta, phi)| {
        let coh = Complex64::from_polar(0.5 * r * theta.sin(), phi);
        DensityMatrix2::from_parts(0.5 * (1.0 + r * theta.cos()), coh).unwrap()
    })
}

proptest! {
    #[test]
    fn ode_residual_vanishes(p in arb_params(), lt in 0.0f64..20.0) {
        let t = lt / p.lambda();
        let a = p.amplitude(t).unwrap();
        let cddot = p.amplitude_second_derivative(t).unwrap();
        let z = p.kernel_rate();
        let g = 0.5 * p.gamma0() * p.lambda();
        let residual = cddot + z * a.cdot + g * a.c;
        let scale = g.max(cddot.norm()).max((z * a.cdot).norm());
        prop_assert!(residual.norm() <= 1e-9 * scale);
    }

    #[test]
    fn population_bounded_and_states_valid(p in arb_params(), rho0 in arb_state(), lt in 0.0f64..40.0) {
        let t = lt / p.lambda();
        let a = p.amplitude(t).unwrap();
        prop_assert!(a.c.norm() <= 1.0 + 1e-9);
        let pop = a.population();
        prop_assert!((0.0..=1.0 + 1e-9).contains(&pop));
        prop_assert!(p.evolve(&rho0, t).is_ok());
    }

    #[test]
    fn liouvillian_traceless_hermitian(p in arb_params(), rho0 in arb_state(), lt in 0.0f64..40.0) {
        let l = p.liouvillian(&rho0, lt / p.lambda()).unwrap();
        let scale = l.frobenius_sq().sqrt().max(1.0);
        prop_assert!(l.trace().norm() <= 1e-12 * scale);
        prop_assert!(l.is_hermitian(1e-12 * scale));
    }
}
