// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Gauss–Kronrod (7/15) quadrature with user-supplied breakpoints,
//! and a probe-and-bisect root locator used to find those breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{QslError, Result};

// 15-point Kronrod abscissae on [0, 1] (symmetric half, outermost first) and weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and known non-smooth points for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any panel.
    pub max_depth: u32,
    /// Interior points where the integrand has kinks, sorted ascending.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 40,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    // Negated comparisons so NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self, a: f64, b: f64) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(QslError::invalid(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(QslError::invalid(format!("abs_tol must be non-negative, got {}", self.abs_tol)));
        }
        let mut prev = a;
        for &x in &self.breakpoints {
            if !(x > prev && x < b) {
                return Err(QslError::invalid(format!(
                    "breakpoint {x} is not strictly inside ({a}, {b}) in ascending order"
                )));
            }
            prev = x;
        }
        Ok(())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut res_abs = kronrod.abs();
    let mut values = [(0.0, 0.0); 7];
    for (j, value) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *value = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    (value, rescale_error((kronrod - gauss) * half, res_abs, res_asc))
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// Integrates `f` over [a, b].
///
/// Panels are bisected largest-error first until the summed estimate meets
/// `max(rel_tol·|value|, abs_tol)`. Panels that reach `max_depth` are frozen;
/// if the frozen error alone exceeds the target the call fails with the
/// partial result.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QslError::invalid(format!("bad integration interval [{a}, {b}]")));
    }
    spec.validate(a, b)?;
    if a == b {
        return Ok(Quadrature { value: 0.0, err_estimate: 0.0 });
    }

    let mut heap = BinaryHeap::new();
    let mut edges = Vec::with_capacity(spec.breakpoints.len() + 2);
    edges.push(a);
    edges.extend_from_slice(&spec.breakpoints);
    edges.push(b);
    for w in edges.windows(2) {
        let (value, err) = gauss_kronrod(&f, w[0], w[1]);
        heap.push(Panel { a: w[0], b: w[1], value, err, depth: 0 });
    }

    let mut frozen: Vec<Panel> = Vec::new();
    loop {
        let (value, err) = totals(heap.iter().chain(frozen.iter()));
        let target = (spec.rel_tol * value.abs()).max(spec.abs_tol);
        if err <= target {
            return Ok(Quadrature { value, err_estimate: err });
        }
        let frozen_err: f64 = frozen.iter().map(|p| p.err).sum();
        let Some(worst) = heap.pop() else {
            return Err(QslError::QuadratureFailed { a, b, value, err_estimate: err });
        };
        if frozen_err > target {
            heap.push(worst);
            return Err(QslError::QuadratureFailed { a, b, value, err_estimate: err });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= spec.max_depth || !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gauss_kronrod(&f, lo, hi);
            heap.push(Panel { a: lo, b: hi, value, err, depth: worst.depth + 1 });
        }
    }
}

/// Sums panels left to right so the result does not depend on heap order.
fn totals<'a>(panels: impl Iterator<Item = &'a Panel>) -> (f64, f64) {
    let mut all: Vec<&Panel> = panels.collect();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    all.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
}

/// Roots of `f` on (a, b) found by probing `n_probe` uniformly spaced points
/// and bisecting every bracketed sign change to width `1e-12·(b − a)`.
///
/// Pairs of roots closer than the probe spacing can be missed. Exact zeros
/// at interior probe points are reported; zeros at `a` or `b` are not.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn find_sign_changes<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_probe: usize) -> Vec<f64> {
    let n = n_probe.max(2);
    if !(b > a) {
        return Vec::new();
    }
    let width = 1e-12 * (b - a);
    let at = |k: usize| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    for k in 1..n {
        let x1 = at(k);
        let f1 = f(x1);
        if f1 == 0.0 && k < n - 1 {
            roots.push(x1);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&f, x0, x1, f0, width));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, width: f64) -> f64 {
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
