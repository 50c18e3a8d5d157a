// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps: ratio surfaces over (γ₀, Δ), speed-up boundaries,
//! evolved-time sweeps and decay-rate time series.
//!
//! Every cell and sample is an independent task. Results are collected in
//! index order, so output never depends on scheduling or thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{Classification, BoundReport, QslEstimator};
use crate::error::{QslError, Result};
use crate::model::{ModelParams, Rate, DEFAULT_LAMBDA};
use crate::smatrix::DensityMatrix2;

/// Driving time used by the figure recipes.
pub const DEFAULT_TAU_D: f64 = 0.2;
/// Default clip for |γ(t)/γ₀| in decay-rate series.
pub const DEFAULT_CLIP: f64 = 25.0;
/// Relative bracket width for boundary refinement.
pub const BOUNDARY_REL_TOL: f64 = 1e-3;

/// `n` log-spaced couplings in [0.02λ, 20λ].
pub fn default_gamma0_axis(lambda: f64, n: usize) -> Vec<f64> {
    log_axis(0.02 * lambda, 20.0 * lambda, n)
}

/// `n` evenly spaced detunings in [0, 10λ].
pub fn default_delta_axis(lambda: f64, n: usize) -> Vec<f64> {
    linear_axis(0.0, 10.0 * lambda, n)
}

pub fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| if k == n - 1 { hi } else { (a + (b - a) * k as f64 / (n - 1) as f64).exp() })
                .collect()
        }
    }
}

pub fn linear_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(QslError::invalid(format!("{name} axis is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(QslError::invalid(format!("{name} axis has non-finite values")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QslError::invalid(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

/// Result of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Done(BoundReport),
    Failed(QslError),
}

impl Cell {
    pub fn report(&self) -> Option<&BoundReport> {
        match self {
            Cell::Done(r) => Some(r),
            Cell::Failed(_) => None,
        }
    }

    pub fn classification(&self) -> Option<Classification> {
        self.report().map(BoundReport::classification)
    }
}

/// τ_QSL/τ_D over a (γ₀, Δ) grid for the excited initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub gamma0_axis: Vec<f64>,
    pub delta_axis: Vec<f64>,
    pub lambda: f64,
    pub tau_d: f64,
    /// Row-major by detuning: cell (i, j) sits at `j * gamma0_axis.len() + i`.
    pub cells: Vec<Cell>,
}

impl ScanGrid {
    pub fn cell(&self, gamma_index: usize, delta_index: usize) -> &Cell {
        &self.cells[delta_index * self.gamma0_axis.len() + gamma_index]
    }

    pub fn classification(&self, gamma_index: usize, delta_index: usize) -> Option<Classification> {
        self.cell(gamma_index, delta_index).classification()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, Cell::Failed(_))).count()
    }

    /// Cells in output order with their coordinates.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &Cell)> + '_ {
        let n = self.gamma0_axis.len();
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, c)| (self.gamma0_axis[k % n], self.delta_axis[k / n], c))
    }
}

/// One refined crossing of the speed-up threshold along a detuning row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub delta: f64,
    pub gamma0: f64,
    /// Bracket [lo, hi] with opposite classifications at its ends.
    pub gamma0_lo: f64,
    pub gamma0_hi: f64,
    /// Order of this flip within its row, starting at 0.
    pub flip_index: usize,
    pub below: Classification,
    pub above: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    RatioVsTau,
    DecayRate,
    Population,
}

/// Sampled curve with optional clipping flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub kind: SeriesKind,
    pub params: ModelParams,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub clipped: Vec<bool>,
    pub clip: Option<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Trace-distance and Bures ratios at one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundComparison {
    pub gamma0: f64,
    pub ratio_trace: f64,
    pub ratio_bures: f64,
    pub ratio_bures_weighted: f64,
}

/// Runs sweeps with a fixed estimator and an optional thread cap.
#[derive(Debug, Clone, Default)]
pub struct Scanner {
    pub estimator: QslEstimator,
    /// `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Scanner {
    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        match self.threads {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(job),
                Err(_) => job(),
            },
            None => job(),
        }
    }

    fn ratio_at(&self, gamma0: f64, lambda: f64, delta: f64, tau_d: f64) -> Result<BoundReport> {
        let p = ModelParams::new(gamma0, lambda, delta)?;
        self.estimator.qsl_ratio(&p, &DensityMatrix2::excited(), tau_d)
    }

    pub fn grid_scan(&self, gamma0_axis: &[f64], delta_axis: &[f64], lambda: f64, tau_d: f64) -> Result<ScanGrid> {
        check_axis("gamma0", gamma0_axis)?;
        check_axis("delta", delta_axis)?;
        // Validates lambda, tau_d and the coupling range up front.
        ModelParams::new(gamma0_axis[0], lambda, 0.0)?;
        if !(tau_d.is_finite() && tau_d > 0.0) {
            return Err(QslError::invalid(format!("tau_d must be positive, got {tau_d}")));
        }
        let n = gamma0_axis.len();
        let cells = self.run(|| {
            (0..n * delta_axis.len())
                .into_par_iter()
                .map(|k| {
                    let (g, d) = (gamma0_axis[k % n], delta_axis[k / n]);
                    match self.ratio_at(g, lambda, d, tau_d) {
                        Ok(r) => Cell::Done(r),
                        Err(e) => Cell::Failed(e.context(format!("cell gamma0 = {g}, delta = {d}"))),
                    }
                })
                .collect()
        });
        Ok(ScanGrid {
            gamma0_axis: gamma0_axis.to_vec(),
            delta_axis: delta_axis.to_vec(),
            lambda,
            tau_d,
            cells,
        })
    }

    /// Classification flips along each detuning row, refined by bisection
    /// on γ₀. Rows without a flip contribute nothing.
    pub fn transition_boundary(&self, grid: &ScanGrid) -> Result<Vec<BoundaryPoint>> {
        let n = grid.gamma0_axis.len();
        let mut brackets = Vec::new();
        for (j, &delta) in grid.delta_axis.iter().enumerate() {
            let mut flip = 0;
            for i in 0..n.saturating_sub(1) {
                let (Some(a), Some(b)) = (grid.classification(i, j), grid.classification(i + 1, j)) else {
                    continue;
                };
                if a != b {
                    brackets.push((delta, grid.gamma0_axis[i], grid.gamma0_axis[i + 1], flip, a, b));
                    flip += 1;
                }
            }
        }
        self.run(|| {
            brackets
                .into_par_iter()
                .map(|(delta, lo, hi, flip_index, below, above)| {
                    let (lo, hi) = self.refine(grid.lambda, delta, grid.tau_d, lo, hi, below)?;
                    Ok(BoundaryPoint {
                        delta,
                        gamma0: 0.5 * (lo + hi),
                        gamma0_lo: lo,
                        gamma0_hi: hi,
                        flip_index,
                        below,
                        above,
                    })
                })
                .collect()
        })
    }

    fn refine(
        &self,
        lambda: f64,
        delta: f64,
        tau_d: f64,
        mut lo: f64,
        mut hi: f64,
        below: Classification,
    ) -> Result<(f64, f64)> {
        while (hi - lo) > BOUNDARY_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            let class = self
                .ratio_at(mid, lambda, delta, tau_d)
                .map_err(|e| e.context(format!("boundary refinement at delta = {delta}")))?
                .classification();
            if class == below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    }

    /// Evolved-state ratio on a uniform τ grid over [0, tau_max].
    pub fn sweep_tau(&self, p: &ModelParams, tau_max: f64, n_points: usize, tau_d: f64) -> Result<TimeSeries> {
        let times = series_times(tau_max, n_points)?;
        let values = self.run(|| {
            times
                .par_iter()
                .map(|&tau| {
                    self.estimator
                        .qsl_ratio_evolved(p, tau, tau_d)
                        .map(|r| r.ratio)
                        .map_err(|e| e.context(format!("sweep point tau = {tau}")))
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        Ok(TimeSeries {
            kind: SeriesKind::RatioVsTau,
            params: *p,
            clipped: vec![false; times.len()],
            times,
            values,
            clip: None,
        })
    }

    /// Coupling sweep of trace-distance and Bures ratios at fixed detuning.
    pub fn compare_bounds(
        &self,
        gamma0_axis: &[f64],
        lambda: f64,
        delta: f64,
        tau_d: f64,
    ) -> Result<Vec<BoundComparison>> {
        check_axis("gamma0", gamma0_axis)?;
        let excited = DensityMatrix2::excited();
        self.run(|| {
            gamma0_axis
                .par_iter()
                .map(|&g| {
                    let p = ModelParams::new(g, lambda, delta)?;
                    let trace = self.estimator.qsl_ratio(&p, &excited, tau_d)?;
                    let bures = self.estimator.bures_comparator(&p, &excited, tau_d)?;
                    Ok(BoundComparison {
                        gamma0: g,
                        ratio_trace: trace.ratio,
                        ratio_bures: bures.operator_ratio,
                        ratio_bures_weighted: bures.weighted_ratio,
                    })
                })
                .collect()
        })
    }
}

fn series_times(t_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(QslError::invalid(format!("need at least 2 points, got {n_points}")));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(QslError::invalid(format!("time span must be positive, got {t_max}")));
    }
    Ok(linear_axis(0.0, t_max, n_points))
}

/// γ(t)/γ₀ on [0, t_max]; values beyond ±`clip` (and zeros of C) are
/// replaced by ±`clip` and flagged.
pub fn sweep_decay_rate(p: &ModelParams, t_max: f64, n_points: usize, clip: f64) -> Result<TimeSeries> {
    if !(clip.is_finite() && clip > 0.0) {
        return Err(QslError::invalid(format!("clip must be positive, got {clip}")));
    }
    let times = series_times(t_max, n_points)?;
    let mut values = Vec::with_capacity(times.len());
    let mut clipped = Vec::with_capacity(times.len());
    for &t in &times {
        let (v, c) = match p.decay_rate(t)? {
            Rate::Finite(g) => {
                let v = g / p.gamma0();
                if v.abs() > clip {
                    (clip.copysign(v), true)
                } else {
                    (v, false)
                }
            }
            Rate::Singular { .. } => (clip, true),
        };
        values.push(v);
        clipped.push(c);
    }
    Ok(TimeSeries {
        kind: SeriesKind::DecayRate,
        params: *p,
        times,
        values,
        clipped,
        clip: Some(clip),
    })
}

/// P(t) on [0, t_max].
pub fn sweep_population(p: &ModelParams, t_max: f64, n_points: usize) -> Result<TimeSeries> {
    let times = series_times(t_max, n_points)?;
    let values = times.iter().map(|&t| p.excited_population(t)).collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries {
        kind: SeriesKind::Population,
        params: *p,
        clipped: vec![false; times.len()],
        times,
        values,
        clip: None,
    })
}

/// [`Scanner::grid_scan`] on the global pool with default quadrature.
pub fn grid_scan(gamma0_axis: &[f64], delta_axis: &[f64], lambda: f64, tau_d: f64) -> Result<ScanGrid> {
    Scanner::default().grid_scan(gamma0_axis, delta_axis, lambda, tau_d)
}

/// [`Scanner::transition_boundary`] with default settings.
pub fn transition_boundary(grid: &ScanGrid) -> Result<Vec<BoundaryPoint>> {
    Scanner::default().transition_boundary(grid)
}

/// [`Scanner::sweep_tau`] with default settings.
pub fn sweep_tau(p: &ModelParams, tau_max: f64, n_points: usize, tau_d: f64) -> Result<TimeSeries> {
    Scanner::default().sweep_tau(p, tau_max, n_points, tau_d)
}

/// Parameters on the default spectral width.
pub fn default_params(gamma0_over_lambda: f64, delta_over_lambda: f64) -> Result<ModelParams> {
    ModelParams::new(
        gamma0_over_lambda * DEFAULT_LAMBDA,
        DEFAULT_LAMBDA,
        delta_over_lambda * DEFAULT_LAMBDA,
    )
}
