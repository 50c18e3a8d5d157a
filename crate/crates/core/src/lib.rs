// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum speed limits from the trace distance for open-system dynamics,
//! evaluated on the exactly solvable damped two-level atom with a detuned
//! Lorentzian reservoir.
//!
//! * [`smatrix`]: 2×2 complex matrices, singular values, Schatten norms.
//! * [`model`]: closed-form amplitude, rates, reduced state and generator.
//! * [`quad`]: adaptive quadrature and sign-change location.
//! * [`bounds`]: Λ-integrals, τ_QSL/τ_D ratios and the Bures-angle comparator.
//! * [`scan`]: parameter grids, transition boundaries and time series.
//! * [`cli`]: the `qslkit` command-line front end.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod model;
pub mod quad;
pub mod scan;
pub mod smatrix;

pub use error::{QslError, Result};
pub use model::{Amplitude, ModelParams, Rate};
pub use smatrix::{ComplexMatrix2, DensityMatrix2, SchattenP};
