// Copyright 2026 The qdfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Simulation of biexciton-exciton cascade photon pairs and their fusion on
//! polarizing beam splitters into multi-photon GHZ states.
//!
//! The crate is organised bottom-up:
//!
//! * [`cascade`]: the two-photon temporal amplitude, its spectrum, purity and
//!   Schmidt decomposition.
//! * [`polarization`]: dense density matrices for up to six polarization qubits.
//! * [`fusion`]: PBS interference of two pairs with temporal bookkeeping and
//!   spectral wandering.
//! * [`metrics`]: GHZ population/coherence/fidelity estimators and two-qubit
//!   tomography.
//! * [`experiment`]: Monte Carlo counting, g², calibration and end-to-end runs.
//! * [`multiplex`]: the switched fiber-loop protocol.

pub mod cascade;
pub mod error;
pub mod experiment;
pub mod fusion;
mod linalg;
pub mod metrics;
pub mod multiplex;
pub mod polarization;
pub mod rng;

pub use error::{Error, Result};

/// Reduced Planck constant in μeV·ps.
pub const HBAR: f64 = 658.211_956_9;
