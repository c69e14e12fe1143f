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

//! Biexciton-exciton cascade: two-photon temporal amplitude and derived
//! single-photon quantities.
//!
//! Times are in ps, angular frequencies in rad/ps, energies in μeV. The first
//! time argument `t1` is the XX emission time, the second `t2` the X emission
//! time.

mod amplitude;
mod pair;
mod schmidt;
mod spectrum;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::HBAR;

pub use amplitude::{
    cascade_amplitude, discretize, indistinguishability_bound, purity, reduced_density, tail_mass,
    Envelope, Subsystem, TemporalAmplitude, TemporalDensity,
};
pub use pair::{pair_state, Branch, PairState, Term};
pub use schmidt::{schmidt, SchmidtDecomposition};
pub use spectrum::{fft_spectrum, joint_spectrum, SpectrumGrid};

/// Default number of bins per time axis.
pub const DEFAULT_BINS: usize = 1024;
/// Default grid span in units of the slowest decay time `1/min(γ)`.
pub const DEFAULT_SPAN: f64 = 8.0;

/// Emitter description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterParams {
    /// XX amplitude decay rate [1/ps].
    pub gamma_xx: f64,
    /// X amplitude decay rate [1/ps].
    pub gamma_x: f64,
    /// Fine-structure splitting [μeV].
    #[serde(default)]
    pub fss: f64,
    /// Spectral-wandering standard deviation of the X line [μeV].
    #[serde(default)]
    pub sigma_x: f64,
    /// Spectral-wandering standard deviation of the XX line [μeV].
    #[serde(default)]
    pub sigma_xx: f64,
    /// Delay between consecutive pair emissions [ps].
    #[serde(default = "default_pair_delay")]
    pub pair_delay: f64,
    /// Reduced Planck constant [μeV·ps].
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_pair_delay() -> f64 {
    1500.0
}

fn default_hbar() -> f64 {
    HBAR
}

/// Measured intensity lifetimes of the reference dot [ps].
pub const LIFETIME_X: f64 = 125.5;
pub const LIFETIME_XX: f64 = 38.8;

impl EmitterParams {
    pub fn new(gamma_xx: f64, gamma_x: f64) -> Result<Self> {
        let p = Self {
            gamma_xx,
            gamma_x,
            fss: 0.0,
            sigma_x: 0.0,
            sigma_xx: 0.0,
            pair_delay: default_pair_delay(),
            hbar: HBAR,
        };
        p.validate()?;
        Ok(p)
    }

    /// Amplitude rates `γ = 1/(2T)` from intensity lifetimes.
    pub fn from_lifetimes(t1_x: f64, t1_xx: f64) -> Result<Self> {
        if !(t1_x > 0.0 && t1_x.is_finite()) {
            return Err(invalid("t1_x", format!("lifetime must be positive, got {t1_x}")));
        }
        if !(t1_xx > 0.0 && t1_xx.is_finite()) {
            return Err(invalid("t1_xx", format!("lifetime must be positive, got {t1_xx}")));
        }
        Self::new(0.5 / t1_xx, 0.5 / t1_x)
    }

    /// Parameters of the reference dot: lifetimes 125.5 ps (X) and 38.8 ps (XX).
    pub fn reference() -> Self {
        Self::from_lifetimes(LIFETIME_X, LIFETIME_XX).expect("reference lifetimes are positive")
    }

    /// Same X rate with `γ_XX = ratio·γ_X`.
    pub fn with_ratio(self, ratio: f64) -> Result<Self> {
        let p = Self { gamma_xx: ratio * self.gamma_x, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn with_fss(self, fss: f64) -> Self {
        Self { fss, ..self }
    }

    pub fn with_wandering(self, sigma_x: f64, sigma_xx: f64) -> Self {
        Self { sigma_x, sigma_xx, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let non_negative = |v: f64| v >= 0.0 && v.is_finite();
        if !positive(self.gamma_xx) {
            return Err(invalid("gamma_xx", format!("must be positive, got {}", self.gamma_xx)));
        }
        if !positive(self.gamma_x) {
            return Err(invalid("gamma_x", format!("must be positive, got {}", self.gamma_x)));
        }
        if !self.fss.is_finite() {
            return Err(invalid("fss", "must be finite"));
        }
        if !non_negative(self.sigma_x) {
            return Err(invalid("sigma_x", format!("must be non-negative, got {}", self.sigma_x)));
        }
        if !non_negative(self.sigma_xx) {
            return Err(invalid("sigma_xx", format!("must be non-negative, got {}", self.sigma_xx)));
        }
        if !non_negative(self.pair_delay) {
            return Err(invalid("pair_delay", format!("must be non-negative, got {}", self.pair_delay)));
        }
        if !positive(self.hbar) {
            return Err(invalid("hbar", "must be positive"));
        }
        Ok(())
    }

    /// `γ_XX/γ_X`.
    pub fn ratio(&self) -> f64 {
        self.gamma_xx / self.gamma_x
    }

    /// FSS as an angular frequency [rad/ps].
    pub fn fss_rate(&self) -> f64 {
        self.fss / self.hbar
    }

    /// Converts an energy [μeV] to an angular frequency [rad/ps].
    pub fn energy_to_rate(&self, energy: f64) -> f64 {
        energy / self.hbar
    }
}

impl Default for EmitterParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Uniform grid on `[0, t_max]` sampled at bin midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_bins: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_bins: usize) -> Result<Self> {
        let g = Self { t_max, n_bins };
        g.validate()?;
        Ok(g)
    }

    /// `t_max = 8/min(γ_X, γ_XX)` with [`DEFAULT_BINS`] bins.
    pub fn default_for(params: &EmitterParams) -> Self {
        Self::with_bins(params, DEFAULT_BINS)
    }

    pub fn with_bins(params: &EmitterParams, n_bins: usize) -> Self {
        Self {
            t_max: DEFAULT_SPAN / params.gamma_x.min(params.gamma_xx),
            n_bins,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", format!("must be positive, got {}", self.t_max)));
        }
        if self.n_bins < 16 {
            return Err(invalid("n_bins", format!("must be at least 16, got {}", self.n_bins)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_bins as f64
    }

    pub fn time(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_bins).map(|k| self.time(k)).collect()
    }
}
