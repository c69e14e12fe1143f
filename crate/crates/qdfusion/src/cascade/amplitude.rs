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

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EmitterParams, TimeGrid, DEFAULT_SPAN};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, matmul, matmul_adj, CMat, I};

/// Truncated-mass level above which a discretized amplitude is flagged.
pub const TRUNCATION_WARNING: f64 = 1e-3;

/// Analytic cascade envelope `c·e^{−a t₁}·e^{−b (t₂−t₁)}` for `0 ≤ t₁ ≤ t₂`.
///
/// Complex rates carry FSS and detuning phases; the real parts are the decay
/// rates of the XX (`a`) and X (`b`) amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub a: Complex64,
    pub b: Complex64,
}

impl Envelope {
    pub fn cascade(params: &EmitterParams) -> Self {
        Self { a: c(params.gamma_xx, 0.0), b: c(params.gamma_x, 0.0) }
    }

    /// Envelope of the `|VV⟩` branch: X-stage phase `e^{−i(S/ħ)(t₂−t₁)}`.
    pub fn cascade_v(params: &EmitterParams) -> Self {
        let e = Self::cascade(params);
        Self { b: e.b + I * params.fss_rate(), ..e }
    }

    /// Rigid detuning of both lines, `e^{−iδ_XX t₁ − iδ_X t₂}`.
    pub fn detuned(self, delta_xx: f64, delta_x: f64) -> Self {
        Self {
            a: self.a + I * (delta_xx + delta_x),
            b: self.b + I * delta_x,
        }
    }

    pub fn norm_constant(&self) -> f64 {
        2.0 * (self.a.re * self.b.re).sqrt()
    }

    pub fn value(&self, t1: f64, t2: f64) -> Complex64 {
        if t1 < 0.0 || t2 < t1 {
            return c(0.0, 0.0);
        }
        (-self.a * t1 - self.b * (t2 - t1)).exp() * self.norm_constant()
    }

    /// Closed-form `⟨self|other⟩`.
    pub fn overlap(&self, other: &Envelope) -> Complex64 {
        let k = self.norm_constant() * other.norm_constant();
        c(k, 0.0) / ((self.a.conj() + other.a) * (self.b.conj() + other.b))
    }
}

/// `2√(γ_XX γ_X)·e^{−γ_XX t₁}·e^{−γ_X(t₂−t₁)}` for `0 ≤ t₁ ≤ t₂`, else 0.
pub fn cascade_amplitude(params: &EmitterParams, t1: f64, t2: f64) -> Complex64 {
    Envelope::cascade(params).value(t1, t2)
}

/// Probability that the X photon is emitted after `t_max`.
pub fn tail_mass(params: &EmitterParams, t_max: f64) -> f64 {
    let alpha = 2.0 * params.gamma_xx;
    let beta = 2.0 * params.gamma_x;
    if ((alpha - beta) / alpha).abs() < 1e-9 {
        (-alpha * t_max).exp() * (1.0 + alpha * t_max)
    } else {
        (alpha * (-beta * t_max).exp() - beta * (-alpha * t_max).exp()) / (alpha - beta)
    }
}

/// Two-photon amplitude on a grid, rows indexed by the XX bin and columns by
/// the X bin. Normalized so that `Σ|ψ|²·dt² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalAmplitude {
    grid: TimeGrid,
    values: CMat,
    truncated_mass: f64,
}

impl TemporalAmplitude {
    /// Samples `env` at bin midpoints and renormalizes.
    pub fn sample(env: &Envelope, grid: &TimeGrid) -> Result<Self> {
        grid.validate()?;
        let n = grid.n_bins;
        let t = grid.times();
        let values = CMat::from_fn(n, n, |i, j| if j >= i { env.value(t[i], t[j]) } else { c(0.0, 0.0) });
        let mut amp = Self::from_values(*grid, values)?;
        let params = EmitterParams::new(env.a.re, env.b.re)?;
        amp.truncated_mass = tail_mass(&params, grid.t_max);
        Ok(amp)
    }

    /// Wraps and normalizes arbitrary grid values.
    pub fn from_values(grid: TimeGrid, values: CMat) -> Result<Self> {
        grid.validate()?;
        if values.shape() != (grid.n_bins, grid.n_bins) {
            return Err(Error::DimensionMismatch { expected: grid.n_bins, got: values.nrows() });
        }
        let dt = grid.dt();
        let norm = values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt * dt;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Unnormalized { trace: norm });
        }
        Ok(Self {
            grid,
            values: values / c(norm.sqrt(), 0.0),
            truncated_mass: 0.0,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &CMat {
        &self.values
    }

    /// Probability mass outside the grid before renormalization.
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncated_mass > TRUNCATION_WARNING
    }

    pub fn norm(&self) -> f64 {
        let dt = self.grid.dt();
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt * dt
    }

    /// `ψ·dt`, the amplitude as a unit-norm matrix.
    pub fn scaled(&self) -> CMat {
        &self.values * c(self.grid.dt(), 0.0)
    }

    /// `⟨self|other⟩` on the common grid.
    pub fn inner(&self, other: &TemporalAmplitude) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch { expected: self.grid.n_bins, got: other.grid.n_bins });
        }
        let dt = self.grid.dt();
        Ok(self.values.dotc(&other.values) * (dt * dt))
    }
}

/// Discretizes the cascade amplitude of `params` on `grid`.
pub fn discretize(params: &EmitterParams, grid: &TimeGrid) -> Result<TemporalAmplitude> {
    params.validate()?;
    let recommended = DEFAULT_SPAN / params.gamma_x.min(params.gamma_xx);
    if grid.t_max < recommended {
        log::warn!("grid span {:.1} ps is below the recommended {:.1} ps", grid.t_max, recommended);
    }
    let amp = TemporalAmplitude::sample(&Envelope::cascade(params), grid)?;
    if amp.truncation_warning() {
        log::warn!("truncated probability mass {:.2e}", amp.truncated_mass());
    }
    Ok(amp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    X,
    XX,
}

/// Single-photon temporal density matrix on a grid, stored with unit trace
/// (the continuous kernel times `dt`).
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDensity {
    grid: TimeGrid,
    matrix: CMat,
}

impl TemporalDensity {
    pub fn new(grid: TimeGrid, matrix: CMat) -> Result<Self> {
        grid.validate()?;
        if matrix.shape() != (grid.n_bins, grid.n_bins) {
            return Err(Error::DimensionMismatch { expected: grid.n_bins, got: matrix.nrows() });
        }
        Ok(Self { grid, matrix })
    }

    /// Pure state of the sampled mode function `f` (normalized internally).
    pub fn pure(grid: TimeGrid, f: &[Complex64]) -> Result<Self> {
        if f.len() != grid.n_bins {
            return Err(Error::DimensionMismatch { expected: grid.n_bins, got: f.len() });
        }
        let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Unnormalized { trace: 0.0 });
        }
        let n = f.len();
        let m = CMat::from_fn(n, n, |r, k| f[r] * f[k].conj() / (norm * norm));
        Self::new(grid, m)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Average over a Gaussian rigid detuning of standard deviation `sigma`
    /// [rad/ps]: `ρ(t,t')·e^{−σ²(t−t')²/2}`.
    pub fn dephased(&self, sigma: f64) -> Self {
        let dt = self.grid.dt();
        let s2 = sigma * sigma * dt * dt / 2.0;
        let m = CMat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |r, k| {
            let d = r as f64 - k as f64;
            self.matrix[(r, k)] * (-s2 * d * d).exp()
        });
        Self { grid: self.grid, matrix: m }
    }

    /// `Tr(ρ_self ρ_other)`.
    pub fn overlap(&self, other: &TemporalDensity) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch { expected: self.grid.n_bins, got: other.grid.n_bins });
        }
        // Tr(AB) = Σ A_jk B_kj = Σ A_jk conj(B_jk) for Hermitian B.
        Ok(self.matrix.dotc(&other.matrix).re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }
}

/// Reduced single-photon state of the X or XX photon.
pub fn reduced_density(amp: &TemporalAmplitude, subsystem: Subsystem) -> TemporalDensity {
    let m = amp.scaled();
    let matrix = match subsystem {
        Subsystem::XX => matmul(&m, &m.adjoint()),
        Subsystem::X => matmul_adj(&m, &m).transpose(),
    };
    TemporalDensity { grid: *amp.grid(), matrix }
}

/// `Tr(ρ²)`.
pub fn purity(density: &TemporalDensity) -> f64 {
    density.purity()
}

/// `γ_XX/(γ_XX+γ_X)`.
pub fn indistinguishability_bound(params: &EmitterParams) -> f64 {
    params.gamma_xx / (params.gamma_xx + params.gamma_x)
}
