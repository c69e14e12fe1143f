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

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{EmitterParams, TemporalAmplitude};

/// Joint spectral density `γ_XXγ_X / (π²(ω_X²+γ_X²)((ω_X+ω_XX)²+γ_XX²))`.
pub fn joint_spectrum(params: &EmitterParams, omega_xx: f64, omega_x: f64) -> f64 {
    let (gxx, gx) = (params.gamma_xx, params.gamma_x);
    let s = omega_x + omega_xx;
    gxx * gx / (PI * PI * (omega_x * omega_x + gx * gx) * (s * s + gxx * gxx))
}

/// `|ψ̃(ω_XX, ω_X)|²` on the FFT frequency grid, centred at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    /// Angular frequencies [rad/ps] shared by both axes, ascending.
    pub omegas: Vec<f64>,
    /// Density indexed by (ω_XX, ω_X).
    pub density: DMatrix<f64>,
}

impl SpectrumGrid {
    /// Largest relative deviation from [`joint_spectrum`] over
    /// `|ω_XX|, |ω_X| ≤ window`.
    pub fn max_relative_error(&self, params: &EmitterParams, window: f64) -> f64 {
        let mut worst = 0.0f64;
        for (r, &wxx) in self.omegas.iter().enumerate() {
            if wxx.abs() > window {
                continue;
            }
            for (k, &wx) in self.omegas.iter().enumerate() {
                if wx.abs() > window {
                    continue;
                }
                let exact = joint_spectrum(params, wxx, wx);
                worst = worst.max((self.density[(r, k)] - exact).abs() / exact);
            }
        }
        worst
    }

    pub fn d_omega(&self) -> f64 {
        self.omegas[1] - self.omegas[0]
    }
}

/// Two-dimensional transform `(1/2π)∬ψ e^{i(ω_XX t₁ + ω_X t₂)}` of a sampled
/// amplitude, squared.
pub fn fft_spectrum(amp: &TemporalAmplitude) -> SpectrumGrid {
    let grid = amp.grid();
    let n = grid.n_bins;
    let dt = grid.dt();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);

    let mut data: Vec<Complex64> = amp.values().transpose().iter().copied().collect();
    // `data` is now row-major in (t1, t2); transform rows then columns.
    fft.process(&mut data);
    let mut cols = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for k in 0..n {
            cols[k * n + r] = data[r * n + k];
        }
    }
    fft.process(&mut cols);

    let scale = dt * dt / (2.0 * PI);
    let shift = |k: usize| (k + n / 2) % n;
    let d_omega = 2.0 * PI / (n as f64 * dt);
    let omegas = (0..n).map(|k| (k as f64 - (n / 2) as f64) * d_omega).collect();
    let density = DMatrix::from_fn(n, n, |r, k| {
        // cols is column-major over (ω_XX index r, ω_X index k).
        (cols[shift(k) * n + shift(r)] * scale).norm_sqr()
    });
    SpectrumGrid { omegas, density }
}
