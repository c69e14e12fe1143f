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

//! Deterministic quasi-random sampling of relative detunings between two
//! emission events.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::rng;

/// Spectral-wandering model, widths in μeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Wandering {
    Off,
    /// X and XX lines wander independently.
    Independent { sigma_x: f64, sigma_xx: f64 },
    /// Both lines share one detuning per emission event.
    Correlated { sigma: f64 },
}

impl Wandering {
    pub fn validate(&self) -> Result<()> {
        let bad = |v: f64| !(v >= 0.0 && v.is_finite());
        match *self {
            Wandering::Off => Ok(()),
            Wandering::Independent { sigma_x, sigma_xx } if bad(sigma_x) || bad(sigma_xx) => {
                Err(invalid("wandering", "widths must be non-negative"))
            }
            Wandering::Correlated { sigma } if bad(sigma) => Err(invalid("wandering", "width must be non-negative")),
            _ => Ok(()),
        }
    }

    pub fn is_off(&self) -> bool {
        match *self {
            Wandering::Off => true,
            Wandering::Independent { sigma_x, sigma_xx } => sigma_x == 0.0 && sigma_xx == 0.0,
            Wandering::Correlated { sigma } => sigma == 0.0,
        }
    }
}

/// Relative detuning `δ_late − δ_early` of each line [rad/ps].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Detuning {
    pub xx: f64,
    pub x: f64,
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Shifted Halton points in `(0,1)^dims`.
fn halton(n: usize, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, &[0x4841_4c54]);
    let shift: Vec<f64> = (0..dims).map(|_| r.random()).collect();
    (1..=n as u64)
        .map(|k| (0..dims).map(|d| (radical_inverse(k, PRIMES[d]) + shift[d]).fract()).collect())
        .collect()
}

fn gauss(u: f64) -> f64 {
    Normal::standard().inverse_cdf(u.clamp(1e-15, 1.0 - 1e-15))
}

/// `n` relative detunings between the late and early pair. Each line's
/// single-event detuning is Gaussian with the configured width, so the
/// relative detuning has variance `2σ²`. Returns a single zero detuning when
/// wandering is off.
pub fn sample_detunings(wandering: &Wandering, n: usize, seed: u64, hbar: f64) -> Result<Vec<Detuning>> {
    wandering.validate()?;
    if n == 0 {
        return Err(invalid("detuning_samples", "must be at least 1"));
    }
    if wandering.is_off() {
        return Ok(vec![Detuning::default()]);
    }
    let scale = std::f64::consts::SQRT_2 / hbar;
    Ok(halton(n, 2, seed)
        .into_iter()
        .map(|u| line_detuning(wandering, scale, u[0], u[1]))
        .collect())
}

fn line_detuning(wandering: &Wandering, scale: f64, u: f64, v: f64) -> Detuning {
    match *wandering {
        Wandering::Independent { sigma_x, sigma_xx } => Detuning {
            xx: sigma_xx * scale * gauss(u),
            x: sigma_x * scale * gauss(v),
        },
        Wandering::Correlated { sigma } => {
            let d = sigma * scale * gauss(u);
            Detuning { xx: d, x: d }
        }
        Wandering::Off => Detuning::default(),
    }
}

/// Absolute detunings of `events` independent emissions, `n` samples each.
/// Returns one all-zero sample when wandering is off.
pub fn sample_emission_detunings(
    wandering: &Wandering,
    events: usize,
    n: usize,
    seed: u64,
    hbar: f64,
) -> Result<Vec<Vec<Detuning>>> {
    wandering.validate()?;
    if n == 0 {
        return Err(invalid("detuning_samples", "must be at least 1"));
    }
    if 2 * events > PRIMES.len() {
        return Err(invalid("events", format!("at most {} emission events", PRIMES.len() / 2)));
    }
    if wandering.is_off() {
        return Ok(vec![vec![Detuning::default(); events]]);
    }
    let scale = 1.0 / hbar;
    Ok(halton(n, 2 * events, seed)
        .into_iter()
        .map(|u| (0..events).map(|e| line_detuning(wandering, scale, u[2 * e], u[2 * e + 1])).collect())
        .collect())
}
