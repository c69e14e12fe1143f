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

//! Pulsed HBT and Rabi characterization.
//!
//! Each pulse emits one photon, plus a second with probability
//! `multiphoton_prob`. Every photon is detected with the arm efficiency and
//! lands on either detector with probability ½. Pulses are binned, so the
//! coincidence window only needs to be shorter than the period.
//!
//! With `p` the two-photon probability and `η` the efficiency,
//! `g²(0) = (pη²/2) / P₁²` where `P₁ = (1−p)η/2 + p(η − η²/4)` is the click
//! probability of one detector. For small `η` this is `2p/(1+p)²`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SourceModel, BLOCK_SHOTS};
use crate::error::{invalid, Result};
use crate::rng::stream;

const TAG_HBT: u64 = 3;
/// Side peaks on each side of zero delay.
pub const SIDE_PEAKS: usize = 5;
pub const MIN_HBT_SHOTS: u64 = 10_000;

/// Photon-number distribution per pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhotonNumber {
    /// One photon plus an extra one with the given probability.
    Cascade { multiphoton_prob: f64 },
    /// Coherent-state benchmark.
    Poissonian { mean: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbtResult {
    pub g2: f64,
    pub stderr: f64,
    pub center: u64,
    /// Mean side-peak coincidences per pulse pair.
    pub side_rate: f64,
}

/// Expected `g²(0)` of the cascade model.
pub fn g2_model(multiphoton_prob: f64, efficiency: f64) -> f64 {
    let (p, eta) = (multiphoton_prob, efficiency);
    let single = (1.0 - p) * eta / 2.0 + p * (eta - eta * eta / 4.0);
    p * eta * eta / 2.0 / (single * single)
}

pub fn simulate_hbt(model: &SourceModel, shots: u64, seed: u64) -> Result<HbtResult> {
    model.validate()?;
    let source = PhotonNumber::Cascade { multiphoton_prob: model.multiphoton_prob };
    simulate_hbt_with(source, model.efficiency, shots, seed)
}

struct Tally {
    center: u64,
    side: [u64; 2 * SIDE_PEAKS],
    pairs: [u64; 2 * SIDE_PEAKS],
}

pub fn simulate_hbt_with(source: PhotonNumber, efficiency: f64, shots: u64, seed: u64) -> Result<HbtResult> {
    if shots < MIN_HBT_SHOTS {
        return Err(invalid("shots", format!("{shots} below {MIN_HBT_SHOTS}")));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(invalid("efficiency", "must lie in (0, 1]"));
    }
    let poisson = match source {
        PhotonNumber::Cascade { multiphoton_prob } if !(0.0..=1.0).contains(&multiphoton_prob) => {
            return Err(invalid("multiphoton_prob", "must lie in [0, 1]"));
        }
        PhotonNumber::Poissonian { mean } => {
            Some(Poisson::new(mean).map_err(|e| invalid("mean", e.to_string()))?)
        }
        _ => None,
    };
    let blocks = shots.div_ceil(BLOCK_SHOTS);
    let tallies: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, &[TAG_HBT, b]);
            let n = BLOCK_SHOTS.min(shots - b * BLOCK_SHOTS) as usize;
            let mut d1 = vec![false; n];
            let mut d2 = vec![false; n];
            for k in 0..n {
                let photons = match (source, &poisson) {
                    (_, Some(dist)) => dist.sample(&mut rng) as u64,
                    (PhotonNumber::Cascade { multiphoton_prob }, None) => 1 + u64::from(rng.random::<f64>() < multiphoton_prob),
                    _ => unreachable!(),
                };
                for _ in 0..photons {
                    let u: f64 = rng.random();
                    if u < efficiency / 2.0 {
                        d1[k] = true;
                    } else if u < efficiency {
                        d2[k] = true;
                    }
                }
            }
            let mut tally = Tally { center: 0, side: [0; 2 * SIDE_PEAKS], pairs: [0; 2 * SIDE_PEAKS] };
            tally.center = d1.iter().zip(&d2).filter(|(a, b)| **a && **b).count() as u64;
            for delta in 1..=SIDE_PEAKS.min(n.saturating_sub(1)) {
                let pairs = (n - delta) as u64;
                let fwd = (0..n - delta).filter(|&k| d1[k] && d2[k + delta]).count() as u64;
                let bwd = (0..n - delta).filter(|&k| d2[k] && d1[k + delta]).count() as u64;
                tally.side[2 * (delta - 1)] = fwd;
                tally.side[2 * (delta - 1) + 1] = bwd;
                tally.pairs[2 * (delta - 1)] = pairs;
                tally.pairs[2 * (delta - 1) + 1] = pairs;
            }
            tally
        })
        .collect();

    let center: u64 = tallies.iter().map(|t| t.center).sum();
    let mut side_total = 0u64;
    let mut side_rate = 0.0;
    for j in 0..2 * SIDE_PEAKS {
        let counts: u64 = tallies.iter().map(|t| t.side[j]).sum();
        let pairs: u64 = tallies.iter().map(|t| t.pairs[j]).sum();
        side_total += counts;
        side_rate += counts as f64 / pairs as f64;
    }
    side_rate /= (2 * SIDE_PEAKS) as f64;
    if side_total == 0 {
        return Err(invalid("shots", "no side-peak coincidences; increase shots or efficiency"));
    }
    let center_rate = center as f64 / shots as f64;
    let g2 = center_rate / side_rate;
    let stderr = if center > 0 {
        g2 * (1.0 / center as f64 + 1.0 / side_total as f64).sqrt()
    } else {
        1.0 / shots as f64 / side_rate
    };
    Ok(HbtResult { g2, stderr, center, side_rate })
}

/// Biexciton preparation probability `sin²((π/2)(P/P_π)^k)`.
pub fn rabi_population(power: f64, pi_power: f64, exponent: f64) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(invalid("power", "must be non-negative"));
    }
    if !(pi_power > 0.0) {
        return Err(invalid("pi_power", "must be positive"));
    }
    if !(exponent > 0.0) {
        return Err(invalid("exponent", "must be positive"));
    }
    Ok((FRAC_PI_2 * (power / pi_power).powf(exponent)).sin().powi(2))
}
