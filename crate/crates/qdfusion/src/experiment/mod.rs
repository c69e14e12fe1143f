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

//! Monte Carlo measurement layer.
//!
//! Shots are split into fixed-size blocks, each drawing from its own stream
//! derived from the seed, so results do not depend on the thread count.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::EmitterParams;
use crate::error::{invalid, Error, Result};
use crate::fusion::Wandering;
use crate::linalg::{c, kron, CMat};
use crate::polarization::PolarizationState;
use crate::rng::stream;

mod calibrate;
mod end_to_end;
mod hbt;

pub use calibrate::{calibrate, hom_visibility, pair_fidelity, simulate_hom, Calibration, CalibrationTargets};
pub use end_to_end::{end_to_end, fused_state, EndToEnd, EndToEndOptions, Engine};
pub use hbt::{g2_model, rabi_population, simulate_hbt, simulate_hbt_with, HbtResult, PhotonNumber};

/// Shots drawn from one random stream.
pub const BLOCK_SHOTS: u64 = 1 << 16;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

const TAG_SAMPLE: u64 = 1;
const TAG_BOOTSTRAP: u64 = 2;

/// Source and detection description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceModel {
    pub emitter: EmitterParams,
    /// Two-qubit maximal entangled fraction the model is calibrated to.
    pub pair_fidelity_target: f64,
    /// White-noise weight mixed into every pair.
    pub depolarization: f64,
    /// Fraction of the pair-fidelity deficit assigned to FSS during
    /// calibration; `None` keeps the emitter's FSS.
    pub fss_share: Option<f64>,
    /// Probability of a second photon per pulse.
    pub multiphoton_prob: f64,
    /// Per-arm detection efficiency.
    pub efficiency: f64,
    /// Coincidence window [ps].
    pub window: f64,
    /// Pulse repetition rate [1/ns].
    pub rep_rate: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        Self {
            emitter: EmitterParams::reference(),
            pair_fidelity_target: 1.0,
            depolarization: 0.0,
            fss_share: Some(0.5),
            multiphoton_prob: 0.0,
            efficiency: 0.1,
            window: 600.0,
            rep_rate: 0.08,
        }
    }
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        self.emitter.validate()?;
        for (name, v) in [
            ("pair_fidelity_target", self.pair_fidelity_target),
            ("depolarization", self.depolarization),
            ("multiphoton_prob", self.multiphoton_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("{v} outside [0, 1]")));
            }
        }
        if let Some(share) = self.fss_share {
            if !(0.0..=1.0).contains(&share) {
                return Err(invalid("fss_share", format!("{share} outside [0, 1]")));
            }
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid("efficiency", format!("{} outside (0, 1]", self.efficiency)));
        }
        if !(self.rep_rate > 0.0) {
            return Err(invalid("rep_rate", "must be positive"));
        }
        let period = 1000.0 / self.rep_rate;
        if !(self.window > 0.0 && self.window < period) {
            return Err(invalid("window", format!("must lie in (0, {period}) ps")));
        }
        Ok(())
    }

    /// Independent wandering of the two lines, or none.
    pub fn wandering(&self) -> Wandering {
        let (sx, sxx) = (self.emitter.sigma_x, self.emitter.sigma_xx);
        if sx == 0.0 && sxx == 0.0 {
            Wandering::Off
        } else {
            Wandering::Independent { sigma_x: sx, sigma_xx: sxx }
        }
    }
}

/// Single-qubit projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Outcome 0 is `|H⟩`, 1 is `|V⟩`.
    Hv,
    /// Eigenbasis of `M(θ)`; outcome 0 is the `+1` eigenvector.
    Theta(f64),
}

impl Basis {
    fn vectors(self) -> [[Complex64; 2]; 2] {
        match self {
            Basis::Hv => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            Basis::Theta(t) => {
                let e = Complex64::from_polar(FRAC_1_SQRT_2, t);
                [[c(FRAC_1_SQRT_2, 0.0), e], [c(FRAC_1_SQRT_2, 0.0), -e]]
            }
        }
    }

    pub fn label(self) -> String {
        match self {
            Basis::Hv => "HV".into(),
            Basis::Theta(t) => format!("M({t:.6})"),
        }
    }
}

/// Outcome histogram of one measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub setting: String,
    /// Indexed by outcome bit string, qubit 0 most significant.
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

/// Outcome probabilities of a product-basis measurement.
pub fn outcome_probabilities(state: &PolarizationState, setting: &[Basis]) -> Result<Vec<f64>> {
    if setting.len() != state.n_qubits() {
        return Err(Error::DimensionMismatch { expected: state.n_qubits(), got: setting.len() });
    }
    let mut u = CMat::identity(1, 1);
    for b in setting {
        let v = b.vectors();
        let rows = CMat::from_fn(2, 2, |r, col| v[r][col].conj());
        u = kron(&u, &rows);
    }
    let rotated = &u * state.matrix() * u.adjoint();
    let probs: Vec<f64> = (0..state.dim()).map(|k| rotated[(k, k)].re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    Ok(probs.into_iter().map(|p| p / total).collect())
}

/// Multinomial draw by successive conditional binomials.
pub(crate) fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut remaining = n;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() || mass <= 0.0 {
            out[k] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let x = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        out[k] = x;
        remaining -= x;
        mass -= p;
    }
    out
}

/// Block-parallel multinomial sampling of `shots` trials.
pub(crate) fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let blocks = shots.div_ceil(BLOCK_SHOTS);
    let partial: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = BLOCK_SHOTS.min(shots - b * BLOCK_SHOTS);
            multinomial(&mut stream(seed, &[TAG_SAMPLE, b]), n, probs)
        })
        .collect();
    let mut total = vec![0; probs.len()];
    for p in partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total
}

/// Samples projective outcomes of `state` measured in `setting`.
pub fn sample_outcomes(state: &PolarizationState, setting: &[Basis], shots: u64, seed: u64) -> Result<MeasurementRecord> {
    if shots == 0 {
        return Err(invalid("shots", "must be at least 1"));
    }
    let probs = outcome_probabilities(state, setting)?;
    Ok(MeasurementRecord {
        setting: setting.iter().map(|b| b.label()).collect::<Vec<_>>().join(","),
        counts: sample_counts(&probs, shots, seed),
        shots,
        seed,
    })
}

/// Resamples a histogram with replacement `resamples` times.
pub fn bootstrap_counts(counts: &[u64], resamples: usize, seed: u64) -> Vec<Vec<u64>> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![counts.to_vec(); resamples];
    }
    let probs: Vec<f64> = counts.iter().map(|&n| n as f64 / total as f64).collect();
    (0..resamples)
        .into_par_iter()
        .map(|b| multinomial(&mut stream(seed, &[TAG_BOOTSTRAP, b as u64]), total, &probs))
        .collect()
}

/// Value with a one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Sample standard deviation.
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
