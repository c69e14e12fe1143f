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

//! Calibration of wandering and pair noise to measured values.
//!
//! Visibilities are HOM overlaps of two photons of the same line whose
//! frequencies wander independently by `σ`; the relative detuning then has
//! variance `2σ²`. Pair noise is an FSS phase plus white depolarization; a
//! share of the fidelity deficit is assigned to the FSS and the fully
//! entangled fraction is linear in the depolarization weight.

use serde::{Deserialize, Serialize};

use super::{sample_counts, Estimate, SourceModel};
use crate::cascade::{discretize, pair_state, EmitterParams, reduced_density, Subsystem, TemporalDensity, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::fusion::hom_pbs;
use crate::metrics::max_entangled_fidelity;

const TAG_HOM: u64 = 4;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTargets {
    pub v_x: f64,
    pub v_xx: f64,
    pub pair_fidelity: f64,
}

impl CalibrationTargets {
    /// Measured reference values.
    pub fn reference() -> Self {
        Self { v_x: 0.625, v_xx: 0.694, pair_fidelity: 0.908 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: SourceModel,
    pub v_x: f64,
    pub v_xx: f64,
    pub pair_fidelity: f64,
    /// Visibility without wandering.
    pub bound_x: f64,
    pub bound_xx: f64,
}

fn line_density(model: &SourceModel, grid: &TimeGrid, subsystem: Subsystem) -> Result<TemporalDensity> {
    Ok(reduced_density(&discretize(&model.emitter, grid)?, subsystem))
}

fn visibility(rho: &TemporalDensity, sigma: f64, hbar: f64) -> Result<f64> {
    let relative = std::f64::consts::SQRT_2 * sigma / hbar;
    Ok(hom_pbs(rho, &rho.dephased(relative))?.visibility)
}

/// HOM visibility of one line with wandering `sigma` [μeV].
pub fn hom_visibility(model: &SourceModel, grid: &TimeGrid, subsystem: Subsystem, sigma: f64) -> Result<f64> {
    visibility(&line_density(model, grid, subsystem)?, sigma, model.emitter.hbar)
}

/// Monte Carlo HOM run: `shots` coincidences analyzed in D/A.
pub fn simulate_hom(model: &SourceModel, grid: &TimeGrid, subsystem: Subsystem, shots: u64, seed: u64) -> Result<Estimate> {
    if shots == 0 {
        return Err(invalid("shots", "must be at least 1"));
    }
    let sigma = match subsystem {
        Subsystem::X => model.emitter.sigma_x,
        Subsystem::XX => model.emitter.sigma_xx,
    };
    let v = hom_visibility(model, grid, subsystem, sigma)?;
    let tag = match subsystem {
        Subsystem::X => 0,
        Subsystem::XX => 1,
    };
    let probs = [(1.0 + v) / 4.0, (1.0 - v) / 4.0, (1.0 - v) / 4.0, (1.0 + v) / 4.0];
    let counts = sample_counts(&probs, shots, crate::rng::derive_seed(seed, &[TAG_HOM, tag]));
    let n = shots as f64;
    let value = (counts[0] + counts[3]) as f64 / n - (counts[1] + counts[2]) as f64 / n;
    Ok(Estimate { value, error: ((1.0 - value * value).max(0.0) / n).sqrt() })
}

fn solve_sigma(rho: &TemporalDensity, target: f64, hbar: f64, name: &'static str) -> Result<(f64, f64)> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(invalid(name, format!("{target} outside (0, 1]")));
    }
    let bound = visibility(rho, 0.0, hbar)?;
    if target > bound + BOUND_SLACK {
        return Err(Error::UnreachableTarget { name, target, bound });
    }
    if target >= bound - BOUND_SLACK {
        return Ok((0.0, bound));
    }
    let mut hi = 1.0;
    while visibility(rho, hi, hbar)? > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::UnreachableTarget { name, target, bound: 0.0 });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if visibility(rho, mid, hbar)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), bound))
}

/// Fully entangled fraction of one pair.
pub fn pair_fidelity(emitter: &EmitterParams, grid: &TimeGrid, depolarization: f64) -> Result<f64> {
    let pair = pair_state(emitter, grid)?.with_depolarization(depolarization)?;
    max_entangled_fidelity(&pair.polarization_state_analytic()?)
}

/// FSS [μeV] at which the noiseless pair reaches `target`.
fn solve_fss(emitter: &EmitterParams, grid: &TimeGrid, target: f64) -> Result<f64> {
    let at = |s: f64| pair_fidelity(&emitter.with_fss(s), grid, 0.0);
    if at(0.0)? <= target + BOUND_SLACK {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while at(hi)? > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::UnreachableTarget { name: "pair_fidelity", target, bound: at(hi)? });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fits `σ_x`, `σ_xx` and the depolarization weight of `base`.
pub fn calibrate(base: &SourceModel, targets: &CalibrationTargets, grid: &TimeGrid) -> Result<Calibration> {
    base.validate()?;
    let hbar = base.emitter.hbar;
    let rho_x = line_density(base, grid, Subsystem::X)?;
    let rho_xx = line_density(base, grid, Subsystem::XX)?;
    let (sigma_x, bound_x) = solve_sigma(&rho_x, targets.v_x, hbar, "v_x")?;
    let (sigma_xx, bound_xx) = solve_sigma(&rho_xx, targets.v_xx, hbar, "v_xx")?;

    let f = targets.pair_fidelity;
    if !(f > 0.0 && f <= 1.0) {
        return Err(invalid("pair_fidelity", format!("{f} outside (0, 1]")));
    }
    let mut emitter = base.emitter;
    if let Some(share) = base.fss_share {
        emitter.fss = solve_fss(&emitter, grid, 1.0 - share * (1.0 - f))?;
    }
    let clean = pair_fidelity(&emitter, grid, 0.0)?;
    if f > clean + BOUND_SLACK {
        return Err(Error::UnreachableTarget { name: "pair_fidelity", target: f, bound: clean });
    }
    if f < 0.25 {
        return Err(Error::UnreachableTarget { name: "pair_fidelity", target: f, bound: 0.25 });
    }
    let depolarization = if clean - 0.25 < BOUND_SLACK || clean - f < BOUND_SLACK {
        0.0
    } else {
        ((clean - f) / (clean - 0.25)).clamp(0.0, 1.0)
    };

    let mut model = *base;
    model.emitter = emitter.with_wandering(sigma_x, sigma_xx);
    model.depolarization = depolarization;
    model.pair_fidelity_target = f;
    Ok(Calibration {
        model,
        v_x: visibility(&rho_x, sigma_x, hbar)?,
        v_xx: visibility(&rho_xx, sigma_xx, hbar)?,
        pair_fidelity: pair_fidelity(&model.emitter, grid, depolarization)?,
        bound_x,
        bound_xx,
    })
}
