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

//! Linear-optical interference of cascade photons.
//!
//! Two pairs, emitted one after the other by the same dot, enter a PBS per
//! photon colour: the early pair in port a, the late pair in port b.
//! Post-selecting one photon in each output of every PBS projects onto
//! `|H⟩^{⊗4}` and `|V⟩^{⊗4}` branches. The four output qubits are ordered
//! `[XX c, XX d, X c, X d]`.

mod engine;
mod overlap;
mod pbs;
mod wandering;

use serde::{Deserialize, Serialize};

use crate::cascade::{pair_state, EmitterParams, PairState, TemporalDensity, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::polarization::PolarizationState;

pub use overlap::{AnalyticOverlaps, Color, GridOverlaps, OverlapModel, SwapKey};
pub use pbs::{pbs_apply, pbs_mode_transform, pbs_route, InputPort, OutputPort};
pub use wandering::{sample_detunings, sample_emission_detunings, Detuning, Wandering};

/// Which photons interfere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Only the X photons meet on a PBS.
    SinglePbsX,
    /// Only the XX photons meet on a PBS.
    SinglePbsXx,
    /// Both colours interfere.
    DoublePbs,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::DoublePbs, Scheme::SinglePbsX, Scheme::SinglePbsXx];

    pub fn interferes(self, color: Color) -> bool {
        matches!(
            (self, color),
            (Scheme::DoublePbs, _) | (Scheme::SinglePbsX, Color::X) | (Scheme::SinglePbsXx, Color::Xx)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SinglePbsX => "single_pbs_x",
            Scheme::SinglePbsXx => "single_pbs_xx",
            Scheme::DoublePbs => "double_pbs",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid("scheme", format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub scheme: Scheme,
    /// Apply the emitter's FSS when pairs are built from parameters.
    pub fss_on: bool,
    pub wandering: Wandering,
    /// Rank of the Schmidt approximation used in single-colour exchange
    /// terms; `None` uses the full grid.
    pub schmidt_modes: Option<usize>,
    /// Largest discarded Schmidt weight accepted when truncating.
    pub max_truncation_residual: f64,
    pub detuning_samples: usize,
    pub seed: u64,
    /// Phase between `|H⟩^{⊗4}` and `|V⟩^{⊗4}` added at the outputs [rad].
    pub phase_offset: f64,
    /// Residual spatial/path overlap per interfering colour, in `[0, 1]`.
    pub mode_overlap: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::DoublePbs,
            fss_on: true,
            wandering: Wandering::Off,
            schmidt_modes: None,
            max_truncation_residual: 1e-3,
            detuning_samples: 200,
            seed: 0,
            phase_offset: 0.0,
            mode_overlap: 1.0,
        }
    }
}

impl FusionConfig {
    pub fn with_scheme(scheme: Scheme) -> Self {
        Self { scheme, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schmidt_modes == Some(0) {
            return Err(invalid("schmidt_modes", "must be at least 1"));
        }
        if self.detuning_samples == 0 {
            return Err(invalid("detuning_samples", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mode_overlap) {
            return Err(invalid("mode_overlap", "must lie in [0, 1]"));
        }
        if !(self.max_truncation_residual >= 0.0) {
            return Err(invalid("max_truncation_residual", "must be non-negative"));
        }
        self.wandering.validate()
    }

    /// Two independent copies of the ideal pair of `params` on `grid`.
    pub fn pairs(&self, params: &EmitterParams, grid: &TimeGrid) -> Result<(PairState, PairState)> {
        let p = if self.fss_on { *params } else { params.with_fss(0.0) };
        let pair = pair_state(&p, grid)?;
        Ok((pair.clone(), pair))
    }

    fn detunings(&self, hbar: f64) -> Result<Vec<Detuning>> {
        sample_detunings(&self.wandering, self.detuning_samples, self.seed, hbar)
    }
}

/// Post-selected four-photon result.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutcome {
    pub state: PolarizationState,
    pub success_probability: f64,
    /// `p(H^{⊗4}) + p(V^{⊗4})`.
    pub population: f64,
    /// `2|⟨H^{⊗4}|ρ|V^{⊗4}⟩|`.
    pub coherence: f64,
    /// `arg⟨V^{⊗4}|ρ|H^{⊗4}⟩` in `[0, 2π)`.
    pub phase: f64,
}

/// Two-photon interference of diagonally polarized photons on a PBS followed
/// by D/A analysis in both outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomResult {
    /// `Tr(ρ_a ρ_b)`.
    pub visibility: f64,
    /// Coincidence probability for `|DD⟩` (equal for `|AA⟩`).
    pub p_parallel: f64,
    /// Coincidence probability for `|DA⟩` (equal for `|AD⟩`).
    pub p_cross: f64,
}

impl HomResult {
    /// `(P_DD − P_DA)/(P_DD + P_DA)`.
    pub fn contrast(&self) -> f64 {
        (self.p_parallel - self.p_cross) / (self.p_parallel + self.p_cross)
    }
}

/// Interference visibility of two single-photon temporal states.
pub fn hom_pbs(photon_a: &TemporalDensity, photon_b: &TemporalDensity) -> Result<HomResult> {
    for rho in [photon_a, photon_b] {
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-6 {
            return Err(Error::Unnormalized { trace: tr });
        }
    }
    let v = photon_a.overlap(photon_b)?;
    Ok(HomResult {
        visibility: v,
        p_parallel: (1.0 + v) / 8.0,
        p_cross: (1.0 - v) / 8.0,
    })
}

fn check_pairs(early: &PairState, late: &PairState) -> Result<()> {
    if early.grid() != late.grid() {
        return Err(Error::DimensionMismatch {
            expected: early.grid().n_bins,
            got: late.grid().n_bins,
        });
    }
    Ok(())
}

/// Fuses two pairs using grid overlaps.
pub fn fuse(pair_early: &PairState, pair_late: &PairState, config: &FusionConfig) -> Result<FusionOutcome> {
    config.validate()?;
    let detunings = config.detunings(pair_early.params().hbar)?;
    fuse_with_detunings(pair_early, pair_late, config, &detunings)
}

/// [`fuse`] with an explicit list of relative detunings.
pub fn fuse_with_detunings(
    pair_early: &PairState,
    pair_late: &PairState,
    config: &FusionConfig,
    detunings: &[Detuning],
) -> Result<FusionOutcome> {
    config.validate()?;
    check_pairs(pair_early, pair_late)?;
    let (envelopes, e_map, l_map) = engine::merge_envelopes(pair_early, pair_late);
    let truncation = config.schmidt_modes.map(|k| (k, config.max_truncation_residual));
    let model = GridOverlaps::new(&envelopes, pair_early.grid(), truncation)?;
    engine::run(&model, pair_early, pair_late, &e_map, &l_map, config, detunings)
}

/// Fuses two ideal pairs of `params` using closed-form overlaps.
pub fn fuse_analytic(params: &EmitterParams, config: &FusionConfig) -> Result<FusionOutcome> {
    config.validate()?;
    let (early, late) = config.pairs(params, &TimeGrid::default_for(params))?;
    fuse_pairs_analytic(&early, &late, config)
}

/// Closed-form fusion of arbitrary pair mixtures.
pub fn fuse_pairs_analytic(pair_early: &PairState, pair_late: &PairState, config: &FusionConfig) -> Result<FusionOutcome> {
    config.validate()?;
    let detunings = config.detunings(pair_early.params().hbar)?;
    let (envelopes, e_map, l_map) = engine::merge_envelopes(pair_early, pair_late);
    let model = AnalyticOverlaps::new(&envelopes);
    engine::run(&model, pair_early, pair_late, &e_map, &l_map, config, &detunings)
}

#[cfg(test)]
mod tests;
