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

//! Switched fiber-loop generation of GHZ states from one source.
//!
//! Pair 0 is switched into the loop. In every later period the stored XX and
//! X photons meet the fresh pair on the loop PBS: output `c` goes to the
//! detectors, output `d` back into the loop. After the last pair the loop
//! output is released instead of stored. Each detection slot holds one XX and
//! one X photon, giving qubits `[slot₀ XX, slot₀ X, slot₁ XX, ...]`.
//!
//! Post-selection on one photon per slot and colour happens at the end;
//! loss only rescales the success probability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cascade::{pair_state, EmitterParams, PairState, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::fusion::{sample_emission_detunings, Detuning, Wandering};
use crate::linalg::{c, CMat};
use crate::polarization::{Pol, PolarizationState, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopConfig {
    pub n_photons: usize,
    /// Transmission of one loop round trip.
    pub loop_loss: f64,
    /// Transmission of one switch pass.
    pub switch_loss: f64,
    /// Emission period [ns].
    pub period: f64,
    /// Mode overlap lost per round trip of a stored photon.
    pub storage_overlap: f64,
    pub detuning_samples: usize,
    pub seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            n_photons: 4,
            loop_loss: 1.0,
            switch_loss: 1.0,
            period: 1.5,
            storage_overlap: 1.0,
            detuning_samples: 200,
            seed: 0,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_photons < 2 {
            return Err(invalid("n_photons", "must be at least 2"));
        }
        for (name, v) in [
            ("loop_loss", self.loop_loss),
            ("switch_loss", self.switch_loss),
            ("storage_overlap", self.storage_overlap),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(name, format!("{v} outside (0, 1]")));
            }
        }
        if !(self.period > 0.0) {
            return Err(invalid("period", "must be positive"));
        }
        if self.detuning_samples == 0 {
            return Err(invalid("detuning_samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn n_pairs(&self) -> usize {
        self.n_photons / 2
    }

    /// Transmission of everything stored over the whole protocol.
    pub fn loss_factor(&self) -> f64 {
        let trips = 2 * (self.n_pairs().saturating_sub(1)) as i32;
        (self.loop_loss * self.switch_loss).powi(trips)
    }
}

/// Switch route: 1 stores the fresh pair, 2 sends it to the loop PBS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchWindow {
    /// Window start [ns].
    pub start: f64,
    /// Window end [ns].
    pub end: f64,
    pub route: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSchedule {
    pub windows: Vec<SwitchWindow>,
}

impl SwitchSchedule {
    /// Windows are ordered, non-empty and do not overlap.
    pub fn is_consistent(&self) -> bool {
        self.windows.iter().all(|w| w.start < w.end && (w.route == 1 || w.route == 2))
            && self.windows.windows(2).all(|p| p[0].end <= p[1].start)
    }
}

/// One window per emission period.
pub fn schedule(config: &LoopConfig) -> Result<SwitchSchedule> {
    config.validate()?;
    let windows = (0..config.n_pairs())
        .map(|k| SwitchWindow {
            start: k as f64 * config.period,
            end: (k + 1) as f64 * config.period,
            route: if k == 0 { 1 } else { 2 },
        })
        .collect();
    Ok(SwitchSchedule { windows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome {
    pub state: PolarizationState,
    /// Includes loss.
    pub success_probability: f64,
    pub population: f64,
    pub coherence: f64,
    pub phase: f64,
}

/// Pair occupying a detection slot and the round trips its photons made.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Occupant {
    pair: usize,
    round_trips: usize,
}

/// Surviving term combination.
struct Path {
    label: usize,
    amp: Complex64,
    /// Chosen term index per pair.
    terms: Vec<usize>,
    slots: Vec<Occupant>,
}

/// Routes one polarization choice per pair; `None` when post-selection
/// rejects it. Returns the output label and the slot occupants.
fn route(pols: &[Pol]) -> Option<(usize, Vec<Occupant>)> {
    let bits = |p: Pol| if p == Pol::V { 0b11 } else { 0 };
    // (pair, period it entered the loop)
    let mut stored = (0usize, 0usize);
    let mut slots = Vec::with_capacity(pols.len());
    let mut label = 0usize;
    for (j, &fresh) in pols.iter().enumerate().skip(1) {
        if pols[stored.0] != fresh {
            return None;
        }
        let old = Occupant { pair: stored.0, round_trips: j - stored.1 };
        let new = Occupant { pair: j, round_trips: 0 };
        // H: stored → c, fresh → d. V: fresh → c, stored → d.
        let out = if fresh == Pol::H {
            stored = (j, j);
            old
        } else {
            new
        };
        slots.push(out);
        label = (label << 2) | bits(fresh);
    }
    let last = pols.len() - 1;
    slots.push(Occupant { pair: stored.0, round_trips: last - stored.1 });
    label = (label << 2) | bits(pols[stored.0]);
    Some((label, slots))
}

/// Runs the loop protocol for pairs of `emitter`.
pub fn simulate_loop(config: &LoopConfig, emitter: &EmitterParams, wandering: &Wandering) -> Result<LoopOutcome> {
    let pair = pair_state(emitter, &TimeGrid::with_bins(emitter, 16))?;
    simulate_loop_pairs(config, &pair, wandering)
}

/// Runs the loop protocol for an arbitrary polarization-correlated pair.
pub fn simulate_loop_pairs(config: &LoopConfig, pair: &PairState, wandering: &Wandering) -> Result<LoopOutcome> {
    config.validate()?;
    if config.n_photons % 2 == 1 || config.n_photons > MAX_QUBITS {
        return Err(invalid("n_photons", format!("{} is not an even number ≤ {MAX_QUBITS}", config.n_photons)));
    }
    let m = config.n_pairs();
    for br in pair.branches() {
        for t in &br.terms {
            if t.pol_xx != t.pol_x || !matches!(t.pol_x, Pol::H | Pol::V) {
                return Err(Error::Unsupported(
                    "loop simulation needs H/V terms with equal XX and X polarization".into(),
                ));
            }
        }
    }
    let n_branches = pair.branches().len();
    let detunings = sample_emission_detunings(wandering, m, config.detuning_samples, config.seed, pair.params().hbar)?;
    let dim = 1usize << config.n_photons;
    let mut rho = CMat::zeros(dim, dim);

    // Branch choice per pair, then all term combinations inside.
    for branch_combo in 0..n_branches.pow(m as u32) {
        let branches: Vec<usize> = (0..m).map(|k| (branch_combo / n_branches.pow(k as u32)) % n_branches).collect();
        let weight: f64 = branches.iter().map(|&b| pair.branches()[b].weight).product();
        if weight == 0.0 {
            continue;
        }
        let sizes: Vec<usize> = branches.iter().map(|&b| pair.branches()[b].terms.len()).collect();
        let total: usize = sizes.iter().product();
        let mut paths = Vec::new();
        for combo in 0..total {
            let mut rest = combo;
            let mut chosen = Vec::with_capacity(m);
            for &s in &sizes {
                chosen.push(rest % s);
                rest /= s;
            }
            let pols: Vec<Pol> = (0..m).map(|k| pair.branches()[branches[k]].terms[chosen[k]].pol_x).collect();
            if let Some((label, slots)) = route(&pols) {
                let amp = (0..m).map(|k| pair.branches()[branches[k]].terms[chosen[k]].amplitude).product();
                paths.push(Path { label, amp, terms: chosen, slots });
            }
        }
        let env = |k: usize, term: usize, d: &Detuning| {
            let t = &pair.branches()[branches[k]].terms[term];
            pair.envelopes()[t.envelope].detuned(d.xx, d.x)
        };
        for r in &paths {
            for s in &paths {
                let mut acc = c(0.0, 0.0);
                for sample in &detunings {
                    let mut prod = c(1.0, 0.0);
                    for (or, os) in r.slots.iter().zip(&s.slots) {
                        let ket = env(or.pair, r.terms[or.pair], &sample[or.pair]);
                        let bra = env(os.pair, s.terms[os.pair], &sample[os.pair]);
                        let penalty = config.storage_overlap.powi(2 * or.round_trips.abs_diff(os.round_trips) as i32);
                        prod *= bra.overlap(&ket) * penalty;
                    }
                    acc += prod;
                }
                rho[(r.label, s.label)] += r.amp * s.amp.conj() * acc * (weight / detunings.len() as f64);
            }
        }
    }

    let lossless = rho.trace().re;
    if lossless <= 0.0 {
        return Err(invalid("pair", "no term survives post-selection"));
    }
    let rho = (&rho + rho.adjoint()) * c(0.5 / lossless, 0.0);
    let state = PolarizationState::new(rho)?;
    let last = dim - 1;
    let m_ = state.matrix();
    Ok(LoopOutcome {
        population: m_[(0, 0)].re + m_[(last, last)].re,
        coherence: 2.0 * m_[(0, last)].norm(),
        phase: m_[(last, 0)].arg().rem_euclid(2.0 * std::f64::consts::PI),
        success_probability: lossless * config.loss_factor(),
        state,
    })
}

#[cfg(test)]
mod tests;
