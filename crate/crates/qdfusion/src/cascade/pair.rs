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

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{EmitterParams, Envelope, TemporalAmplitude, TimeGrid};
use crate::error::{invalid, Result};
use crate::linalg::{c, CMat};
use crate::polarization::{Pol, PolarizationState};

/// One polarization component of a pure pair branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub pol_xx: Pol,
    pub pol_x: Pol,
    pub amplitude: Complex64,
    /// Index into [`PairState::envelopes`].
    pub envelope: usize,
}

/// Pure component of a pair mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub terms: Vec<Term>,
}

/// Polarization ⊗ temporal state of one cascade pair, as a mixture of pure
/// branches whose temporal parts are analytic envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    params: EmitterParams,
    grid: TimeGrid,
    envelopes: Vec<Envelope>,
    branches: Vec<Branch>,
}

fn hv_index(p: Pol) -> Result<usize> {
    match p {
        Pol::H => Ok(0),
        Pol::V => Ok(1),
        other => Err(invalid("pol", format!("pair terms must be H or V, got {other:?}"))),
    }
}

/// `(|HH⟩ψ_H + |VV⟩ψ_V)/√2` with `ψ_V = ψ_H·e^{−i(S/ħ)(t₂−t₁)}`.
pub fn pair_state(params: &EmitterParams, grid: &TimeGrid) -> Result<PairState> {
    params.validate()?;
    grid.validate()?;
    let s = c(FRAC_1_SQRT_2, 0.0);
    PairState::new(
        *params,
        *grid,
        vec![Envelope::cascade(params), Envelope::cascade_v(params)],
        vec![Branch {
            weight: 1.0,
            terms: vec![
                Term { pol_xx: Pol::H, pol_x: Pol::H, amplitude: s, envelope: 0 },
                Term { pol_xx: Pol::V, pol_x: Pol::V, amplitude: s, envelope: 1 },
            ],
        }],
    )
}

impl PairState {
    pub fn new(params: EmitterParams, grid: TimeGrid, envelopes: Vec<Envelope>, branches: Vec<Branch>) -> Result<Self> {
        let total: f64 = branches.iter().map(|b| b.weight).sum();
        if branches.iter().any(|b| b.weight < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid("branches", format!("weights must be non-negative and sum to 1, got {total}")));
        }
        for b in &branches {
            if b.terms.is_empty() {
                return Err(invalid("branches", "empty branch"));
            }
            let norm: f64 = b.terms.iter().map(|t| t.amplitude.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(invalid("branches", format!("branch amplitudes have norm {norm}")));
            }
            for t in &b.terms {
                hv_index(t.pol_xx)?;
                hv_index(t.pol_x)?;
                if t.envelope >= envelopes.len() {
                    return Err(invalid("envelope", format!("index {} out of range", t.envelope)));
                }
            }
        }
        Ok(Self { params, grid, envelopes, branches })
    }

    pub fn params(&self) -> &EmitterParams {
        &self.params
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn envelopes(&self) -> &[Envelope] {
        &self.envelopes
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Index of the envelope emitted through an X photon of polarization `pol_x`.
    fn envelope_for(&self, pol_x: Pol) -> usize {
        if pol_x == Pol::V && self.envelopes.len() > 1 {
            1
        } else {
            0
        }
    }

    /// Mixes in `weight` of the product component `|pol_xx pol_x⟩`.
    pub fn with_admixture(&self, pol_xx: Pol, pol_x: Pol, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(invalid("weight", format!("{weight} outside [0, 1]")));
        }
        let mut branches: Vec<Branch> = self
            .branches
            .iter()
            .map(|b| Branch { weight: b.weight * (1.0 - weight), terms: b.terms.clone() })
            .collect();
        branches.push(Branch {
            weight,
            terms: vec![Term { pol_xx, pol_x, amplitude: c(1.0, 0.0), envelope: self.envelope_for(pol_x) }],
        });
        Self::new(self.params, self.grid, self.envelopes.clone(), branches)
    }

    /// White polarization noise: `(1−p)·ρ + p·I/4`.
    pub fn with_depolarization(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("depolarization", format!("{p} outside [0, 1]")));
        }
        let mut branches: Vec<Branch> = self
            .branches
            .iter()
            .map(|b| Branch { weight: b.weight * (1.0 - p), terms: b.terms.clone() })
            .collect();
        if p > 0.0 {
            for pol_xx in [Pol::H, Pol::V] {
                for pol_x in [Pol::H, Pol::V] {
                    branches.push(Branch {
                        weight: p / 4.0,
                        terms: vec![Term { pol_xx, pol_x, amplitude: c(1.0, 0.0), envelope: self.envelope_for(pol_x) }],
                    });
                }
            }
        }
        Self::new(self.params, self.grid, self.envelopes.clone(), branches)
    }

    /// Envelope `k` sampled on the pair grid.
    pub fn sampled(&self, k: usize) -> Result<TemporalAmplitude> {
        TemporalAmplitude::sample(&self.envelopes[k], &self.grid)
    }

    fn polarization_with(&self, overlap: impl Fn(usize, usize) -> Complex64) -> Result<PolarizationState> {
        let mut m = CMat::zeros(4, 4);
        for b in &self.branches {
            for t in &b.terms {
                let row = 2 * hv_index(t.pol_xx)? + hv_index(t.pol_x)?;
                for u in &b.terms {
                    let col = 2 * hv_index(u.pol_xx)? + hv_index(u.pol_x)?;
                    m[(row, col)] += t.amplitude * u.amplitude.conj() * overlap(u.envelope, t.envelope) * b.weight;
                }
            }
        }
        PolarizationState::new(m)
    }

    /// Two-qubit polarization state (XX, X) after tracing time on the grid.
    pub fn polarization_state(&self) -> Result<PolarizationState> {
        let sampled: Vec<TemporalAmplitude> = (0..self.envelopes.len()).map(|k| self.sampled(k)).collect::<Result<_>>()?;
        let gram: Vec<Vec<Complex64>> = sampled
            .iter()
            .map(|a| sampled.iter().map(|b| a.inner(b)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        self.polarization_with(|a, b| gram[a][b])
    }

    /// Two-qubit polarization state using closed-form envelope overlaps.
    pub fn polarization_state_analytic(&self) -> Result<PolarizationState> {
        self.polarization_with(|a, b| self.envelopes[a].overlap(&self.envelopes[b]))
    }

    /// `|ψ(t₁,t₂)|²` summed over polarization.
    pub fn intensity(&self) -> Result<DMatrix<f64>> {
        let n = self.grid.n_bins;
        let sampled: Vec<TemporalAmplitude> = (0..self.envelopes.len()).map(|k| self.sampled(k)).collect::<Result<_>>()?;
        let mut out = DMatrix::zeros(n, n);
        for b in &self.branches {
            for t in &b.terms {
                let w = b.weight * t.amplitude.norm_sqr();
                out += sampled[t.envelope].values().map(|z| z.norm_sqr() * w);
            }
        }
        Ok(out)
    }
}
