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

//! Post-selected four-photon state of two fused pairs.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use super::overlap::{Color, OverlapModel, SwapKey};
use super::wandering::Detuning;
use super::{FusionConfig, FusionOutcome, Scheme};
use crate::cascade::{Branch, Envelope, PairState};
use crate::error::{invalid, Result};
use crate::linalg::{c, CMat};
use crate::polarization::{birefringence_unitary, Pol, PolarizationState};

/// One way the four photons of a term pair reach the detectors.
#[derive(Debug, Clone, Copy)]
struct Route {
    /// Output qubits `[XX c, XX d, X c, X d]`, qubit 0 most significant.
    label: usize,
    amp: Complex64,
    /// Whether the early photon of each colour `[XX, X]` left through port d.
    swapped: [bool; 2],
    e: usize,
    l: usize,
}

struct BranchPair {
    weight: f64,
    routes: Vec<Route>,
}

fn bit(p: Pol) -> usize {
    usize::from(p == Pol::V)
}

/// Routes one colour through its PBS (early photon in port a, late in port b)
/// or straight through. Returns `(bit c, bit d, swapped)`.
fn route_color(interferes: bool, early: Pol, late: Pol) -> Option<(usize, usize, bool)> {
    if !interferes {
        return Some((bit(early), bit(late), false));
    }
    // One photon per output requires equal polarizations: HH → (c: early, d: late),
    // VV → (c: late, d: early).
    (early == late).then(|| (bit(early), bit(late), early == Pol::V))
}

fn branch_routes(scheme: Scheme, early: &Branch, late: &Branch, e_map: &[usize], l_map: &[usize]) -> Vec<Route> {
    let mut routes = Vec::new();
    for te in &early.terms {
        for tl in &late.terms {
            let xx = route_color(scheme.interferes(Color::Xx), te.pol_xx, tl.pol_xx);
            let x = route_color(scheme.interferes(Color::X), te.pol_x, tl.pol_x);
            if let (Some((xc, xd, sxx)), Some((yc, yd, sx))) = (xx, x) {
                routes.push(Route {
                    label: (xc << 3) | (xd << 2) | (yc << 1) | yd,
                    amp: te.amplitude * tl.amplitude,
                    swapped: [sxx, sx],
                    e: e_map[te.envelope],
                    l: l_map[tl.envelope],
                });
            }
        }
    }
    routes
}

/// Deduplicated envelope list and index maps for both pairs.
pub(super) fn merge_envelopes(early: &PairState, late: &PairState) -> (Vec<Envelope>, Vec<usize>, Vec<usize>) {
    let mut list: Vec<Envelope> = Vec::new();
    let mut index_of = |e: &Envelope| match list.iter().position(|x| x == e) {
        Some(k) => k,
        None => {
            list.push(*e);
            list.len() - 1
        }
    };
    let e_map: Vec<usize> = early.envelopes().iter().map(&mut index_of).collect();
    let l_map: Vec<usize> = late.envelopes().iter().map(&mut index_of).collect();
    (list, e_map, l_map)
}

enum Relation {
    Same,
    Both,
    One(Color),
}

fn relation(ket: &Route, bra: &Route) -> Relation {
    match (ket.swapped[0] != bra.swapped[0], ket.swapped[1] != bra.swapped[1]) {
        (false, false) => Relation::Same,
        (true, true) => Relation::Both,
        (true, false) => Relation::One(Color::Xx),
        (false, true) => Relation::One(Color::X),
    }
}

fn swap_key(ket: &Route, bra: &Route) -> SwapKey {
    SwapKey { e_bra: bra.e, e_ket: ket.e, l_bra: bra.l, l_ket: ket.l }
}

/// Unnormalized post-selected density matrix averaged over `detunings`.
pub(super) fn run<M: OverlapModel>(
    model: &M,
    early: &PairState,
    late: &PairState,
    e_map: &[usize],
    l_map: &[usize],
    config: &FusionConfig,
    detunings: &[Detuning],
) -> Result<FusionOutcome> {
    if detunings.is_empty() {
        return Err(invalid("detunings", "at least one sample required"));
    }
    let pairs: Vec<BranchPair> = early
        .branches()
        .iter()
        .flat_map(|be| {
            late.branches().iter().map(move |bl| BranchPair {
                weight: be.weight * bl.weight,
                routes: branch_routes(config.scheme, be, bl, e_map, l_map),
            })
        })
        .filter(|bp| bp.weight > 0.0 && !bp.routes.is_empty())
        .collect();

    let mut needed = BTreeMap::new();
    for bp in &pairs {
        for ket in &bp.routes {
            for bra in &bp.routes {
                if let Relation::One(color) = relation(ket, bra) {
                    needed.insert((color, swap_key(ket, bra)), ());
                }
            }
        }
    }
    let keys: Vec<(Color, SwapKey)> = needed.into_keys().collect();
    let kernels: Vec<M::Kernel> = keys
        .par_iter()
        .map(|&(color, key)| model.swap_kernel(color, key))
        .collect::<Result<_>>()?;
    let kernel_of: HashMap<(Color, SwapKey), usize> = keys.iter().enumerate().map(|(k, key)| (*key, k)).collect();

    let mismatch = config.mode_overlap;
    let per_sample: Vec<CMat> = detunings
        .par_iter()
        .map(|&d| {
            let mut cross_memo: HashMap<(usize, usize), Complex64> = HashMap::new();
            let mut cross = |bra: usize, ket: usize| *cross_memo.entry((bra, ket)).or_insert_with(|| model.cross(bra, ket, d));
            let mut rho = CMat::zeros(16, 16);
            for bp in &pairs {
                for ket in &bp.routes {
                    for bra in &bp.routes {
                        let overlap = match relation(ket, bra) {
                            Relation::Same => model.same(bra.e, ket.e) * model.same(bra.l, ket.l),
                            Relation::Both => cross(bra.e, ket.l) * cross(ket.e, bra.l).conj() * (mismatch * mismatch),
                            Relation::One(color) => {
                                let k = kernel_of[&(color, swap_key(ket, bra))];
                                model.swap(&kernels[k], d) * mismatch
                            }
                        };
                        rho[(ket.label, bra.label)] += ket.amp * bra.amp.conj() * overlap * bp.weight;
                    }
                }
            }
            rho
        })
        .collect();

    let mut rho = CMat::zeros(16, 16);
    for m in &per_sample {
        rho += m;
    }
    rho /= c(detunings.len() as f64, 0.0);
    finish(rho, config)
}

fn finish(rho: CMat, config: &FusionConfig) -> Result<FusionOutcome> {
    let success = rho.trace().re;
    if !(success > 0.0) {
        return Err(invalid("pairs", "post-selection probability is zero"));
    }
    let mut rho = rho / c(success, 0.0);
    rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
    if config.phase_offset != 0.0 {
        let u = birefringence_unitary(4, config.phase_offset);
        rho = &u * rho * u.adjoint();
    }
    let state = PolarizationState::new(rho)?;
    let m = state.matrix();
    let population = m[(0, 0)].re + m[(15, 15)].re;
    let coherence = 2.0 * m[(0, 15)].norm();
    let phase = m[(15, 0)].arg().rem_euclid(std::f64::consts::TAU);
    Ok(FusionOutcome {
        state,
        success_probability: success,
        population,
        coherence,
        phase,
    })
}
