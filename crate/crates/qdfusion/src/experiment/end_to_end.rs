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

//! Simulated GHZ measurement run.

use serde::{Deserialize, Serialize};

use super::{bootstrap_counts, sample_outcomes, std_dev, Basis, Estimate, SourceModel, BOOTSTRAP_RESAMPLES};
use crate::cascade::{TimeGrid, DEFAULT_BINS};
use crate::error::{invalid, Result};
use crate::fusion::{fuse, fuse_pairs_analytic, FusionConfig, FusionOutcome, Scheme};
use crate::metrics::{
    coherence_fit, default_thetas, ghz_fidelity, parity_from_counts, population_from_counts, CoherenceScan,
};
use crate::rng::derive_seed;

const N_QUBITS: usize = 4;

/// Overlap backend used to build the fused state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Grid,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EndToEndOptions {
    pub scheme: Scheme,
    /// Shots per measurement setting.
    pub shots: u64,
    pub seed: u64,
    pub resamples: usize,
    pub thetas: Vec<f64>,
    pub bins: usize,
    pub engine: Engine,
    pub detuning_samples: usize,
}

impl Default for EndToEndOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::DoublePbs,
            shots: 1_000_000,
            seed: 0,
            resamples: BOOTSTRAP_RESAMPLES,
            thetas: default_thetas(),
            bins: DEFAULT_BINS,
            engine: Engine::Grid,
            detuning_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEnd {
    pub scheme: Scheme,
    pub success_probability: f64,
    pub exact_population: f64,
    pub exact_coherence: f64,
    pub exact_fidelity: f64,
    pub population: Estimate,
    pub coherence: Estimate,
    pub fidelity: Estimate,
    /// Fitted phase of the coherence scan [rad].
    pub phase: f64,
    pub scan: CoherenceScan,
}

struct Estimates {
    population: f64,
    coherence: f64,
    phase: f64,
    fidelity: f64,
    scan: Vec<f64>,
}

fn estimate(hv: &[u64], scans: &[Vec<u64>], thetas: &[f64]) -> Result<Estimates> {
    let population = population_from_counts(hv)?;
    let values = scans.iter().map(|c| parity_from_counts(c)).collect::<Result<Vec<_>>>()?;
    let fit = coherence_fit(&CoherenceScan::new(thetas.to_vec(), values.clone(), None)?, N_QUBITS)?;
    let fidelity = ghz_fidelity(population.clamp(0.0, 1.0), fit.coherence.clamp(0.0, 1.0))?;
    Ok(Estimates { population, coherence: fit.coherence, phase: fit.phase, fidelity, scan: values })
}

/// Fuses the pairs of `model`, samples the H/V and θ-scan settings and
/// bootstraps the estimators.
pub fn end_to_end(model: &SourceModel, options: &EndToEndOptions) -> Result<EndToEnd> {
    model.validate()?;
    if options.resamples < 2 {
        return Err(invalid("resamples", "need at least 2"));
    }
    let outcome = fused_state(model, options)?;
    let state = &outcome.state;
    let seed = options.seed;

    let hv = sample_outcomes(state, &[Basis::Hv; N_QUBITS], options.shots, derive_seed(seed, &[0]))?.counts;
    let scans = options
        .thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            sample_outcomes(state, &[Basis::Theta(t); N_QUBITS], options.shots, derive_seed(seed, &[1, i as u64]))
                .map(|r| r.counts)
        })
        .collect::<Result<Vec<_>>>()?;
    let point = estimate(&hv, &scans, &options.thetas)?;

    let hv_boot = bootstrap_counts(&hv, options.resamples, derive_seed(seed, &[2]));
    let scan_boot: Vec<Vec<Vec<u64>>> = scans
        .iter()
        .enumerate()
        .map(|(i, c)| bootstrap_counts(c, options.resamples, derive_seed(seed, &[3, i as u64])))
        .collect();
    let mut pops = Vec::with_capacity(options.resamples);
    let mut cohs = Vec::with_capacity(options.resamples);
    let mut fids = Vec::with_capacity(options.resamples);
    for b in 0..options.resamples {
        let scans_b: Vec<Vec<u64>> = scan_boot.iter().map(|s| s[b].clone()).collect();
        let e = estimate(&hv_boot[b], &scans_b, &options.thetas)?;
        pops.push(e.population);
        cohs.push(e.coherence);
        fids.push(e.fidelity);
    }

    let exact_fidelity = 0.5 * (outcome.population + outcome.coherence);
    let errors: Vec<f64> = {
        let per_point: Vec<Vec<f64>> = (0..options.thetas.len())
            .map(|i| {
                scan_boot[i]
                    .iter()
                    .map(|c| parity_from_counts(c).unwrap_or(0.0))
                    .collect()
            })
            .collect();
        per_point.iter().map(|xs| std_dev(xs).max(f64::MIN_POSITIVE)).collect()
    };
    Ok(EndToEnd {
        scheme: options.scheme,
        success_probability: outcome.success_probability,
        exact_population: outcome.population,
        exact_coherence: outcome.coherence,
        exact_fidelity,
        population: Estimate { value: point.population, error: std_dev(&pops) },
        coherence: Estimate { value: point.coherence, error: std_dev(&cohs) },
        fidelity: Estimate { value: point.fidelity, error: std_dev(&fids) },
        phase: point.phase,
        scan: CoherenceScan { thetas: options.thetas.clone(), values: point.scan, errors: Some(errors) },
    })
}

/// Exact post-selected state for `model` under `options.scheme`.
pub fn fused_state(model: &SourceModel, options: &EndToEndOptions) -> Result<FusionOutcome> {
    let config = FusionConfig {
        scheme: options.scheme,
        wandering: model.wandering(),
        detuning_samples: options.detuning_samples,
        seed: options.seed,
        ..FusionConfig::default()
    };
    let grid = TimeGrid::with_bins(&model.emitter, options.bins);
    let (early, late) = config.pairs(&model.emitter, &grid)?;
    let early = early.with_depolarization(model.depolarization)?;
    let late = late.with_depolarization(model.depolarization)?;
    match options.engine {
        Engine::Grid => fuse(&early, &late, &config),
        Engine::Analytic => fuse_pairs_analytic(&early, &late, &config),
    }
}
