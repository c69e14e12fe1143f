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

use approx::assert_abs_diff_eq;

use super::*;
use crate::fusion::{fuse_analytic, FusionConfig, Scheme};

fn lossless(n: usize) -> LoopConfig {
    LoopConfig { n_photons: n, ..LoopConfig::default() }
}

/// Closed-form `|⟨ψ_H|ψ_V⟩|` for one pair with FSS.
fn fss_overlap(p: &EmitterParams) -> f64 {
    let g = 2.0 * p.gamma_x;
    g / (g * g + p.fss_rate().powi(2)).sqrt()
}

#[test]
fn schedule_examples() {
    let s = schedule(&lossless(4)).unwrap();
    assert_eq!(s.windows.len(), 2);
    assert_eq!((s.windows[0].route, s.windows[1].route), (1, 2));
    assert!(s.is_consistent());
    let s = schedule(&lossless(2)).unwrap();
    assert_eq!(s.windows.len(), 1);
    assert_eq!(s.windows[0].route, 1);
    let s = schedule(&lossless(6)).unwrap();
    assert_eq!(s.windows.iter().map(|w| w.route).collect::<Vec<_>>(), vec![1, 2, 2]);
    assert!(s.is_consistent());
    let broken = SwitchSchedule {
        windows: vec![
            SwitchWindow { start: 0.0, end: 2.0, route: 1 },
            SwitchWindow { start: 1.0, end: 3.0, route: 2 },
        ],
    };
    assert!(!broken.is_consistent());
}

#[test]
fn ideal_lossless_success_and_coherence() {
    let p = EmitterParams::reference();
    for (n, success) in [(2, 1.0), (4, 0.5), (6, 0.25)] {
        let out = simulate_loop(&lossless(n), &p, &Wandering::Off).unwrap();
        assert_abs_diff_eq!(out.success_probability, success, epsilon = 1e-12);
        assert_abs_diff_eq!(out.coherence, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.population, 1.0, epsilon = 1e-12);
        let ghz = PolarizationState::ghz_pure(n, 0.0).unwrap();
        assert!((out.state.matrix() - ghz.matrix()).iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn fss_coherence_matches_closed_form() {
    let p = EmitterParams::reference().with_fss(2.5);
    let o = fss_overlap(&p);
    for n in [2, 4, 6] {
        let out = simulate_loop(&lossless(n), &p, &Wandering::Off).unwrap();
        assert_abs_diff_eq!(out.coherence, o.powi(n as i32 / 2), epsilon = 1e-12);
    }
}

#[test]
fn four_photon_loop_matches_fusion() {
    for fss in [0.0, 2.5] {
        let p = EmitterParams::reference().with_fss(fss);
        let out = simulate_loop(&lossless(4), &p, &Wandering::Off).unwrap();
        let fused = fuse_analytic(&p, &FusionConfig::with_scheme(Scheme::DoublePbs)).unwrap();
        assert_abs_diff_eq!(out.coherence, fused.coherence, epsilon = 1e-10);
        assert_abs_diff_eq!(out.success_probability, fused.success_probability, epsilon = 1e-12);
    }
    let p = EmitterParams::reference();
    let w = Wandering::Independent { sigma_x: 2.0, sigma_xx: 5.0 };
    let config = LoopConfig { detuning_samples: 2000, ..lossless(4) };
    let out = simulate_loop(&config, &p, &w).unwrap();
    let fused = fuse_analytic(&p, &FusionConfig { wandering: w, detuning_samples: 2000, ..FusionConfig::default() }).unwrap();
    assert!((out.coherence - fused.coherence).abs() < 5e-3, "{} vs {}", out.coherence, fused.coherence);
}

#[test]
fn loss_factorizes() {
    let p = EmitterParams::reference();
    for n in [4, 6] {
        let base = simulate_loop(&lossless(n), &p, &Wandering::Off).unwrap();
        for (ll, sl) in [(0.9, 1.0), (0.8, 0.95), (0.5, 0.7)] {
            let config = LoopConfig { loop_loss: ll, switch_loss: sl, ..lossless(n) };
            let out = simulate_loop(&config, &p, &Wandering::Off).unwrap();
            let trips = 2 * (n / 2 - 1) as i32;
            assert_abs_diff_eq!(out.success_probability, base.success_probability * (ll * sl).powi(trips), epsilon = 1e-12);
            assert_abs_diff_eq!(out.coherence, base.coherence, epsilon = 1e-12);
        }
    }
}

#[test]
fn coherence_monotone_in_wandering_and_size() {
    let p = EmitterParams::reference().with_fss(1.0);
    let mut by_n = Vec::new();
    for n in [2, 4, 6] {
        let mut last = f64::INFINITY;
        for sigma in [0.0, 1.0, 2.0, 4.0] {
            let w = Wandering::Independent { sigma_x: sigma, sigma_xx: sigma };
            let c = simulate_loop(&lossless(n), &p, &w).unwrap().coherence;
            assert!(c <= last + 1e-12, "n={n} σ={sigma}");
            last = c;
        }
        by_n.push(simulate_loop(&lossless(n), &p, &Wandering::Independent { sigma_x: 2.0, sigma_xx: 2.0 }).unwrap().coherence);
    }
    assert!(by_n[0] >= by_n[1] && by_n[1] >= by_n[2], "{by_n:?}");
}

#[test]
fn storage_penalty_scales_coherence() {
    let p = EmitterParams::reference();
    let config = LoopConfig { storage_overlap: 0.9, ..lossless(4) };
    let out = simulate_loop(&config, &p, &Wandering::Off).unwrap();
    assert_abs_diff_eq!(out.coherence, 0.9f64.powi(4), epsilon = 1e-12);
    assert_abs_diff_eq!(out.population, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(out.success_probability, 0.5, epsilon = 1e-12);
}

#[test]
fn invalid_configurations() {
    let p = EmitterParams::reference();
    for n in [3, 5, 8] {
        assert!(matches!(simulate_loop(&lossless(n), &p, &Wandering::Off), Err(Error::InvalidParameter { .. })));
    }
    assert!(simulate_loop(&LoopConfig { loop_loss: 0.0, ..lossless(4) }, &p, &Wandering::Off).is_err());
    assert!(schedule(&lossless(1)).is_err());
    let noisy = pair_state(&p, &TimeGrid::with_bins(&p, 16)).unwrap().with_depolarization(0.1).unwrap();
    assert!(matches!(simulate_loop_pairs(&lossless(4), &noisy, &Wandering::Off), Err(Error::Unsupported(_))));
}
