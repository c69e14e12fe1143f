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

use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;

use super::*;
use crate::cascade::{discretize, indistinguishability_bound, purity, reduced_density, Subsystem, TemporalAmplitude};
use crate::linalg::{c, CMat};
use crate::polarization::Pol;

/// Explicit four-photon amplitude over `(label, t_XXc, t_XXd, t_Xc, t_Xd)`,
/// traced over time. Independent of the overlap bookkeeping in the engine.
fn brute_force(early: &PairState, late: &PairState, scheme: Scheme, detunings: &[Detuning]) -> (CMat, f64) {
    let grid = *early.grid();
    let n = grid.n_bins;
    let t = grid.times();
    let sample = |p: &PairState, k: usize| p.sampled(k).unwrap().scaled();
    let e_env: Vec<CMat> = (0..early.envelopes().len()).map(|k| sample(early, k)).collect();
    let l_env: Vec<CMat> = (0..late.envelopes().len()).map(|k| sample(late, k)).collect();
    let idx = |a: usize, b: usize, x: usize, y: usize| ((a * n + b) * n + x) * n + y;
    let mut rho = CMat::zeros(16, 16);
    for d in detunings {
        let l_det: Vec<CMat> = l_env
            .iter()
            .map(|m| CMat::from_fn(n, n, |i, j| m[(i, j)] * Complex64::from_polar(1.0, -d.xx * t[i] - d.x * t[j])))
            .collect();
        for be in early.branches() {
            for bl in late.branches() {
                let mut out: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
                for te in &be.terms {
                    for tl in &bl.terms {
                        // slot[color] = (early goes to d?, bit c, bit d)
                        let mut ok = true;
                        let mut e_to_d = [false; 2];
                        let mut bits = [0usize; 4];
                        for (k, (pe, pl), interferes) in [
                            (0, (te.pol_xx, tl.pol_xx), scheme != Scheme::SinglePbsX),
                            (1, (te.pol_x, tl.pol_x), scheme != Scheme::SinglePbsXx),
                        ] {
                            let (to_c_e, to_c_l) = if interferes {
                                let pe_port = pbs_route(InputPort::A, pe).unwrap();
                                let pl_port = pbs_route(InputPort::B, pl).unwrap();
                                if pe_port == pl_port {
                                    ok = false;
                                }
                                (pe_port == OutputPort::C, pl_port == OutputPort::C)
                            } else {
                                (true, false)
                            };
                            let _ = to_c_l;
                            e_to_d[k] = !to_c_e;
                            let (bc, bd) = if to_c_e { (pe, pl) } else { (pl, pe) };
                            bits[2 * k] = usize::from(bc == Pol::V);
                            bits[2 * k + 1] = usize::from(bd == Pol::V);
                        }
                        if !ok {
                            continue;
                        }
                        let label = (bits[0] << 3) | (bits[1] << 2) | (bits[2] << 1) | bits[3];
                        let amp = te.amplitude * tl.amplitude;
                        let em = &e_env[te.envelope];
                        let lm = &l_det[tl.envelope];
                        let buf = out.entry(label).or_insert_with(|| vec![c(0.0, 0.0); n * n * n * n]);
                        for a in 0..n {
                            for b in 0..n {
                                let (e_xx, l_xx) = if e_to_d[0] { (b, a) } else { (a, b) };
                                for x in 0..n {
                                    for y in 0..n {
                                        let (e_x, l_x) = if e_to_d[1] { (y, x) } else { (x, y) };
                                        buf[idx(a, b, x, y)] += amp * em[(e_xx, e_x)] * lm[(l_xx, l_x)];
                                    }
                                }
                            }
                        }
                    }
                }
                let w = be.weight * bl.weight / detunings.len() as f64;
                for (&r, vr) in &out {
                    for (&s, vs) in &out {
                        let z: Complex64 = vr.iter().zip(vs).map(|(a, b)| a * b.conj()).sum();
                        rho[(r, s)] += z * w;
                    }
                }
            }
        }
    }
    let success = rho.trace().re;
    (rho / c(success, 0.0), success)
}

fn coarse_pairs(fss: f64, bins: usize) -> (PairState, PairState) {
    let p = EmitterParams::reference().with_fss(fss);
    FusionConfig::default().pairs(&p, &TimeGrid::with_bins(&p, bins)).unwrap()
}

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn engine_matches_brute_force_oracle() {
    let (early, _) = coarse_pairs(6.0, 32);
    let early = early.with_depolarization(0.15).unwrap();
    let late = early.with_admixture(Pol::H, Pol::V, 0.05).unwrap();
    let detunings = [
        Detuning { xx: 0.0, x: 0.0 },
        Detuning { xx: 0.01, x: -0.004 },
        Detuning { xx: -0.007, x: 0.009 },
    ];
    for scheme in Scheme::ALL {
        let config = FusionConfig::with_scheme(scheme);
        let out = fuse_with_detunings(&early, &late, &config, &detunings).unwrap();
        let (oracle, success) = brute_force(&early, &late, scheme, &detunings);
        assert!(max_diff(out.state.matrix(), &oracle) < 1e-10, "{scheme:?}");
        assert_abs_diff_eq!(out.success_probability, success, epsilon = 1e-12);
    }
}

#[test]
fn ideal_double_pbs_is_perfect_on_oracle_grid() {
    let (early, late) = coarse_pairs(0.0, 32);
    let (oracle, success) = brute_force(&early, &late, Scheme::DoublePbs, &[Detuning::default()]);
    assert_abs_diff_eq!(success, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(2.0 * oracle[(0, 15)].norm(), 1.0, epsilon = 1e-12);
    let (single, _) = brute_force(&early, &late, Scheme::SinglePbsX, &[Detuning::default()]);
    let grid_purity = purity(&reduced_density(&early.sampled(0).unwrap(), Subsystem::X));
    assert_abs_diff_eq!(2.0 * single[(0, 15)].norm(), grid_purity, epsilon = 1e-12);
}

#[test]
fn ideal_coherences_across_ratios() {
    for ratio in [1.0, 2.0, 3.22, 10.0] {
        let p = EmitterParams::reference().with_ratio(ratio).unwrap();
        let grid = TimeGrid::with_bins(&p, 256);
        let (early, late) = FusionConfig::default().pairs(&p, &grid).unwrap();
        let double = fuse(&early, &late, &FusionConfig::default()).unwrap();
        assert_abs_diff_eq!(double.coherence, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(double.population, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(double.success_probability, 0.5, epsilon = 1e-12);

        let grid_purity = purity(&reduced_density(&discretize(&p, &grid).unwrap(), Subsystem::X));
        for scheme in [Scheme::SinglePbsX, Scheme::SinglePbsXx] {
            let single = fuse(&early, &late, &FusionConfig::with_scheme(scheme)).unwrap();
            assert_abs_diff_eq!(single.coherence, grid_purity, epsilon = 1e-10);
            assert_abs_diff_eq!(single.population, 1.0, epsilon = 1e-12);
            let analytic = fuse_analytic(&p, &FusionConfig::with_scheme(scheme)).unwrap();
            assert_abs_diff_eq!(analytic.coherence, indistinguishability_bound(&p), epsilon = 1e-12);
        }
        let analytic = fuse_analytic(&p, &FusionConfig::default()).unwrap();
        assert_abs_diff_eq!(analytic.coherence, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn double_pbs_filters_cross_polarized_admixture() {
    let (early, _) = coarse_pairs(0.0, 64);
    let noisy = early.with_admixture(Pol::H, Pol::V, 0.05).unwrap();
    let double = fuse(&noisy, &noisy, &FusionConfig::default()).unwrap();
    for scheme in [Scheme::SinglePbsX, Scheme::SinglePbsXx] {
        let single = fuse(&noisy, &noisy, &FusionConfig::with_scheme(scheme)).unwrap();
        assert!(double.population > single.population, "{scheme:?}: {} vs {}", double.population, single.population);
    }
}

#[test]
fn strong_wandering_destroys_coherence() {
    let p = EmitterParams::reference();
    for scheme in Scheme::ALL {
        let mut last = f64::INFINITY;
        for sigma in [1.0, 10.0, 100.0, 1000.0] {
            let config = FusionConfig {
                scheme,
                wandering: Wandering::Independent { sigma_x: sigma, sigma_xx: sigma },
                ..FusionConfig::default()
            };
            let out = fuse_analytic(&p, &config).unwrap();
            assert!(out.coherence < last, "{scheme:?} at {sigma}");
            last = out.coherence;
        }
        assert!(last < 0.02, "{scheme:?}: {last}");
    }
}

#[test]
fn states_are_valid_over_sweep() {
    for ratio in [1.0, 2.0, 3.22, 10.0] {
        for sigma in [0.0, 0.5, 2.0] {
            let p = EmitterParams::reference().with_ratio(ratio).unwrap().with_fss(1.0);
            let (early, late) = FusionConfig::default().pairs(&p, &TimeGrid::with_bins(&p, 48)).unwrap();
            for scheme in Scheme::ALL {
                let config = FusionConfig {
                    scheme,
                    wandering: Wandering::Independent { sigma_x: sigma, sigma_xx: sigma },
                    detuning_samples: 16,
                    ..FusionConfig::default()
                };
                let out = fuse(&early, &late, &config).unwrap();
                assert!(out.state.validate().is_ok());
                assert!((0.0..=1.0 + 1e-12).contains(&out.coherence));
                assert!((0.0..=1.0 + 1e-12).contains(&out.success_probability));
            }
        }
    }
}

#[test]
fn phase_offset_is_reported() {
    let (early, late) = coarse_pairs(0.0, 32);
    let config = FusionConfig { phase_offset: 0.8, ..FusionConfig::default() };
    let out = fuse(&early, &late, &config).unwrap();
    assert_abs_diff_eq!(out.phase, 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(out.coherence, 1.0, epsilon = 1e-12);
}

#[test]
fn mismatched_grids_rejected() {
    let (early, _) = coarse_pairs(0.0, 32);
    let (late, _) = coarse_pairs(0.0, 48);
    assert!(matches!(fuse(&early, &late, &FusionConfig::default()), Err(Error::DimensionMismatch { .. })));
    let bad = FusionConfig { detuning_samples: 0, ..FusionConfig::default() };
    assert!(fuse(&early, &early, &bad).is_err());
}

#[test]
fn hom_pbs_limits() {
    let grid = TimeGrid::new(100.0, 32).unwrap();
    let t = grid.times();
    let f: Vec<Complex64> = t.iter().map(|&x| c((-x / 20.0).exp(), 0.0)).collect();
    let g: Vec<Complex64> = t.iter().map(|&x| c(if x < 50.0 { 0.0 } else { 1.0 }, 0.0)).collect();
    let h: Vec<Complex64> = t.iter().map(|&x| c(if x < 50.0 { 1.0 } else { 0.0 }, 0.0)).collect();
    let a = TemporalDensity::pure(grid, &f).unwrap();
    let same = hom_pbs(&a, &a).unwrap();
    assert_abs_diff_eq!(same.visibility, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(same.p_cross, 0.0, epsilon = 1e-12);
    let ortho = hom_pbs(&TemporalDensity::pure(grid, &g).unwrap(), &TemporalDensity::pure(grid, &h).unwrap()).unwrap();
    assert_abs_diff_eq!(ortho.visibility, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(ortho.contrast(), 0.0, epsilon = 1e-12);

    let p = EmitterParams::reference();
    let amp = discretize(&p, &TimeGrid::with_bins(&p, 256)).unwrap();
    let x = reduced_density(&amp, Subsystem::X);
    assert_abs_diff_eq!(hom_pbs(&x, &x).unwrap().visibility, purity(&x), epsilon = 1e-12);

    let bad = TemporalDensity::new(grid, CMat::identity(32, 32)).unwrap();
    assert!(matches!(hom_pbs(&bad, &a), Err(Error::Unnormalized { .. })));
}

#[test]
fn pbs_hom_matches_explicit_two_photon_calculation() {
    // Two D-polarized photons in pure modes f and g: enumerate all PBS paths
    // and D/A projections directly.
    let grid = TimeGrid::new(100.0, 40).unwrap();
    let t = grid.times();
    let f: Vec<Complex64> = t.iter().map(|&x| c((-x / 15.0).exp(), 0.0)).collect();
    let g: Vec<Complex64> = t.iter().map(|&x| Complex64::from_polar((-(x - 20.0).powi(2) / 300.0).exp(), 0.05 * x)).collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (nf, ng) = (norm(&f), norm(&g));
    let mut p_dd = 0.0;
    for (proj_c, proj_d) in [(Pol::D, Pol::D), (Pol::D, Pol::A)] {
        let (kc, kd) = (proj_c.ket(), proj_d.ket());
        let mut total = 0.0;
        for i in 0..40 {
            for j in 0..40 {
                // photon a (mode f) → c when H, photon b (mode g) → d when H.
                let mut amp = c(0.0, 0.0);
                let da = Pol::D.ket();
                // HH: a→c, b→d. VV: a→d, b→c.
                amp += da[0] * da[0] * kc[0].conj() * kd[0].conj() * f[i] * g[j] / (nf * ng);
                amp += da[1] * da[1] * kc[1].conj() * kd[1].conj() * g[i] * f[j] / (nf * ng);
                total += amp.norm_sqr();
            }
        }
        if proj_d == Pol::D {
            p_dd = total;
        } else {
            let a = TemporalDensity::pure(grid, &f).unwrap();
            let b = TemporalDensity::pure(grid, &g).unwrap();
            let res = hom_pbs(&a, &b).unwrap();
            assert_abs_diff_eq!(res.p_parallel, p_dd, epsilon = 1e-12);
            assert_abs_diff_eq!(res.p_cross, total, epsilon = 1e-12);
        }
    }
}

#[test]
fn schmidt_truncated_exchange_converges() {
    let p = EmitterParams::reference();
    let grid = TimeGrid::with_bins(&p, 256);
    let (early, late) = FusionConfig::default().pairs(&p, &grid).unwrap();
    let run = |modes| {
        let config = FusionConfig {
            scheme: Scheme::SinglePbsX,
            schmidt_modes: Some(modes),
            max_truncation_residual: 1.0,
            ..FusionConfig::default()
        };
        fuse(&early, &late, &config).unwrap().coherence
    };
    assert!((run(8) - run(16)).abs() < 1e-4);
    let strict = FusionConfig {
        scheme: Scheme::SinglePbsX,
        schmidt_modes: Some(8),
        ..FusionConfig::default()
    };
    assert!(matches!(fuse(&early, &late, &strict), Err(Error::TruncationResidual { .. })));
}

#[test]
fn sampled_amplitude_is_reused_for_identical_pairs() {
    let (early, late) = coarse_pairs(0.0, 32);
    let (list, e, l) = engine::merge_envelopes(&early, &late);
    assert_eq!(list.len(), 1);
    assert_eq!(e, l);
    let _ = TemporalAmplitude::sample(&list[0], early.grid()).unwrap();
}
