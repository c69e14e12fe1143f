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

use num_complex::Complex64;

use super::TemporalAmplitude;
use crate::linalg::{hermitian_eigen, matmul, CMat};

/// Truncated Schmidt decomposition `ψ·dt = Σ λₖ uₖ vₖᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    /// Descending, non-negative.
    pub coefficients: Vec<f64>,
    /// Orthonormal XX modes as columns (unit Euclidean norm on the grid).
    pub modes_xx: CMat,
    /// Orthonormal X modes as columns.
    pub modes_x: CMat,
    /// Discarded weight `1 − Σ λₖ²`.
    pub residual: f64,
    /// Whether the residual fell below the requested tolerance.
    pub converged: bool,
}

impl SchmidtDecomposition {
    pub fn n_modes(&self) -> usize {
        self.coefficients.len()
    }

    /// `Σ λₖ⁴` over the retained modes.
    pub fn purity(&self) -> f64 {
        self.coefficients.iter().map(|l| l.powi(4)).sum()
    }

    /// Rank-K reconstruction of `ψ·dt`.
    pub fn reconstruct(&self) -> CMat {
        let mut scaled = self.modes_xx.clone();
        for (k, &l) in self.coefficients.iter().enumerate() {
            scaled.column_mut(k).scale_mut(l);
        }
        matmul(&scaled, &self.modes_x.transpose())
    }
}

/// Schmidt modes of a two-photon amplitude, truncated at `max_modes` or once
/// the discarded weight drops below `tolerance`.
pub fn schmidt(amp: &TemporalAmplitude, max_modes: usize, tolerance: f64) -> SchmidtDecomposition {
    let m = amp.scaled();
    let rho_xx = matmul(&m, &m.adjoint());
    let (vals, vecs) = hermitian_eigen(&rho_xx);
    let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    let max_modes = max_modes.max(1).min(vals.len());

    let mut kept = 0;
    let mut captured = 0.0;
    let mut converged = false;
    while kept < max_modes {
        captured += vals[kept].max(0.0);
        kept += 1;
        if total - captured < tolerance {
            converged = true;
            break;
        }
    }
    let coefficients: Vec<f64> = vals[..kept].iter().map(|v| v.max(0.0).sqrt()).collect();
    let n = m.nrows();
    let modes_xx = vecs.columns(0, kept).into_owned();
    let projected = matmul(&m.transpose(), &modes_xx.map(|z| z.conj()));
    let mut modes_x = CMat::zeros(n, kept);
    for k in 0..kept {
        let col = projected.column(k);
        let norm = col.norm();
        if norm > 0.0 {
            modes_x.set_column(k, &(col / Complex64::new(norm, 0.0)));
        }
    }
    SchmidtDecomposition {
        coefficients,
        modes_xx,
        modes_x,
        residual: (total - captured).max(0.0),
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{discretize, purity, reduced_density, EmitterParams, Subsystem, TimeGrid};
    use crate::linalg::c;
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_amplitude_has_single_mode() {
        let grid = TimeGrid::new(50.0, 24).unwrap();
        let t = grid.times();
        let values = CMat::from_fn(24, 24, |i, j| c((-t[i] / 10.0).exp() * (t[j] / 7.0).sin(), 0.0));
        let amp = TemporalAmplitude::from_values(grid, values).unwrap();
        let s = schmidt(&amp, 8, 1e-10);
        assert_eq!(s.n_modes(), 1);
        assert_abs_diff_eq!(s.coefficients[0], 1.0, epsilon = 1e-10);
        assert!(s.converged);
    }

    #[test]
    fn cascade_modes_reproduce_purity() {
        let p = EmitterParams::reference();
        let amp = discretize(&p, &TimeGrid::with_bins(&p, 512)).unwrap();
        let s = schmidt(&amp, 8, 1e-12);
        assert_eq!(s.n_modes(), 8);
        assert!(!s.converged);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1] && w[1] >= 0.0));
        let grid_purity = purity(&reduced_density(&amp, Subsystem::X));
        assert!((s.purity() - grid_purity).abs() < 1e-4, "{} vs {}", s.purity(), grid_purity);
        let weight: f64 = s.coefficients.iter().map(|l| l * l).sum();
        assert!(weight <= 1.0 + 1e-12 && weight >= 1.0 - s.residual - 1e-12);

        for modes in [&s.modes_xx, &s.modes_x] {
            let gram = modes.adjoint() * modes;
            for r in 0..8 {
                for k in 0..8 {
                    let target = if r == k { 1.0 } else { 0.0 };
                    assert!((gram[(r, k)] - c(target, 0.0)).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn full_rank_reconstruction_is_exact() {
        let p = EmitterParams::reference().with_fss(2.0);
        let grid = TimeGrid::with_bins(&p, 32);
        let amp = TemporalAmplitude::sample(&crate::cascade::Envelope::cascade_v(&p), &grid).unwrap();
        let s = schmidt(&amp, 32, 0.0);
        assert!((s.reconstruct() - amp.scaled()).norm() < 1e-10);
    }
}
