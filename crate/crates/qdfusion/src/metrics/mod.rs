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

//! GHZ estimators, two-qubit tomography and the fully entangled fraction.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polarization::{expectation, Observable, PolarizationState};

mod tomography;

pub use tomography::{
    max_entangled_fidelity, parse_setting, reconstruct, setting_projector, TomographyRecord, FULL_SETTINGS,
    STANDARD_SETTINGS,
};

/// `p(H^N) + p(V^N)` of a density matrix.
pub fn population(state: &PolarizationState) -> f64 {
    state.probability(0) + state.probability(state.dim() - 1)
}

/// `p(H^N) + p(V^N)` from an H/V outcome histogram indexed by bit string
/// (qubit 0 most significant, `V = 1`).
pub fn population_from_counts(counts: &[u64]) -> Result<f64> {
    let total = checked_total(counts)?;
    Ok((counts[0] + counts[counts.len() - 1]) as f64 / total as f64)
}

/// `⟨⊗ M⟩` from a histogram measured in per-qubit ±1 eigenbases.
pub fn parity_from_counts(counts: &[u64]) -> Result<f64> {
    let total = checked_total(counts)?;
    let signed: f64 = counts
        .iter()
        .enumerate()
        .map(|(idx, &n)| if idx.count_ones() % 2 == 0 { n as f64 } else { -(n as f64) })
        .sum();
    Ok(signed / total as f64)
}

fn checked_total(counts: &[u64]) -> Result<u64> {
    if counts.len() < 2 || !counts.len().is_power_of_two() {
        return Err(Error::InvalidCounts(format!(
            "histogram needs 2^N entries, got {}",
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidCounts("histogram is empty".into()));
    }
    Ok(total)
}

/// Expectation values of `M(θ)^{⊗N}` on a set of analyzer angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScan {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Option<Vec<f64>>,
}

impl CoherenceScan {
    pub fn new(thetas: Vec<f64>, values: Vec<f64>, errors: Option<Vec<f64>>) -> Result<Self> {
        if thetas.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: thetas.len(), got: values.len() });
        }
        if let Some(e) = &errors {
            if e.len() != values.len() {
                return Err(Error::DimensionMismatch { expected: values.len(), got: e.len() });
            }
            if e.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(invalid("errors", "standard deviations must be positive"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "must be finite"));
        }
        Ok(CoherenceScan { thetas, values, errors })
    }
}

/// `θᵢ = iπ/9` for `i = 0..=9`.
pub fn default_thetas() -> Vec<f64> {
    (0..10).map(|i| i as f64 * PI / 9.0).collect()
}

/// Exact scan of `⟨M(θ)^{⊗N}⟩` for a state.
pub fn coherence_scan(state: &PolarizationState, thetas: &[f64]) -> CoherenceScan {
    let n = state.n_qubits();
    let values = thetas
        .iter()
        .map(|&t| expectation(state, &[Observable::m_theta(t).tensor_power(n)]).expect("dimension matches"))
        .collect();
    CoherenceScan { thetas: thetas.to_vec(), values, errors: None }
}

/// Result of fitting `C cos(Nθ − φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceFit {
    pub coherence: f64,
    pub phase: f64,
    pub coherence_err: Option<f64>,
    pub phase_err: Option<f64>,
    /// Set when all values coincide and no oscillation can be fitted.
    pub degenerate: bool,
}

/// Linear least-squares fit of `A cos Nθ + B sin Nθ`, weighted by the point
/// errors when present.
pub fn coherence_fit(scan: &CoherenceScan, n: usize) -> Result<CoherenceFit> {
    if scan.values.len() < 4 {
        return Err(invalid("scan", format!("need at least 4 points, got {}", scan.values.len())));
    }
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let first = scan.values[0];
    if scan.values.iter().all(|v| (v - first).abs() < 1e-14) {
        return Ok(CoherenceFit {
            coherence: 0.0,
            phase: 0.0,
            coherence_err: None,
            phase_err: None,
            degenerate: true,
        });
    }
    let nf = n as f64;
    let mut normal = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for (i, (&t, &v)) in scan.thetas.iter().zip(&scan.values).enumerate() {
        let w = scan.errors.as_ref().map_or(1.0, |e| 1.0 / (e[i] * e[i]));
        let x = Vector2::new((nf * t).cos(), (nf * t).sin());
        normal += w * x * x.transpose();
        rhs += w * v * x;
    }
    let cov = normal
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()) && normal.determinant().abs() > 1e-12)
        .ok_or_else(|| invalid("thetas", "angles do not resolve both quadratures"))?;
    let ab = cov * rhs;
    let (a, b) = (ab[0], ab[1]);
    let c = a.hypot(b);
    let phase = b.atan2(a).rem_euclid(2.0 * PI);
    let (coherence_err, phase_err) = match &scan.errors {
        Some(_) if c > 0.0 => {
            let var_c = (a * a * cov[(0, 0)] + b * b * cov[(1, 1)] + 2.0 * a * b * cov[(0, 1)]) / (c * c);
            let var_p = (b * b * cov[(0, 0)] + a * a * cov[(1, 1)] - 2.0 * a * b * cov[(0, 1)]) / c.powi(4);
            (Some(var_c.max(0.0).sqrt()), Some(var_p.max(0.0).sqrt()))
        }
        _ => (None, None),
    };
    Ok(CoherenceFit { coherence: c, phase, coherence_err, phase_err, degenerate: false })
}

/// Alternating sum `(1/N) Σᵢ (−1)ⁱ ⟨M(θᵢ)^{⊗N}⟩` with `θᵢ = (iπ + φ)/N`.
pub fn coherence_alternating(state: &PolarizationState, phi: f64) -> f64 {
    let n = state.n_qubits();
    let nf = n as f64;
    let thetas: Vec<f64> = (0..n).map(|i| (i as f64 * PI + phi) / nf).collect();
    let scan = coherence_scan(state, &thetas);
    scan.values
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { *v } else { -*v })
        .sum::<f64>()
        / nf
}

/// `(P + C)/2`.
pub fn ghz_fidelity(population: f64, coherence: f64) -> Result<f64> {
    for (name, v) in [("population", population), ("coherence", coherence)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, format!("{v} is outside [0, 1]")));
        }
    }
    Ok(0.5 * (population + coherence))
}
