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

//! Two-qubit tomography from projector counts.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, kron, CMat};
use crate::polarization::{Observable, Pol, PolarizationState};

/// The standard 16 two-qubit projector settings.
pub const STANDARD_SETTINGS: [&str; 16] = [
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH", "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
];

/// All 36 ordered pairs of {H, V, D, A, R, L}.
pub const FULL_SETTINGS: [&str; 36] = [
    "HH", "HV", "HD", "HA", "HR", "HL", "VH", "VV", "VD", "VA", "VR", "VL", "DH", "DV", "DD", "DA", "DR", "DL",
    "AH", "AV", "AD", "AA", "AR", "AL", "RH", "RV", "RD", "RA", "RR", "RL", "LH", "LV", "LD", "LA", "LR", "LL",
];

/// Counts recorded for a list of two-qubit projector settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub settings: Vec<[Pol; 2]>,
    pub counts: Vec<i64>,
}

fn label(s: &[Pol; 2]) -> String {
    format!("{}{}", s[0].as_char(), s[1].as_char())
}

/// Parses a two-letter label such as `HV` or `DR`.
pub fn parse_setting(text: &str) -> Option<[Pol; 2]> {
    let mut chars = text.chars();
    let a = Pol::from_char(chars.next()?)?;
    let b = Pol::from_char(chars.next()?)?;
    chars.next().is_none().then_some([a, b])
}

impl TomographyRecord {
    pub fn new(settings: Vec<[Pol; 2]>, counts: Vec<i64>) -> Result<Self> {
        if settings.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: settings.len(), got: counts.len() });
        }
        let record = TomographyRecord { settings, counts };
        record.validate()?;
        Ok(record)
    }

    pub fn from_labels(rows: &[(&str, i64)]) -> Result<Self> {
        let mut settings = Vec::with_capacity(rows.len());
        for (text, _) in rows {
            settings.push(parse_setting(text).ok_or_else(|| Error::InvalidCounts(format!("bad setting label `{text}`")))?);
        }
        Self::new(settings, rows.iter().map(|r| r.1).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for (s, &n) in self.settings.iter().zip(&self.counts) {
            if n < 0 {
                return Err(Error::InvalidCounts(format!("negative count {n} for setting {}", label(s))));
            }
        }
        if self.counts.iter().all(|&n| n == 0) {
            return Err(Error::InvalidCounts("all counts are zero".into()));
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.settings.iter().map(label).collect()
    }
}

/// Projector `|ab⟩⟨ab|` for a setting.
pub fn setting_projector(setting: &[Pol; 2]) -> CMat {
    let (a, b) = (setting[0].ket(), setting[1].ket());
    let v = DVector::from_fn(4, |r, _| a[r / 2] * b[r % 2]);
    &v * v.adjoint()
}

fn pauli_basis() -> Vec<CMat> {
    let paulis = [
        Observable::identity(),
        Observable::sigma_x(),
        Observable::sigma_y(),
        Observable::sigma_z(),
    ];
    let mut out = Vec::with_capacity(16);
    for a in &paulis {
        for b in &paulis {
            out.push(kron(a.matrix(), b.matrix()) * c(0.25, 0.0));
        }
    }
    out
}

/// Weighted linear inversion followed by projection onto the closest
/// physical state.
pub fn reconstruct(record: &TomographyRecord) -> Result<PolarizationState> {
    record.validate()?;
    let basis = pauli_basis();
    let rows = record.settings.len();
    let projectors: Vec<CMat> = record.settings.iter().map(setting_projector).collect();
    let design = DMatrix::from_fn(rows, 16, |r, k| (&projectors[r] * &basis[k]).trace().re);

    let rank = design.clone().svd(false, false).rank(1e-9);
    if rank < 16 {
        let present = record.labels();
        let missing: Vec<&str> = STANDARD_SETTINGS.iter().copied().filter(|s| !present.iter().any(|p| p == s)).collect();
        return Err(Error::RankDeficient { rank, missing: missing.join(",") });
    }

    let weights: Vec<f64> = record.counts.iter().map(|&n| 1.0 / (n.max(1) as f64).sqrt()).collect();
    let weighted = DMatrix::from_fn(rows, 16, |r, k| design[(r, k)] * weights[r]);
    let target = DVector::from_fn(rows, |r, _| record.counts[r] as f64 * weights[r]);
    let y = weighted
        .svd(true, true)
        .solve(&target, 1e-12)
        .map_err(|e| Error::InvalidCounts(e.to_string()))?;
    if y[0] <= 0.0 {
        return Err(Error::InvalidCounts("counts carry no intensity".into()));
    }
    let mut rho = CMat::zeros(4, 4);
    for (k, b) in basis.iter().enumerate() {
        rho += b * c(y[k] / y[0], 0.0);
    }
    Ok(PolarizationState::from_matrix_unchecked(rho)?.project_psd())
}

fn magic_basis() -> CMat {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let ih = c(0.0, FRAC_1_SQRT_2);
    let z = Complex64::default();
    CMat::from_row_slice(4, 4, &[h, ih, z, z, z, z, ih, h, z, z, ih, -h, h, -ih, z, z])
}

/// Largest overlap with any maximally entangled pure state.
pub fn max_entangled_fidelity(state: &PolarizationState) -> Result<f64> {
    if state.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: state.n_qubits() });
    }
    let m = magic_basis();
    let in_magic = m.adjoint() * state.matrix() * &m;
    let real = in_magic.map(|z| c(z.re, 0.0));
    let (vals, _) = hermitian_eigen(&real);
    Ok(vals[0])
}
