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

//! Dense polarization-qubit algebra.
//!
//! Basis ordering: qubit 0 is the most significant bit, `|H⟩ = |0⟩`,
//! `|V⟩ = |1⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, from_eigen, hermitian_eigen, hermiticity_error, kron, CMat, I};

pub const MAX_QUBITS: usize = 6;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-8;

/// Single-qubit polarization labels used for projective measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Pol {
    pub const ALL: [Pol; 6] = [Pol::H, Pol::V, Pol::D, Pol::A, Pol::R, Pol::L];

    pub fn ket(self) -> [Complex64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Pol::H => [c(1.0, 0.0), c(0.0, 0.0)],
            Pol::V => [c(0.0, 0.0), c(1.0, 0.0)],
            Pol::D => [c(s, 0.0), c(s, 0.0)],
            Pol::A => [c(s, 0.0), c(-s, 0.0)],
            Pol::R => [c(s, 0.0), c(0.0, s)],
            Pol::L => [c(s, 0.0), c(0.0, -s)],
        }
    }

    pub fn from_char(ch: char) -> Option<Pol> {
        match ch.to_ascii_uppercase() {
            'H' => Some(Pol::H),
            'V' => Some(Pol::V),
            'D' => Some(Pol::D),
            'A' => Some(Pol::A),
            'R' => Some(Pol::R),
            'L' => Some(Pol::L),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pol::H => 'H',
            Pol::V => 'V',
            Pol::D => 'D',
            Pol::A => 'A',
            Pol::R => 'R',
            Pol::L => 'L',
        }
    }
}

/// Hermitian single-qubit (or tensor-power) observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMat,
}

impl Observable {
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_power_of_two() {
            return Err(invalid("observable", "matrix must be square with power-of-two size"));
        }
        let err = hermiticity_error(&matrix);
        if err > 1e-12 {
            return Err(invalid("observable", format!("not Hermitian (error {err:.2e})")));
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: CMat::identity(2, 2) }
    }

    pub fn sigma_x() -> Self {
        Self::m_theta(0.0)
    }

    pub fn sigma_y() -> Self {
        Self {
            matrix: CMat::from_row_slice(2, 2, &[c(0.0, 0.0), -I, I, c(0.0, 0.0)]),
        }
    }

    pub fn sigma_z() -> Self {
        Self {
            matrix: CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
        }
    }

    /// `M(θ) = cos θ σx + sin θ σy`.
    pub fn m_theta(theta: f64) -> Self {
        let e = Complex64::from_polar(1.0, theta);
        Self {
            matrix: CMat::from_row_slice(2, 2, &[c(0.0, 0.0), e.conj(), e, c(0.0, 0.0)]),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }

    pub fn tensor(&self, other: &Observable) -> Observable {
        Observable { matrix: kron(&self.matrix, &other.matrix) }
    }

    pub fn tensor_power(&self, n: usize) -> Observable {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out
    }
}

/// Density matrix of `n_qubits` polarization qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationState {
    n_qubits: usize,
    matrix: CMat,
}

fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(invalid("n_qubits", format!("{n} outside 1..={MAX_QUBITS}")))
    }
}

fn check_ghz_size(n: usize) -> Result<()> {
    if (2..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(invalid("n", format!("GHZ size {n} outside 2..={MAX_QUBITS}")))
    }
}

impl PolarizationState {
    /// Validated constructor.
    pub fn new(matrix: CMat) -> Result<Self> {
        let state = Self::from_matrix_unchecked(matrix)?;
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMat) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || !dim.is_power_of_two() || dim < 2 {
            return Err(invalid("matrix", format!("shape {:?} is not 2^N square", matrix.shape())));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        Ok(Self { n_qubits, matrix })
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.matrix);
        if herm > HERMITIAN_TOL {
            return Err(invalid("state", format!("not Hermitian (error {herm:.2e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Unnormalized { trace: tr });
        }
        let min = self.eigenvalues().last().copied().unwrap_or(0.0);
        if min < -EIGEN_TOL {
            return Err(invalid("state", format!("negative eigenvalue {min:.2e}")));
        }
        Ok(())
    }

    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(invalid("amplitudes", "zero vector"));
        }
        let v = v / c(norm, 0.0);
        Self::from_matrix_unchecked(&v * v.adjoint())
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(invalid("index", format!("{index} >= {dim}")));
        }
        let mut m = CMat::zeros(dim, dim);
        m[(index, index)] = c(1.0, 0.0);
        Ok(Self { n_qubits, matrix: m })
    }

    pub fn product(labels: &[Pol]) -> Result<Self> {
        check_qubits(labels.len())?;
        let mut v = DVector::from_element(1, c(1.0, 0.0));
        for p in labels {
            let k = p.ket();
            v = DVector::from_fn(v.len() * 2, |r, _| v[r / 2] * k[r % 2]);
        }
        Self::pure(v.as_slice())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: CMat::identity(dim, dim) / c(dim as f64, 0.0),
        })
    }

    /// `(|H…H⟩ + e^{iφ}|V…V⟩)/√2`.
    pub fn ghz_pure(n: usize, phi: f64) -> Result<Self> {
        check_ghz_size(n)?;
        let dim = 1 << n;
        let mut amp = vec![c(0.0, 0.0); dim];
        amp[0] = c(FRAC_1_SQRT_2, 0.0);
        amp[dim - 1] = Complex64::from_polar(FRAC_1_SQRT_2, phi);
        Self::pure(&amp)
    }

    /// Population term plus the alternating sum of `M(θᵢ)^{⊗N}` with
    /// `θᵢ = (iπ + φ)/N`.
    pub fn ghz_from_decomposition(n: usize, phi: f64) -> Result<Self> {
        check_ghz_size(n)?;
        let dim = 1 << n;
        let mut m = CMat::zeros(dim, dim);
        m[(0, 0)] = c(0.5, 0.0);
        m[(dim - 1, dim - 1)] = c(0.5, 0.0);
        for i in 0..n {
            let theta = (i as f64 * PI + phi) / n as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let term = Observable::m_theta(theta).tensor_power(n);
            m += term.matrix * c(sign / (2 * n) as f64, 0.0);
        }
        Self::from_matrix_unchecked(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    /// Probability of the computational basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn tensor(&self, other: &PolarizationState) -> Result<Self> {
        check_qubits(self.n_qubits + other.n_qubits)?;
        Ok(Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: kron(&self.matrix, &other.matrix),
        })
    }

    /// Traces out every qubit not listed in `keep`; kept qubits retain their order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        if keep.is_empty() || keep.iter().any(|&q| q >= n) {
            return Err(invalid("keep", format!("{keep:?} invalid for {n} qubits")));
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() {
            return Err(invalid("keep", "duplicate qubit"));
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let compose = |kept: usize, env: usize| {
            let mut idx = 0usize;
            for (j, &q) in keep.iter().enumerate() {
                idx |= ((kept >> (k - 1 - j)) & 1) << (n - 1 - q);
            }
            for (j, &q) in traced.iter().enumerate() {
                idx |= ((env >> (traced.len() - 1 - j)) & 1) << (n - 1 - q);
            }
            idx
        };
        let dk = 1 << k;
        let de = 1 << traced.len();
        let m = CMat::from_fn(dk, dk, |r, col| {
            (0..de).map(|e| self.matrix[(compose(r, e), compose(col, e))]).sum()
        });
        Ok(Self { n_qubits: k, matrix: m })
    }

    /// `U ρ U†`.
    pub fn evolve(&self, unitary: &CMat) -> Result<Self> {
        if unitary.shape() != self.matrix.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: unitary.nrows(),
            });
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: unitary * &self.matrix * unitary.adjoint(),
        })
    }

    /// Closest positive semidefinite unit-trace matrix in Frobenius norm.
    pub fn project_psd(&self) -> Self {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5, 0.0);
        let (vals, vecs) = hermitian_eigen(&herm);
        let tr: f64 = vals.iter().sum();
        let target: Vec<f64> = vals.iter().map(|v| v / tr).collect();
        let projected = simplex_projection(&target);
        Self {
            n_qubits: self.n_qubits,
            matrix: from_eigen(&projected, &vecs),
        }
    }
}

/// Projects descending eigenvalues with unit sum onto the probability simplex.
fn simplex_projection(vals: &[f64]) -> Vec<f64> {
    let mut out = vals.to_vec();
    let mut accumulated = 0.0;
    let mut active = out.len();
    while active > 0 && out[active - 1] + accumulated / (active as f64) < 0.0 {
        accumulated += out[active - 1];
        out[active - 1] = 0.0;
        active -= 1;
    }
    for v in out.iter_mut().take(active) {
        *v += accumulated / active as f64;
    }
    out
}

/// `Tr(ρ · ⊗ᵢ obsᵢ)`; a single observable spanning all qubits is also accepted.
pub fn expectation(state: &PolarizationState, obs: &[Observable]) -> Result<f64> {
    let mut full = match obs.first() {
        Some(o) => o.clone(),
        None => return Err(Error::DimensionMismatch { expected: state.n_qubits, got: 0 }),
    };
    for o in &obs[1..] {
        full = full.tensor(o);
    }
    if full.matrix.nrows() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits,
            got: full.n_qubits(),
        });
    }
    let value = (&state.matrix * &full.matrix).trace();
    debug_assert!(value.im.abs() < 1e-10);
    Ok(value.re)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(a: &PolarizationState, b: &PolarizationState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.n_qubits, got: b.n_qubits });
    }
    for (pure, other) in [(b, a), (a, b)] {
        let (vals, vecs) = hermitian_eigen(&pure.matrix);
        if vals[0] > 1.0 - 1e-12 {
            let v = vecs.column(0);
            return Ok((v.adjoint() * &other.matrix * v)[(0, 0)].re.clamp(0.0, 1.0));
        }
    }
    let (vals, vecs) = hermitian_eigen(&a.matrix);
    let roots: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    let sqrt_a = from_eigen(&roots, &vecs);
    let inner = &sqrt_a * &b.matrix * &sqrt_a;
    let inner = (&inner + inner.adjoint()) * c(0.5, 0.0);
    let (ivals, _) = hermitian_eigen(&inner);
    let s: f64 = ivals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(state: &PolarizationState) -> Result<f64> {
    if state.n_qubits != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: state.n_qubits });
    }
    let yy = kron(Observable::sigma_y().matrix(), Observable::sigma_y().matrix());
    let tilde = &yy * state.matrix.map(|z| z.conj()) * &yy;
    let (vals, vecs) = hermitian_eigen(&state.matrix);
    let roots: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    let sqrt_rho = from_eigen(&roots, &vecs);
    let r = &sqrt_rho * tilde * &sqrt_rho;
    let r = (&r + r.adjoint()) * c(0.5, 0.0);
    let (lam, _) = hermitian_eigen(&r);
    let l: Vec<f64> = lam.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Diagonal unitary adding phase `φ/N` to `|V⟩` on each of `n` qubits.
pub fn birefringence_unitary(n: usize, phi: f64) -> CMat {
    let dim = 1 << n;
    let mut u = CMat::zeros(dim, dim);
    for idx in 0..dim {
        let v_count = idx.count_ones() as f64;
        u[(idx, idx)] = Complex64::from_polar(1.0, phi * v_count / n as f64);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn max_diff(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn m_theta_limits_and_involution() {
        assert!(max_diff(Observable::m_theta(0.0).matrix(), Observable::sigma_x().matrix()) < 1e-15);
        assert!(max_diff(Observable::m_theta(PI / 2.0).matrix(), Observable::sigma_y().matrix()) < 1e-15);
        for k in 0..17 {
            let m = Observable::m_theta(0.37 * k as f64);
            let sq = m.matrix() * m.matrix();
            assert!(max_diff(&sq, &CMat::identity(2, 2)) < 1e-14);
        }
    }

    #[test]
    fn ghz_pure_elements() {
        let bell = PolarizationState::ghz_pure(2, 0.0).unwrap();
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(bell.matrix()[(r, col)].re, 0.5, epsilon = 1e-15);
        }
        let g = PolarizationState::ghz_pure(4, PI).unwrap();
        assert_abs_diff_eq!(g.matrix()[(0, 15)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.trace(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.purity(), 1.0, epsilon = 1e-14);
        assert!(PolarizationState::ghz_pure(1, 0.0).is_err());
        assert!(PolarizationState::ghz_pure(7, 0.0).is_err());
    }

    #[test]
    fn decomposition_matches_projector() {
        for n in 2..=5 {
            for phi in [0.0, PI / 7.0, PI / 2.0, PI, 1.2] {
                let a = PolarizationState::ghz_pure(n, phi).unwrap();
                let b = PolarizationState::ghz_from_decomposition(n, phi).unwrap();
                assert!(max_diff(a.matrix(), b.matrix()) < 1e-12, "n={n} phi={phi}");
            }
        }
    }

    #[test]
    fn expectation_values() {
        let mixed = PolarizationState::maximally_mixed(3).unwrap();
        let v = expectation(&mixed, &[Observable::sigma_x(), Observable::sigma_y(), Observable::identity()]).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        let g = PolarizationState::ghz_pure(4, 0.9).unwrap();
        let zz = expectation(&g, &[Observable::sigma_z().tensor_power(4)]).unwrap();
        assert_abs_diff_eq!(zz, 1.0, epsilon = 1e-14);
        assert!(expectation(&g, &[Observable::sigma_z()]).is_err());
    }

    #[test]
    fn fidelity_and_partial_trace() {
        let hh = PolarizationState::product(&[Pol::H, Pol::H]).unwrap();
        let vv = PolarizationState::product(&[Pol::V, Pol::V]).unwrap();
        assert_abs_diff_eq!(fidelity(&hh, &vv).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&hh, &hh).unwrap(), 1.0, epsilon = 1e-12);
        let bell = PolarizationState::ghz_pure(2, 0.0).unwrap();
        assert_abs_diff_eq!(fidelity(&hh, &bell).unwrap(), 0.5, epsilon = 1e-12);

        let g = PolarizationState::ghz_pure(4, 0.4).unwrap();
        let marg = g.partial_trace(&[1, 3]).unwrap();
        let mut expected = CMat::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        assert!(max_diff(marg.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = PolarizationState::product(&[Pol::D]).unwrap();
        let b = PolarizationState::product(&[Pol::R]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(max_diff(ab.partial_trace(&[1]).unwrap().matrix(), b.matrix()) < 1e-14);
        assert!(max_diff(ab.partial_trace(&[0]).unwrap().matrix(), a.matrix()) < 1e-14);
    }

    #[test]
    fn concurrence_of_bell_and_product() {
        let bell = PolarizationState::ghz_pure(2, 0.3).unwrap();
        assert_abs_diff_eq!(concurrence(&bell).unwrap(), 1.0, epsilon = 1e-7);
        let hd = PolarizationState::product(&[Pol::H, Pol::D]).unwrap();
        assert_abs_diff_eq!(concurrence(&hd).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let mut m = CMat::identity(4, 4) * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(PolarizationState::new(m).is_err());
        let neg = CMat::from_diagonal(&DVector::from_vec(vec![c(1.1, 0.0), c(-0.1, 0.0)]));
        assert!(PolarizationState::new(neg.clone()).is_err());
        let fixed = PolarizationState::from_matrix_unchecked(neg).unwrap().project_psd();
        assert!(fixed.validate().is_ok());
        assert_abs_diff_eq!(fixed.probability(0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn simplex_projection_is_closest() {
        let p = simplex_projection(&[0.7, 0.4, -0.02, -0.08]);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0], 0.65, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.35, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn ghz_expectation_is_cosine(n in 2usize..=5, phi in 0.0..(2.0 * PI), theta in -PI..PI) {
            let g = PolarizationState::ghz_pure(n, phi).unwrap();
            let v = expectation(&g, &[Observable::m_theta(theta).tensor_power(n)]).unwrap();
            prop_assert!((v - (n as f64 * theta - phi).cos()).abs() < 1e-10);
        }

        #[test]
        fn fidelity_symmetric_and_bounded(a in proptest::collection::vec(-1.0f64..1.0, 8), b in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let mk = |v: &[f64]| {
                let amps: Vec<Complex64> = v.chunks(2).map(|p| c(p[0], p[1])).collect();
                PolarizationState::pure(&amps)
            };
            if let (Ok(x), Ok(y)) = (mk(&a), mk(&b)) {
                let mixed = PolarizationState::from_matrix_unchecked(
                    (x.matrix() * c(0.6, 0.0)) + (PolarizationState::maximally_mixed(2).unwrap().matrix() * c(0.4, 0.0)),
                ).unwrap();
                let f1 = fidelity(&mixed, &y).unwrap();
                let f2 = fidelity(&y, &mixed).unwrap();
                prop_assert!((f1 - f2).abs() < 1e-7);
                prop_assert!((0.0..=1.0).contains(&f1));
                let overlap = (y.matrix() * mixed.matrix()).trace().re;
                prop_assert!((f1 - overlap).abs() < 1e-7);
            }
        }
    }
}
