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

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub(crate) type CMat = DMatrix<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn split(m: &CMat) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMat {
    re.zip_map(im, Complex64::new)
}

pub(crate) fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Complex product `a·b` through four real products (uses the optimised dgemm path).
pub(crate) fn matmul(a: &CMat, b: &CMat) -> CMat {
    if is_real(a) && is_real(b) {
        return (a.map(|z| z.re) * b.map(|z| z.re)).map(|x| c(x, 0.0));
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

/// `a† · b`.
pub(crate) fn matmul_adj(a: &CMat, b: &CMat) -> CMat {
    if is_real(a) && is_real(b) {
        return (a.map(|z| z.re).transpose() * b.map(|z| z.re)).map(|x| c(x, 0.0));
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let (art, ait) = (ar.transpose(), ai.transpose());
    let re = &art * &br + &ait * &bi;
    let im = &art * &bi - &ait * &br;
    join(&re, &im)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub(crate) fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let (vals, vecs) = if is_real(m) {
        let e = SymmetricEigen::new(m.map(|z| z.re));
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|x| c(x, 0.0)))
    } else {
        let e = SymmetricEigen::new(m.clone());
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let sorted_vals = order.iter().map(|&k| vals[k]).collect();
    let sorted_vecs = CMat::from_fn(n, n, |r, col| vecs[(r, order[col])]);
    (sorted_vals, sorted_vecs)
}

/// `V diag(w) V†`.
pub(crate) fn from_eigen(vals: &[f64], vecs: &CMat) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &w) in vals.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w);
    }
    let mut out = CMat::zeros(n, n);
    out.gemm(c(1.0, 0.0), &scaled, &vecs.adjoint(), c(0.0, 0.0));
    out
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |r, col| {
        a[(r / br, col / bc)] * b[(r % br, col % bc)]
    })
}

pub(crate) fn hermiticity_error(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for col in r..n {
            worst = worst.max((m[(r, col)] - m[(col, r)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: f64) -> CMat {
        CMat::from_fn(n, n, |r, k| c(((r * 7 + k) as f64 * seed).sin(), ((r + 3 * k) as f64 * seed).cos()))
    }

    #[test]
    fn real_split_products_match_naive() {
        let a = sample(5, 0.37);
        let b = sample(5, 1.13);
        assert!((matmul(&a, &b) - &a * &b).norm() < 1e-12);
        assert!((matmul_adj(&a, &b) - a.adjoint() * &b).norm() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_hermitian_input() {
        let a = sample(6, 0.71);
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        assert!((from_eigen(&vals, &vecs) - &h).norm() < 1e-10);
    }
}
