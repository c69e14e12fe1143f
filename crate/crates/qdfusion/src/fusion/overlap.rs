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

//! Temporal overlap integrals needed by the fusion engine.
//!
//! Envelope indices refer to a shared list covering both pairs. Late-pair
//! envelopes are evaluated in a frame detuned by [`Detuning`] relative to the
//! early pair.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::wandering::Detuning;
use crate::cascade::{schmidt, Envelope, TemporalAmplitude, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{c, matmul, matmul_adj, CMat};

/// Photon colour of the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Xx,
    X,
}

/// Envelopes entering a single-colour exchange term: bra and ket envelopes of
/// the early and late pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SwapKey {
    pub e_bra: usize,
    pub e_ket: usize,
    pub l_bra: usize,
    pub l_ket: usize,
}

/// Source of two-photon overlaps between routed pair components.
pub trait OverlapModel: Sync {
    type Kernel: Send + Sync;

    /// `⟨bra|ket⟩` for two envelopes of the same emission event.
    fn same(&self, bra: usize, ket: usize) -> Complex64;

    /// `⟨bra|ket_d⟩` where `ket` belongs to the late pair, detuned by `d`.
    fn cross(&self, bra: usize, ket: usize, d: Detuning) -> Complex64;

    /// Detuning-independent precomputation for an exchange of one colour.
    fn swap_kernel(&self, color: Color, key: SwapKey) -> Result<Self::Kernel>;

    /// Overlap of two routings that differ by exchanging the early and late
    /// photons of one colour.
    fn swap(&self, kernel: &Self::Kernel, d: Detuning) -> Complex64;
}

/// Overlaps evaluated on the time grid.
pub struct GridOverlaps {
    grid: TimeGrid,
    scaled: Vec<CMat>,
    truncated: Vec<CMat>,
    gamma_cache: Mutex<HashMap<(Color, usize, usize), Arc<CMat>>>,
}

/// Precomputed exchange kernel: diagonal sums `h(k) = Σ_{p−q=k} K(p,q)`.
pub struct GridKernel {
    color: Color,
    h: Vec<Complex64>,
}

impl GridOverlaps {
    /// Samples `envelopes` on `grid`. With `truncation = Some((modes, limit))`
    /// the exchange terms use rank-`modes` Schmidt approximations, failing if
    /// any discarded weight exceeds `limit`.
    pub fn new(envelopes: &[Envelope], grid: &TimeGrid, truncation: Option<(usize, f64)>) -> Result<Self> {
        let amps: Vec<TemporalAmplitude> = envelopes.iter().map(|e| TemporalAmplitude::sample(e, grid)).collect::<Result<_>>()?;
        let scaled: Vec<CMat> = amps.iter().map(|a| a.scaled()).collect();
        let truncated = match truncation {
            None => scaled.clone(),
            Some((modes, limit)) => amps
                .iter()
                .map(|a| {
                    let s = schmidt(a, modes, 0.0);
                    if s.residual > limit {
                        Err(Error::TruncationResidual { residual: s.residual, limit })
                    } else {
                        Ok(s.reconstruct())
                    }
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self {
            grid: *grid,
            scaled,
            truncated,
            gamma_cache: Mutex::new(HashMap::new()),
        })
    }

    fn phases(&self, rate: f64) -> Vec<Complex64> {
        self.grid.times().iter().map(|&t| Complex64::from_polar(1.0, -rate * t)).collect()
    }

    /// `Γ(p,q)` contracting the other colour's time:
    /// X: `Σ_u A*(u,p) B(u,q)`, XX: `Σ_v A*(p,v) B(q,v)`.
    fn gamma(&self, color: Color, bra: usize, ket: usize) -> Arc<CMat> {
        let key = (color, bra, ket);
        if let Some(g) = self.gamma_cache.lock().expect("cache poisoned").get(&key) {
            return g.clone();
        }
        let (a, b) = (&self.truncated[bra], &self.truncated[ket]);
        let g = Arc::new(match color {
            Color::X => matmul_adj(a, b),
            Color::Xx => matmul(a, &b.adjoint()).map(|z| z.conj()),
        });
        self.gamma_cache.lock().expect("cache poisoned").insert(key, g.clone());
        g
    }
}

impl OverlapModel for GridOverlaps {
    type Kernel = GridKernel;

    fn same(&self, bra: usize, ket: usize) -> Complex64 {
        self.scaled[bra].dotc(&self.scaled[ket])
    }

    fn cross(&self, bra: usize, ket: usize, d: Detuning) -> Complex64 {
        let (a, b) = (&self.scaled[bra], &self.scaled[ket]);
        let row = self.phases(d.xx);
        let col = self.phases(d.x);
        let n = self.grid.n_bins;
        let mut total = c(0.0, 0.0);
        for j in 0..n {
            let mut partial = c(0.0, 0.0);
            for i in 0..=j {
                partial += a[(i, j)].conj() * b[(i, j)] * row[i];
            }
            total += partial * col[j];
        }
        total
    }

    fn swap_kernel(&self, color: Color, key: SwapKey) -> Result<GridKernel> {
        let g1 = self.gamma(color, key.e_bra, key.e_ket);
        let g2 = self.gamma(color, key.l_bra, key.l_ket);
        let n = self.grid.n_bins;
        let mut h = vec![c(0.0, 0.0); 2 * n - 1];
        // K(p,q) = Γ₁(q,p)·Γ₂(p,q), summed along p − q.
        for q in 0..n {
            for p in 0..n {
                h[p + n - 1 - q] += g1[(q, p)] * g2[(p, q)];
            }
        }
        Ok(GridKernel { color, h })
    }

    fn swap(&self, kernel: &GridKernel, d: Detuning) -> Complex64 {
        let n = self.grid.n_bins as f64;
        let rate = match kernel.color {
            Color::X => d.x,
            Color::Xx => d.xx,
        };
        let dt = self.grid.dt();
        let step = Complex64::from_polar(1.0, rate * dt);
        let mut phase = Complex64::from_polar(1.0, -rate * dt * (n - 1.0));
        let mut total = c(0.0, 0.0);
        for (k, &h) in kernel.h.iter().enumerate() {
            if k % 256 == 0 {
                phase = Complex64::from_polar(1.0, rate * dt * (k as f64 - (n - 1.0)));
            }
            total += h * phase;
            phase *= step;
        }
        total
    }
}

/// Closed-form overlaps of exponential envelopes.
pub struct AnalyticOverlaps {
    envelopes: Vec<Envelope>,
}

impl AnalyticOverlaps {
    pub fn new(envelopes: &[Envelope]) -> Self {
        Self { envelopes: envelopes.to_vec() }
    }
}

impl OverlapModel for AnalyticOverlaps {
    type Kernel = (Color, SwapKey);

    fn same(&self, bra: usize, ket: usize) -> Complex64 {
        self.envelopes[bra].overlap(&self.envelopes[ket])
    }

    fn cross(&self, bra: usize, ket: usize, d: Detuning) -> Complex64 {
        self.envelopes[bra].overlap(&self.envelopes[ket].detuned(d.xx, d.x))
    }

    fn swap_kernel(&self, color: Color, key: SwapKey) -> Result<(Color, SwapKey)> {
        Ok((color, key))
    }

    fn swap(&self, kernel: &(Color, SwapKey), d: Detuning) -> Complex64 {
        let (color, key) = *kernel;
        let e1 = self.envelopes[key.e_bra];
        let e = self.envelopes[key.e_ket];
        let l1 = self.envelopes[key.l_bra].detuned(d.xx, d.x);
        let l = self.envelopes[key.l_ket].detuned(d.xx, d.x);
        let c1 = e1.norm_constant() * e.norm_constant();
        let c2 = l1.norm_constant() * l.norm_constant();
        match color {
            Color::X => {
                let k1 = e1.a.conj() + e.a - e1.b.conj() - e.b;
                let k2 = l1.a.conj() + l.a - l1.b.conj() - l.b;
                let s = e.b + l1.b.conj();
                let t = e1.b.conj() + l.b;
                let big = s + t;
                let a = big / (s * t);
                a * (big * 2.0 + k1 + k2) / (big * (big + k1) * (big + k2) * (big + k1 + k2)) * (c1 * c2)
            }
            Color::Xx => {
                let b1 = e1.b.conj() + e.b;
                let b2 = l1.b.conj() + l.b;
                let s = e.a + e1.b.conj() + l1.a.conj() + l.b;
                let t = e1.a.conj() + e.b + l.a + l1.b.conj();
                (s + t) / (s * t * (s + t - b1 - b2) * b1 * b2) * (c1 * c2)
            }
        }
    }
}
