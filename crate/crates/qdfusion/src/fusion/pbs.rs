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

//! Polarizing beam splitter: H is transmitted, V is reflected.

use num_complex::Complex64;

use crate::linalg::{c, CMat};
use crate::polarization::Pol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputPort {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputPort {
    C,
    D,
}

/// Output port taken by an H or V photon entering at `input`.
///
/// Returns `None` for diagonal or circular labels, which split between both
/// outputs; use [`pbs_mode_transform`] for those.
pub fn pbs_route(input: InputPort, pol: Pol) -> Option<OutputPort> {
    match (input, pol) {
        (InputPort::A, Pol::H) | (InputPort::B, Pol::V) => Some(OutputPort::C),
        (InputPort::A, Pol::V) | (InputPort::B, Pol::H) => Some(OutputPort::D),
        _ => None,
    }
}

/// Mode transformation on `[a_H, a_V, b_H, b_V] → [c_H, c_V, d_H, d_V]`.
pub fn pbs_mode_transform() -> CMat {
    let one = c(1.0, 0.0);
    let mut u = CMat::zeros(4, 4);
    u[(0, 0)] = one; // a_H → c_H
    u[(3, 1)] = one; // a_V → d_V
    u[(2, 2)] = one; // b_H → d_H
    u[(1, 3)] = one; // b_V → c_V
    u
}

/// Single-photon amplitudes after the PBS for a photon in `input` with
/// polarization `pol`.
pub fn pbs_apply(input: InputPort, pol: Pol) -> [Complex64; 4] {
    let k = pol.ket();
    let mut v = [c(0.0, 0.0); 4];
    let offset = match input {
        InputPort::A => 0,
        InputPort::B => 2,
    };
    v[offset] = k[0];
    v[offset + 1] = k[1];
    let out = pbs_mode_transform() * nalgebra::DVector::from_column_slice(&v);
    [out[0], out[1], out[2], out[3]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_table() {
        assert_eq!(pbs_route(InputPort::A, Pol::H), Some(OutputPort::C));
        assert_eq!(pbs_route(InputPort::A, Pol::V), Some(OutputPort::D));
        assert_eq!(pbs_route(InputPort::B, Pol::H), Some(OutputPort::D));
        assert_eq!(pbs_route(InputPort::B, Pol::V), Some(OutputPort::C));
        assert_eq!(pbs_route(InputPort::A, Pol::D), None);
        let h = pbs_apply(InputPort::A, Pol::H);
        assert_eq!(h[0], c(1.0, 0.0));
        let v = pbs_apply(InputPort::A, Pol::V);
        assert_eq!(v[3], c(1.0, 0.0));
    }

    #[test]
    fn transform_is_unitary() {
        let u = pbs_mode_transform();
        assert!((u.adjoint() * &u - CMat::identity(4, 4)).norm() < 1e-15);
    }
}
