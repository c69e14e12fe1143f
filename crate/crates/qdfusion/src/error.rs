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

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input is not normalized (trace {trace})")]
    Unnormalized { trace: f64 },

    #[error("Schmidt truncation residual {residual:.3e} exceeds the limit {limit:.3e}")]
    TruncationResidual { residual: f64, limit: f64 },

    #[error("target {name} = {target} is unreachable; model bound is {bound}")]
    UnreachableTarget {
        name: &'static str,
        target: f64,
        bound: f64,
    },

    #[error("tomography design matrix is rank deficient (rank {rank}); missing settings: {missing}")]
    RankDeficient { rank: usize, missing: String },

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
