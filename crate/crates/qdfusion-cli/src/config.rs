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

//! Run configuration.
//!
//! A TOML file with one section per simulator module. Every key is optional
//! and unknown keys are rejected:
//!
//! ```toml
//! seed = 42
//!
//! [cascade]
//! lifetime_x = 125.5
//! lifetime_xx = 38.8
//! fss = 0.0
//! sigma_x = 0.0
//! sigma_xx = 0.0
//! bins = 1024
//!
//! [fusion]
//! scheme = "double_pbs"
//! engine = "grid"
//!
//! [experiment]
//! shots = 1000000
//! calibrate = false
//!
//! [multiplex]
//! n_photons = 4
//!
//! [output]
//! format = "csv"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qdfusion::cascade::{EmitterParams, TimeGrid, DEFAULT_BINS, DEFAULT_SPAN, LIFETIME_X, LIFETIME_XX};
use qdfusion::experiment::{CalibrationTargets, EndToEndOptions, Engine, SourceModel, BOOTSTRAP_RESAMPLES};
use qdfusion::fusion::{FusionConfig, Scheme};
use qdfusion::metrics::default_thetas;
use qdfusion::multiplex::LoopConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeSection {
    /// Intensity lifetime of the X line [ps].
    pub lifetime_x: f64,
    /// Intensity lifetime of the XX line [ps].
    pub lifetime_xx: f64,
    /// Fine-structure splitting [μeV].
    pub fss: f64,
    /// Wandering widths [μeV].
    pub sigma_x: f64,
    pub sigma_xx: f64,
    /// Delay between pair emissions [ps].
    pub pair_delay: f64,
    pub bins: usize,
    /// Grid length in units of the slowest decay time.
    pub span: f64,
}

impl Default for CascadeSection {
    fn default() -> Self {
        let p = EmitterParams::reference();
        Self {
            lifetime_x: LIFETIME_X,
            lifetime_xx: LIFETIME_XX,
            fss: 0.0,
            sigma_x: 0.0,
            sigma_xx: 0.0,
            pair_delay: p.pair_delay,
            bins: DEFAULT_BINS,
            span: DEFAULT_SPAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionSection {
    pub scheme: Scheme,
    pub engine: Engine,
    pub schmidt_modes: Option<usize>,
    pub max_truncation_residual: f64,
    pub detuning_samples: usize,
    pub phase_offset: f64,
    pub mode_overlap: f64,
}

impl Default for FusionSection {
    fn default() -> Self {
        let f = FusionConfig::default();
        Self {
            scheme: f.scheme,
            engine: Engine::Grid,
            schmidt_modes: f.schmidt_modes,
            max_truncation_residual: f.max_truncation_residual,
            detuning_samples: f.detuning_samples,
            phase_offset: f.phase_offset,
            mode_overlap: f.mode_overlap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub shots: u64,
    pub resamples: usize,
    pub depolarization: f64,
    pub fss_share: f64,
    pub multiphoton_prob: f64,
    pub efficiency: f64,
    /// Coincidence window [ps].
    pub window: f64,
    /// Repetition rate [1/ns].
    pub rep_rate: f64,
    /// Fit wandering and pair noise to `targets` before simulating.
    pub calibrate: bool,
    pub targets: CalibrationTargets,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let m = SourceModel::default();
        Self {
            shots: 1_000_000,
            resamples: BOOTSTRAP_RESAMPLES,
            depolarization: m.depolarization,
            fss_share: m.fss_share.unwrap_or(0.5),
            multiphoton_prob: m.multiphoton_prob,
            efficiency: m.efficiency,
            window: m.window,
            rep_rate: m.rep_rate,
            calibrate: false,
            targets: CalibrationTargets::reference(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Format,
    /// Report file; standard output when absent.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub cascade: CascadeSection,
    pub fusion: FusionSection,
    pub experiment: ExperimentSection,
    pub multiplex: LoopConfig,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let config = |e: qdfusion::Error| CliError::Config(e.to_string());
        self.emitter().map_err(config)?;
        self.grid().map_err(config)?;
        self.fusion_config().map_err(config)?;
        self.source_model().map_err(config)?.validate().map_err(config)?;
        self.multiplex.validate().map_err(config)?;
        if self.experiment.shots == 0 {
            return Err(CliError::Config("experiment.shots must be positive".into()));
        }
        if self.experiment.resamples < 2 {
            return Err(CliError::Config("experiment.resamples must be at least 2".into()));
        }
        Ok(())
    }

    pub fn emitter(&self) -> qdfusion::Result<EmitterParams> {
        let c = &self.cascade;
        let p = EmitterParams {
            fss: c.fss,
            sigma_x: c.sigma_x,
            sigma_xx: c.sigma_xx,
            pair_delay: c.pair_delay,
            ..EmitterParams::from_lifetimes(c.lifetime_x, c.lifetime_xx)?
        };
        p.validate()?;
        Ok(p)
    }

    pub fn grid(&self) -> qdfusion::Result<TimeGrid> {
        let p = self.emitter()?;
        TimeGrid::new(self.cascade.span / p.gamma_x.min(p.gamma_xx), self.cascade.bins)
    }

    pub fn source_model(&self) -> qdfusion::Result<SourceModel> {
        let e = &self.experiment;
        let model = SourceModel {
            emitter: self.emitter()?,
            pair_fidelity_target: e.targets.pair_fidelity,
            depolarization: e.depolarization,
            fss_share: Some(e.fss_share),
            multiphoton_prob: e.multiphoton_prob,
            efficiency: e.efficiency,
            window: e.window,
            rep_rate: e.rep_rate,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn fusion_config(&self) -> qdfusion::Result<FusionConfig> {
        let f = &self.fusion;
        let config = FusionConfig {
            scheme: f.scheme,
            fss_on: true,
            wandering: self.source_model()?.wandering(),
            schmidt_modes: f.schmidt_modes,
            max_truncation_residual: f.max_truncation_residual,
            detuning_samples: f.detuning_samples,
            seed: self.seed,
            phase_offset: f.phase_offset,
            mode_overlap: f.mode_overlap,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn end_to_end_options(&self, scheme: Scheme) -> EndToEndOptions {
        EndToEndOptions {
            scheme,
            shots: self.experiment.shots,
            seed: self.seed,
            resamples: self.experiment.resamples,
            thetas: default_thetas(),
            bins: self.cascade.bins,
            engine: self.fusion.engine,
            detuning_samples: self.fusion.detuning_samples,
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig { seed: self.seed, ..self.multiplex }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        let p = c.emitter().unwrap();
        assert!((p.gamma_x - EmitterParams::reference().gamma_x).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.seed = 7;
        c.cascade.fss = 1.5;
        c.fusion.scheme = Scheme::SinglePbsX;
        c.multiplex.n_photons = 6;
        c.output.format = Format::Json;
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in ["bogus = 1", "[cascade]\nlifetime = 3.0", "[nonsense]\n", "[fusion]\nscheme = \"triple\""] {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "[cascade]\nlifetime_x = -1.0",
            "[cascade]\nbins = 0",
            "[experiment]\nshots = 0",
            "[experiment]\ndepolarization = 1.5",
            "[multiplex]\nloop_loss = 0.0",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }
}
