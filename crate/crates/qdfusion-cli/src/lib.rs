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

//! Command-line front end for the `qdfusion` simulator.
//!
//! Every subcommand builds a [`Report`] from a [`RunConfig`]; the binary only
//! renders it. Exit codes: 0 success, 2 configuration error, 3 input-data
//! error, 4 failed reproduction criteria, 1 anything else.

pub mod commands;
pub mod config;
pub mod counts;
pub mod report;
pub mod reproduce;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use qdfusion::experiment::Engine;
use qdfusion::fusion::Scheme;

pub use config::{Format, RunConfig};
pub use report::{Report, Table, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<qdfusion::Error> for CliError {
    fn from(e: qdfusion::Error) -> Self {
        use qdfusion::Error as E;
        match e {
            E::InvalidParameter { .. } => CliError::Config(e.to_string()),
            E::InvalidCounts(_) | E::RankDeficient { .. } => CliError::Input(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Exit code for reports whose reproduction criteria failed.
pub const EXIT_ACCEPTANCE: i32 = 4;

fn parse_engine(s: &str) -> Result<Engine, String> {
    match s {
        "grid" => Ok(Engine::Grid),
        "analytic" => Ok(Engine::Analytic),
        _ => Err(format!("unknown engine `{s}` (expected grid or analytic)")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "qdfusion", version, about = "Cascade photon-pair fusion simulator")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Shots per measurement setting.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// Time bins per axis.
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Overlap engine: grid or analytic.
    #[arg(long, global = true, value_parser = parse_engine)]
    pub engine: Option<Engine>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-photon amplitude, spectrum, purity and Schmidt modes of one pair.
    Pair {
        /// Keep every n-th grid point in the emitted grids.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// PBS Hong-Ou-Mandel visibilities of the X and XX lines.
    Hom {
        #[arg(long)]
        calibrate: bool,
    },
    /// Exact post-selected four-photon state.
    Fuse {
        /// double_pbs, single_pbs_x or single_pbs_xx.
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long)]
        calibrate: bool,
    },
    /// Sampled GHZ population, coherence and fidelity.
    Ghz {
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Run all three schemes.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        calibrate: bool,
    },
    /// Two-qubit reconstruction from a `setting_label,count` file.
    Tomo { counts: PathBuf },
    /// Switched fiber-loop multiplexing.
    Loop {
        #[arg(long)]
        n_photons: Option<usize>,
        #[arg(long)]
        loop_loss: Option<f64>,
        #[arg(long)]
        switch_loss: Option<f64>,
        #[arg(long)]
        storage_overlap: Option<f64>,
    },
    /// Recompute every reference quantity and check it.
    Reproduce,
}

impl Cli {
    /// Loads the configuration file and applies flag overrides.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(format) = self.format {
            c.output.format = format;
        }
        if let Some(path) = &self.output {
            c.output.path = Some(path.clone());
        }
        if let Some(shots) = self.shots {
            c.experiment.shots = shots;
        }
        if let Some(bins) = self.bins {
            c.cascade.bins = bins;
        }
        if let Some(engine) = self.engine {
            c.fusion.engine = engine;
        }
        match &self.command {
            Command::Fuse { scheme: Some(s), .. } | Command::Ghz { scheme: Some(s), .. } => c.fusion.scheme = *s,
            Command::Loop { n_photons, loop_loss, switch_loss, storage_overlap } => {
                let m = &mut c.multiplex;
                m.n_photons = n_photons.unwrap_or(m.n_photons);
                m.loop_loss = loop_loss.unwrap_or(m.loop_loss);
                m.switch_loss = switch_loss.unwrap_or(m.switch_loss);
                m.storage_overlap = storage_overlap.unwrap_or(m.storage_overlap);
            }
            _ => {}
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs a subcommand against an already resolved configuration.
pub fn execute(command: &Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Pair { stride } => commands::cmd_pair(config, *stride),
        Command::Hom { calibrate } => commands::cmd_hom(config, *calibrate),
        Command::Fuse { calibrate, .. } => commands::cmd_fuse(config, *calibrate),
        Command::Ghz { compare, calibrate, .. } => commands::cmd_ghz(config, *compare, *calibrate),
        Command::Tomo { counts } => commands::cmd_tomo(config, counts),
        Command::Loop { .. } => commands::cmd_loop(config),
        Command::Reproduce => reproduce::cmd_reproduce(config),
    }
}

/// Parses, runs and renders; returns the rendered report and the exit code.
pub fn run(cli: &Cli) -> Result<(String, RunConfig, i32), CliError> {
    let config = cli.resolve_config()?;
    let report = execute(&cli.command, &config)?;
    let code = if report.get("status") == Some(&Value::from("FAIL")) { EXIT_ACCEPTANCE } else { 0 };
    Ok((report.render(config.output.format), config, code))
}
