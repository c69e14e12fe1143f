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

//! Subcommand implementations. Each returns a [`Report`]; no I/O happens
//! here except reading the tomography counts file.

use std::path::Path;

use qdfusion::cascade::{
    discretize, fft_spectrum, indistinguishability_bound, joint_spectrum, pair_state, purity, reduced_density, schmidt,
    Subsystem,
};
use qdfusion::experiment::{calibrate, end_to_end, hom_visibility, simulate_hom, Engine, SourceModel};
use qdfusion::fusion::{fuse, fuse_pairs_analytic, Scheme};
use qdfusion::metrics::{ghz_fidelity, max_entangled_fidelity, reconstruct};
use qdfusion::multiplex::{schedule, simulate_loop};
use qdfusion::polarization::{concurrence, PolarizationState};

use crate::config::RunConfig;
use crate::counts::parse_counts;
use crate::report::{Report, Table, Value};
use crate::CliError;

/// Largest number of points per axis written for two-dimensional grids.
pub const MAX_AXIS_POINTS: usize = 64;

fn report(command: &str, config: &RunConfig) -> Report {
    let mut r = Report::new(command, config.seed);
    r.config = Some(config.to_toml());
    r
}

fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Grid => "grid",
        Engine::Analytic => "analytic",
    }
}

/// `HHVV`-style label of a basis index.
pub fn basis_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|q| if index >> (n_qubits - 1 - q) & 1 == 1 { 'V' } else { 'H' }).collect()
}

fn density_table(state: &PolarizationState) -> Table {
    let n = state.n_qubits();
    let mut t = Table::new("density_matrix", &["row", "col", "re", "im"]);
    for (j, col) in state.matrix().column_iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            t.push(vec![basis_label(i, n).into(), basis_label(j, n).into(), z.re.into(), z.im.into()]);
        }
    }
    t
}

/// Source model of the run, calibrated first when requested.
fn model_for(config: &RunConfig, calibrate_flag: bool, r: &mut Report) -> Result<SourceModel, CliError> {
    let model = config.source_model()?;
    if !(calibrate_flag || config.experiment.calibrate) {
        return Ok(model);
    }
    let cal = calibrate(&model, &config.experiment.targets, &config.grid()?)?;
    r.put("calibrated_sigma_x", cal.model.emitter.sigma_x);
    r.put("calibrated_sigma_xx", cal.model.emitter.sigma_xx);
    r.put("calibrated_fss", cal.model.emitter.fss);
    r.put("calibrated_depolarization", cal.model.depolarization);
    r.put("calibrated_pair_fidelity", cal.pair_fidelity);
    Ok(cal.model)
}

pub fn cmd_pair(config: &RunConfig, stride: Option<usize>) -> Result<Report, CliError> {
    let mut r = report("pair", config);
    let p = config.emitter()?;
    let grid = config.grid()?;
    let amp = discretize(&p, &grid)?;
    let rho_x = reduced_density(&amp, Subsystem::X);
    let rho_xx = reduced_density(&amp, Subsystem::XX);
    let modes = schmidt(&amp, 64, 1e-6);
    let spectrum = fft_spectrum(&amp);
    let window = 5.0 * p.gamma_xx.max(p.gamma_x);
    let pol = pair_state(&p, &grid)?.polarization_state()?;

    r.put("gamma_xx", p.gamma_xx);
    r.put("gamma_x", p.gamma_x);
    r.put("indistinguishability_bound", indistinguishability_bound(&p));
    r.put("purity_x", purity(&rho_x));
    r.put("purity_xx", purity(&rho_xx));
    r.put("schmidt_number", 1.0 / modes.purity());
    r.put("schmidt_modes", modes.n_modes());
    r.put("schmidt_residual", modes.residual);
    r.put("truncated_mass", amp.truncated_mass());
    r.put("spectrum_window", window);
    r.put("spectrum_max_relative_error", spectrum.max_relative_error(&p, window));
    r.put("pair_concurrence", concurrence(&pol)?);
    r.put("pair_entangled_fraction", max_entangled_fidelity(&pol)?);

    let n = grid.n_bins;
    let step = stride.unwrap_or_else(|| n.div_ceil(MAX_AXIS_POINTS)).max(1);
    let times = grid.times();
    let mut t = Table::new("temporal_intensity", &["t_xx_ps", "t_x_ps", "intensity"]);
    for i in (0..n).step_by(step) {
        for j in (0..n).step_by(step) {
            t.push(vec![times[i].into(), times[j].into(), amp.values()[(i, j)].norm_sqr().into()]);
        }
    }
    r.tables.push(t);

    let inside: Vec<usize> = (0..spectrum.omegas.len()).filter(|&k| spectrum.omegas[k].abs() <= window).collect();
    let step = stride.unwrap_or_else(|| inside.len().div_ceil(MAX_AXIS_POINTS)).max(1);
    let mut t = Table::new("spectrum", &["omega_xx", "omega_x", "fft", "closed_form"]);
    for &a in inside.iter().step_by(step) {
        for &b in inside.iter().step_by(step) {
            let (wxx, wx) = (spectrum.omegas[a], spectrum.omegas[b]);
            t.push(vec![wxx.into(), wx.into(), spectrum.density[(a, b)].into(), joint_spectrum(&p, wxx, wx).into()]);
        }
    }
    r.tables.push(t);

    let mut t = Table::new("schmidt", &["mode", "coefficient", "weight"]);
    for (k, &l) in modes.coefficients.iter().enumerate() {
        t.push(vec![k.into(), l.into(), (l * l).into()]);
    }
    r.tables.push(t);
    Ok(r)
}

pub fn cmd_hom(config: &RunConfig, calibrate_flag: bool) -> Result<Report, CliError> {
    let mut r = report("hom", config);
    let model = model_for(config, calibrate_flag, &mut r)?;
    let grid = config.grid()?;
    let mut t = Table::new(
        "hom",
        &["line", "sigma_uev", "bound", "visibility", "simulated", "simulated_err", "p_parallel", "p_cross"],
    );
    for (name, sub, sigma) in [("x", Subsystem::X, model.emitter.sigma_x), ("xx", Subsystem::XX, model.emitter.sigma_xx)] {
        let bound = hom_visibility(&model, &grid, sub, 0.0)?;
        let v = hom_visibility(&model, &grid, sub, sigma)?;
        let sim = simulate_hom(&model, &grid, sub, config.experiment.shots, config.seed)?;
        r.put(&format!("visibility_{name}"), v);
        r.put(&format!("simulated_visibility_{name}"), sim.value);
        r.put(&format!("simulated_visibility_{name}_err"), sim.error);
        t.push(vec![
            name.into(),
            sigma.into(),
            bound.into(),
            v.into(),
            sim.value.into(),
            sim.error.into(),
            ((1.0 + v) / 8.0).into(),
            ((1.0 - v) / 8.0).into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

pub fn cmd_fuse(config: &RunConfig, calibrate_flag: bool) -> Result<Report, CliError> {
    let mut r = report("fuse", config);
    let model = model_for(config, calibrate_flag, &mut r)?;
    let fusion = qdfusion::fusion::FusionConfig { wandering: model.wandering(), ..config.fusion_config()? };
    let pair = pair_state(&model.emitter, &config.grid()?)?.with_depolarization(model.depolarization)?;
    let out = match config.fusion.engine {
        Engine::Grid => fuse(&pair, &pair, &fusion)?,
        Engine::Analytic => fuse_pairs_analytic(&pair, &pair, &fusion)?,
    };
    r.put("scheme", fusion.scheme.name());
    r.put("engine", engine_name(config.fusion.engine));
    r.put("success_probability", out.success_probability);
    r.put("population", out.population);
    r.put("coherence", out.coherence);
    r.put("phase", out.phase);
    r.put("fidelity", ghz_fidelity(out.population.clamp(0.0, 1.0), out.coherence.clamp(0.0, 1.0))?);
    r.tables.push(density_table(&out.state));
    Ok(r)
}

pub fn cmd_ghz(config: &RunConfig, compare: bool, calibrate_flag: bool) -> Result<Report, CliError> {
    let mut r = report("ghz", config);
    let model = model_for(config, calibrate_flag, &mut r)?;
    let schemes = if compare { Scheme::ALL.to_vec() } else { vec![config.fusion.scheme] };
    let mut rows = Table::new(
        "schemes",
        &[
            "scheme",
            "success_probability",
            "population",
            "population_err",
            "coherence",
            "coherence_err",
            "fidelity",
            "fidelity_err",
            "phase",
            "exact_population",
            "exact_coherence",
            "exact_fidelity",
        ],
    );
    let mut scan = Table::new("scan", &["scheme", "theta", "parity", "parity_err"]);
    let mut results = Vec::new();
    for scheme in schemes {
        let e = end_to_end(&model, &config.end_to_end_options(scheme))?;
        rows.push(vec![
            scheme.name().into(),
            e.success_probability.into(),
            e.population.value.into(),
            e.population.error.into(),
            e.coherence.value.into(),
            e.coherence.error.into(),
            e.fidelity.value.into(),
            e.fidelity.error.into(),
            e.phase.into(),
            e.exact_population.into(),
            e.exact_coherence.into(),
            e.exact_fidelity.into(),
        ]);
        let errors = e.scan.errors.clone().unwrap_or_else(|| vec![0.0; e.scan.values.len()]);
        for ((theta, v), err) in e.scan.thetas.iter().zip(&e.scan.values).zip(errors) {
            scan.push(vec![scheme.name().into(), (*theta).into(), (*v).into(), err.into()]);
        }
        results.push(e);
    }
    for e in &results {
        let name = e.scheme.name();
        r.put(&format!("population_{name}"), e.population.value);
        r.put(&format!("coherence_{name}"), e.coherence.value);
        r.put(&format!("coherence_{name}_err"), e.coherence.error);
        r.put(&format!("fidelity_{name}"), e.fidelity.value);
        r.put(&format!("fidelity_{name}_err"), e.fidelity.error);
    }
    if let Some(double) = results.iter().find(|e| e.scheme == Scheme::DoublePbs) {
        for single in results.iter().filter(|e| e.scheme != Scheme::DoublePbs) {
            let gap = double.coherence.value - single.coherence.value;
            let err = double.coherence.error.hypot(single.coherence.error);
            r.put(&format!("separation_sigma_{}", single.scheme.name()), gap / err);
        }
    }
    r.tables.push(rows);
    r.tables.push(scan);
    Ok(r)
}

pub fn cmd_tomo(config: &RunConfig, counts: &Path) -> Result<Report, CliError> {
    let mut r = report("tomo", config);
    let text = std::fs::read_to_string(counts)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", counts.display())))?;
    let record = parse_counts(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", counts.display())),
        other => other,
    })?;
    let state = reconstruct(&record).map_err(|e| CliError::Input(e.to_string()))?;
    r.meta("counts_file", counts.display());
    r.put("settings", record.counts.len());
    r.put("total_counts", record.counts.iter().sum::<i64>());
    r.put("fully_entangled_fraction", max_entangled_fidelity(&state)?);
    r.put("purity", state.purity());
    r.put("concurrence", concurrence(&state)?);
    r.tables.push(density_table(&state));
    Ok(r)
}

pub fn cmd_loop(config: &RunConfig) -> Result<Report, CliError> {
    let mut r = report("loop", config);
    let model = config.source_model()?;
    let lc = config.loop_config();
    let out = simulate_loop(&lc, &model.emitter, &model.wandering())?;
    r.put("n_photons", lc.n_photons);
    r.put("success_probability", out.success_probability);
    r.put("loss_factor", lc.loss_factor());
    r.put("population", out.population);
    r.put("coherence", out.coherence);
    r.put("phase", out.phase);
    r.put("fidelity", ghz_fidelity(out.population.clamp(0.0, 1.0), out.coherence.clamp(0.0, 1.0))?);
    let mut t = Table::new("schedule", &["window", "start_ns", "end_ns", "route"]);
    for (k, w) in schedule(&lc)?.windows.iter().enumerate() {
        t.push(vec![k.into(), w.start.into(), w.end.into(), Value::Int(w.route.into())]);
    }
    r.tables.push(t);
    Ok(r)
}
