//! Validators for the first three propositions: depth monotonicity of the
//! layer-wise BWE, the lead-time non-monotonicity witness, and structure
//! independence under a shared stationary demand process.

use std::f64::consts::{PI, TAU};

use crate::demand::{DemandModel, Seasonal};
use crate::error::Result;
use crate::experiments::pipeline::{max_abs_gap, run_structure_cell};
use crate::experiments::{
    cell, table1_pattern, table1_widths, CheckResult, ExperimentConfig, Table, ValidationReport,
    TABLE1_KINDS,
};
use crate::rng::subseed;
use crate::spectral::{
    amplification_rate, amplification_spectrum, cascade_layer_bwe, layer_bwe_analytical,
    three_tone_profile, PolicyParams, SpectralProfile,
};
use crate::topology::{generate_structure, StructureKind, StructureSpec};

fn min_consecutive_diff(xs: &[f64]) -> f64 {
    xs.windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::INFINITY, f64::min)
}

fn serial_net(depth: usize, lead_time: u32, window: u32) -> Result<crate::topology::SupplyNetwork> {
    let spec = StructureSpec::new(StructureKind::Serial, vec![1; depth], 0.0, 1);
    generate_structure(&spec, lead_time, window)
}

/// Depth monotonicity: under the three-tone demand with L=4, P=2 the
/// layer-wise BWE rises strictly with depth toward the peak amplification,
/// and a noise-free serial simulation matches the analytical curve.
pub fn validate_prop1(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let tol = &config.tolerances;
    let mut report = ValidationReport::new("prop1", config.seed);
    let policy = PolicyParams::new(4, 2);
    let profile = three_tone_profile();
    let depth = 16;

    let g15 = amplification_rate(&policy, TAU * 0.15);
    let g25 = amplification_rate(&policy, TAU * 0.25);
    let g40 = amplification_rate(&policy, TAU * 0.40);
    report.checks.push(CheckResult::flag(
        "tone_ordering",
        g25 > g15 && g15 > g40,
        g25 - g15,
        format!("gains {g25:.6} > {g15:.6} > {g40:.6}"),
    ));
    report.checks.push(CheckResult::le(
        "peak_gain_exact",
        (g25 - 5.0).abs(),
        0.0,
        "quarter-cycle tone hits the closed-form gain 5 exactly".into(),
    ));

    let gains = amplification_spectrum(&policy, &profile.frequencies);
    let analytical = (1..=depth)
        .map(|l| layer_bwe_analytical(&profile, &gains, l))
        .collect::<Result<Vec<f64>>>()?;
    report.checks.push(CheckResult::le(
        "phi1_sqrt17",
        (analytical[0] - 17f64.sqrt()).abs(),
        1e-9,
        format!("first layer {}", analytical[0]),
    ));
    let min_step = min_consecutive_diff(&analytical);
    report.checks.push(CheckResult::flag(
        "monotone_layers",
        min_step > 0.0,
        min_step,
        "consecutive layer differences over l = 1..16".into(),
    ));
    report.checks.push(CheckResult::le(
        "limit_within_gap",
        (analytical[depth - 1] - g25).abs() / g25,
        tol.limit_gap,
        format!(
            "layer 16 value {} against the peak {g25}",
            analytical[depth - 1]
        ),
    ));

    // Noise-free serial run: the periodic window reproduces the closed-form
    // curve, covering the empirical side of the figure.
    let net = serial_net(depth + 1, 4, 2)?;
    let tones = vec![
        Seasonal {
            amplitude: 1.0,
            frequency: 0.15,
        },
        Seasonal {
            amplitude: 1.0,
            frequency: 0.25,
        },
        Seasonal {
            amplitude: 1.0,
            frequency: 0.40,
        },
    ];
    let pattern = DemandModel::parametric(100.0, 0.0, tones, 0.0, config.horizon, config.seed);
    let curves = run_structure_cell(&net, &pattern, config.horizon, 1, config.seed)?;
    report.checks.push(CheckResult::le(
        "noise_free_agreement",
        max_abs_gap(&curves.empirical_mean, &analytical),
        tol.noise_free_layer_gap,
        "simulated serial chain against the closed-form curve".into(),
    ));

    // Boundary profiles: one tone pins every layer at its gain; two tones
    // of equal gain (omega and pi - omega) keep the curve constant too.
    let single = SpectralProfile::from_components(vec![TAU * 0.15], vec![1.0]);
    let single_gains = amplification_spectrum(&policy, &single.frequencies);
    let flat3 = layer_bwe_analytical(&single, &single_gains, 3)?;
    report.checks.push(CheckResult::le(
        "single_tone_flat",
        (flat3 - g15).abs(),
        1e-12,
        "one tone: layer 3 equals the per-node gain".into(),
    ));
    let pair = SpectralProfile::from_components(vec![0.3 * PI, 0.7 * PI], vec![1.0, 1.0]);
    let pair_gains = amplification_spectrum(&policy, &pair.frequencies);
    let pair_phi: Vec<f64> = (1..=5)
        .map(|l| layer_bwe_analytical(&pair, &pair_gains, l))
        .collect::<Result<_>>()?;
    report.checks.push(CheckResult::le(
        "equal_gain_pair_flat",
        (pair_phi[4] - pair_phi[0]).abs(),
        1e-12,
        "two tones of equal gain leave the curve flat".into(),
    ));

    let mut curve_table = Table::new(&["layer", "analytical", "empirical"]);
    for (l, (a, e)) in analytical.iter().zip(&curves.empirical_mean).enumerate() {
        curve_table.push_row(vec![(l + 1).to_string(), cell(*a), cell(*e)]);
    }
    report.tables.insert("layer_curve".into(), curve_table);

    let mut gain_table = Table::new(&["omega", "gain"]);
    for n in 0..=256 {
        let omega = PI * n as f64 / 256.0;
        gain_table.push_row(vec![cell(omega), cell(amplification_rate(&policy, omega))]);
    }
    report.tables.insert("gain_curve".into(), gain_table);
    Ok(report)
}

/// Lead-time non-monotonicity: sweeping the first layer's lead time under a
/// two-tone profile must produce some deeper layer whose BWE falls as the
/// lead time rises. The first layer itself rises for every frequency, so
/// no witness can exist there.
pub fn validate_prop2(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let mut report = ValidationReport::new("prop2", config.seed);
    let leads: Vec<u32> = (1..=12).collect();
    let depth = 8usize;
    // Tones at pi/4 (maximal first-layer gain for P = 4) and pi/2 (gain
    // pinned at one): raising the first lead time reweights what the upper
    // layers see.
    let profile = SpectralProfile::from_components(vec![PI / 4.0, PI / 2.0], vec![1.0, 1.0]);

    let mut surface: Vec<Vec<f64>> = Vec::new();
    for &lead in &leads {
        let mut layers = vec![PolicyParams::new(lead, 4)];
        layers.extend(std::iter::repeat_n(PolicyParams::new(1, 1), depth - 1));
        let phis = (1..=depth)
            .map(|l| cascade_layer_bwe(&layers, &profile, l))
            .collect::<Result<Vec<f64>>>()?;
        surface.push(phis);
    }

    let mut table = Table::new(&["layer", "lead_time", "phi"]);
    for (row, &lead) in surface.iter().zip(&leads) {
        for (l, &phi) in row.iter().enumerate() {
            table.push_row(vec![(l + 1).to_string(), lead.to_string(), cell(phi)]);
        }
    }
    report.tables.insert("surface".into(), table);

    let mut best_drop = 0.0f64;
    let mut witness = None;
    for l in 2..=depth {
        for w in 0..leads.len() - 1 {
            let drop = surface[w][l - 1] - surface[w + 1][l - 1];
            if drop > best_drop {
                best_drop = drop;
                witness = Some((
                    l,
                    leads[w],
                    leads[w + 1],
                    surface[w][l - 1],
                    surface[w + 1][l - 1],
                ));
            }
        }
    }
    let detail = match witness {
        Some((l, a, b, from, to)) => {
            format!("layer {l}: lead {a} -> {b} moves the BWE {from:.6} -> {to:.6}")
        }
        None => "no decreasing pair found".into(),
    };
    report.checks.push(CheckResult::flag(
        "witness_found",
        witness.is_some() && best_drop > 1e-9,
        best_drop,
        detail,
    ));

    let phi1: Vec<f64> = surface.iter().map(|row| row[0]).collect();
    let min_step = min_consecutive_diff(&phi1);
    report.checks.push(CheckResult::flag(
        "first_layer_monotone",
        min_step > 0.0,
        min_step,
        "the first layer rises with its own lead time at every frequency".into(),
    ));

    // One tone: the first layer rises, deeper layers stay constant, so the
    // sweep finds no strict decrease anywhere.
    let single = SpectralProfile::from_components(vec![PI / 4.0], vec![1.0]);
    let mut single_drop = f64::NEG_INFINITY;
    let mut prev: Option<Vec<f64>> = None;
    for &lead in &leads {
        let mut layers = vec![PolicyParams::new(lead, 4)];
        layers.extend(std::iter::repeat_n(PolicyParams::new(1, 1), depth - 1));
        let phis = (1..=depth)
            .map(|l| cascade_layer_bwe(&layers, &single, l))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(prev) = prev {
            for (a, b) in prev.iter().zip(&phis) {
                single_drop = single_drop.max(a - b);
            }
        }
        prev = Some(phis);
    }
    report.checks.push(CheckResult::le(
        "single_tone_no_witness",
        single_drop,
        1e-12,
        "largest decrease across the sweep under one tone".into(),
    ));

    report.notes.push(
        "the sweep fixes every forecast window (first layer P = 4, upper layers P = 1) and \
         varies only the first lead time; with homogeneous windows every layer rises with L, \
         so heterogeneous windows are what make the witness possible"
            .into(),
    );
    Ok(report)
}

/// Structure independence: the four benchmark structures fed independent
/// copies of the same stationary pattern produce matching mean layer
/// curves, all close to the serial analytical curve; with one deterministic
/// demand the curves collapse onto the serial one exactly.
pub fn validate_prop3(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let tol = &config.tolerances;
    let mut report = ValidationReport::new("prop3", config.seed);
    let period = config.horizon;
    let lead = config.lead_time;
    let window = config.window;
    let pattern = table1_pattern(1, period, config.seed);
    let l_max = 8usize;

    // Replication seeds are shared across structures: market node k reuses
    // one noise stream everywhere it exists, so structure comparisons
    // cancel most of the Monte Carlo noise.
    let mut curves = Vec::new();
    for (idx, kind) in TABLE1_KINDS.iter().enumerate() {
        let spec = StructureSpec::new(
            *kind,
            table1_widths(*kind),
            0.25,
            subseed(config.seed, idx as u64),
        );
        let net = generate_structure(&spec, lead, window)?;
        let cell_curves =
            run_structure_cell(&net, &pattern, period, config.replications, config.seed)?;
        curves.push((*kind, cell_curves));
    }

    let mut spread_max = 0.0f64;
    for l in 0..l_max {
        let values: Vec<f64> = curves.iter().map(|(_, c)| c.empirical_mean[l]).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mid = values.iter().sum::<f64>() / values.len() as f64;
        spread_max = spread_max.max((hi - lo) / mid);
    }
    report.checks.push(CheckResult::le(
        "structure_spread",
        spread_max,
        tol.structure_spread,
        "largest per-layer relative spread across the four structures".into(),
    ));

    // Serial reference: white noise has a flat expected spectrum, so the
    // analytical curve uses equal amplitudes on the window's bin grid.
    let half = period / 2;
    let freqs: Vec<f64> = (1..half).map(|n| TAU * n as f64 / period as f64).collect();
    let flat = SpectralProfile::from_components(freqs, vec![1.0; half - 1]);
    let policy = PolicyParams::new(lead, window);
    let gains = amplification_spectrum(&policy, &flat.frequencies);
    let serial_analytical = (1..=l_max)
        .map(|l| layer_bwe_analytical(&flat, &gains, l))
        .collect::<Result<Vec<f64>>>()?;
    let mut serial_gap = 0.0f64;
    for (_, c) in &curves {
        for (sa, em) in serial_analytical.iter().zip(&c.empirical_mean) {
            serial_gap = serial_gap.max((em - sa).abs() / sa);
        }
    }
    report.checks.push(CheckResult::le(
        "serial_analytical_agreement",
        serial_gap,
        tol.serial_agreement,
        "largest relative gap between mean curves and the serial analytical curve".into(),
    ));

    // Deterministic variant: with sigma = 0 every market node sees the same
    // seasonal sequence and linearity collapses each structure onto the
    // serial curve.
    let mut det_pattern = table1_pattern(2, period, config.seed);
    det_pattern.noise_sd = 0.0;
    let serial = serial_net(9, lead, window)?;
    let serial_curve = run_structure_cell(&serial, &det_pattern, period, 1, config.seed)?;
    let mut det_gap = 0.0f64;
    let mut det_table = Table::new(&["structure", "layer", "phi"]);
    for (idx, kind) in TABLE1_KINDS.iter().enumerate() {
        let spec = StructureSpec::new(
            *kind,
            table1_widths(*kind),
            0.25,
            subseed(config.seed, idx as u64),
        );
        let net = generate_structure(&spec, lead, window)?;
        let c = run_structure_cell(&net, &det_pattern, period, 1, config.seed)?;
        det_gap = det_gap.max(max_abs_gap(&c.empirical_mean, &serial_curve.empirical_mean));
        for l in 0..l_max {
            det_table.push_row(vec![
                format!("{kind:?}"),
                (l + 1).to_string(),
                cell(c.empirical_mean[l]),
            ]);
        }
    }
    report.checks.push(CheckResult::le(
        "deterministic_equality",
        det_gap,
        tol.rmse_deterministic,
        "identical deterministic demands collapse all structures onto the serial curve".into(),
    ));
    report
        .tables
        .insert("deterministic_curves".into(), det_table);

    let mut table = Table::new(&[
        "structure",
        "layer",
        "serial_analytical",
        "empirical_mean",
        "empirical_sd",
    ]);
    for (kind, c) in &curves {
        for (l, sa) in serial_analytical.iter().enumerate() {
            table.push_row(vec![
                format!("{kind:?}"),
                (l + 1).to_string(),
                cell(*sa),
                cell(c.empirical_mean[l]),
                cell(c.empirical_sd[l]),
            ]);
        }
    }
    report.tables.insert("curves".into(), table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            replications: 8,
            horizon: 400,
            warmup: 100,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn prop1_passes_at_desk_scale() {
        let config = ExperimentConfig {
            horizon: 1000,
            ..quick_config()
        };
        let report = validate_prop1(&config).unwrap();
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.measured);
        }
        assert_eq!(report.tables["layer_curve"].rows.len(), 16);
    }

    #[test]
    fn prop2_finds_a_deep_witness_and_none_on_layer_one() {
        let report = validate_prop2(&quick_config()).unwrap();
        assert!(report.passed());
        let witness = report
            .checks
            .iter()
            .find(|c| c.name == "witness_found")
            .unwrap();
        assert!(witness.measured > 0.1, "drop {}", witness.measured);
    }

    // Full prop3 runs live in the acceptance suite; here a reduced setup
    // exercises the pipeline plumbing end to end.
    #[test]
    fn prop3_reduced_run_stays_structure_free() {
        let config = ExperimentConfig {
            replications: 6,
            horizon: 400,
            warmup: 100,
            tolerances: crate::experiments::Tolerances {
                structure_spread: 0.05,
                serial_agreement: 0.05,
                ..Default::default()
            },
            ..ExperimentConfig::default()
        };
        let report = validate_prop3(&config).unwrap();
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.measured);
        }
    }
}
