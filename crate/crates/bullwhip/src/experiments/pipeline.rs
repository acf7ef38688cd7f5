//! Replication engines behind the table reproduction and the structure
//! validators. The periodic pipeline tiles one noise realization so the
//! post-warm-up window is exactly periodic: the empirical variances and the
//! analytical sums then see the same finite spectrum and agree to floating
//! point. The plain pipeline mirrors the original fresh-noise protocol and
//! is reported without a gate.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::demand::{trend_variance, DemandModel};
use crate::dynamics::simulate;
use crate::error::{Error, Result};
use crate::metrics::{layer_totals, rmse};
use crate::rng::subseed;
use crate::spectral::{
    amplification_spectrum, dft_amplitudes, layer_bwe_with_trend, SpectralProfile,
};
use crate::stats;
use crate::topology::{assign_layers, LayerAssignment, SupplyNetwork};

/// Mean analytical and empirical layer curves over replications, layers
/// 1..=len, with the RMSE between the two means.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerCurves {
    pub analytical: Vec<f64>,
    pub empirical_mean: Vec<f64>,
    pub empirical_sd: Vec<f64>,
    pub rmse: f64,
    pub replications: usize,
}

fn aggregate(reps: Vec<(Vec<f64>, Vec<f64>)>, l_max: usize) -> Result<LayerCurves> {
    let n = reps.len();
    let mut analytical = vec![0.0; l_max];
    let mut per_layer: Vec<Vec<f64>> = vec![Vec::with_capacity(n); l_max];
    for (ana, emp) in &reps {
        for l in 0..l_max {
            analytical[l] += ana[l] / n as f64;
            per_layer[l].push(emp[l]);
        }
    }
    let mut empirical_mean = Vec::with_capacity(l_max);
    let mut empirical_sd = Vec::with_capacity(l_max);
    for xs in &per_layer {
        let (mean, sd) = stats::mean_and_sample_sd(xs);
        empirical_mean.push(mean);
        empirical_sd.push(sd);
    }
    let rmse = rmse(&analytical, &empirical_mean)?;
    Ok(LayerCurves {
        analytical,
        empirical_mean,
        empirical_sd,
        rmse,
        replications: n,
    })
}

fn unique_assignment(net: &SupplyNetwork) -> Result<LayerAssignment> {
    let assignment = assign_layers(net)?;
    if !assignment.unique {
        return Err(Error::NonUniqueLayers);
    }
    Ok(assignment)
}

/// Chained layer estimates from a window variance profile: the measured
/// series are the market total followed by each layer's outgoing total, so
/// consecutive variance ratios are the layer BWEs.
fn chained_phis(variances: &[f64]) -> Result<Vec<f64>> {
    let mut phis = Vec::with_capacity(variances.len() - 1);
    for pair in variances.windows(2) {
        if pair[0] <= 0.0 {
            return Err(Error::ZeroInputVariance);
        }
        phis.push((pair[1] / pair[0]).sqrt());
    }
    Ok(phis)
}

/// Periodic pipeline for one (structure, demand pattern) cell. The trend
/// component enters both sides analytically: each market node contributes
/// slope `pattern.trend`, every layer total carries the coherent sum, and
/// the per-window trend variance tau lifts numerator and denominator alike.
pub fn run_structure_cell(
    net: &SupplyNetwork,
    pattern: &DemandModel,
    period: usize,
    replications: usize,
    seed: u64,
) -> Result<LayerCurves> {
    pattern.validate()?;
    let assignment = unique_assignment(net)?;
    let l_max = assignment.n_layers() - 1;
    if l_max == 0 {
        return Err(Error::Config("need at least one measurable layer".into()));
    }
    let policy = net.homogeneous_policy().ok_or_else(|| {
        Error::Config("the periodic pipeline needs one shared (L, P) policy".into())
    })?;
    let window = policy.window as usize;
    if period <= window + 1 || !period.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "period {period} must be even and exceed the forecast window plus one"
        )));
    }
    let markets = &net.market_nodes;
    let m = markets.len() as f64;
    let tau = trend_variance(pattern.trend, period);
    let boost = m * m * tau;
    let horizon = 2 * period;
    let demand_len = horizon + window + 1;

    let runs: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = subseed(seed, rep as u64);
            let mut bases: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            let mut demands: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &node in markets {
                let model = DemandModel::parametric(
                    pattern.base,
                    0.0,
                    pattern.seasonal.clone(),
                    pattern.noise_sd,
                    period,
                    subseed(rep_seed, node as u64),
                );
                let base = model.generate()?;
                let tiled: Vec<f64> = base.iter().cycle().take(demand_len).copied().collect();
                bases.insert(node, base);
                demands.insert(node, tiled);
            }
            let trace = simulate(net, &demands, horizon, period)?;

            // Window variances: market total first, then each layer's
            // outgoing total, all over the second (exactly periodic) tile.
            let mut variances = Vec::with_capacity(l_max + 1);
            let (market_in, _) = layer_totals(&trace, &assignment, 1)?;
            variances.push(stats::variance_excluding_nyquist(&market_in[period..]) + boost);
            for l in 1..=l_max {
                let (_, out) = layer_totals(&trace, &assignment, l)?;
                variances.push(stats::variance_excluding_nyquist(&out[period..]) + boost);
            }
            let empirical = chained_phis(&variances)?;

            // The analytical curve uses the realized total-demand spectrum,
            // so both routes describe the same finite window.
            let mut total_base = vec![0.0; period];
            for base in bases.values() {
                for (acc, &x) in total_base.iter_mut().zip(base) {
                    *acc += x;
                }
            }
            let profile = dft_amplitudes(&total_base)?;
            let gains = amplification_spectrum(&policy, &profile.frequencies);
            let analytical = (1..=l_max)
                .map(|l| layer_bwe_with_trend(&profile, &gains, l, tau, markets.len()))
                .collect::<Result<Vec<f64>>>()?;
            Ok((analytical, empirical))
        })
        .collect();

    aggregate(runs.into_iter().collect::<Result<Vec<_>>>()?, l_max)
}

/// Expected amplitude spectrum of a demand pattern over a fresh window of
/// length `window_len`: seasonal lines on their bins plus the white-noise
/// floor. Seasonal terms that land on the mean or Nyquist bin (including
/// the integer frequencies that vanish at integer sampling) contribute
/// nothing.
fn model_spectrum(pattern: &DemandModel, window_len: usize) -> SpectralProfile {
    let half = window_len / 2;
    let noise_floor = 4.0 * pattern.noise_sd * pattern.noise_sd / window_len as f64;
    let mut power: Vec<f64> = vec![noise_floor; half - 1];
    for s in &pattern.seasonal {
        let pos = s.frequency * window_len as f64;
        let bin = pos.round() as usize;
        if (pos - pos.round()).abs() < 1e-9 && bin >= 1 && bin < half {
            power[bin - 1] += s.amplitude * s.amplitude;
        }
    }
    let frequencies = (1..half)
        .map(|n| std::f64::consts::TAU * n as f64 / window_len as f64)
        .collect();
    SpectralProfile::from_components(frequencies, power.iter().map(|p| p.sqrt()).collect())
}

/// Fresh-noise pipeline for one cell: independent noise each period, plain
/// post-warm-up variances, and an analytical curve from the pattern's
/// expected spectrum. Agreement is statistical, not exact; callers report
/// its RMSE without a gate.
pub fn run_plain_cell(
    net: &SupplyNetwork,
    pattern: &DemandModel,
    horizon: usize,
    warmup: usize,
    replications: usize,
    seed: u64,
) -> Result<LayerCurves> {
    pattern.validate()?;
    let assignment = unique_assignment(net)?;
    let l_max = assignment.n_layers() - 1;
    if l_max == 0 {
        return Err(Error::Config("need at least one measurable layer".into()));
    }
    let policy = net
        .homogeneous_policy()
        .ok_or_else(|| Error::Config("the plain pipeline needs one shared (L, P) policy".into()))?;
    let window_len = horizon - warmup;
    if window_len < 4 || !window_len.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "measurement window {window_len} must be even and at least 4"
        )));
    }
    let markets = &net.market_nodes;
    let tau = trend_variance(pattern.trend, window_len);
    let demand_len = horizon + policy.window as usize + 1;

    let profile = model_spectrum(pattern, window_len);
    let gains = amplification_spectrum(&policy, &profile.frequencies);
    let analytical = (1..=l_max)
        .map(|l| layer_bwe_with_trend(&profile, &gains, l, tau, markets.len()))
        .collect::<Result<Vec<f64>>>()?;

    let runs: Vec<Result<Vec<f64>>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = subseed(seed, rep as u64);
            let mut demands: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &node in markets {
                let model = DemandModel::parametric(
                    pattern.base,
                    pattern.trend,
                    pattern.seasonal.clone(),
                    pattern.noise_sd,
                    demand_len,
                    subseed(rep_seed, node as u64),
                );
                demands.insert(node, model.generate()?);
            }
            let trace = simulate(net, &demands, horizon, warmup)?;
            empirical_chain(&trace, &assignment, l_max, warmup)
        })
        .collect();

    let per_rep = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let paired = per_rep
        .into_iter()
        .map(|emp| (analytical.clone(), emp))
        .collect();
    aggregate(paired, l_max)
}

/// Plain post-window empirical layer chain: population variances of the
/// market total and each layer's outgoing total over `[from..]`, turned
/// into consecutive-ratio BWE estimates.
pub(crate) fn empirical_chain(
    trace: &crate::dynamics::SimulationTrace,
    assignment: &LayerAssignment,
    l_max: usize,
    from: usize,
) -> Result<Vec<f64>> {
    let mut variances = Vec::with_capacity(l_max + 1);
    let (market_in, _) = layer_totals(trace, assignment, 1)?;
    variances.push(stats::population_variance(&market_in[from..]));
    for l in 1..=l_max {
        let (_, out) = layer_totals(trace, assignment, l)?;
        variances.push(stats::population_variance(&out[from..]));
    }
    chained_phis(&variances)
}

/// Largest absolute difference between matched curve entries.
pub(crate) fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
