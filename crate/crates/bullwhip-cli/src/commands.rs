//! Implementations of the data-producing subcommands: `simulate`,
//! `analyze`, and `export`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use bullwhip::absorbing::node_to_node_bwe;
use bullwhip::dynamics::{simulate, SimulationTrace};
use bullwhip::experiments::{run_plain_cell, ExperimentConfig, Table};
use bullwhip::metrics::{
    layer_bwe_empirical, node_bwe_empirical, BweReport, LayerBwe, NodeBwe, NodeToNodeBwe,
    ReportMeta,
};
use bullwhip::rng::subseed;
use bullwhip::spectral::{amplification_rate, amplification_spectrum, dft_amplitudes};
use bullwhip::topology::{assign_layers, SupplyNetwork};
use bullwhip::Result;

use crate::output::announce;
use crate::svg::table_chart;
use crate::Format;

/// Per-market demand sequences: the configured model re-seeded per node so
/// markets draw independent copies, each long enough for every forecast
/// window in the network.
fn market_demands(
    config: &ExperimentConfig,
    net: &SupplyNetwork,
    rep_seed: u64,
) -> Result<BTreeMap<usize, Vec<f64>>> {
    let len = config.horizon + *net.window.iter().max().unwrap_or(&1) as usize + 1;
    let mut demands = BTreeMap::new();
    for &node in &net.market_nodes {
        let mut model = config.demand.clone();
        model.horizon = len;
        model.seed = subseed(rep_seed, node as u64);
        demands.insert(node, model.generate()?);
    }
    Ok(demands)
}

fn write_table(dir: &Path, name: &str, table: &Table, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    table.write_csv(fs::File::create(&path)?)?;
    written.push(path);
    Ok(())
}

/// One simulation run: a console summary of the layer-wise BWE chain plus,
/// with `--out-dir`, the full trace as CSV files.
pub fn run_simulate(
    config: &ExperimentConfig,
    net: &SupplyNetwork,
    out_dir: Option<&Path>,
) -> Result<()> {
    let demands = market_demands(config, net, subseed(config.seed, 0))?;
    let trace = simulate(net, &demands, config.horizon, config.warmup)?;
    println!(
        "simulated {} nodes / {} links over {} periods (warm-up {}, seed {})",
        net.n_nodes(),
        net.link_count(),
        config.horizon,
        config.warmup,
        config.seed
    );
    let assignment = assign_layers(net)?;
    if assignment.unique {
        for l in 1..assignment.n_layers() {
            let phi = layer_bwe_empirical(&trace, &assignment, l)?;
            println!("layer {l}: empirical BWE {phi:.6}");
        }
    } else {
        println!(
            "note: layer positions are not unique, so layer-wise BWE is undefined; \
             `analyze` reports node-to-node values instead"
        );
    }
    match out_dir {
        Some(dir) => announce(&write_trace(&trace, net, dir)?),
        None => println!("hint: pass --out-dir to write the trace CSVs"),
    }
    Ok(())
}

fn write_trace(trace: &SimulationTrace, net: &SupplyNetwork, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut inv_cols: Vec<&str> = vec!["t"];
    inv_cols.extend(net.labels.iter().map(String::as_str));
    let mut inventory = Table::new(&inv_cols);
    for k in 0..trace.horizon {
        let mut row = vec![(k + 1).to_string()];
        row.extend((0..net.n_nodes()).map(|i| trace.inventory[i][k].to_string()));
        inventory.push_row(row);
    }
    write_table(dir, "inventory.csv", &inventory, &mut written)?;

    let link_names: Vec<String> = trace
        .orders
        .keys()
        .map(|&(i, j)| format!("{}->{}", net.labels[i], net.labels[j]))
        .collect();
    let mut order_cols: Vec<&str> = vec!["t"];
    order_cols.extend(link_names.iter().map(String::as_str));
    let mut orders = Table::new(&order_cols);
    for k in 0..trace.horizon {
        let mut row = vec![(k + 1).to_string()];
        row.extend(trace.orders.values().map(|series| series[k].to_string()));
        orders.push_row(row);
    }
    write_table(dir, "orders.csv", &orders, &mut written)?;

    let market_names: Vec<String> = trace
        .market_inputs
        .keys()
        .map(|&m| net.labels[m].clone())
        .collect();
    let mut market_cols: Vec<&str> = vec!["t"];
    market_cols.extend(market_names.iter().map(String::as_str));
    let mut markets = Table::new(&market_cols);
    for k in 0..trace.horizon {
        let mut row = vec![(k + 1).to_string()];
        row.extend(trace.market_inputs.values().map(|seq| seq[k].to_string()));
        markets.push_row(row);
    }
    write_table(dir, "market_inputs.csv", &markets, &mut written)?;

    Ok(written)
}

/// Spectra, amplification gains, and the BWE report: replicated layer
/// curves, per-node empirical gains, and absorbing-chain node-to-node
/// values on the realized demand spectrum.
pub fn run_analyze(
    config: &ExperimentConfig,
    net: &SupplyNetwork,
    structure_label: &str,
    out_dir: Option<&Path>,
    format: Format,
) -> Result<()> {
    let assignment = assign_layers(net)?;
    let policy = net.homogeneous_policy();

    // Replicated layer curves need unique layers and one shared policy.
    let mut layers = Vec::new();
    let mut curve_rmse = 0.0;
    if assignment.unique && policy.is_some() {
        let curves = run_plain_cell(
            net,
            &config.demand,
            config.horizon,
            config.warmup,
            config.replications,
            config.seed,
        )?;
        for (i, &analytical) in curves.analytical.iter().enumerate() {
            layers.push(LayerBwe {
                layer: i + 1,
                analytical,
                empirical_mean: curves.empirical_mean[i],
                empirical_sd: curves.empirical_sd[i],
                replications: curves.replications,
            });
        }
        curve_rmse = curves.rmse;
    } else {
        println!(
            "note: layer curves skipped ({})",
            if assignment.unique {
                "the network mixes (L, P) policies"
            } else {
                "layer positions are not unique"
            }
        );
    }

    // One trace drives the node BWEs and the realized demand spectrum.
    let demands = market_demands(config, net, subseed(config.seed, 0))?;
    let trace = simulate(net, &demands, config.horizon, config.warmup)?;
    let mut nodes = Vec::new();
    for i in 0..net.n_nodes() {
        if net.out_neighbors(i).is_empty() {
            continue;
        }
        nodes.push(NodeBwe {
            node: net.labels[i].clone(),
            phi: node_bwe_empirical(&trace, net, i)?,
        });
    }

    // Total market demand past the warm-up, trimmed to an even window.
    let mut total = vec![0.0; config.horizon - config.warmup];
    for seq in trace.market_inputs.values() {
        for (acc, &x) in total.iter_mut().zip(&seq[config.warmup..]) {
            *acc += x;
        }
    }
    if total.len() % 2 == 1 {
        total.pop();
    }
    let profile = dft_amplitudes(&total)?;

    let mut node_to_node = Vec::new();
    for &market in &net.market_nodes {
        for &sink in &net.source_nodes {
            node_to_node.push(NodeToNodeBwe {
                market: net.labels[market].clone(),
                sink: net.labels[sink].clone(),
                phi: node_to_node_bwe(net, market, sink, &profile)?,
            });
        }
    }

    let report = BweReport {
        meta: ReportMeta {
            structure: structure_label.into(),
            demand: config.demand.label().into(),
            lead_time: policy.map(|p| p.lead_time).unwrap_or(config.lead_time),
            window: policy.map(|p| p.window).unwrap_or(config.window),
            horizon: config.horizon,
            warmup: config.warmup,
            replications: config.replications,
            seed: config.seed,
        },
        layers,
        nodes,
        node_to_node,
        rmse: curve_rmse,
    };

    for l in &report.layers {
        println!(
            "layer {}: analytical {:.6}, empirical {:.6} +/- {:.6} ({} reps)",
            l.layer, l.analytical, l.empirical_mean, l.empirical_sd, l.replications
        );
    }
    if !report.layers.is_empty() {
        println!("layer-curve rmse: {:.3e}", report.rmse);
    }
    for entry in &report.node_to_node {
        println!(
            "node-to-node {} -> {}: {:.6}",
            entry.market, entry.sink, entry.phi
        );
    }

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let report_path = dir.join("bwe_report.json");
        fs::write(&report_path, report.to_json_string()?)?;
        written.push(report_path);

        let mut spectrum = Table::new(&["omega", "amplitude"]);
        for (omega, amplitude) in profile.frequencies.iter().zip(&profile.amplitudes) {
            spectrum.push_row(vec![omega.to_string(), amplitude.to_string()]);
        }
        let mut tables: Vec<(&str, Table)> = vec![("spectrum.csv", spectrum)];

        if let Some(policy) = policy {
            let mut gain_curve = Table::new(&["omega", "gain"]);
            for k in 0..=256 {
                let omega = PI * k as f64 / 256.0;
                gain_curve.push_row(vec![
                    omega.to_string(),
                    amplification_rate(&policy, omega).to_string(),
                ]);
            }
            let mut tone_gains = Table::new(&["omega", "amplitude", "gain"]);
            let gains = amplification_spectrum(&policy, &profile.frequencies);
            for ((omega, amplitude), gain) in profile
                .frequencies
                .iter()
                .zip(&profile.amplitudes)
                .zip(&gains)
            {
                tone_gains.push_row(vec![
                    omega.to_string(),
                    amplitude.to_string(),
                    gain.to_string(),
                ]);
            }
            tables.push(("gain_curve.csv", gain_curve));
            tables.push(("tone_gains.csv", tone_gains));
        }

        if !report.layers.is_empty() {
            let mut layer_table =
                Table::new(&["layer", "analytical", "empirical_mean", "empirical_sd"]);
            for l in &report.layers {
                layer_table.push_row(vec![
                    l.layer.to_string(),
                    l.analytical.to_string(),
                    l.empirical_mean.to_string(),
                    l.empirical_sd.to_string(),
                ]);
            }
            tables.push(("layers.csv", layer_table));
        }

        let mut node_table = Table::new(&["node", "phi"]);
        for n in &report.nodes {
            node_table.push_row(vec![n.node.clone(), n.phi.to_string()]);
        }
        tables.push(("node_bwe.csv", node_table));

        let mut pair_table = Table::new(&["market", "sink", "phi"]);
        for e in &report.node_to_node {
            pair_table.push_row(vec![e.market.clone(), e.sink.clone(), e.phi.to_string()]);
        }
        tables.push(("node_to_node.csv", pair_table));

        for (name, table) in &tables {
            if format == Format::Csv {
                write_table(dir, name, table, &mut written)?;
            }
            let stem = name.trim_end_matches(".csv");
            if let Some(svg) = table_chart(stem, table) {
                let path = dir.join(format!("{stem}.svg"));
                fs::write(&path, svg)?;
                written.push(path);
            }
        }
        announce(&written);
    }
    Ok(())
}

/// Writes the network, demand, and normalized config files for a
/// configuration, so a run can be archived or rebuilt elsewhere.
pub fn run_export(config: &ExperimentConfig, net: &SupplyNetwork, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let config_path = dir.join("config.json");
    fs::write(&config_path, config.to_json_string()?)?;
    written.push(config_path);

    let net_path = dir.join("network.json");
    net.save_json(&net_path)?;
    written.push(net_path);

    let mut demand = Table::new(&[config.demand.label()]);
    for x in config.demand.generate()? {
        demand.push_row(vec![x.to_string()]);
    }
    write_table(dir, "demand.csv", &demand, &mut written)?;

    announce(&written);
    Ok(())
}
