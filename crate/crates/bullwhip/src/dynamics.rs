//! Time-domain simulation of the order-up-to dynamics, on general networks
//! and in the serial closed form. Orders at period t derive from incoming
//! demand at t−1 back through t−P−1; history before period 1 is zero.
//!
//! Orders and inventories are recomputed from fresh history windows every
//! period instead of running accumulators, so a width-1 network reproduces
//! the serial closed form bit for bit and superposition holds to the last
//! ulp.

use std::collections::BTreeMap;
use std::io;

use crate::error::{Error, Result};
use crate::topology::SupplyNetwork;

/// Full record of one simulation run. All per-period sequences are 0-based:
/// index k holds period t = k+1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub horizon: usize,
    pub warmup: usize,
    /// inventory[node][k].
    pub inventory: Vec<Vec<f64>>,
    /// Per-link order sequences y_ij, keyed (from, to).
    pub orders: BTreeMap<(usize, usize), Vec<f64>>,
    /// External demand per market node, truncated to the horizon.
    pub market_inputs: BTreeMap<usize, Vec<f64>>,
    /// Total incoming demand per node: downstream orders plus market input.
    pub in_totals: Vec<Vec<f64>>,
    /// Total outgoing orders per node; zero for source nodes.
    pub out_totals: Vec<Vec<f64>>,
}

impl SimulationTrace {
    pub fn order_series(&self, from: usize, to: usize) -> Option<&[f64]> {
        self.orders.get(&(from, to)).map(Vec::as_slice)
    }

    /// Slice of a trace sequence past the warm-up.
    pub fn post_warmup<'a>(&self, seq: &'a [f64]) -> &'a [f64] {
        &seq[self.warmup..]
    }
}

/// Serial closed form: out[k] = (L/P)(in[k−1] − in[k−P−1]) + in[k−1], with
/// out-of-range history read as zero. Output matches the input length.
pub fn simulate_serial(lead_time: u32, window: u32, input: &[f64]) -> Vec<f64> {
    assert!(window >= 1, "window must be at least 1");
    let ratio = f64::from(lead_time) / f64::from(window);
    let p = window as usize;
    let at = |k: isize| -> f64 {
        if k >= 0 {
            input[k as usize]
        } else {
            0.0
        }
    };
    (0..input.len() as isize)
        .map(|k| ratio * (at(k - 1) - at(k - p as isize - 1)) + at(k - 1))
        .collect()
}

/// Order-up-to dynamics on a network. Every market node needs a demand
/// sequence of at least horizon + max window + 1 values; the first horizon
/// of them drive the run.
pub fn simulate(
    net: &SupplyNetwork,
    demands: &BTreeMap<usize, Vec<f64>>,
    horizon: usize,
    warmup: usize,
) -> Result<SimulationTrace> {
    net.validate()?;
    if warmup >= horizon {
        return Err(Error::Config(format!(
            "warmup {warmup} must be below the horizon {horizon}"
        )));
    }
    let max_window = *net.window.iter().max().expect("nonempty network") as usize;
    let needed = horizon + max_window + 1;
    for &m in &net.market_nodes {
        let got = demands
            .get(&m)
            .ok_or_else(|| {
                Error::InvalidDemand(format!(
                    "market node {:?} has no demand sequence",
                    net.labels[m]
                ))
            })?
            .len();
        if got < needed {
            return Err(Error::DemandTooShort {
                node: net.labels[m].clone(),
                needed,
                got,
            });
        }
    }
    if let Some(&k) = demands.keys().find(|k| !net.is_market(**k)) {
        return Err(Error::InvalidDemand(format!(
            "demand given for non-market node index {k}"
        )));
    }

    let n = net.n_nodes();
    let out_links: Vec<Vec<usize>> = (0..n).map(|i| net.out_neighbors(i)).collect();
    let in_links: Vec<Vec<usize>> = (0..n).map(|j| net.in_neighbors(j)).collect();
    let is_source: Vec<bool> = (0..n).map(|i| out_links[i].is_empty()).collect();

    // Period-indexed state: slot t holds period t, slot 0 stays zero.
    let mut incoming = vec![vec![0.0; horizon + 1]; n];
    let mut out_total = vec![vec![0.0; horizon + 1]; n];
    let mut inventory = vec![vec![0.0; horizon + 1]; n];
    let mut drained = vec![0.0; n];

    for t in 1..=horizon {
        for i in 0..n {
            if is_source[i] {
                continue;
            }
            let ratio = f64::from(net.lead_time[i]) / f64::from(net.window[i]);
            let p = net.window[i] as usize;
            let d = |u: isize| -> f64 {
                if u >= 1 {
                    incoming[i][u as usize]
                } else {
                    0.0
                }
            };
            let t = t as isize;
            out_total[i][t as usize] = ratio * (d(t - 1) - d(t - p as isize - 1)) + d(t - 1);
        }
        for j in 0..n {
            let mut total = if net.is_market(j) {
                demands[&j][t - 1]
            } else {
                0.0
            };
            for &i in &in_links[j] {
                total += net.weights[i][j] * out_total[i][t];
            }
            incoming[j][t] = total;
        }
        for i in 0..n {
            if is_source[i] {
                // Sources never replenish; their stock only drains.
                drained[i] += incoming[i][t];
                inventory[i][t] = -drained[i];
                continue;
            }
            let l = net.lead_time[i] as usize;
            let p = net.window[i] as usize;
            let ratio = f64::from(net.lead_time[i]) / f64::from(net.window[i]);
            let d = |u: isize| -> f64 {
                if u >= 1 {
                    incoming[i][u as usize]
                } else {
                    0.0
                }
            };
            let t = t as isize;
            // x(t) = L·MA(t−L) − Σ_{u=t−L..t} d(u): goods ordered up to the
            // level set L periods ago, minus demand served since.
            let base: f64 = (1..=p as isize).map(|s| d(t - l as isize - s)).sum::<f64>() * ratio;
            let served: f64 = (t - l as isize..=t).map(&d).sum();
            inventory[i][t as usize] = base - served;
        }
    }

    let strip = |v: &[f64]| v[1..].to_vec();
    let mut orders = BTreeMap::new();
    for i in 0..n {
        for &j in &out_links[i] {
            let w = net.weights[i][j];
            orders.insert((i, j), (1..=horizon).map(|t| w * out_total[i][t]).collect());
        }
    }
    let market_inputs = net
        .market_nodes
        .iter()
        .map(|&m| (m, demands[&m][..horizon].to_vec()))
        .collect();
    Ok(SimulationTrace {
        horizon,
        warmup,
        inventory: inventory.iter().map(|v| strip(v)).collect(),
        orders,
        market_inputs,
        in_totals: incoming.iter().map(|v| strip(v)).collect(),
        out_totals: out_total.iter().map(|v| strip(v)).collect(),
    })
}

/// Long-format order log: t, from, to, order, with an optional leading
/// replication column.
pub fn write_orders_csv<W: io::Write>(
    trace: &SimulationTrace,
    net: &SupplyNetwork,
    rep: Option<usize>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match rep {
        Some(_) => w.write_record(["rep", "t", "from", "to", "order"])?,
        None => w.write_record(["t", "from", "to", "order"])?,
    }
    for (&(i, j), seq) in &trace.orders {
        for (k, y) in seq.iter().enumerate() {
            let row = [
                (k + 1).to_string(),
                net.labels[i].clone(),
                net.labels[j].clone(),
                y.to_string(),
            ];
            match rep {
                Some(r) => w.write_record(std::iter::once(r.to_string()).chain(row))?,
                None => w.write_record(&row)?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Long-format inventory log: t, node, inventory.
pub fn write_inventory_csv<W: io::Write>(
    trace: &SimulationTrace,
    net: &SupplyNetwork,
    rep: Option<usize>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match rep {
        Some(_) => w.write_record(["rep", "t", "node", "inventory"])?,
        None => w.write_record(["t", "node", "inventory"])?,
    }
    for (i, seq) in trace.inventory.iter().enumerate() {
        for (k, x) in seq.iter().enumerate() {
            let row = [(k + 1).to_string(), net.labels[i].clone(), x.to_string()];
            match rep {
                Some(r) => w.write_record(std::iter::once(r.to_string()).chain(row))?,
                None => w.write_record(&row)?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_structure, StructureKind, StructureSpec};
    use approx::assert_relative_eq;

    fn chain(layers: usize, lead: u32, window: u32) -> SupplyNetwork {
        let spec = StructureSpec::new(StructureKind::Serial, vec![1; layers], 0.0, 0);
        generate_structure(&spec, lead, window).unwrap()
    }

    fn demand_map(net: &SupplyNetwork, seq: &[f64]) -> BTreeMap<usize, Vec<f64>> {
        net.market_nodes
            .iter()
            .map(|&m| (m, seq.to_vec()))
            .collect()
    }

    #[test]
    fn serial_impulse_response() {
        let input = [1.0, 0.0, 0.0, 0.0, 0.0];
        let out = simulate_serial(1, 1, &input);
        assert_eq!(out, vec![0.0, 2.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn serial_constant_reaches_fixed_point() {
        let input = vec![3.5; 30];
        let out = simulate_serial(4, 2, &input);
        for (k, &o) in out.iter().enumerate().skip(3) {
            assert_eq!(o, 3.5, "period {}", k + 1);
        }
    }

    #[test]
    fn serial_trend_passes_through_shifted() {
        let input: Vec<f64> = (1..=40).map(|t| 2.0 * t as f64).collect();
        let out = simulate_serial(4, 2, &input);
        for (k, &o) in out.iter().enumerate().skip(3) {
            assert_relative_eq!(o, 2.0 * (k + 1) as f64 + 6.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn network_matches_serial_closed_form_exactly() {
        let net = chain(4, 4, 2);
        let horizon = 200;
        let seq: Vec<f64> = (0..horizon + 3)
            .map(|k| (k as f64 * 0.37).sin() * 10.0 + 0.5 * k as f64)
            .collect();
        let trace = simulate(&net, &demand_map(&net, &seq), horizon, 10).unwrap();

        let mut stage = seq[..horizon].to_vec();
        for depth in 0..3 {
            let out = simulate_serial(4, 2, &stage);
            let link = trace.order_series(depth, depth + 1).unwrap();
            assert_eq!(link, &out[..], "depth {depth}");
            stage = out;
        }
    }

    #[test]
    fn constant_demand_fixed_point_on_network() {
        let spec = StructureSpec::new(StructureKind::Div2Conv, vec![1, 3, 1], 0.4, 3);
        let net = generate_structure(&spec, 4, 2).unwrap();
        let trace = simulate(&net, &demand_map(&net, &vec![8.0; 64]), 60, 20).unwrap();
        // Steady state: every link order is frozen, each transient node's
        // total out equals its total in, and inventories stay flat.
        for seq in trace.orders.values() {
            for k in 20..60 {
                assert_relative_eq!(seq[k], seq[19], epsilon = 1e-9);
            }
        }
        for i in 0..net.n_nodes() {
            if net.source_nodes.binary_search(&i).is_ok() {
                continue;
            }
            for k in 20..60 {
                assert_relative_eq!(
                    trace.inventory[i][k],
                    trace.inventory[i][19],
                    epsilon = 1e-9
                );
                assert_relative_eq!(
                    trace.out_totals[i][k],
                    trace.in_totals[i][k],
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn superposition_holds_to_last_ulp() {
        let net = chain(3, 3, 4);
        let horizon = 120;
        let d1: Vec<f64> = (0..horizon + 5).map(|k| (k as f64 * 0.61).sin()).collect();
        let d2: Vec<f64> = (0..horizon + 5)
            .map(|k| (k as f64 * 0.17).cos() * 2.0)
            .collect();
        let combined: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| 2.0 * a + 0.5 * b).collect();

        let t1 = simulate(&net, &demand_map(&net, &d1), horizon, 0).unwrap();
        let t2 = simulate(&net, &demand_map(&net, &d2), horizon, 0).unwrap();
        let tc = simulate(&net, &demand_map(&net, &combined), horizon, 0).unwrap();

        for (key, seq) in &tc.orders {
            let s1 = &t1.orders[key];
            let s2 = &t2.orders[key];
            for k in 0..horizon {
                let expect = 2.0 * s1[k] + 0.5 * s2[k];
                assert!((seq[k] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }
        for i in 0..net.n_nodes() {
            for k in 0..horizon {
                let expect = 2.0 * t1.inventory[i][k] + 0.5 * t2.inventory[i][k];
                assert!((tc.inventory[i][k] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn trend_input_keeps_variance_across_links() {
        use crate::stats::population_variance;
        let net = chain(3, 4, 2);
        let horizon = 400;
        let warmup = 100;
        let seq: Vec<f64> = (1..=horizon + 3).map(|t| 5.0 + 0.3 * t as f64).collect();
        let trace = simulate(&net, &demand_map(&net, &seq), horizon, warmup).unwrap();
        let input_var = population_variance(trace.post_warmup(&trace.in_totals[0]));
        for link in trace.orders.values() {
            let var = population_variance(trace.post_warmup(link));
            assert_relative_eq!(var, input_var, max_relative = 1e-9);
        }
    }

    #[test]
    fn short_demand_is_rejected_with_requirement() {
        let net = chain(2, 1, 3);
        let err = simulate(&net, &demand_map(&net, &vec![1.0; 50]), 50, 5).unwrap_err();
        match err {
            Error::DemandTooShort { needed, got, .. } => {
                assert_eq!(needed, 54);
                assert_eq!(got, 50);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_and_extra_demands_are_rejected() {
        let net = chain(2, 1, 1);
        let err = simulate(&net, &BTreeMap::new(), 10, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidDemand(_)));

        let mut demands = demand_map(&net, &[1.0; 20]);
        demands.insert(1, vec![1.0; 20]);
        let err = simulate(&net, &demands, 10, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidDemand(_)));
    }

    #[test]
    fn orders_csv_layout() {
        let net = chain(2, 1, 1);
        let trace = simulate(&net, &demand_map(&net, &[2.0; 10]), 6, 1).unwrap();
        let mut buf = Vec::new();
        write_orders_csv(&trace, &net, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,from,to,order\n"));
        assert_eq!(text.lines().count(), 7);

        let mut buf = Vec::new();
        write_inventory_csv(&trace, &net, Some(3), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rep,t,node,inventory\n"));
        assert!(text.lines().skip(1).all(|l| l.starts_with("3,")));
    }
}
