//! Empirical BWE estimators over simulation traces, the RMSE comparison
//! against analytical curves, and the report bundle that ties both together.

use std::io;

use serde::{Deserialize, Serialize};

use crate::dynamics::SimulationTrace;
use crate::error::{Error, Result};
use crate::stats;
use crate::topology::{LayerAssignment, SupplyNetwork};

fn variance_ratio_sqrt(v_out: f64, v_in: f64) -> Result<f64> {
    if v_in <= 0.0 {
        return Err(Error::ZeroInputVariance);
    }
    Ok((v_out / v_in).sqrt())
}

/// Node-wise BWE: std of total outgoing orders over std of total incoming
/// demand, both measured past the warm-up.
pub fn node_bwe_empirical(
    trace: &SimulationTrace,
    net: &SupplyNetwork,
    node: usize,
) -> Result<f64> {
    if net.out_neighbors(node).is_empty() {
        return Err(Error::InvalidNetwork(format!(
            "node {} places no orders, so its BWE is undefined",
            net.labels[node]
        )));
    }
    let v_in = stats::population_variance(trace.post_warmup(&trace.in_totals[node]));
    let v_out = stats::population_variance(trace.post_warmup(&trace.out_totals[node]));
    variance_ratio_sqrt(v_out, v_in)
}

/// Full-horizon (in, out) totals summed over the nodes of layer l. Callers
/// choose their own measurement window; `layer_bwe_empirical` strips the
/// warm-up.
pub fn layer_totals(
    trace: &SimulationTrace,
    assignment: &LayerAssignment,
    l: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if l == 0 || l > assignment.n_layers() {
        return Err(Error::Config(format!(
            "layer {} out of range 1..={}",
            l,
            assignment.n_layers()
        )));
    }
    let mut inc = vec![0.0; trace.horizon];
    let mut out = vec![0.0; trace.horizon];
    for &node in &assignment.layers[l - 1] {
        for k in 0..trace.horizon {
            inc[k] += trace.in_totals[node][k];
            out[k] += trace.out_totals[node][k];
        }
    }
    Ok((inc, out))
}

/// Layer-wise BWE: variance ratio of layer-aggregated out-orders to
/// in-orders past the warm-up. Defined only on unique-layer networks.
pub fn layer_bwe_empirical(
    trace: &SimulationTrace,
    assignment: &LayerAssignment,
    l: usize,
) -> Result<f64> {
    if !assignment.unique {
        return Err(Error::NonUniqueLayers);
    }
    let (inc, out) = layer_totals(trace, assignment, l)?;
    let v_in = stats::population_variance(trace.post_warmup(&inc));
    let v_out = stats::population_variance(trace.post_warmup(&out));
    variance_ratio_sqrt(v_out, v_in)
}

/// Root mean squared difference between matched analytical and empirical
/// curves.
pub fn rmse(analytical: &[f64], empirical: &[f64]) -> Result<f64> {
    if analytical.len() != empirical.len() {
        return Err(Error::LengthMismatch {
            left: analytical.len(),
            right: empirical.len(),
        });
    }
    if analytical.is_empty() {
        return Err(Error::Empty("rmse needs at least one entry"));
    }
    let ss: f64 = analytical
        .iter()
        .zip(empirical)
        .map(|(a, e)| (a - e) * (a - e))
        .sum();
    Ok((ss / analytical.len() as f64).sqrt())
}

/// One layer's analytical value next to the replication summary of its
/// empirical estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerBwe {
    pub layer: usize,
    pub analytical: f64,
    pub empirical_mean: f64,
    pub empirical_sd: f64,
    pub replications: usize,
}

impl LayerBwe {
    pub fn from_reps(layer: usize, analytical: f64, estimates: &[f64]) -> Self {
        let (mean, sd) = stats::mean_and_sample_sd(estimates);
        LayerBwe {
            layer,
            analytical,
            empirical_mean: mean,
            empirical_sd: sd,
            replications: estimates.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeBwe {
    pub node: String,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeToNodeBwe {
    pub market: String,
    pub sink: String,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub structure: String,
    pub demand: String,
    pub lead_time: u32,
    pub window: u32,
    pub horizon: usize,
    pub warmup: usize,
    pub replications: usize,
    pub seed: u64,
}

/// Bundle emitted by analyses and reproductions: layer curves, per-node
/// gains, node-to-node entries, and the curve-level RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BweReport {
    pub meta: ReportMeta,
    pub layers: Vec<LayerBwe>,
    #[serde(default)]
    pub nodes: Vec<NodeBwe>,
    #[serde(default)]
    pub node_to_node: Vec<NodeToNodeBwe>,
    pub rmse: f64,
}

impl BweReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_layers_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "layer",
            "analytical",
            "empirical_mean",
            "empirical_sd",
            "replications",
        ])?;
        for row in &self.layers {
            w.write_record([
                row.layer.to_string(),
                row.analytical.to_string(),
                row.empirical_mean.to_string(),
                row.empirical_sd.to_string(),
                row.replications.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::f64::consts::TAU;

    use super::*;
    use crate::dynamics::simulate;
    use crate::spectral::{amplification_rate, PolicyParams};
    use crate::topology::{assign_layers, generate_structure, StructureKind, StructureSpec};

    fn chain(depth: usize, lead_time: u32, window: u32) -> SupplyNetwork {
        let spec = StructureSpec::new(StructureKind::Serial, vec![1; depth], 0.0, 7);
        generate_structure(&spec, lead_time, window).unwrap()
    }

    fn sinusoid(freq: f64, len: usize) -> Vec<f64> {
        (1..=len).map(|t| (TAU * freq * t as f64).sin()).collect()
    }

    #[test]
    fn constant_demand_has_zero_input_variance() {
        let net = chain(3, 1, 1);
        let demands = BTreeMap::from([(0, vec![5.0; 120])]);
        let trace = simulate(&net, &demands, 100, 40).unwrap();
        assert!(matches!(
            node_bwe_empirical(&trace, &net, 0),
            Err(Error::ZeroInputVariance)
        ));
    }

    #[test]
    fn source_node_bwe_is_rejected() {
        let net = chain(3, 1, 1);
        let demands = BTreeMap::from([(0, sinusoid(0.15, 120))]);
        let trace = simulate(&net, &demands, 100, 40).unwrap();
        assert!(matches!(
            node_bwe_empirical(&trace, &net, 2),
            Err(Error::InvalidNetwork(_))
        ));
    }

    // Period-20 input, warm-up past the FIR memory, and a measurement window
    // of whole periods make the empirical ratio match the frequency-domain
    // gain almost exactly.
    #[test]
    fn serial_sinusoid_matches_amplification_rate() {
        let net = chain(3, 2, 4);
        let freq = 0.15;
        let demands = BTreeMap::from([(0, sinusoid(freq, 1010))]);
        let trace = simulate(&net, &demands, 1000, 400).unwrap();
        let omega = TAU * freq;
        let policy = PolicyParams::new(2, 4);
        let phi_market = node_bwe_empirical(&trace, &net, 0).unwrap();
        assert!((phi_market - amplification_rate(&policy, omega)).abs() < 1e-9);
        // The mid node sees the market node's output, again a pure sinusoid.
        let phi_mid = node_bwe_empirical(&trace, &net, 1).unwrap();
        assert!((phi_mid - amplification_rate(&policy, omega)).abs() < 1e-9);
    }

    #[test]
    fn single_node_layer_equals_node_bwe() {
        let net = chain(3, 2, 4);
        let demands = BTreeMap::from([(0, sinusoid(0.15, 1010))]);
        let trace = simulate(&net, &demands, 1000, 400).unwrap();
        let assignment = assign_layers(&net).unwrap();
        let by_layer = layer_bwe_empirical(&trace, &assignment, 1).unwrap();
        let by_node = node_bwe_empirical(&trace, &net, 0).unwrap();
        assert_eq!(by_layer, by_node);
    }

    // Two market nodes fed the same deterministic sequence double every
    // layer total, leaving the variance ratio at the serial value.
    #[test]
    fn paral_identical_demands_equals_serial() {
        let spec = StructureSpec::new(StructureKind::Paral, vec![2, 2], 0.0, 11);
        let net = generate_structure(&spec, 2, 4).unwrap();
        let wave = sinusoid(0.15, 1010);
        let demands = BTreeMap::from([(0, wave.clone()), (1, wave.clone())]);
        let trace = simulate(&net, &demands, 1000, 400).unwrap();
        let assignment = assign_layers(&net).unwrap();
        let wide = layer_bwe_empirical(&trace, &assignment, 1).unwrap();

        let serial = chain(2, 2, 4);
        let serial_trace = simulate(&serial, &BTreeMap::from([(0, wave)]), 1000, 400).unwrap();
        let serial_assignment = assign_layers(&serial).unwrap();
        let narrow = layer_bwe_empirical(&serial_trace, &serial_assignment, 1).unwrap();
        assert!((wide - narrow).abs() < 1e-12);
    }

    #[test]
    fn non_unique_layers_are_rejected() {
        let net = chain(3, 1, 1);
        let demands = BTreeMap::from([(0, sinusoid(0.15, 120))]);
        let trace = simulate(&net, &demands, 100, 40).unwrap();
        let mut assignment = assign_layers(&net).unwrap();
        assignment.unique = false;
        assert!(matches!(
            layer_bwe_empirical(&trace, &assignment, 1),
            Err(Error::NonUniqueLayers)
        ));
    }

    #[test]
    fn rmse_matches_hand_values() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let two = rmse(&[1.0, 2.0], &[1.0, 4.0]).unwrap();
        assert!((two - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(rmse(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = BweReport {
            meta: ReportMeta {
                structure: "paral".into(),
                demand: "pattern1".into(),
                lead_time: 4,
                window: 19,
                horizon: 1000,
                warmup: 400,
                replications: 50,
                seed: 42,
            },
            layers: vec![LayerBwe::from_reps(1, 1.25, &[1.24, 1.26, 1.25])],
            nodes: vec![NodeBwe {
                node: "l1n1".into(),
                phi: 1.25,
            }],
            node_to_node: vec![NodeToNodeBwe {
                market: "l1n1".into(),
                sink: "l3n1".into(),
                phi: 1.5,
            }],
            rmse: 1.0e-7,
        };
        let text = report.to_json_string().unwrap();
        let parsed = BweReport::from_json_str(&text).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn layer_csv_has_header_and_rows() {
        let report = BweReport {
            meta: ReportMeta {
                structure: "serial".into(),
                demand: "pattern1".into(),
                lead_time: 4,
                window: 19,
                horizon: 1000,
                warmup: 400,
                replications: 1,
                seed: 1,
            },
            layers: vec![LayerBwe::from_reps(1, 2.0, &[2.0])],
            nodes: vec![],
            node_to_node: vec![],
            rmse: 0.0,
        };
        let mut buf = Vec::new();
        report.write_layers_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("layer,analytical,empirical_mean"));
        assert!(text.contains("1,2,2,0,1"));
    }
}
