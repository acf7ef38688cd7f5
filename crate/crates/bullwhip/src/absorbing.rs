//! Node-to-node BWE through the absorbing-chain form: demand entering a
//! market node propagates over transient suppliers until it is absorbed by
//! the sources, each ordering node scaling its row by the local
//! amplification rate.

use std::io;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::spectral::{amplification_rate, SpectralProfile};
use crate::topology::{markov_partition, MarkovPartition, SupplyNetwork};

/// B(ω_n) for each frequency of a grid, with the partition orderings the
/// matrices are indexed by: rows follow `transient`, columns `absorbing`.
#[derive(Debug, Clone)]
pub struct AmplificationMatrix {
    pub frequencies: Vec<f64>,
    pub matrices: Vec<Matrix>,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
}

/// Solves B = (I_t − W⊙φ)^{-1}(R⊙φ), where ⊙ scales row i by φ_i, the
/// amplification rate of the ordering node. `phi` aligns with
/// `part.transient`. Fails when the scaled chain does not contract.
pub fn amplification_matrix(part: &MarkovPartition, phi: &[f64]) -> Result<Matrix> {
    let n_t = part.transient.len();
    if phi.len() != n_t {
        return Err(Error::LengthMismatch {
            left: n_t,
            right: phi.len(),
        });
    }
    let mut system = Matrix::zeros(n_t, n_t);
    let mut scaled_w = Matrix::zeros(n_t, n_t);
    for i in 0..n_t {
        for j in 0..n_t {
            scaled_w[(i, j)] = part.w[(i, j)] * phi[i];
            system[(i, j)] = -scaled_w[(i, j)];
        }
        system[(i, i)] += 1.0;
    }
    let radius = linalg::spectral_radius(&scaled_w, 200);
    if radius >= 1.0 {
        return Err(Error::Divergent(radius));
    }
    let mut rhs = Matrix::zeros(n_t, part.absorbing.len());
    for i in 0..n_t {
        for k in 0..part.absorbing.len() {
            rhs[(i, k)] = part.r[(i, k)] * phi[i];
        }
    }
    linalg::solve(system, &rhs)
}

/// B(ω) over a frequency grid, with per-node rates from the network's own
/// policies.
pub fn amplification_matrices(
    net: &SupplyNetwork,
    frequencies: &[f64],
) -> Result<AmplificationMatrix> {
    let part = markov_partition(net)?;
    let mut matrices = Vec::with_capacity(frequencies.len());
    for &omega in frequencies {
        let phi: Vec<f64> = part
            .transient
            .iter()
            .map(|&i| amplification_rate(&net.policy(i), omega))
            .collect();
        matrices.push(amplification_matrix(&part, &phi)?);
    }
    Ok(AmplificationMatrix {
        frequencies: frequencies.to_vec(),
        matrices,
        transient: part.transient,
        absorbing: part.absorbing,
    })
}

/// Φ_{k←i}: amplification of market node i's demand as it reaches absorbing
/// node k, sqrt(Σ_n (B_ik(ω_n) A_n)² / Σ_n A_n²).
pub fn node_to_node_bwe(
    net: &SupplyNetwork,
    market: usize,
    sink: usize,
    profile: &SpectralProfile,
) -> Result<f64> {
    if !net.is_market(market) {
        return Err(Error::InvalidNetwork(format!(
            "node {:?} is not a market node",
            net.labels[market]
        )));
    }
    let am = amplification_matrices(net, &profile.frequencies)?;
    let row = am
        .transient
        .iter()
        .position(|&i| i == market)
        .expect("market nodes are transient");
    let col = am
        .absorbing
        .iter()
        .position(|&k| k == sink)
        .ok_or_else(|| {
            Error::InvalidNetwork(format!(
                "node {:?} is not an absorbing source node",
                net.labels[sink]
            ))
        })?;
    let mut num = 0.0;
    let mut denom = 0.0;
    for (n, a) in profile.amplitudes.iter().enumerate() {
        let b = am.matrices[n][(row, col)];
        num += (b * a) * (b * a);
        denom += a * a;
    }
    if denom == 0.0 {
        return Err(Error::ZeroInputVariance);
    }
    Ok((num / denom).sqrt())
}

/// Per-frequency entries as CSV: omega, source, sink, b.
pub fn write_amplification_csv<W: io::Write>(
    am: &AmplificationMatrix,
    net: &SupplyNetwork,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega", "source", "sink", "b"])?;
    for (omega, m) in am.frequencies.iter().zip(&am.matrices) {
        for (ti, &i) in am.transient.iter().enumerate() {
            for (ta, &k) in am.absorbing.iter().enumerate() {
                w.write_record([
                    omega.to_string(),
                    net.labels[i].clone(),
                    net.labels[k].clone(),
                    m[(ti, ta)].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Node-to-node summary as CSV: source, sink, phi.
pub fn write_bwe_summary_csv<W: io::Write>(
    rows: &[(usize, usize, f64)],
    net: &SupplyNetwork,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "sink", "phi"])?;
    for &(i, k, phi) in rows {
        w.write_record([
            net.labels[i].clone(),
            net.labels[k].clone(),
            phi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
