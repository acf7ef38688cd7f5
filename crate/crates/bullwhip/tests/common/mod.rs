//! Shared helpers for the integration suites: a deterministic layered-net
//! builder for arbitrary width vectors (the library's generator accepts
//! only its named shapes, and `Custom` networks come from JSON).

use bullwhip::topology::SupplyNetwork;

/// Splitmix-style hash of (seed, a, b) → [0, 1).
fn unit(seed: u64, a: u64, b: u64) -> f64 {
    let mut z =
        seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Layered network over an arbitrary width vector: cyclic guaranteed links
/// keep every node supplied and every supplier employed, and each remaining
/// consecutive-layer link appears with probability `rho`. Layer 1 is the
/// market layer; all links climb exactly one layer, so the layering is
/// unique by construction.
pub fn layered_net(widths: &[usize], rho: f64, seed: u64, lead: u32, window: u32) -> SupplyNetwork {
    assert!(widths.len() >= 2, "need at least two layers");
    let offsets: Vec<usize> = widths
        .iter()
        .scan(0usize, |acc, w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect();
    let mut labels = Vec::new();
    for (l, &w) in widths.iter().enumerate() {
        for k in 0..w {
            labels.push(format!("l{}n{}", l + 1, k + 1));
        }
    }
    let mut edges = Vec::new();
    for l in 0..widths.len() - 1 {
        let (down_w, up_w) = (widths[l], widths[l + 1]);
        let (down_o, up_o) = (offsets[l], offsets[l + 1]);
        let mut present = vec![vec![false; up_w]; down_w];
        for d in 0..down_w {
            present[d][d % up_w] = true; // every buyer has a supplier
        }
        for u in 0..up_w {
            present[u % down_w][u] = true; // every supplier has a buyer
        }
        for (d, row) in present.iter_mut().enumerate() {
            for (u, slot) in row.iter_mut().enumerate() {
                if !*slot && unit(seed, (l * 64 + d) as u64, u as u64) < rho {
                    *slot = true;
                }
            }
        }
        for (d, row) in present.iter().enumerate() {
            for (u, &slot) in row.iter().enumerate() {
                if slot {
                    edges.push((down_o + d, up_o + u));
                }
            }
        }
    }
    let market = (0..widths[0]).collect();
    SupplyNetwork::equal_split(labels, &edges, lead, window, market).unwrap()
}
