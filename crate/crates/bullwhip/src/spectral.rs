//! Frequency-domain machinery: DFT amplitude spectra, per-node transfer
//! gains, and the analytical layer-wise BWE, including the trend-augmented
//! form.

use num_complex::Complex64;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io;

use crate::error::{Error, Result};
use crate::stats;

/// Order-up-to policy parameters: lead time L and moving-average window P.
/// Both are at least 1 in any valid network; `lead_time` 0 is accepted only
/// by [`transfer_gain`] as the degenerate pass-through case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub lead_time: u32,
    pub window: u32,
}

impl PolicyParams {
    pub fn new(lead_time: u32, window: u32) -> Self {
        PolicyParams { lead_time, window }
    }

    /// L/P, the coefficient in front of the forecast difference.
    pub fn ratio(&self) -> f64 {
        f64::from(self.lead_time) / f64::from(self.window)
    }
}

/// One-sided amplitude spectrum over the DFT grid ω_n = 2πn/T for
/// n = 1..T/2−1. The mean (n=0) and Nyquist (n=T/2) bins are excluded, so
/// for Fourier-bin sinusoids Σ A_n²/2 reconstructs the population variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub mean_component: f64,
}

impl SpectralProfile {
    /// Profile with explicit components and zero mean, for constructed
    /// (non-DFT) spectra. Frequencies are radians per period.
    pub fn from_components(frequencies: Vec<f64>, amplitudes: Vec<f64>) -> Self {
        assert_eq!(frequencies.len(), amplitudes.len());
        SpectralProfile {
            amplitudes,
            frequencies,
            mean_component: 0.0,
        }
    }

    /// Variance carried by the spectrum: Σ A_n²/2.
    pub fn variance(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a / 2.0).sum()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Amplitudes A_n = 2|X_n|/T of the standard DFT, one per interior bin.
/// T must be even and at least 4 so the grid n = 1..T/2−1 is nonempty.
pub fn dft_amplitudes(seq: &[f64]) -> Result<SpectralProfile> {
    let t = seq.len();
    if t < 4 || !t.is_multiple_of(2) {
        return Err(Error::BadDftLength(t));
    }
    let mut buf: Vec<Complex<f64>> = seq.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(t).process(&mut buf);
    let half = t / 2;
    let scale = 2.0 / t as f64;
    Ok(SpectralProfile {
        amplitudes: buf[1..half].iter().map(|x| x.norm() * scale).collect(),
        frequencies: (1..half).map(|n| TAU * n as f64 / t as f64).collect(),
        mean_component: buf[0].re / t as f64,
    })
}

/// Transfer function at z = e^{iω}: F = (1 + (L/P)(1 − e^{−iPω})) e^{−iω}.
pub fn transfer_gain(p: &PolicyParams, omega: f64) -> Complex64 {
    let a = p.ratio();
    let p_omega = f64::from(p.window) * omega;
    let inner = Complex64::new(1.0 + a, 0.0) - Complex64::from_polar(a, -p_omega);
    inner * Complex64::from_polar(1.0, -omega)
}

/// |F(e^{iω})| in closed form: sqrt(1 + 2(L/P + L²/P²)(1 − cos Pω)) ≥ 1.
pub fn amplification_rate(p: &PolicyParams, omega: f64) -> f64 {
    let a = p.ratio();
    let p_omega = f64::from(p.window) * omega;
    (1.0 + 2.0 * (a + a * a) * (1.0 - p_omega.cos())).sqrt()
}

/// Amplification rate evaluated over a frequency grid.
pub fn amplification_spectrum(p: &PolicyParams, frequencies: &[f64]) -> Vec<f64> {
    frequencies
        .iter()
        .map(|&w| amplification_rate(p, w))
        .collect()
}

/// Layer-aggregate transfer gain, the sum of node transfer functions.
pub fn layer_transfer_gain(params: &[PolicyParams], omega: f64) -> Result<Complex64> {
    if params.is_empty() {
        return Err(Error::Empty("layer_transfer_gain needs at least one node"));
    }
    Ok(params.iter().map(|p| transfer_gain(p, omega)).sum())
}

fn weighted_power_sum(profile: &SpectralProfile, phi: &[f64], exponent: i32) -> Result<f64> {
    if profile.amplitudes.len() != phi.len() {
        return Err(Error::LengthMismatch {
            left: profile.amplitudes.len(),
            right: phi.len(),
        });
    }
    Ok(profile
        .amplitudes
        .iter()
        .zip(phi)
        .map(|(a, f)| f.powi(exponent) * a * a)
        .sum())
}

/// Variance of a layer's total output: (1/2) Σ_n φ_n^{2l} A_n². Layer 0 is
/// the market input itself.
pub fn layer_variance(profile: &SpectralProfile, phi: &[f64], l: usize) -> Result<f64> {
    Ok(weighted_power_sum(profile, phi, 2 * l as i32)? / 2.0)
}

/// Layer-wise BWE Φ_l = sqrt(Σ φ^{2l} A² / Σ φ^{2(l−1)} A²) for l ≥ 1.
pub fn layer_bwe_analytical(profile: &SpectralProfile, phi: &[f64], l: usize) -> Result<f64> {
    assert!(l >= 1, "layer index starts at 1");
    let denom = weighted_power_sum(profile, phi, 2 * (l as i32 - 1))?;
    if denom == 0.0 {
        return Err(Error::ZeroInputVariance);
    }
    Ok((weighted_power_sum(profile, phi, 2 * l as i32)? / denom).sqrt())
}

/// Layer-wise BWE under an additive linear trend of variance τ entering
/// through `n_market` market nodes: both variance halves gain τ·|L₁|².
/// Reduces to [`layer_bwe_analytical`] at τ = 0.
pub fn layer_bwe_with_trend(
    profile: &SpectralProfile,
    phi: &[f64],
    l: usize,
    tau: f64,
    n_market: usize,
) -> Result<f64> {
    assert!(l >= 1, "layer index starts at 1");
    assert!(tau >= 0.0, "trend variance is nonnegative");
    let boost = tau * (n_market as f64).powi(2);
    let num = weighted_power_sum(profile, phi, 2 * l as i32)? / 2.0 + boost;
    let denom = weighted_power_sum(profile, phi, 2 * (l as i32 - 1))? / 2.0 + boost;
    if denom == 0.0 {
        return Err(Error::ZeroInputVariance);
    }
    Ok((num / denom).sqrt())
}

/// Layer-wise BWE for a cascade with per-layer policies (index 0 is layer 1).
/// The gain entering layer l is the product of the preceding layers' rates.
pub fn cascade_layer_bwe(
    layers: &[PolicyParams],
    profile: &SpectralProfile,
    l: usize,
) -> Result<f64> {
    assert!(l >= 1 && l <= layers.len(), "layer index out of range");
    let cumulative = |depth: usize, omega: f64| -> f64 {
        layers[..depth]
            .iter()
            .map(|p| {
                let g = amplification_rate(p, omega);
                g * g
            })
            .product()
    };
    let mut num = 0.0;
    let mut denom = 0.0;
    for (a, &w) in profile.amplitudes.iter().zip(&profile.frequencies) {
        num += cumulative(l, w) * a * a;
        denom += cumulative(l - 1, w) * a * a;
    }
    if denom == 0.0 {
        return Err(Error::ZeroInputVariance);
    }
    Ok((num / denom).sqrt())
}

/// First-layer variance ratio for a unit-noise AR(1) input with coefficient
/// φ: η = (L/P+1)² + L²/P² − 2(L/P)(L/P+1)·φ^P. Strictly above 1 on
/// |φ| < 1 and decreasing in φ^P.
pub fn eta_first_layer(p: &PolicyParams, phi_ar: f64) -> Result<f64> {
    if phi_ar.abs() >= 1.0 {
        return Err(Error::InvalidDemand(format!(
            "AR coefficient must lie in (-1, 1), got {phi_ar}"
        )));
    }
    let a = p.ratio();
    Ok((a + 1.0).powi(2) + a * a - 2.0 * a * (a + 1.0) * phi_ar.powi(p.window as i32))
}

/// η with a superposed linear trend of variance τ: (α·η + τ)/(α + τ) where
/// α = 1/(1−φ²) is the stationary AR(1) variance at unit noise.
pub fn eta_with_trend(p: &PolicyParams, phi_ar: f64, tau: f64) -> Result<f64> {
    assert!(tau >= 0.0, "trend variance is nonnegative");
    let eta = eta_first_layer(p, phi_ar)?;
    let alpha = 1.0 / (1.0 - phi_ar * phi_ar);
    Ok((alpha * eta + tau) / (alpha + tau))
}

/// Spectrum rows as CSV: n, omega, amplitude.
pub fn write_spectrum_csv<W: io::Write>(profile: &SpectralProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "omega", "amplitude"])?;
    for (n, (omega, a)) in profile
        .frequencies
        .iter()
        .zip(&profile.amplitudes)
        .enumerate()
    {
        w.write_record([(n + 1).to_string(), omega.to_string(), a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Amplification-rate curve as CSV: omega, phi.
pub fn write_gain_curve_csv<W: io::Write>(p: &PolicyParams, omegas: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega", "phi"])?;
    for &omega in omegas {
        w.write_record([omega.to_string(), amplification_rate(p, omega).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Checks the spectrum against the sequence's population variance, valid
/// when the sequence is a sum of Fourier-bin sinusoids.
pub fn parseval_gap(seq: &[f64], profile: &SpectralProfile) -> f64 {
    let var = stats::population_variance(seq);
    (profile.variance() - var).abs() / var.max(1.0)
}

/// Unit-amplitude profile at the frequencies used throughout the validation
/// experiments: 2π·0.15, 2π·0.25, 2π·0.40.
pub fn three_tone_profile() -> SpectralProfile {
    SpectralProfile::from_components(
        vec![TAU * 0.15, TAU * 0.25, TAU * 0.40],
        vec![1.0, 1.0, 1.0],
    )
}
