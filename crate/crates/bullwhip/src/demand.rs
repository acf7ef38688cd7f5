//! Market demand generators: the parametric base/trend/seasonal/noise model,
//! stationary AR(1) processes, and trend-plus-AR(1), with hyperparameter
//! priors for the width experiments.

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// One seasonal term: amplitude γ (goods) at frequency v (cycles/period).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seasonal {
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandKind {
    Parametric,
    Ar1,
    TrendAr1,
}

/// Demand process description. Fields irrelevant to `kind` are ignored:
/// the parametric model has no AR coefficient, the AR(1) model no base,
/// trend, or seasonal terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    pub kind: DemandKind,
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub trend: f64,
    #[serde(default)]
    pub seasonal: Vec<Seasonal>,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub ar_coeff: f64,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DemandModel {
    pub fn parametric(
        base: f64,
        trend: f64,
        seasonal: Vec<Seasonal>,
        noise_sd: f64,
        horizon: usize,
        seed: u64,
    ) -> Self {
        DemandModel {
            kind: DemandKind::Parametric,
            base,
            trend,
            seasonal,
            noise_sd,
            ar_coeff: 0.0,
            horizon,
            seed,
        }
    }

    pub fn ar1(ar_coeff: f64, noise_sd: f64, horizon: usize, seed: u64) -> Self {
        DemandModel {
            kind: DemandKind::Ar1,
            base: 0.0,
            trend: 0.0,
            seasonal: Vec::new(),
            noise_sd,
            ar_coeff,
            horizon,
            seed,
        }
    }

    pub fn trend_ar1(
        base: f64,
        trend: f64,
        ar_coeff: f64,
        noise_sd: f64,
        horizon: usize,
        seed: u64,
    ) -> Self {
        DemandModel {
            kind: DemandKind::TrendAr1,
            base,
            trend,
            seasonal: Vec::new(),
            noise_sd,
            ar_coeff,
            horizon,
            seed,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            DemandKind::Parametric => "parametric",
            DemandKind::Ar1 => "ar1",
            DemandKind::TrendAr1 => "trend_ar1",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_sd < 0.0 {
            return Err(Error::InvalidDemand(format!(
                "noise_sd must be nonnegative, got {}",
                self.noise_sd
            )));
        }
        if self.horizon < 2 {
            return Err(Error::InvalidDemand(format!(
                "horizon must be at least 2, got {}",
                self.horizon
            )));
        }
        if matches!(self.kind, DemandKind::Ar1 | DemandKind::TrendAr1) && self.ar_coeff.abs() >= 1.0
        {
            return Err(Error::InvalidDemand(format!(
                "AR coefficient must lie in (-1, 1), got {}",
                self.ar_coeff
            )));
        }
        Ok(())
    }

    /// Demand values for periods t = 1..=T. AR components start from a
    /// stationary draw, so no burn-in is needed and variance claims hold in
    /// expectation from the first period.
    pub fn generate(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = rng_from_seed(self.seed);
        let t_max = self.horizon;
        match self.kind {
            DemandKind::Parametric => {
                let noise = Normal::new(0.0, self.noise_sd).expect("nonnegative sd");
                Ok((1..=t_max)
                    .map(|t| self.deterministic_part(t) + noise.sample(&mut rng))
                    .collect())
            }
            DemandKind::Ar1 => Ok(self.ar1_path(&mut rng)),
            DemandKind::TrendAr1 => {
                let ar = self.ar1_path(&mut rng);
                Ok(ar
                    .into_iter()
                    .zip(1..=t_max)
                    .map(|(x, t)| self.base + self.trend * t as f64 + x)
                    .collect())
            }
        }
    }

    fn deterministic_part(&self, t: usize) -> f64 {
        let t = t as f64;
        let seasonal: f64 = self
            .seasonal
            .iter()
            .map(|s| s.amplitude * (TAU * s.frequency * t).sin())
            .sum();
        self.base + self.trend * t + seasonal
    }

    fn ar1_path<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let noise = Normal::new(0.0, self.noise_sd).expect("nonnegative sd");
        let stationary_sd =
            (self.noise_sd * self.noise_sd / (1.0 - self.ar_coeff * self.ar_coeff)).sqrt();
        let mut state = Normal::new(0.0, stationary_sd)
            .expect("nonnegative sd")
            .sample(rng);
        (0..self.horizon)
            .map(|_| {
                state = self.ar_coeff * state + noise.sample(rng);
                state
            })
            .collect()
    }
}

/// Prior over AR(1) coefficients; support must stay inside (−1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HyperPrior {
    UniformOpen {
        lower: f64,
        upper: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
        lower: f64,
        upper: f64,
    },
}

impl HyperPrior {
    /// Uniform over the full open interval (−1, 1).
    pub fn standard_uniform() -> Self {
        HyperPrior::UniformOpen {
            lower: -1.0,
            upper: 1.0,
        }
    }

    /// Standard normal truncated to (−1, 1).
    pub fn standard_truncated_normal() -> Self {
        HyperPrior::TruncatedNormal {
            mean: 0.0,
            sd: 1.0,
            lower: -1.0,
            upper: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lower, upper) = match *self {
            HyperPrior::UniformOpen { lower, upper } => (lower, upper),
            HyperPrior::TruncatedNormal {
                sd, lower, upper, ..
            } => {
                if sd <= 0.0 {
                    return Err(Error::InvalidDemand(format!(
                        "prior sd must be positive, got {sd}"
                    )));
                }
                (lower, upper)
            }
        };
        if !(-1.0..=1.0).contains(&lower) || !(-1.0..=1.0).contains(&upper) || lower >= upper {
            return Err(Error::InvalidDemand(format!(
                "prior support [{lower}, {upper}] must sit inside (-1, 1)"
            )));
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            HyperPrior::UniformOpen { lower, upper } => {
                let dist = Uniform::new(lower, upper);
                loop {
                    let x = dist.sample(rng);
                    if x > lower {
                        return x;
                    }
                }
            }
            HyperPrior::TruncatedNormal {
                mean,
                sd,
                lower,
                upper,
            } => {
                let dist = Normal::new(mean, sd).expect("positive sd");
                loop {
                    let x = dist.sample(rng);
                    if x > lower && x < upper {
                        return x;
                    }
                }
            }
        }
    }
}

/// IID draws from the prior, deterministic given the seed.
pub fn sample_ar_coeffs(prior: &HyperPrior, m: usize, seed: u64) -> Result<Vec<f64>> {
    prior.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok((0..m).map(|_| prior.draw(&mut rng)).collect())
}

/// Stationary AR(1) variance σ²/(1−φ²).
pub fn ar1_variance(phi: f64, sigma: f64) -> Result<f64> {
    if phi.abs() >= 1.0 {
        return Err(Error::InvalidDemand(format!(
            "AR coefficient must lie in (-1, 1), got {phi}"
        )));
    }
    Ok(sigma * sigma / (1.0 - phi * phi))
}

/// Population variance of the pure trend a·t over t = 1..=T: a²(T²−1)/12.
pub fn trend_variance(a: f64, t: usize) -> f64 {
    let t = t as f64;
    a * a * (t * t - 1.0) / 12.0
}

/// Single-column CSV whose header names the generating model.
pub fn write_demand_csv<W: io::Write>(label: &str, seq: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([label])?;
    for x in seq {
        w.write_record([x.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::population_variance;
    use approx::assert_relative_eq;

    #[test]
    fn pattern_one_has_expected_moments() {
        let model = DemandModel::parametric(100.0, 0.0, Vec::new(), 20.0, 4000, 7);
        let seq = model.generate().unwrap();
        assert_eq!(seq.len(), 4000);
        let mean = seq.iter().sum::<f64>() / 4000.0;
        assert!((mean - 100.0).abs() < 1.5);
        let var = population_variance(&seq);
        assert!((var - 400.0).abs() / 400.0 < 0.1);
    }

    #[test]
    fn noise_free_parametric_is_deterministic_periodic() {
        let seasonal = vec![Seasonal {
            amplitude: 3.0,
            frequency: 0.15,
        }];
        let model = DemandModel::parametric(10.0, 0.0, seasonal, 0.0, 40, 1);
        let seq = model.generate().unwrap();
        // Period 20 at v = 0.15 and integer t: sin is 20-periodic.
        for t in 0..20 {
            assert_relative_eq!(seq[t], seq[t + 20], epsilon = 1e-9);
        }
        let other_seed = DemandModel::parametric(
            10.0,
            0.0,
            vec![Seasonal {
                amplitude: 3.0,
                frequency: 0.15,
            }],
            0.0,
            40,
            99,
        );
        assert_eq!(seq, other_seed.generate().unwrap());
    }

    #[test]
    fn white_noise_variance_converges() {
        let seq = DemandModel::ar1(0.0, 1.0, 100_000, 11).generate().unwrap();
        let var = population_variance(&seq);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn ar1_stationary_variance_matches_closed_form() {
        let seq = DemandModel::ar1(0.8, 1.0, 100_000, 13).generate().unwrap();
        let var = population_variance(&seq);
        let expected = ar1_variance(0.8, 1.0).unwrap();
        assert!((var - expected).abs() / expected < 0.05);
    }

    #[test]
    fn generate_is_deterministic_in_seed() {
        let a = DemandModel::ar1(0.5, 2.0, 64, 42).generate().unwrap();
        let b = DemandModel::ar1(0.5, 2.0, 64, 42).generate().unwrap();
        let c = DemandModel::ar1(0.5, 2.0, 64, 43).generate().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn trend_ar1_superposes_components() {
        let with_trend = DemandModel::trend_ar1(5.0, 0.25, 0.6, 1.0, 128, 21)
            .generate()
            .unwrap();
        let plain = DemandModel::ar1(0.6, 1.0, 128, 21).generate().unwrap();
        for t in 0..128 {
            assert_relative_eq!(
                with_trend[t] - plain[t],
                5.0 + 0.25 * (t + 1) as f64,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(DemandModel::ar1(1.0, 1.0, 100, 0).generate().is_err());
        assert!(DemandModel::ar1(0.5, -1.0, 100, 0).generate().is_err());
        assert!(DemandModel::ar1(0.5, 1.0, 1, 0).generate().is_err());
    }

    #[test]
    fn prior_draws_stay_in_support() {
        let uniform = HyperPrior::standard_uniform();
        let draws = sample_ar_coeffs(&uniform, 3, 5).unwrap();
        assert_eq!(draws.len(), 3);
        assert!(draws.iter().all(|x| (-1.0..1.0).contains(x)));

        let narrow = HyperPrior::UniformOpen {
            lower: -0.7,
            upper: 0.7,
        };
        let draws = sample_ar_coeffs(&narrow, 1000, 5).unwrap();
        assert!(draws.iter().all(|x| x.abs() < 0.7));

        assert!(sample_ar_coeffs(&uniform, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn truncated_normal_is_symmetric() {
        let prior = HyperPrior::standard_truncated_normal();
        let draws = sample_ar_coeffs(&prior, 100_000, 3).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.02);
        assert!(draws.iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn invalid_priors_are_rejected() {
        let too_wide = HyperPrior::UniformOpen {
            lower: -2.0,
            upper: 1.0,
        };
        assert!(sample_ar_coeffs(&too_wide, 1, 0).is_err());
        let inverted = HyperPrior::UniformOpen {
            lower: 0.5,
            upper: -0.5,
        };
        assert!(sample_ar_coeffs(&inverted, 1, 0).is_err());
    }

    #[test]
    fn variance_helpers_match_frozen_values() {
        assert_relative_eq!(ar1_variance(0.0, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            ar1_variance(0.8, 1.0).unwrap(),
            2.7777777777777777,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            ar1_variance(-0.5, 2.0).unwrap(),
            5.333333333333333,
            epsilon = 1e-12
        );
        assert!(ar1_variance(1.0, 1.0).is_err());

        assert_eq!(trend_variance(0.0, 1000), 0.0);
        assert_relative_eq!(trend_variance(0.2, 1000), 3333.33, epsilon = 1e-9);
        assert_relative_eq!(trend_variance(1.0, 2), 0.25, epsilon = 1e-12);
        // Definition check: population variance of a·t over t = 1..=T.
        let trend: Vec<f64> = (1..=17).map(|t| 0.3 * t as f64).collect();
        assert_relative_eq!(
            population_variance(&trend),
            trend_variance(0.3, 17),
            epsilon = 1e-12
        );
    }

    #[test]
    fn demand_csv_has_model_header() {
        let model = DemandModel::ar1(0.2, 1.0, 4, 9);
        let seq = model.generate().unwrap();
        let mut buf = Vec::new();
        write_demand_csv(model.label(), &seq, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ar1\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
