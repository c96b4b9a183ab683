//! Synthetic long-range-correlated activity.
//!
//! Gaussian noise with a prescribed Hurst exponent is synthesized in the
//! Fourier domain by circulant embedding of the fractional-Gaussian-noise
//! autocovariance (Davies-Harte). Its spectrum falls off as `f^-(2H-1)` at
//! low frequencies. Exponentiating the noise gives a log-normal marginal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dfa::{self, DfaConfig};
use crate::error::{Error, Result};
use crate::growth::{self, GrowthObservation};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    /// Power of two.
    pub length: usize,
    pub target_h: f64,
    pub log_mu: f64,
    pub log_sigma: f64,
    pub seed: u64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec {
            length: 1 << 16,
            target_h: 0.75,
            log_mu: 10.0,
            log_sigma: 0.5,
            seed: 20010102,
        }
    }
}

impl SurrogateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length < 4 || !self.length.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "surrogate length {} is not a power of two >= 4",
                self.length
            )));
        }
        if !(self.target_h > 0.0 && self.target_h < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target H {} outside (0, 1)",
                self.target_h
            )));
        }
        if !(self.log_sigma >= 0.0) || !self.log_sigma.is_finite() || !self.log_mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad log-normal parameters mu = {}, sigma = {}",
                self.log_mu, self.log_sigma
            )));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of ensemble member `index`: `mix64(seed + index)`.
pub fn member_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index))
}

fn fgn_autocovariance(k: usize, h: f64) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Zero-mean, unit-variance Gaussian noise with Hurst exponent `target_h`.
/// The sample is standardized exactly (population convention).
pub fn correlated_noise(spec: &SurrogateSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.length;
    let m = 2 * n;

    let mut circ: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex64::new(fgn_autocovariance(lag, spec.target_h), 0.0)
        })
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    fft.process(&mut circ);
    let eigen: Vec<f64> = circ.iter().map(|c| c.re).collect();
    let worst = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
    if worst < -1e-8 * eigen[0].abs() {
        return Err(Error::Degenerate(format!(
            "circulant embedding not nonnegative (min eigenvalue {worst})"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mf = m as f64;
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    w[0] = Complex64::new((eigen[0].max(0.0) / mf).sqrt() * normal(), 0.0);
    w[n] = Complex64::new((eigen[n].max(0.0) / mf).sqrt() * normal(), 0.0);
    for j in 1..n {
        let s = (eigen[j].max(0.0) / (2.0 * mf)).sqrt();
        let (a, b) = (normal(), normal());
        w[j] = Complex64::new(s * a, s * b);
        w[m - j] = w[j].conj();
    }
    fft.process(&mut w);

    let mut x: Vec<f64> = w[..n].iter().map(|c| c.re).collect();
    let (mean, sd) = stats::mean_std(&x).unwrap();
    if sd == 0.0 {
        return Err(Error::Degenerate(
            "synthesized noise has no variance".into(),
        ));
    }
    x.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    Ok(x)
}

/// `exp(log_mu + log_sigma * noise)`.
pub fn lognormal_activity(spec: &SurrogateSpec) -> Result<Vec<f64>> {
    let x = correlated_noise(spec)?;
    Ok(x.into_iter()
        .map(|z| (spec.log_mu + spec.log_sigma * z).exp())
        .collect())
}

pub const MIN_ENSEMBLE: usize = 16;
pub const MIN_EXPERIMENT_LENGTH: usize = 1 << 14;

/// Target Hurst exponents of the default experiment.
pub const DEFAULT_SCHEDULE: [f64; 5] = [0.5, 0.6, 0.75, 0.86, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationConfig {
    pub dfa: DfaConfig,
    pub bins_per_decade: u32,
    pub min_occupancy: usize,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            dfa: DfaConfig::default(),
            bins_per_decade: growth::DEFAULT_BINS_PER_DECADE,
            min_occupancy: growth::DEFAULT_MIN_OCCUPANCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub target_h: f64,
    /// Ensemble mean of the per-member DFA exponent.
    pub measured_h: f64,
    /// Standard error of that mean.
    pub stderr_h: f64,
    pub beta: f64,
    pub stderr_beta: f64,
    pub one_minus_h: f64,
    pub error: Option<String>,
}

impl RelationRow {
    fn failed(target_h: f64, e: &Error) -> Self {
        RelationRow {
            target_h,
            measured_h: f64::NAN,
            stderr_h: f64::NAN,
            beta: f64::NAN,
            stderr_beta: f64::NAN,
            one_minus_h: f64::NAN,
            error: Some(e.to_string()),
        }
    }

    /// `beta + H - 1`; zero when the two exponents satisfy the relation exactly.
    pub fn relation_gap(&self) -> f64 {
        self.beta + self.measured_h - 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationExperimentReport {
    pub rows: Vec<RelationRow>,
    pub ensemble: usize,
    pub length: usize,
    pub template: SurrogateSpec,
}

fn run_row(
    row: usize,
    target_h: f64,
    ensemble: usize,
    template: &SurrogateSpec,
    config: &RelationConfig,
) -> Result<RelationRow> {
    let members: Vec<(f64, Vec<GrowthObservation>)> = (0..ensemble)
        .into_par_iter()
        .map(|m| {
            let spec = SurrogateSpec {
                target_h,
                seed: member_seed(template.seed, (row * ensemble + m) as u64),
                ..*template
            };
            let v = lognormal_activity(&spec)?;
            let h = dfa::analyze(&v, &config.dfa)?.fit.h;
            Ok((h, growth::growth_rates(&v).observations))
        })
        .collect::<Result<_>>()?;
    let hs: Vec<f64> = members.iter().map(|(h, _)| *h).collect();
    let (measured_h, sd_h) = stats::mean_std(&hs).unwrap();
    let pooled: Vec<GrowthObservation> = members.into_iter().flat_map(|(_, o)| o).collect();
    let stat = growth::conditional_stats(&pooled, config.bins_per_decade, config.min_occupancy)?;
    let fit = growth::fit_beta(&stat, None)?;
    Ok(RelationRow {
        target_h,
        measured_h,
        stderr_h: sd_h / (ensemble as f64).sqrt(),
        beta: fit.exponent,
        stderr_beta: fit.stderr,
        one_minus_h: 1.0 - measured_h,
        error: None,
    })
}

/// For each target H: synthesize an ensemble, measure H by DFA on each
/// member, pool all growth observations and fit beta. A failing row is
/// reported with its error and the experiment continues.
///
/// Member `m` of row `r` is seeded with `member_seed(template.seed, r * ensemble + m)`.
pub fn relation_experiment(
    schedule: &[f64],
    ensemble: usize,
    template: &SurrogateSpec,
    config: &RelationConfig,
) -> Result<RelationExperimentReport> {
    if ensemble < MIN_ENSEMBLE {
        return Err(Error::InvalidParameter(format!(
            "ensemble of {ensemble} is below the minimum of {MIN_ENSEMBLE}"
        )));
    }
    if template.length < MIN_EXPERIMENT_LENGTH {
        return Err(Error::InvalidParameter(format!(
            "series length {} is below the minimum of {MIN_EXPERIMENT_LENGTH}",
            template.length
        )));
    }
    template.validate()?;
    config.dfa.validate()?;
    let rows = schedule
        .iter()
        .enumerate()
        .map(|(r, &h)| {
            run_row(r, h, ensemble, template, config).unwrap_or_else(|e| {
                log::warn!("relation experiment row H = {h} failed: {e}");
                RelationRow::failed(h, &e)
            })
        })
        .collect();
    Ok(RelationExperimentReport {
        rows,
        ensemble,
        length: template.length,
        template: *template,
    })
}
