//! Detrended fluctuation analysis.
//!
//! The series is integrated into a mean-free profile, the profile is cut into
//! non-overlapping windows of `l` points (once from the start and once from
//! the end, so the remainder is used), a least-squares polynomial of the
//! configured order is removed from each window, and `F(l)` is the RMS of
//! all residuals. The Hurst exponent is the slope of `ln F` against `ln l`.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfaConfig {
    /// Order of the polynomial removed from each window (DFA1 = 1).
    pub detrend_order: usize,
    pub min_window: usize,
    pub windows_per_decade: u32,
    /// Largest window is `n / max_window_divisor`.
    pub max_window_divisor: usize,
    /// Default Hurst fit covers windows up to `n / fit_window_divisor`.
    pub fit_window_divisor: usize,
    /// Explicit Hurst fit range in window sizes, overriding the default.
    pub fit_range: Option<(usize, usize)>,
    /// Analyze ln V instead of V.
    pub log_transform: bool,
}

impl DfaConfig {
    pub fn with_order(detrend_order: usize) -> Self {
        DfaConfig {
            detrend_order,
            min_window: (2 * (detrend_order + 2)).max(6),
            windows_per_decade: 8,
            max_window_divisor: 4,
            fit_window_divisor: 16,
            fit_range: None,
            log_transform: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.detrend_order < 1 {
            return Err(Error::InvalidParameter(
                "detrend order must be at least 1".into(),
            ));
        }
        if self.min_window <= self.detrend_order + 1 {
            return Err(Error::InvalidParameter(format!(
                "min_window {} must exceed detrend_order + 1 = {}",
                self.min_window,
                self.detrend_order + 1
            )));
        }
        if self.windows_per_decade == 0
            || self.max_window_divisor == 0
            || self.fit_window_divisor == 0
        {
            return Err(Error::InvalidParameter(
                "window density and divisors must be positive".into(),
            ));
        }
        if let Some((lo, hi)) = self.fit_range {
            if lo >= hi {
                return Err(Error::InvalidParameter(format!(
                    "empty fit range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

impl Default for DfaConfig {
    fn default() -> Self {
        DfaConfig::with_order(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfaPoint {
    pub window: usize,
    pub fluctuation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstFit {
    pub h: f64,
    pub stderr: f64,
    /// ln F at ln l = 0.
    pub intercept: f64,
    pub lo: usize,
    pub hi: usize,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaResult {
    pub points: Vec<DfaPoint>,
    pub fit: HurstFit,
}

impl DfaResult {
    pub fn h(&self) -> f64 {
        self.fit.h
    }

    /// DFA1 on nonstationary input may exceed 1; anything outside (0, 1.5) is suspect.
    pub fn in_sanity_band(&self) -> bool {
        self.fit.h > 0.0 && self.fit.h < 1.5
    }
}

/// Cumulative sum of deviations from the mean.
pub fn profile(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "profile needs at least 4 points, got {}",
            series.len()
        )));
    }
    let mean = stats::mean(series).unwrap();
    Ok(series
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x - mean;
            Some(*acc)
        })
        .collect())
}

/// Log-spaced integer window sizes from `min_window` to `n / max_window_divisor`.
pub fn window_sizes(n: usize, config: &DfaConfig) -> Vec<usize> {
    let max = n / config.max_window_divisor;
    let mut out: Vec<usize> = Vec::new();
    let base = (config.min_window as f64).log10();
    let step = 1.0 / config.windows_per_decade as f64;
    for k in 0.. {
        let w = 10f64.powf(base + k as f64 * step).round() as usize;
        if w > max {
            break;
        }
        if out.last() != Some(&w) {
            out.push(w);
        }
    }
    out
}

/// Orthonormal polynomial basis of degree `order` on the grid 0..len.
fn orthonormal_basis(len: usize, order: usize) -> Vec<Vec<f64>> {
    let scale = if len > 1 { 2.0 / (len - 1) as f64 } else { 0.0 };
    let u: Vec<f64> = (0..len).map(|t| t as f64 * scale - 1.0).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut v: Vec<f64> = u.iter().map(|x| x.powi(k as i32)).collect();
        // two Gram-Schmidt sweeps
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    basis
}

/// Sum of squared residuals of one window after removing its fit.
fn window_residual(segment: &[f64], basis: &[Vec<f64>], coeffs: &mut [f64]) -> f64 {
    for (c, q) in coeffs.iter_mut().zip(basis) {
        *c = segment.iter().zip(q).map(|(y, b)| y * b).sum();
    }
    segment
        .iter()
        .enumerate()
        .map(|(t, y)| {
            let fit: f64 = coeffs.iter().zip(basis).map(|(c, q)| c * q[t]).sum();
            let r = y - fit;
            r * r
        })
        .sum()
}

/// F(window) on a precomputed profile, both-ends partition.
pub fn fluctuation_at(profile: &[f64], window: usize, detrend_order: usize) -> Result<f64> {
    let n = profile.len();
    if window < detrend_order + 2 || window > n {
        return Err(Error::InvalidParameter(format!(
            "window {window} invalid for order {detrend_order} and length {n}"
        )));
    }
    let basis = orthonormal_basis(window, detrend_order);
    let mut coeffs = vec![0.0; detrend_order + 1];
    let m = n / window;
    let mut total = CompensatedSum::new();
    for k in 0..m {
        let fwd = &profile[k * window..(k + 1) * window];
        total.add(window_residual(fwd, &basis, &mut coeffs));
        let bwd = &profile[n - (k + 1) * window..n - k * window];
        total.add(window_residual(bwd, &basis, &mut coeffs));
    }
    Ok((total.value() / (2 * m * window) as f64).sqrt())
}

fn check_not_constant(series: &[f64]) -> Result<()> {
    let first = series[0];
    if series.iter().all(|&x| x == first) {
        Err(Error::Degenerate(
            "constant series has no fluctuations".into(),
        ))
    } else {
        Ok(())
    }
}

/// F(l) for explicit window sizes.
pub fn fluctuation_function_at(
    series: &[f64],
    windows: &[usize],
    detrend_order: usize,
) -> Result<Vec<DfaPoint>> {
    let y = profile(series)?;
    check_not_constant(series)?;
    windows
        .par_iter()
        .map(|&w| {
            fluctuation_at(&y, w, detrend_order).map(|f| DfaPoint {
                window: w,
                fluctuation: f,
            })
        })
        .collect()
}

/// F(l) over the configured log-spaced window grid.
pub fn fluctuation_function(series: &[f64], config: &DfaConfig) -> Result<Vec<DfaPoint>> {
    config.validate()?;
    if series.len() < 4 * config.min_window {
        return Err(Error::InsufficientData(format!(
            "series of length {} is shorter than 4 x min_window = {}",
            series.len(),
            4 * config.min_window
        )));
    }
    let windows = window_sizes(series.len(), config);
    fluctuation_function_at(series, &windows, config.detrend_order)
}

/// Least-squares slope of ln F on ln l for windows in `[lo, hi]`.
pub fn hurst(points: &[DfaPoint], range: (usize, usize)) -> Result<HurstFit> {
    let (lo, hi) = range;
    let in_range: Vec<&DfaPoint> = points
        .iter()
        .filter(|p| p.window >= lo && p.window <= hi)
        .collect();
    let zeros = in_range.iter().filter(|p| !(p.fluctuation > 0.0)).count();
    if zeros > 0 {
        warn!("{zeros} windows with F = 0 excluded from the Hurst fit");
    }
    let (x, y): (Vec<f64>, Vec<f64>) = in_range
        .iter()
        .filter(|p| p.fluctuation > 0.0)
        .map(|p| ((p.window as f64).ln(), p.fluctuation.ln()))
        .unzip();
    if x.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "Hurst fit needs 4 points in [{lo}, {hi}], found {}",
            x.len()
        )));
    }
    let fit = stats::linear_fit(&x, &y)?;
    Ok(HurstFit {
        h: fit.slope,
        stderr: fit.slope_stderr,
        intercept: fit.intercept,
        lo,
        hi,
        points_used: x.len(),
    })
}

/// Default fit range for a series of length `n`. Falls back to the full
/// window grid when the trimmed range would hold fewer than 4 windows.
pub fn default_fit_range(n: usize, points: &[DfaPoint], config: &DfaConfig) -> (usize, usize) {
    if let Some(r) = config.fit_range {
        return r;
    }
    let full = (
        points.first().map_or(config.min_window, |p| p.window),
        points.last().map_or(config.min_window, |p| p.window),
    );
    let trimmed = (config.min_window, n / config.fit_window_divisor);
    let inside = points
        .iter()
        .filter(|p| p.window >= trimmed.0 && p.window <= trimmed.1)
        .count();
    if inside >= 4 {
        trimmed
    } else {
        full
    }
}

fn prepare(series: &[f64], config: &DfaConfig) -> Result<Vec<f64>> {
    if !config.log_transform {
        return Ok(series.to_vec());
    }
    if series.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::NonPositive {
            count: series.iter().filter(|v| !(**v > 0.0)).count(),
            first: series
                .iter()
                .copied()
                .filter(|v| !(*v > 0.0))
                .take(5)
                .collect(),
        });
    }
    Ok(series.iter().map(|v| v.ln()).collect())
}

/// Fluctuation function plus Hurst fit.
pub fn analyze(series: &[f64], config: &DfaConfig) -> Result<DfaResult> {
    let input = prepare(series, config)?;
    let points = fluctuation_function(&input, config)?;
    let range = default_fit_range(input.len(), &points, config);
    let fit = hurst(&points, range)?;
    let result = DfaResult { points, fit };
    if !result.in_sanity_band() {
        warn!("Hurst exponent {} outside (0, 1.5)", result.fit.h);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEntry {
    pub instrument: String,
    pub h: f64,
    pub stderr: f64,
    pub mean_daily_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstCrossSection {
    pub entries: Vec<HurstEntry>,
    pub failures: Vec<(String, String)>,
    pub mean_h: f64,
    pub std_h: f64,
    /// KS distance of standardized H from N(0, 1); `None` without spread.
    pub ks: Option<f64>,
    /// Fewer than 10 instruments entered the normal fit.
    pub low_n: bool,
}

pub const CROSS_SECTION_MIN_INSTRUMENTS: usize = 10;

/// Per-instrument DFA, run concurrently. Failing instruments are recorded
/// and skipped.
pub fn hurst_cross_section(
    universe: &BTreeMap<String, Vec<f64>>,
    mean_daily_value: &BTreeMap<String, f64>,
    config: &DfaConfig,
) -> Result<(HurstCrossSection, BTreeMap<String, DfaResult>)> {
    config.validate()?;
    let results: Vec<(String, Result<DfaResult>)> = universe
        .par_iter()
        .map(|(sym, series)| (sym.clone(), analyze(series, config)))
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut curves = BTreeMap::new();
    for (sym, r) in results {
        match (r, mean_daily_value.get(&sym)) {
            (Ok(res), Some(&v)) => {
                entries.push(HurstEntry {
                    instrument: sym.clone(),
                    h: res.fit.h,
                    stderr: res.fit.stderr,
                    mean_daily_value: v,
                });
                curves.insert(sym, res);
            }
            (Ok(_), None) => failures.push((sym, "no average daily value".to_string())),
            (Err(e), _) => {
                warn!("{sym}: DFA failed: {e}");
                failures.push((sym, e.to_string()));
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::InsufficientData(
            "no instrument produced a Hurst exponent".into(),
        ));
    }
    let hs: Vec<f64> = entries.iter().map(|e| e.h).collect();
    let (mean_h, std_h) = stats::mean_std(&hs).unwrap();
    let ks = (std_h > 0.0).then(|| {
        let z: Vec<f64> = hs.iter().map(|h| (h - mean_h) / std_h).collect();
        stats::ks_standard_normal(&z)
    });
    let low_n = entries.len() < CROSS_SECTION_MIN_INSTRUMENTS;
    if low_n {
        warn!("normal fit of H over only {} instruments", entries.len());
    }
    Ok((
        HurstCrossSection {
            entries,
            failures,
            mean_h,
            std_h,
            ks,
            low_n,
        },
        curves,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean of ln<V> over the members.
    pub mean_ln_value: f64,
    pub mean_h: f64,
    pub std_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstVsSize {
    pub bins: Vec<SizeBin>,
    /// dH / d ln<V> fitted on the bin means.
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Groups instruments in logarithmic bins of average daily value and fits
/// `H = intercept + slope * ln<V>` through the bin means.
pub fn hurst_vs_size(cs: &HurstCrossSection, bins_per_decade: u32) -> Result<HurstVsSize> {
    if bins_per_decade == 0 {
        return Err(Error::InvalidParameter(
            "bins_per_decade must be at least 1".into(),
        ));
    }
    let usable: Vec<&HurstEntry> = cs
        .entries
        .iter()
        .filter(|e| e.mean_daily_value > 0.0)
        .collect();
    let first = usable
        .first()
        .ok_or_else(|| Error::InsufficientData("no instrument with positive <V>".into()))?;
    if usable
        .iter()
        .all(|e| e.mean_daily_value == first.mean_daily_value)
    {
        return Err(Error::Degenerate(
            "all instruments share the same <V>".into(),
        ));
    }
    let d = bins_per_decade as f64;
    let mut groups: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for e in usable {
        let k = (e.mean_daily_value.log10() * d).floor() as i64;
        let g = groups.entry(k).or_default();
        g.0.push(e.mean_daily_value.ln());
        g.1.push(e.h);
    }
    let bins: Vec<SizeBin> = groups
        .into_iter()
        .map(|(k, (lv, h))| {
            let (mean_h, std_h) = stats::mean_std(&h).unwrap();
            SizeBin {
                lo: 10f64.powf(k as f64 / d),
                hi: 10f64.powf((k + 1) as f64 / d),
                count: h.len(),
                mean_ln_value: stats::mean(&lv).unwrap(),
                mean_h,
                std_h,
            }
        })
        .collect();
    if bins.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "size regression needs 3 occupied bins, found {}",
            bins.len()
        )));
    }
    let x: Vec<f64> = bins.iter().map(|b| b.mean_ln_value).collect();
    let y: Vec<f64> = bins.iter().map(|b| b.mean_h).collect();
    let fit = stats::linear_fit(&x, &y)?;
    Ok(HurstVsSize {
        bins,
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: fit.slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile(&[3.0; 6]).unwrap(), vec![0.0; 6]);
        assert_eq!(
            profile(&[1.0, -1.0, 1.0, -1.0]).unwrap(),
            vec![1.0, 0.0, 1.0, 0.0]
        );
        let x = noise(1000, 1);
        let y = profile(&x).unwrap();
        let scale: f64 = x.iter().map(|v| v.abs()).sum();
        assert!(y.last().unwrap().abs() <= 1e-9 * scale);
        assert!(profile(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn basis_is_orthonormal() {
        for (len, order) in [(5, 1), (6, 2), (100, 3), (16384, 2)] {
            let b = orthonormal_basis(len, order);
            for i in 0..=order {
                for j in 0..=order {
                    let dot: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "{len} {order} {i} {j} {dot}");
                }
            }
        }
    }

    #[test]
    fn window_grid() {
        let cfg = DfaConfig::default();
        let w = window_sizes(1 << 16, &cfg);
        assert_eq!(w[0], 6);
        // 6 * 10^(27/8), the last grid point below 16384
        assert_eq!(*w.last().unwrap(), 14228);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        assert!(*w.last().unwrap() <= (1 << 16) / 4);
        assert_eq!(DfaConfig::with_order(2).min_window, 8);
    }

    #[test]
    fn config_validation() {
        let mut c = DfaConfig::with_order(3);
        assert!(c.validate().is_ok());
        c.min_window = 4;
        assert!(c.validate().is_err());
        let c = DfaConfig {
            fit_range: Some((20, 10)),
            ..DfaConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn polynomial_detrending_annihilates_its_order() {
        // a ramp integrates to a quadratic profile
        let ramp: Vec<f64> = (0..512).map(|i| 0.5 * i as f64 - 3.0).collect();
        let cfg = DfaConfig::with_order(2);
        let pts = fluctuation_function(&ramp, &cfg).unwrap();
        for p in &pts {
            assert!(p.fluctuation < 1e-8, "{p:?}");
        }
        // DFA1 cannot remove the curvature of the same profile
        let dfa1 = fluctuation_function(&ramp, &DfaConfig::default()).unwrap();
        assert!(dfa1.iter().all(|p| p.fluctuation > 1e-3));
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert!(matches!(
            fluctuation_function(&[2.0; 100], &DfaConfig::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(fluctuation_function(&noise(20, 2), &DfaConfig::default()).is_err());
    }

    #[test]
    fn affine_invariance() {
        let x = noise(4096, 3);
        let y: Vec<f64> = x.iter().map(|v| 7.5 - 2.5 * v).collect();
        let cfg = DfaConfig::default();
        let fx = fluctuation_function(&x, &cfg).unwrap();
        let fy = fluctuation_function(&y, &cfg).unwrap();
        for (a, b) in fx.iter().zip(&fy) {
            assert!((b.fluctuation / (2.5 * a.fluctuation) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_scaling_fit() {
        let pts: Vec<DfaPoint> = (1..30)
            .map(|k| {
                let w = 4 * k;
                DfaPoint {
                    window: w,
                    fluctuation: (w as f64).powf(0.75),
                }
            })
            .collect();
        let fit = hurst(&pts, (1, 1000)).unwrap();
        assert!((fit.h - 0.75).abs() < 1e-9);
        assert_eq!(fit.points_used, 29);
    }

    #[test]
    fn zero_fluctuations_excluded() {
        let mut pts: Vec<DfaPoint> = (1..=6)
            .map(|k| DfaPoint {
                window: 10 * k,
                fluctuation: (10.0 * k as f64).sqrt(),
            })
            .collect();
        pts[0].fluctuation = 0.0;
        let fit = hurst(&pts, (1, 100)).unwrap();
        assert_eq!(fit.points_used, 5);
        assert!((fit.h - 0.5).abs() < 1e-12);
        pts[1].fluctuation = 0.0;
        pts[2].fluctuation = 0.0;
        assert!(hurst(&pts, (1, 100)).is_err());
    }

    #[test]
    fn white_noise_is_uncorrelated() {
        let r = analyze(&noise(1 << 16, 4), &DfaConfig::default()).unwrap();
        assert!((r.h() - 0.5).abs() < 0.02, "{}", r.h());
        assert!(r.in_sanity_band());
        assert_eq!(r.fit.hi, (1 << 16) / 16);
    }

    #[test]
    fn log_transform_requires_positive_input() {
        let cfg = DfaConfig {
            log_transform: true,
            ..DfaConfig::default()
        };
        assert!(matches!(
            analyze(&noise(256, 5), &cfg),
            Err(Error::NonPositive { .. })
        ));
        let pos: Vec<f64> = noise(256, 5).iter().map(|v| v.exp()).collect();
        assert!(analyze(&pos, &cfg).is_ok());
    }

    fn cs_from(points: &[(f64, f64)]) -> HurstCrossSection {
        let entries: Vec<HurstEntry> = points
            .iter()
            .enumerate()
            .map(|(i, &(v, h))| HurstEntry {
                instrument: format!("S{i}"),
                h,
                stderr: 0.0,
                mean_daily_value: v,
            })
            .collect();
        let hs: Vec<f64> = entries.iter().map(|e| e.h).collect();
        let (mean_h, std_h) = stats::mean_std(&hs).unwrap();
        HurstCrossSection {
            entries,
            failures: vec![],
            mean_h,
            std_h,
            ks: None,
            low_n: false,
        }
    }

    #[test]
    fn exact_logarithmic_size_relation() {
        let pts: Vec<(f64, f64)> = (0..60)
            .map(|i| {
                let v = 10f64.powf(3.0 + 0.1 * i as f64);
                (v, 0.2 + 0.033 * v.ln())
            })
            .collect();
        let r = hurst_vs_size(&cs_from(&pts), 4).unwrap();
        assert!((r.slope - 0.033).abs() < 1e-9);
        assert!(r.bins.len() >= 3);
    }

    #[test]
    fn size_independent_h_has_flat_slope() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| (10f64.powf(2.0 + 0.1 * i as f64), 0.7))
            .collect();
        let r = hurst_vs_size(&cs_from(&pts), 4).unwrap();
        assert!(r.slope.abs() < 1e-12);
    }

    #[test]
    fn size_regression_errors() {
        assert!(matches!(
            hurst_vs_size(&cs_from(&[(5.0, 0.6), (5.0, 0.7), (5.0, 0.8)]), 4),
            Err(Error::Degenerate(_))
        ));
        assert!(hurst_vs_size(&cs_from(&[(5.0, 0.6), (50.0, 0.7)]), 1).is_err());
    }

    #[test]
    fn cross_section_small_universe_is_flagged() {
        let universe = BTreeMap::from([
            ("A".to_string(), noise(2048, 6)),
            ("B".to_string(), noise(2048, 7)),
            ("C".to_string(), vec![1.0; 2048]),
        ]);
        let sizes = BTreeMap::from([
            ("A".to_string(), 1e5),
            ("B".to_string(), 1e6),
            ("C".to_string(), 1e7),
        ]);
        let (cs, curves) = hurst_cross_section(&universe, &sizes, &DfaConfig::default()).unwrap();
        assert_eq!(cs.entries.len(), 2);
        assert_eq!(cs.failures.len(), 1);
        assert_eq!(cs.failures[0].0, "C");
        assert!(cs.low_n);
        assert!(cs.std_h > 0.0);
        assert_eq!(curves.len(), 2);
    }
}
