//! Trading-value distributions: histograms, log standardization and
//! log-normal moment fits.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SamplingInterval;
use crate::stats::{self, CompensatedSum};

/// Default bin count for value-space PDFs (about 8 bins per decade over 6 decades).
pub const DEFAULT_PDF_BINS: usize = 50;

/// Minimum sample size accepted by [`fit_lognormal`].
pub const MIN_FIT_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinningScheme {
    /// Geometric edges; densities are per unit of value.
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfEstimate {
    pub scheme: BinningScheme,
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<usize>,
    pub sample_count: usize,
    /// Samples that fell outside an explicitly requested range.
    pub outside: usize,
}

impl PdfEstimate {
    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    /// Sum of density times bin width.
    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.widths())
            .map(|(d, w)| d * w)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Center of the highest-density bin.
    pub fn mode(&self) -> f64 {
        let (i, _) = self
            .densities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty histogram");
        self.centers[i]
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    let bad: Vec<f64> = values.iter().copied().filter(|v| !(*v > 0.0)).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            count: bad.len(),
            first: bad.into_iter().take(5).collect(),
        })
    }
}

/// Histogram density over the sample's own range.
///
/// A sample with no spread gets a narrow symmetric range around its value,
/// so all mass lands in one bin.
pub fn pdf_histogram(values: &[f64], bins: usize, scheme: BinningScheme) -> Result<PdfEstimate> {
    if values.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "histogram needs at least 10 values, got {}",
            values.len()
        )));
    }
    if scheme == BinningScheme::Log {
        check_positive(values)?;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (lo, hi) = if lo < hi {
        (lo, hi)
    } else {
        match scheme {
            BinningScheme::Log => (lo * (-1e-6f64).exp(), hi * 1e-6f64.exp()),
            BinningScheme::Linear => {
                let pad = (lo.abs() * 1e-6).max(1e-12);
                (lo - pad, hi + pad)
            }
        }
    };
    pdf_histogram_in(values, bins, scheme, (lo, hi))
}

/// Histogram density over a fixed range. Samples outside the range are
/// counted in `outside`; densities stay normalized by the full sample size.
pub fn pdf_histogram_in(
    values: &[f64],
    bins: usize,
    scheme: BinningScheme,
    range: (f64, f64),
) -> Result<PdfEstimate> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::InvalidParameter(
            "histogram needs at least one bin".into(),
        ));
    }
    if !(lo < hi) || (scheme == BinningScheme::Log && lo <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad histogram range [{lo}, {hi}]"
        )));
    }
    if values.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if scheme == BinningScheme::Log {
        check_positive(values)?;
    }
    type Map = fn(f64) -> f64;
    let (to_axis, from_axis): (Map, Map) = match scheme {
        BinningScheme::Log => (f64::ln, f64::exp),
        BinningScheme::Linear => (|x| x, |x| x),
    };
    let (a, b) = (to_axis(lo), to_axis(hi));
    let step = (b - a) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|k| from_axis(a + step * k as f64)).collect();
    edges[0] = lo;
    edges[bins] = hi;

    let mut counts = vec![0usize; bins];
    let mut outside = 0;
    for &v in values {
        if !(v >= lo && v <= hi) {
            outside += 1;
            continue;
        }
        let k = (((to_axis(v) - a) / step) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = values.len() as f64;
    let centers = edges
        .windows(2)
        .map(|w| match scheme {
            BinningScheme::Log => (w[0] * w[1]).sqrt(),
            BinningScheme::Linear => 0.5 * (w[0] + w[1]),
        })
        .collect();
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (n * (w[1] - w[0])))
        .collect();
    Ok(PdfEstimate {
        scheme,
        edges,
        centers,
        densities,
        counts,
        sample_count: values.len(),
        outside,
    })
}

/// Log moments with the population convention.
fn log_moments(values: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    check_positive(values)?;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (mu, sigma) =
        stats::mean_std(&logs).ok_or_else(|| Error::InsufficientData("empty sample".into()))?;
    Ok((logs, mu, sigma))
}

/// `(ln V - <ln V>) / sigma(ln V)`.
pub fn normalize_logs(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(
            "normalization needs at least 2 values".into(),
        ));
    }
    let (logs, mu, sigma) = log_moments(values)?;
    if sigma == 0.0 {
        return Err(Error::Degenerate("ln V has zero variance".into()));
    }
    Ok(logs.into_iter().map(|l| (l - mu) / sigma).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    /// Kolmogorov-Smirnov distance of standardized ln V from N(0, 1).
    pub ks: f64,
    pub n: usize,
}

pub fn fit_lognormal(values: &[f64]) -> Result<LogNormalFit> {
    if values.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "log-normal fit needs at least {MIN_FIT_SAMPLES} values, got {}",
            values.len()
        )));
    }
    let (logs, mu, sigma) = log_moments(values)?;
    if sigma == 0.0 {
        return Err(Error::Degenerate(
            "ln V has zero variance (sigma = 0)".into(),
        ));
    }
    let z: Vec<f64> = logs.iter().map(|l| (l - mu) / sigma).collect();
    Ok(LogNormalFit {
        mu,
        sigma,
        ks: stats::ks_standard_normal(&z),
        n: values.len(),
    })
}

/// One row of the moments-versus-interval table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMoments {
    pub interval: SamplingInterval,
    pub fit: LogNormalFit,
    /// Zero-activity bins left out of the fit.
    pub zero_excluded: usize,
}

/// Splits pooled bin values into the positive sample and a zero count.
pub fn positive_part(values: &[f64]) -> (Vec<f64>, usize) {
    let pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let zeros = values.len() - pos.len();
    (pos, zeros)
}

/// Fits ln V moments per interval from values pooled across instruments.
/// Zero bins are dropped and counted.
pub fn moments_vs_interval(
    pooled: &[(SamplingInterval, Vec<f64>)],
) -> Result<Vec<IntervalMoments>> {
    if pooled.is_empty() {
        return Err(Error::InsufficientData("no intervals supplied".into()));
    }
    let mut rows = pooled
        .iter()
        .map(|(interval, values)| {
            let (pos, zeros) = positive_part(values);
            if zeros > 0 {
                warn!("{interval}: {zeros} zero-activity bins excluded from the distribution");
            }
            fit_lognormal(&pos).map(|fit| IntervalMoments {
                interval: *interval,
                fit,
                zero_excluded: zeros,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.interval.trading_minutes());
    Ok(rows)
}
