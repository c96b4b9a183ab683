//! Growth rates of consecutive activity and their conditional statistics.
//!
//! The growth rate compares cumulative activity over two consecutive bins,
//! `g = ln((V(t-1) + V(t)) / V(t-1))`, so it is defined whenever the initial
//! value is positive and is never negative.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ActivitySeries;
use crate::stats::{self, CompensatedSum};

pub const DEFAULT_BINS_PER_DECADE: u32 = 8;
pub const DEFAULT_MIN_OCCUPANCY: usize = 10;
/// Trimmed from each end of the occupied range by the default beta fit, in decades.
pub const DEFAULT_EDGE_TRIM_DECADES: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthObservation {
    pub v_initial: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowthRates {
    pub observations: Vec<GrowthObservation>,
    /// Consecutive pairs skipped because V(t-1) = 0.
    pub skipped_zero_initial: usize,
}

impl GrowthRates {
    pub fn extend(&mut self, other: GrowthRates) {
        self.observations.extend(other.observations);
        self.skipped_zero_initial += other.skipped_zero_initial;
    }
}

pub fn growth_rate(v_prev: f64, v_next: f64) -> f64 {
    (v_next / v_prev).ln_1p()
}

pub fn growth_rates(values: &[f64]) -> GrowthRates {
    let mut out = GrowthRates::default();
    for w in values.windows(2) {
        let (prev, next) = (w[0], w[1]);
        if prev > 0.0 {
            out.observations.push(GrowthObservation {
                v_initial: prev,
                g: growth_rate(prev, next),
            });
        } else {
            out.skipped_zero_initial += 1;
        }
    }
    out
}

pub fn series_growth_rates(series: &ActivitySeries) -> GrowthRates {
    growth_rates(&series.values())
}

/// Index of the logarithmic bin holding `v` on the grid anchored at 1.
fn bin_index(v: f64, bins_per_decade: u32) -> i64 {
    (v.log10() * bins_per_decade as f64).floor() as i64
}

fn bin_edges(k: i64, bins_per_decade: u32) -> (f64, f64) {
    let d = bins_per_decade as f64;
    (10f64.powf(k as f64 / d), 10f64.powf((k + 1) as f64 / d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatBin {
    pub lo: f64,
    pub hi: f64,
    /// Geometric midpoint of the edges.
    pub center: f64,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    /// `count >= min_occupancy`.
    pub sufficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedStat {
    pub bins_per_decade: u32,
    pub min_occupancy: usize,
    pub bins: Vec<StatBin>,
    pub total: usize,
}

fn check_bins_per_decade(bins_per_decade: u32) -> Result<()> {
    if bins_per_decade == 0 {
        Err(Error::InvalidParameter(
            "bins_per_decade must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

fn span_bins(
    bins_per_decade: u32,
    min_occupancy: usize,
    mut per_bin: BTreeMap<i64, (usize, f64, f64)>,
) -> BinnedStat {
    let first = *per_bin.keys().next().unwrap();
    let last = *per_bin.keys().next_back().unwrap();
    let mut total = 0;
    let bins = (first..=last)
        .map(|k| {
            let (lo, hi) = bin_edges(k, bins_per_decade);
            let (count, mean, std) = per_bin.remove(&k).unwrap_or((0, 0.0, 0.0));
            total += count;
            StatBin {
                lo,
                hi,
                center: (lo * hi).sqrt(),
                count,
                mean,
                std,
                sufficient: count >= min_occupancy,
            }
        })
        .collect();
    BinnedStat {
        bins_per_decade,
        min_occupancy,
        bins,
        total,
    }
}

/// Mean and population std of g in logarithmic bins of V(t-1).
///
/// Bin edges sit at `10^(k / bins_per_decade)`, so results from different
/// universes share a grid. Values inside a bin are sorted before summing,
/// which makes the result independent of observation order.
pub fn conditional_stats(
    observations: &[GrowthObservation],
    bins_per_decade: u32,
    min_occupancy: usize,
) -> Result<BinnedStat> {
    check_bins_per_decade(bins_per_decade)?;
    if observations.is_empty() {
        return Err(Error::InsufficientData("no growth observations".into()));
    }
    let mut grouped: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for o in observations {
        grouped
            .entry(bin_index(o.v_initial, bins_per_decade))
            .or_default()
            .push(o.g);
    }
    let per_bin = grouped
        .into_iter()
        .map(|(k, mut g)| {
            g.sort_by(f64::total_cmp);
            let (m, s) = stats::mean_std(&g).unwrap();
            (k, (g.len(), m, s))
        })
        .collect();
    Ok(span_bins(bins_per_decade, min_occupancy, per_bin))
}

/// Mergeable per-bin sums (count, sum g, sum g^2) for building
/// [`BinnedStat`] from partial results computed in parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthHistogram {
    bins_per_decade: u32,
    sums: BTreeMap<i64, (usize, CompensatedSum, CompensatedSum)>,
}

impl GrowthHistogram {
    pub fn new(bins_per_decade: u32) -> Result<Self> {
        check_bins_per_decade(bins_per_decade)?;
        Ok(GrowthHistogram {
            bins_per_decade,
            sums: BTreeMap::new(),
        })
    }

    pub fn add(&mut self, o: &GrowthObservation) {
        let e = self
            .sums
            .entry(bin_index(o.v_initial, self.bins_per_decade))
            .or_default();
        e.0 += 1;
        e.1.add(o.g);
        e.2.add(o.g * o.g);
    }

    pub fn merge(mut self, other: GrowthHistogram) -> Result<Self> {
        if self.bins_per_decade != other.bins_per_decade {
            return Err(Error::Incompatible(
                "histograms use different bin grids".into(),
            ));
        }
        for (k, (c, s, s2)) in other.sums {
            let e = self.sums.entry(k).or_default();
            e.0 += c;
            e.1.merge(&s);
            e.2.merge(&s2);
        }
        Ok(self)
    }

    pub fn finish(self, min_occupancy: usize) -> Result<BinnedStat> {
        if self.sums.is_empty() {
            return Err(Error::InsufficientData("no growth observations".into()));
        }
        let per_bin = self
            .sums
            .into_iter()
            .map(|(k, (c, s, s2))| {
                let n = c as f64;
                let m = s.value() / n;
                let var = (s2.value() / n - m * m).max(0.0);
                (k, (c, m, var.sqrt()))
            })
            .collect();
        Ok(span_bins(self.bins_per_decade, min_occupancy, per_bin))
    }
}

/// Power law `y ~ x^(-exponent)` fitted in log10-log10 space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// log10 of the prefactor.
    pub intercept: f64,
    pub stderr: f64,
    pub lo: f64,
    pub hi: f64,
    pub bins_used: usize,
    pub zero_std_excluded: usize,
}

/// Default beta fit range: the occupied span minus half a decade at each end.
// Bin centers that land on a fit bound up to rounding count as inside.
const EDGE_TOL: f64 = 1e-9;

pub fn default_fit_range(stat: &BinnedStat) -> Result<(f64, f64)> {
    let mut occupied = stat.bins.iter().filter(|b| b.sufficient);
    let first = occupied
        .next()
        .ok_or_else(|| Error::InsufficientData("no sufficiently occupied bins".into()))?;
    let last = occupied.next_back().unwrap_or(first);
    let trim = 10f64.powf(DEFAULT_EDGE_TRIM_DECADES);
    let (lo, hi) = (first.center * trim, last.center / trim);
    if !(lo < hi) {
        return Err(Error::InsufficientData(format!(
            "occupied bins span less than {} decades",
            2.0 * DEFAULT_EDGE_TRIM_DECADES
        )));
    }
    Ok((lo, hi))
}

/// Fits `sigma(g | V_i) ~ V_i^(-beta)` over the sufficiently occupied bins
/// whose centers fall in `range` (default: [`default_fit_range`]).
pub fn fit_beta(stat: &BinnedStat, range: Option<(f64, f64)>) -> Result<PowerLawFit> {
    let (lo, hi) = match range {
        Some(r) => r,
        None => default_fit_range(stat)?,
    };
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "empty fit range [{lo}, {hi}]"
        )));
    }
    let in_range: Vec<&StatBin> = stat
        .bins
        .iter()
        .filter(|b| {
            b.sufficient && b.center >= lo * (1.0 - EDGE_TOL) && b.center <= hi * (1.0 + EDGE_TOL)
        })
        .collect();
    let zero_std_excluded = in_range.iter().filter(|b| b.std <= 0.0).count();
    if zero_std_excluded > 0 {
        warn!("{zero_std_excluded} bins with zero growth-rate spread excluded from the beta fit");
    }
    let (x, y): (Vec<f64>, Vec<f64>) = in_range
        .iter()
        .filter(|b| b.std > 0.0)
        .map(|b| (b.center.log10(), b.std.log10()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "beta fit needs 3 occupied bins in [{lo:.4e}, {hi:.4e}], found {}",
            x.len()
        )));
    }
    let fit = stats::linear_fit(&x, &y)?;
    Ok(PowerLawFit {
        exponent: -fit.slope,
        intercept: fit.intercept,
        stderr: fit.slope_stderr,
        lo,
        hi,
        bins_used: x.len(),
        zero_std_excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanGrowthRow {
    pub center: f64,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanGrowthReport {
    pub rows: Vec<MeanGrowthRow>,
    /// Growth rate of two equal consecutive values, ln 2.
    pub reference: f64,
}

/// Conditional mean growth per occupied bin, with the ln 2 reference level.
pub fn mean_growth_report(stat: &BinnedStat) -> MeanGrowthReport {
    MeanGrowthReport {
        rows: stat
            .bins
            .iter()
            .filter(|b| b.count > 0)
            .map(|b| MeanGrowthRow {
                center: b.center,
                mean: b.mean,
                count: b.count,
            })
            .collect(),
        reference: LN_2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Exp, StandardNormal};

    #[test]
    fn growth_examples() {
        assert!((growth_rate(100.0, 100.0) - LN_2).abs() < 1e-12);
        assert_eq!(growth_rate(100.0, 0.0), 0.0);
        assert!((growth_rate(1.0, 3.0) - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_initial_values_are_skipped() {
        let r = growth_rates(&[0.0, 5.0, 0.0, 0.0, 2.0]);
        assert_eq!(r.skipped_zero_initial, 3);
        assert_eq!(r.observations.len(), 1);
        assert_eq!(r.observations[0].g, 0.0);
        assert!(growth_rates(&[1.0]).observations.is_empty());
    }

    fn obs(v: f64, g: f64) -> GrowthObservation {
        GrowthObservation { v_initial: v, g }
    }

    #[test]
    fn bins_cover_observed_span() {
        let o = [obs(1.5, 0.1), obs(15.0, 0.2), obs(1500.0, 0.3)];
        let s = conditional_stats(&o, 2, 1).unwrap();
        // [1, 3.16), ... up to [1000, 3162): seven bins
        assert_eq!(s.bins.len(), 7);
        assert!(s.bins[0].lo <= 1.5 && s.bins.last().unwrap().hi > 1500.0);
        assert_eq!(s.bins.iter().map(|b| b.count).sum::<usize>(), 3);
        assert_eq!(s.total, 3);
    }

    #[test]
    fn identical_growth_gives_zero_spread() {
        let o: Vec<_> = (1..200).map(|i| obs(i as f64 * 7.0, 0.3)).collect();
        let s = conditional_stats(&o, 8, 1).unwrap();
        assert!(s.bins.iter().all(|b| b.std == 0.0));
    }

    #[test]
    fn equal_consecutive_values_give_ln2() {
        let v: Vec<f64> = (0..500)
            .map(|i| 10f64.powf(i as f64 / 100.0))
            .flat_map(|x| [x, x])
            .collect();
        let r = growth_rates(&v);
        let pairs: Vec<_> = r.observations.iter().step_by(2).copied().collect();
        let s = conditional_stats(&pairs, 8, 1).unwrap();
        for b in s.bins.iter().filter(|b| b.count > 0) {
            assert!((b.mean - LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_bad_grid() {
        assert!(conditional_stats(&[], 8, 10).is_err());
        assert!(conditional_stats(&[obs(1.0, 1.0)], 0, 10).is_err());
    }

    fn exact_bins(beta: f64) -> BinnedStat {
        let bins = (0..40)
            .map(|k| {
                let (lo, hi) = bin_edges(k, 8);
                let center = (lo * hi).sqrt();
                StatBin {
                    lo,
                    hi,
                    center,
                    count: 100,
                    mean: LN_2,
                    std: center.powf(-beta),
                    sufficient: true,
                }
            })
            .collect();
        BinnedStat {
            bins_per_decade: 8,
            min_occupancy: 10,
            bins,
            total: 4000,
        }
    }

    #[test]
    fn exact_power_law_beta() {
        let fit = fit_beta(&exact_bins(0.14), None).unwrap();
        assert!((fit.exponent - 0.14).abs() < 1e-9);
        assert!(fit.stderr < 1e-9);
        assert!(fit.lo < fit.hi);
        // 5 decades of bins, half a decade trimmed at each end
        assert_eq!(fit.bins_used, 32);
        let flat = fit_beta(&exact_bins(0.0), None).unwrap();
        assert!(flat.exponent.abs() < 1e-12);
    }

    #[test]
    fn beta_fit_errors_and_exclusions() {
        let mut s = exact_bins(0.2);
        assert!(fit_beta(&s, Some((1.0, 1.5))).is_err());
        s.bins[10].std = 0.0;
        let fit = fit_beta(&s, Some((1.0, 1e4))).unwrap();
        assert_eq!(fit.zero_std_excluded, 1);
        assert!((fit.exponent - 0.2).abs() < 1e-9);
        for b in &mut s.bins {
            b.sufficient = b.center < 2.0;
        }
        assert!(fit_beta(&s, None).is_err());
    }

    #[test]
    fn histogram_route_agrees_with_sorted_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let o: Vec<_> = (0..20_000)
            .map(|_| obs(10f64.powf(rng.random_range(0.0..4.0)), rng.random::<f64>()))
            .collect();
        let direct = conditional_stats(&o, 8, 10).unwrap();
        let mut parts = Vec::new();
        for chunk in o.chunks(3000) {
            let mut h = GrowthHistogram::new(8).unwrap();
            chunk.iter().for_each(|x| h.add(x));
            parts.push(h);
        }
        let merged = parts
            .into_iter()
            .rev()
            .try_fold(GrowthHistogram::new(8).unwrap(), |acc, h| acc.merge(h))
            .unwrap()
            .finish(10)
            .unwrap();
        assert_eq!(direct.bins.len(), merged.bins.len());
        for (a, b) in direct.bins.iter().zip(&merged.bins) {
            assert_eq!(a.count, b.count);
            assert_eq!(a.sufficient, b.sufficient);
            assert!((a.mean - b.mean).abs() < 1e-12);
            assert!((a.std - b.std).abs() < 1e-9);
        }
    }

    #[test]
    fn delta_method_spread_tracks_generator() {
        // V(t) = V_i exp(eps), eps ~ N(0, s0 V_i^-0.14): for small eps,
        // g ~ ln 2 + eps / 2, so sigma(g | V_i) ~ s0 V_i^-0.14 / 2.
        let s0 = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let o: Vec<_> = (0..400_000)
            .map(|_| {
                let vi = 10f64.powf(rng.random_range(0.0..6.0));
                let eps = s0 * vi.powf(-0.14) * rng.sample::<f64, _>(StandardNormal);
                obs(vi, growth_rate(vi, vi * eps.exp()))
            })
            .collect();
        let s = conditional_stats(&o, 8, 10).unwrap();
        for b in s.bins.iter().filter(|b| b.count > 1000) {
            let expected = 0.5 * s0 * b.center.powf(-0.14);
            // Monte Carlo: relative sd of a sample std is about 1/sqrt(2n)
            let tol = 4.0 / (2.0 * b.count as f64).sqrt() + 0.02;
            assert!(
                (b.std / expected - 1.0).abs() < tol,
                "{} vs {expected}",
                b.std
            );
        }
        let fit = fit_beta(&s, None).unwrap();
        assert!((fit.exponent - 0.14).abs() < 0.01);
    }

    #[test]
    fn independent_exponential_values_small_vi_mean_exceeds_ln2() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = Exp::new(1.0).unwrap();
        let v: Vec<f64> = (0..200_000).map(|_| rng.sample(d)).collect();
        let s = conditional_stats(&growth_rates(&v).observations, 8, 10).unwrap();
        let report = mean_growth_report(&s);
        let small = report.rows.iter().find(|r| r.count >= 100).unwrap();
        assert!(small.center < 0.1);
        assert!(small.mean > 2.0 * LN_2, "{}", small.mean);
    }

    #[test]
    fn report_of_single_bin() {
        let s = conditional_stats(&[obs(5.0, 0.7); 3], 8, 1).unwrap();
        let r = mean_growth_report(&s);
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.reference, LN_2);
    }
}
