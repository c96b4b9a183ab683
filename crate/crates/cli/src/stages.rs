use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use equity_activity::dfa::{self, HurstFit, HurstVsSize};
use equity_activity::distribution::{
    moments_vs_interval, normalize_logs, pdf_histogram, pdf_histogram_in, positive_part,
    BinningScheme, IntervalMoments, PdfEstimate,
};
use equity_activity::growth::{self, GrowthRates, PowerLawFit};
use equity_activity::ingest::{
    aggregate_universe, cross_measure_report, filter_universe, group_by_instrument,
    read_trade_file, ActivitySeries, Calendar, ExclusionReport, InstrumentAverages, ParsedTrades,
    SamplingInterval,
};
use equity_activity::io::{self as aio, num, SeriesManifest};
use equity_activity::pattern::{deseasonalize, intraday_pattern, market_pattern};
use equity_activity::surrogate::{relation_experiment, RelationConfig};
use equity_activity::Error as CoreError;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, StageContext};
use crate::manifest::{digest, FileDigest, Manifest, StageOutput, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Pattern,
    Dist,
    Growth,
    Dfa,
    Relation,
    Synth,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Pattern => "pattern",
            Stage::Dist => "dist",
            Stage::Growth => "growth",
            Stage::Dfa => "dfa",
            Stage::Relation => "relation",
            Stage::Synth => "synth",
            Stage::All => "all",
        }
    }
}

const SERIES_MANIFEST: &str = "series/series.json";
const PIPELINE: [Stage; 6] = [
    Stage::Ingest,
    Stage::Pattern,
    Stage::Dist,
    Stage::Growth,
    Stage::Dfa,
    Stage::Relation,
];

pub fn run(stage: Stage, cfg: &RunConfig) -> CliResult<()> {
    if matches!(stage, Stage::Ingest | Stage::All) {
        cfg.validate_ingest_inputs()?;
    }
    cfg.prepare_output()?;
    match stage {
        Stage::All => run_all(cfg),
        s => run_one(s, cfg).map(|_| ()),
    }
}

fn run_one(stage: Stage, cfg: &RunConfig) -> CliResult<Manifest> {
    info!("running {}", stage.name());
    let mut out = StageOutput::create(&cfg.out, stage.name())?;
    let result = match stage {
        Stage::Ingest => ingest(cfg, &mut out),
        Stage::Pattern => pattern(cfg, &mut out),
        Stage::Dist => dist(cfg, &mut out),
        Stage::Growth => growth_stage(cfg, &mut out),
        Stage::Dfa => dfa_stage(cfg, &mut out),
        Stage::Relation => relation(cfg, &mut out),
        Stage::Synth => synth(cfg, &mut out),
        Stage::All => unreachable!("`all` is not a single stage"),
    };
    match result {
        Ok(()) => out.finish(None),
        Err(e) => {
            out.finish(Some(e.to_string()))?;
            Err(e)
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    pub status: Status,
    pub manifest: FileDigest,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub stages: Vec<StageSummary>,
    /// One plot-data file per figure.
    pub figures: Vec<FileDigest>,
}

fn run_all(cfg: &RunConfig) -> CliResult<()> {
    let mut stages = Vec::new();
    let mut figures = Vec::new();
    let mut failure = None;
    for stage in PIPELINE {
        let result = run_one(stage, cfg);
        let manifest_path = cfg.out.join(stage.name()).join("manifest.json");
        if manifest_path.is_file() {
            let m: Manifest = aio::read_json(&manifest_path).stage(stage.name())?;
            figures.extend(m.artifacts.iter().filter(|a| a.figure.is_some()).cloned());
            stages.push(StageSummary {
                stage: m.stage,
                status: m.status,
                manifest: digest(&cfg.out, &manifest_path, None)?,
            });
        }
        if let Err(e) = result {
            failure = Some(e);
            break;
        }
    }
    figures.sort_by_key(|f| f.figure);
    let root = RunManifest { stages, figures };
    aio::write_json(&cfg.out.join("manifest.json"), &root).stage("all")?;
    failure.map_or(Ok(()), Err)
}

/// Path of an upstream artifact, or a dependency error naming it.
fn require(cfg: &RunConfig, stage: &'static str, rel: &str) -> CliResult<PathBuf> {
    let path = cfg.out.join(stage).join(rel);
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact {
            path: Path::new(stage).join(rel),
            stage,
        })
    }
}

fn finest(intervals: &[SamplingInterval], intraday_only: bool) -> Option<SamplingInterval> {
    intervals
        .iter()
        .copied()
        .filter(|i| !intraday_only || i.is_intraday())
        .min_by_key(|i| i.trading_minutes())
}

fn save_all(
    out: &mut StageOutput,
    dir: &str,
    series: &[&ActivitySeries],
    manifest: &mut SeriesManifest,
) -> CliResult<()> {
    let sub = out.subdir(dir)?;
    let stage = out.stage;
    for s in series {
        let entry = aio::save_series(&sub, s).stage(stage)?;
        out.file(Path::new(dir).join(&entry.file));
        manifest.series.push(entry);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct IngestReport {
    trades: usize,
    malformed_rows: usize,
    out_of_session_rows: usize,
    instruments: usize,
    exclusions: ExclusionReport,
}

#[derive(Debug, Serialize)]
struct CrossMeasureSummary {
    instruments: usize,
    excluded: Vec<String>,
    pearson_log_nv: Option<f64>,
    pearson_log_qv: Option<f64>,
    exponent_nv: Option<f64>,
    exponent_nv_stderr: Option<f64>,
    exponent_qv: Option<f64>,
    exponent_qv_stderr: Option<f64>,
    error: Option<String>,
}

fn ingest(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "ingest";
    let p = &cfg.ingest;
    out.set_parameters(p);
    let cal_path = p.calendar.as_ref().expect("validated");
    let calendar = Calendar::read(cal_path).stage(S)?;
    out.input(cal_path);

    let parsed: Vec<ParsedTrades> = p
        .inputs
        .par_iter()
        .map(|path| read_trade_file(path, &p.format))
        .collect::<equity_activity::Result<_>>()
        .stage(S)?;
    let mut trades = ParsedTrades::default();
    for (path, part) in p.inputs.iter().zip(parsed) {
        out.input(path);
        trades.extend(part);
    }
    info!(
        "parsed {} trades ({} malformed, {} outside the session)",
        trades.records.len(),
        trades.malformed,
        trades.out_of_session
    );
    let trade_count = trades.records.len();
    let mut groups = group_by_instrument(trades.records);
    let instruments = groups.len();

    let daily = aggregate_universe(&groups, SamplingInterval::ONE_DAY, &calendar).stage(S)?;
    let (kept, exclusions) = filter_universe(daily, p.min_days).stage(S)?;
    if kept.is_empty() {
        return Err(CliError::Stage {
            stage: S,
            source: CoreError::InsufficientData(format!(
                "no instrument traded on at least {} sessions",
                p.min_days
            )),
        });
    }
    groups.retain(|sym, _| kept.contains_key(sym));

    let mut manifest = SeriesManifest::default();
    for &iv in &p.intervals {
        let series = if iv == SamplingInterval::ONE_DAY {
            kept.clone()
        } else {
            aggregate_universe(&groups, iv, &calendar).stage(S)?
        };
        let refs: Vec<&ActivitySeries> = series.values().collect();
        save_all(out, "series", &refs, &mut manifest)?;
    }
    let path = out.file(SERIES_MANIFEST);
    aio::write_json(&path, &manifest).stage(S)?;

    let path = out.file("ingest.json");
    let report = IngestReport {
        trades: trade_count,
        malformed_rows: trades.malformed,
        out_of_session_rows: trades.out_of_session,
        instruments,
        exclusions,
    };
    aio::write_json(&path, &report).stage(S)?;

    let averages: Vec<InstrumentAverages> = kept.values().map(InstrumentAverages::of).collect();
    let path = out.figure_file("cross_measure.csv", Some(1));
    aio::write_table(
        &path,
        &["symbol", "mean_V", "mean_N", "mean_Q"],
        averages.iter().map(|a| {
            [
                a.instrument.clone(),
                num(a.mean_value),
                num(a.mean_trades),
                num(a.mean_volume),
            ]
        }),
    )
    .stage(S)?;
    let summary = match cross_measure_report(&kept) {
        Ok(r) => CrossMeasureSummary {
            instruments: r.instruments.len(),
            excluded: r.excluded,
            pearson_log_nv: Some(r.pearson_log_nv),
            pearson_log_qv: Some(r.pearson_log_qv),
            exponent_nv: Some(r.exponent_nv.slope),
            exponent_nv_stderr: Some(r.exponent_nv.slope_stderr),
            exponent_qv: Some(r.exponent_qv.slope),
            exponent_qv_stderr: Some(r.exponent_qv.slope_stderr),
            error: None,
        },
        Err(e) => {
            warn!("cross-measure fit failed: {e}");
            CrossMeasureSummary {
                instruments: averages.len(),
                excluded: Vec::new(),
                pearson_log_nv: None,
                pearson_log_qv: None,
                exponent_nv: None,
                exponent_nv_stderr: None,
                exponent_qv: None,
                exponent_qv_stderr: None,
                error: Some(e.to_string()),
            }
        }
    };
    let path = out.file("cross_measure.json");
    aio::write_json(&path, &summary).stage(S)
}

#[derive(Debug, Serialize)]
struct PatternParams {
    interval: SamplingInterval,
    report_slot_minutes: u32,
}

fn pattern(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "pattern";
    let upstream = require(cfg, "ingest", SERIES_MANIFEST)?;
    out.input(&upstream);
    let intervals = SeriesManifest::read(&upstream).stage(S)?.intervals();
    let iv = finest(&intervals, true).ok_or_else(|| CliError::Stage {
        stage: S,
        source: CoreError::Incompatible("no intraday series were ingested".into()),
    })?;
    let bin = iv.trading_minutes() as u32;
    let slot = if cfg.report_slot_minutes.is_multiple_of(bin) {
        cfg.report_slot_minutes
    } else {
        warn!(
            "report slot of {} min does not cover whole {iv} bins; using {bin} min",
            cfg.report_slot_minutes
        );
        bin
    };
    out.set_parameters(&PatternParams {
        interval: iv,
        report_slot_minutes: slot,
    });

    let series = aio::load_series(&upstream, iv).stage(S)?;
    let results: Vec<_> = series
        .par_iter()
        .map(|s| {
            let own = intraday_pattern(s, bin)?;
            let report = intraday_pattern(s, slot)?;
            let flat = deseasonalize(s, &own)?;
            Ok((own, report, flat))
        })
        .collect::<equity_activity::Result<_>>()
        .stage(S)?;

    out.subdir("patterns")?;
    let mut reports = Vec::with_capacity(results.len());
    let mut flats = Vec::with_capacity(results.len());
    for (own, report, flat) in results {
        let path = out.file(format!("patterns/{}.csv", own.instrument));
        aio::write_pattern_csv(&path, &own).stage(S)?;
        reports.push(report);
        flats.push(flat);
    }
    let market = market_pattern(&reports).stage(S)?;
    let path = out.figure_file("market_pattern.csv", Some(2));
    aio::write_market_pattern_csv(&path, &market).stage(S)?;

    let mut manifest = SeriesManifest::default();
    let refs: Vec<&ActivitySeries> = flats.iter().collect();
    save_all(out, "series", &refs, &mut manifest)?;
    let path = out.file(SERIES_MANIFEST);
    aio::write_json(&path, &manifest).stage(S)
}

#[derive(Debug, Serialize)]
struct DistSummary {
    moments: Vec<IntervalMoments>,
    failures: Vec<(SamplingInterval, String)>,
}

fn dist(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "dist";
    let upstream = require(cfg, "ingest", SERIES_MANIFEST)?;
    out.input(&upstream);
    out.set_parameters(&cfg.distribution);
    let intervals = SeriesManifest::read(&upstream).stage(S)?.intervals();
    let bins = cfg.distribution.bins;
    let zr = cfg.distribution.z_range;

    let mut moments = Vec::new();
    let mut failures = Vec::new();
    let mut collapsed: Vec<(String, PdfEstimate)> = Vec::new();
    let mut raw: Vec<(String, PdfEstimate)> = Vec::new();
    for iv in intervals {
        let series = aio::load_series(&upstream, iv).stage(S)?;
        let pooled: Vec<f64> = series.iter().flat_map(|s| s.values()).collect();
        let (pos, _) = positive_part(&pooled);
        let attempt = moments_vs_interval(&[(iv, pooled)]).and_then(|m| {
            let z = normalize_logs(&pos)?;
            let c = pdf_histogram_in(&z, bins, BinningScheme::Linear, (-zr, zr))?;
            let r = pdf_histogram(&pos, bins, BinningScheme::Log)?;
            Ok((m, c, r))
        });
        match attempt {
            Ok((m, c, r)) => {
                moments.extend(m);
                collapsed.push((iv.to_string(), c));
                raw.push((iv.to_string(), r));
            }
            Err(e) => {
                warn!("{iv}: distribution fit skipped: {e}");
                failures.push((iv, e.to_string()));
            }
        }
    }
    let path = out.figure_file("pdf.csv", Some(3));
    aio::write_pdf_csv(&path, &collapsed).stage(S)?;
    let path = out.file("pdf_raw.csv");
    aio::write_pdf_csv(&path, &raw).stage(S)?;
    let path = out.file("moments.csv");
    aio::write_table(
        &path,
        &["interval", "mu", "sigma", "ks", "n", "zero_excluded"],
        moments.iter().map(|m| {
            [
                m.interval.to_string(),
                num(m.fit.mu),
                num(m.fit.sigma),
                num(m.fit.ks),
                m.fit.n.to_string(),
                m.zero_excluded.to_string(),
            ]
        }),
    )
    .stage(S)?;
    let empty = moments.is_empty();
    let path = out.file("fit_summary.json");
    aio::write_json(&path, &DistSummary { moments, failures }).stage(S)?;
    if empty {
        return Err(CliError::Stage {
            stage: S,
            source: CoreError::InsufficientData("no interval could be fitted".into()),
        });
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GrowthSummary {
    pub interval: SamplingInterval,
    pub observations: usize,
    pub skipped_zero_initial: usize,
    pub fit: Option<PowerLawFit>,
    pub error: Option<String>,
}

fn growth_stage(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "growth";
    let upstream = require(cfg, "ingest", SERIES_MANIFEST)?;
    out.input(&upstream);
    out.set_parameters(&cfg.growth);
    let intervals = SeriesManifest::read(&upstream).stage(S)?.intervals();
    let iv = match cfg.growth.interval {
        Some(iv) => iv,
        None => finest(&intervals, false).ok_or_else(|| CliError::Stage {
            stage: S,
            source: CoreError::InsufficientData("no series were ingested".into()),
        })?,
    };
    let series = aio::load_series(&upstream, iv).stage(S)?;
    let parts: Vec<GrowthRates> = series.par_iter().map(growth::series_growth_rates).collect();
    let mut rates = GrowthRates::default();
    for p in parts {
        rates.extend(p);
    }
    let stat = growth::conditional_stats(
        &rates.observations,
        cfg.growth.bins_per_decade,
        cfg.growth.min_occupancy,
    )
    .stage(S)?;
    let path = out.figure_file("binned.csv", Some(4));
    aio::write_binned_stat_csv(&path, &stat).stage(S)?;

    let report = growth::mean_growth_report(&stat);
    let path = out.file("mean_growth.csv");
    aio::write_table(
        &path,
        &["center", "mean_g", "count", "ln2"],
        report.rows.iter().map(|r| {
            [
                num(r.center),
                num(r.mean),
                r.count.to_string(),
                num(report.reference),
            ]
        }),
    )
    .stage(S)?;

    let (fit, error) = match growth::fit_beta(&stat, cfg.growth.fit_range) {
        Ok(f) => (Some(f), None),
        Err(e) => {
            warn!("beta fit failed: {e}");
            (None, Some(e.to_string()))
        }
    };
    let path = out.file("beta.json");
    let summary = GrowthSummary {
        interval: iv,
        observations: rates.observations.len(),
        skipped_zero_initial: rates.skipped_zero_initial,
        fit,
        error,
    };
    aio::write_json(&path, &summary).stage(S)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InstrumentFit {
    pub instrument: String,
    pub fit: HurstFit,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SizeRegression {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DfaSummary {
    pub interval: SamplingInterval,
    pub instruments: usize,
    pub mean_h: f64,
    pub std_h: f64,
    pub ks: Option<f64>,
    pub low_n: bool,
    pub fits: Vec<InstrumentFit>,
    pub failures: Vec<(String, String)>,
    pub size_regression: Option<SizeRegression>,
    pub size_regression_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct DfaParams<'a> {
    dfa: &'a dfa::DfaConfig,
    size_bins_per_decade: u32,
}

fn dfa_stage(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "dfa";
    let flat_manifest = require(cfg, "pattern", SERIES_MANIFEST)?;
    let raw_manifest = require(cfg, "ingest", SERIES_MANIFEST)?;
    out.input(&flat_manifest);
    out.input(&raw_manifest);
    out.set_parameters(&DfaParams {
        dfa: &cfg.dfa,
        size_bins_per_decade: cfg.size_bins_per_decade,
    });
    let intervals = SeriesManifest::read(&flat_manifest).stage(S)?.intervals();
    let iv = finest(&intervals, true).ok_or_else(|| CliError::Stage {
        stage: S,
        source: CoreError::InsufficientData("no deseasonalized series found".into()),
    })?;
    let flat = aio::load_series(&flat_manifest, iv).stage(S)?;
    let raw = aio::load_series(&raw_manifest, iv).stage(S)?;
    let universe: BTreeMap<String, Vec<f64>> = flat
        .iter()
        .map(|s| (s.instrument().to_string(), s.values()))
        .collect();
    let sizes: BTreeMap<String, f64> = raw
        .iter()
        .map(|s| (s.instrument().to_string(), s.daily_means().0))
        .collect();
    let (cs, curves) = dfa::hurst_cross_section(&universe, &sizes, &cfg.dfa).stage(S)?;

    let path = out.figure_file("dfa_points.csv", Some(5));
    aio::write_dfa_points_csv(
        &path,
        curves
            .iter()
            .map(|(sym, r)| (sym.as_str(), r.points.as_slice())),
    )
    .stage(S)?;
    let path = out.file("cross_section.csv");
    aio::write_cross_section_csv(&path, &cs).stage(S)?;

    let (size, size_error) = match dfa::hurst_vs_size(&cs, cfg.size_bins_per_decade) {
        Ok(r) => (r, None),
        Err(e) => {
            warn!("H versus size regression failed: {e}");
            let empty = HurstVsSize {
                bins: Vec::new(),
                slope: f64::NAN,
                intercept: f64::NAN,
                stderr: f64::NAN,
            };
            (empty, Some(e.to_string()))
        }
    };
    let path = out.figure_file("hurst_vs_size.csv", Some(6));
    aio::write_hurst_vs_size_csv(&path, &size).stage(S)?;

    let summary = DfaSummary {
        interval: iv,
        instruments: cs.entries.len(),
        mean_h: cs.mean_h,
        std_h: cs.std_h,
        ks: cs.ks,
        low_n: cs.low_n,
        fits: curves
            .iter()
            .map(|(sym, r)| InstrumentFit {
                instrument: sym.clone(),
                fit: r.fit,
            })
            .collect(),
        failures: cs.failures.clone(),
        size_regression: size_error.is_none().then_some(SizeRegression {
            slope: size.slope,
            intercept: size.intercept,
            stderr: size.stderr,
        }),
        size_regression_error: size_error,
    };
    let path = out.file("summary.json");
    aio::write_json(&path, &summary).stage(S)
}

#[derive(Debug, Serialize)]
struct RelationSummary {
    beta: f64,
    beta_stderr: f64,
    mean_h: f64,
    std_h: f64,
    one_minus_h: f64,
    /// beta + H - 1
    gap: f64,
}

fn relation(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "relation";
    let beta_path = require(cfg, "growth", "beta.json")?;
    let dfa_path = require(cfg, "dfa", "summary.json")?;
    out.input(&beta_path);
    out.input(&dfa_path);
    let growth: GrowthSummary = aio::read_json(&beta_path).stage(S)?;
    let dfa: DfaSummary = aio::read_json(&dfa_path).stage(S)?;
    let fit = growth.fit.ok_or_else(|| CliError::Stage {
        stage: S,
        source: CoreError::InsufficientData(format!(
            "no beta fit available: {}",
            growth.error.unwrap_or_default()
        )),
    })?;
    let summary = RelationSummary {
        beta: fit.exponent,
        beta_stderr: fit.stderr,
        mean_h: dfa.mean_h,
        std_h: dfa.std_h,
        one_minus_h: 1.0 - dfa.mean_h,
        gap: fit.exponent + dfa.mean_h - 1.0,
    };
    let path = out.file("relation.json");
    aio::write_json(&path, &summary).stage(S)
}

fn synth(cfg: &RunConfig, out: &mut StageOutput) -> CliResult<()> {
    const S: &str = "synth";
    let p = &cfg.surrogate;
    let rc = RelationConfig {
        dfa: cfg.dfa,
        bins_per_decade: cfg.growth.bins_per_decade,
        min_occupancy: cfg.growth.min_occupancy,
    };
    out.set_parameters(&(p, &rc));
    let report = relation_experiment(&p.schedule, p.ensemble, &p.template, &rc).stage(S)?;
    let path = out.file("relation_experiment.csv");
    aio::write_relation_csv(&path, &report).stage(S)?;
    let path = out.file("relation_experiment.json");
    aio::write_json(&path, &report).stage(S)
}
