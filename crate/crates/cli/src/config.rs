use std::path::{Path, PathBuf};

use equity_activity::dfa::DfaConfig;
use equity_activity::ingest::{HeaderMode, SamplingInterval, SessionPolicy, TradeFormat};
use equity_activity::surrogate::{SurrogateSpec, DEFAULT_SCHEDULE};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_MIN_DAYS: usize = 480;
pub const DEFAULT_SEED: u64 = 20010102;

/// Config file layout. Every key is optional; relative paths are resolved
/// against the directory holding the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub pattern: PatternSection,
    #[serde(default)]
    pub distribution: DistributionSection,
    #[serde(default)]
    pub growth: GrowthSection,
    #[serde(default)]
    pub dfa: DfaSection,
    #[serde(default)]
    pub surrogate: SurrogateSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    pub inputs: Option<Vec<PathBuf>>,
    pub calendar: Option<PathBuf>,
    pub intervals: Option<Vec<String>>,
    pub min_days: Option<usize>,
    pub delimiter: Option<char>,
    pub header: Option<String>,
    pub session_policy: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSection {
    pub report_slot_minutes: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSection {
    pub bins: Option<usize>,
    pub z_range: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSection {
    pub interval: Option<String>,
    pub bins_per_decade: Option<u32>,
    pub min_occupancy: Option<usize>,
    pub fit_range: Option<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfaSection {
    pub detrend_order: Option<usize>,
    pub min_window: Option<usize>,
    pub windows_per_decade: Option<u32>,
    pub fit_range: Option<(usize, usize)>,
    pub log_transform: Option<bool>,
    pub size_bins_per_decade: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateSection {
    pub schedule: Option<Vec<f64>>,
    pub ensemble: Option<usize>,
    pub length: Option<usize>,
    pub log_mu: Option<f64>,
    pub log_sigma: Option<f64>,
}

/// Values given on the command line; they win over the config file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub intervals: Option<Vec<String>>,
    pub min_days: Option<usize>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestParams {
    pub inputs: Vec<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub intervals: Vec<SamplingInterval>,
    pub min_days: usize,
    pub format: TradeFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionParams {
    pub bins: usize,
    pub z_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthParams {
    pub interval: Option<SamplingInterval>,
    pub bins_per_decade: u32,
    pub min_occupancy: usize,
    pub fit_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateParams {
    pub schedule: Vec<f64>,
    pub ensemble: usize,
    pub template: SurrogateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub ingest: IngestParams,
    pub report_slot_minutes: u32,
    pub distribution: DistributionParams,
    pub growth: GrowthParams,
    pub dfa: DfaConfig,
    pub size_bins_per_decade: u32,
    pub surrogate: SurrogateParams,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_intervals(labels: &[String]) -> CliResult<Vec<SamplingInterval>> {
    let mut out: Vec<SamplingInterval> = labels
        .iter()
        .map(|l| l.trim().parse().map_err(|e| invalid(format!("{e}"))))
        .collect::<CliResult<_>>()?;
    out.sort_by_key(|i| i.trading_minutes());
    out.dedup();
    Ok(out)
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn load(o: Overrides) -> CliResult<Self> {
        let (file, base) = match &o.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let file: FileConfig = toml::from_str(&text)
                    .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        Self::merge(file, &base, o)
    }

    fn merge(file: FileConfig, base: &Path, o: Overrides) -> CliResult<Self> {
        let ing = file.ingest;
        let inputs = if o.inputs.is_empty() {
            ing.inputs
                .unwrap_or_default()
                .into_iter()
                .map(|p| resolve(base, p))
                .collect()
        } else {
            o.inputs
        };
        let calendar = o.calendar.or(ing.calendar.map(|p| resolve(base, p)));
        let labels = o.intervals.or(ing.intervals).unwrap_or_else(|| {
            SamplingInterval::standard()
                .iter()
                .map(|i| i.to_string())
                .collect()
        });
        let intervals = parse_intervals(&labels)?;
        if intervals.is_empty() {
            return Err(invalid("no sampling intervals configured"));
        }
        let delimiter = ing.delimiter.unwrap_or(',');
        if !delimiter.is_ascii() {
            return Err(invalid(format!("delimiter {delimiter:?} is not ASCII")));
        }
        let header = match ing.header.as_deref() {
            None | Some("auto") => HeaderMode::Auto,
            Some("present") => HeaderMode::Present,
            Some("absent") => HeaderMode::Absent,
            Some(other) => return Err(invalid(format!("unknown header mode {other:?}"))),
        };
        let session_policy = match ing.session_policy.as_deref() {
            None | Some("drop-row") => SessionPolicy::DropRow,
            Some("reject-file") => SessionPolicy::RejectFile,
            Some(other) => return Err(invalid(format!("unknown session policy {other:?}"))),
        };
        let min_days = o.min_days.or(ing.min_days).unwrap_or(DEFAULT_MIN_DAYS);
        if min_days == 0 {
            return Err(invalid("min_days must be at least 1"));
        }

        let g = file.growth;
        let growth_interval = g
            .interval
            .map(|l| l.parse().map_err(|e| invalid(format!("{e}"))))
            .transpose()?;

        let d = file.dfa;
        let mut dfa = DfaConfig::with_order(d.detrend_order.unwrap_or(1));
        if let Some(m) = d.min_window {
            dfa.min_window = m;
        }
        if let Some(w) = d.windows_per_decade {
            dfa.windows_per_decade = w;
        }
        dfa.fit_range = d.fit_range;
        dfa.log_transform = d.log_transform.unwrap_or(false);
        dfa.validate().map_err(|e| invalid(e.to_string()))?;

        let seed = o.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        let s = file.surrogate;
        let defaults = SurrogateSpec::default();
        let template = SurrogateSpec {
            length: s.length.unwrap_or(defaults.length),
            target_h: defaults.target_h,
            log_mu: s.log_mu.unwrap_or(defaults.log_mu),
            log_sigma: s.log_sigma.unwrap_or(defaults.log_sigma),
            seed,
        };
        template.validate().map_err(|e| invalid(e.to_string()))?;

        let cfg = RunConfig {
            out: o
                .out
                .or(file.out.map(|p| resolve(base, p)))
                .unwrap_or_else(|| PathBuf::from("out")),
            seed,
            threads: o.threads.or(file.threads),
            ingest: IngestParams {
                inputs,
                calendar,
                intervals,
                min_days,
                format: TradeFormat {
                    delimiter: delimiter as u8,
                    header,
                    session_policy,
                },
            },
            report_slot_minutes: file
                .pattern
                .report_slot_minutes
                .unwrap_or(equity_activity::pattern::REPORT_SLOT_MINUTES),
            distribution: DistributionParams {
                bins: file
                    .distribution
                    .bins
                    .unwrap_or(equity_activity::distribution::DEFAULT_PDF_BINS),
                z_range: file.distribution.z_range.unwrap_or(5.0),
            },
            growth: GrowthParams {
                interval: growth_interval,
                bins_per_decade: g
                    .bins_per_decade
                    .unwrap_or(equity_activity::growth::DEFAULT_BINS_PER_DECADE),
                min_occupancy: g
                    .min_occupancy
                    .unwrap_or(equity_activity::growth::DEFAULT_MIN_OCCUPANCY),
                fit_range: g.fit_range,
            },
            dfa,
            size_bins_per_decade: d.size_bins_per_decade.unwrap_or(2),
            surrogate: SurrogateParams {
                schedule: s.schedule.unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec()),
                ensemble: s.ensemble.unwrap_or(32),
                template,
            },
        };
        cfg.validate_numbers()?;
        Ok(cfg)
    }

    fn validate_numbers(&self) -> CliResult<()> {
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        if self.distribution.bins == 0 || !(self.distribution.z_range > 0.0) {
            return Err(invalid("distribution bins and z_range must be positive"));
        }
        if self.growth.bins_per_decade == 0 || self.size_bins_per_decade == 0 {
            return Err(invalid("bins per decade must be at least 1"));
        }
        if let Some((lo, hi)) = self.growth.fit_range {
            if !(0.0 < lo && lo < hi) {
                return Err(invalid(format!("bad growth fit range [{lo}, {hi}]")));
            }
        }
        if let Some(iv) = self.growth.interval {
            if !self.ingest.intervals.contains(&iv) {
                return Err(invalid(format!(
                    "growth interval {iv} is not among the ingested intervals"
                )));
            }
        }
        if self
            .surrogate
            .schedule
            .iter()
            .any(|h| !(*h > 0.0 && *h < 1.0))
        {
            return Err(invalid("surrogate schedule values must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Checks the inputs `ingest` needs.
    pub fn validate_ingest_inputs(&self) -> CliResult<()> {
        if self.ingest.inputs.is_empty() {
            return Err(invalid("no trade input files given"));
        }
        let calendar = self
            .ingest
            .calendar
            .as_ref()
            .ok_or_else(|| invalid("no session calendar given"))?;
        for p in self.ingest.inputs.iter().chain(std::iter::once(calendar)) {
            if !p.is_file() {
                return Err(invalid(format!("input {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Creates the output directory and checks it is writable.
    pub fn prepare_output(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        let probe = self.out.join(".write-probe");
        std::fs::write(&probe, b"").map_err(|e| CliError::io(&probe, e))?;
        std::fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))
    }
}
