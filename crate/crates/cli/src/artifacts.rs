//! On-disk artifacts: trajectory CSV, spectrum JSON, report JSON and the
//! optional gnuplot script.
//!
//! Floats are written with Rust's shortest round-trip formatting, files are
//! UTF-8 with LF line endings, and every artifact carries the schema version
//! and the resolved configuration.

use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use unsharp_core::analysis::{
    classify_regime, pearson, power_spectrum, process_readout_with, Peak, ProcessOptions,
    ProcessedReadout, Regime,
};
use unsharp_core::nseries::RegimeParams;
use unsharp_core::{SpectrumRecord, TrajectoryRecord};

use crate::config::{EmbeddedConfig, Resolved, SCHEMA_VERSION};

pub const TRAJECTORY_HEADER: [&str; 5] = ["m", "t_over_TR", "c2_sq", "g2", "g2_processed"];
const TRAJECTORY_TAG: &str = "# unsharp-monitor trajectory";
const CONFIG_TAG: &str = "# config: ";

/// One row of the trajectory table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub m: usize,
    pub t: f64,
    pub c2_sq: Option<f64>,
    pub g2: f64,
    pub g2_processed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub config: Option<EmbeddedConfig>,
    pub rows: Vec<Row>,
}

impl TrajectoryTable {
    pub fn from_record(config: EmbeddedConfig, record: &TrajectoryRecord) -> Self {
        let rows = record
            .samples
            .iter()
            .map(|s| Row {
                m: s.m,
                t: s.t,
                c2_sq: Some(s.c2_sq),
                g2: s.g2,
                g2_processed: None,
            })
            .collect();
        TrajectoryTable {
            config: Some(config),
            rows,
        }
    }

    pub fn g2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.g2).collect()
    }

    /// `|c2|²` column, if every row carries it.
    pub fn c2_sq(&self) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.c2_sq).collect()
    }

    /// Series spacing inferred from `t_m = m·Δt`.
    pub fn dt(&self) -> Result<f64> {
        let first = self.rows.first().context("trajectory has no rows")?;
        if first.m == 0 {
            bail!("row index m must start at 1");
        }
        Ok(first.t / first.m as f64)
    }

    pub fn set_processed(&mut self, values: &[f64]) {
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.g2_processed = Some(*v);
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        writeln!(out, "{TRAJECTORY_TAG} v{SCHEMA_VERSION}")?;
        if let Some(config) = &self.config {
            writeln!(out, "{CONFIG_TAG}{}", serde_json::to_string(config)?)?;
        }
        {
            let mut w = csv_writer(&mut out);
            w.write_record(TRAJECTORY_HEADER)?;
            for r in &self.rows {
                w.write_record([
                    r.m.to_string(),
                    r.t.to_string(),
                    opt(r.c2_sq),
                    r.g2.to_string(),
                    opt(r.g2_processed),
                ])?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out)?)
    }

    /// Parses the trajectory schema. Errors carry the 1-based line number.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut config = None;
        for (i, line) in text.lines().enumerate() {
            if let Some(json) = line.strip_prefix(CONFIG_TAG) {
                config = Some(
                    serde_json::from_str(json)
                        .with_context(|| format!("line {}: malformed embedded config", i + 1))?,
                );
            } else if !line.starts_with('#') {
                break;
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = reader.headers().context("missing header line")?.clone();
        let column = |name: &str| header.iter().position(|h| h == name);
        let header_line = header.position().map_or(1, |p| p.line());
        let (Some(m_col), Some(t_col), Some(g2_col)) =
            (column("m"), column("t_over_TR"), column("g2"))
        else {
            bail!("line {header_line}: header must contain m, t_over_TR and g2");
        };
        let c2_col = column("c2_sq");
        let processed_col = column("g2_processed");

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                anyhow!("line {line}: {e}")
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |col: usize, name: &str| -> Result<&str> {
                record
                    .get(col)
                    .ok_or_else(|| anyhow!("line {line}: missing column `{name}`"))
            };
            let number = |col: usize, name: &str| -> Result<f64> {
                let s = field(col, name)?;
                let v: f64 = s
                    .parse()
                    .map_err(|_| anyhow!("line {line}: `{name}` is not a number: {s:?}"))?;
                if !v.is_finite() {
                    bail!("line {line}: `{name}` is not finite");
                }
                Ok(v)
            };
            let optional = |col: Option<usize>, name: &str| -> Result<Option<f64>> {
                match col {
                    Some(c) if !field(c, name)?.is_empty() => number(c, name).map(Some),
                    _ => Ok(None),
                }
            };
            let m_str = field(m_col, "m")?;
            let m: usize = m_str
                .parse()
                .map_err(|_| anyhow!("line {line}: `m` is not a positive integer: {m_str:?}"))?;
            if m != rows.len() + 1 {
                bail!("line {line}: expected m = {}, found {m}", rows.len() + 1);
            }
            rows.push(Row {
                m,
                t: number(t_col, "t_over_TR")?,
                c2_sq: optional(c2_col, "c2_sq")?,
                g2: number(g2_col, "g2")?,
                g2_processed: optional(processed_col, "g2_processed")?,
            });
            let dt = rows[0].t;
            let t = rows[rows.len() - 1].t;
            if dt.is_nan() || dt <= 0.0 || (t - m as f64 * dt).abs() > 1e-9 * t.abs().max(1.0) {
                bail!("line {line}: t_over_TR must equal m times a fixed positive step");
            }
        }
        if rows.is_empty() {
            bail!("trajectory has no data rows");
        }
        Ok(TrajectoryTable { config, rows })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Peak as reported in artifacts, with its frequency in units of `Ω_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub index: usize,
    pub frequency_over_omega_r: f64,
    pub power: f64,
    pub significant: bool,
}

impl PeakReport {
    fn new(peak: &Peak, spec: &SpectrumRecord) -> Self {
        PeakReport {
            index: peak.index,
            frequency_over_omega_r: peak.index as f64 / spec.span(),
            power: peak.power,
            significant: peak.significant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakStatus {
    SignificantPeak,
    NoSignificantPeak,
    Flat,
}

/// Spectrum of the readout, one-sided (`0 ≤ l ≤ ⌊M/2⌋`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumArtifact {
    pub schema: String,
    pub config: Option<EmbeddedConfig>,
    pub m: usize,
    pub dt_over_tr: f64,
    pub status: PeakStatus,
    pub main_peak: Option<PeakReport>,
    /// Peak of the `|c2|²` curve, when the input carries it.
    pub c2_sq_peak: Option<PeakReport>,
    pub noise_floor: f64,
    pub truncated_at: Option<usize>,
    pub frequencies_over_omega_r: Vec<f64>,
    pub power: Vec<f64>,
    pub processed_power: Vec<f64>,
    pub wiener_weights: Vec<f64>,
}

/// Readout processing shared by `simulate` and `analyze`.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub processed: ProcessedReadout,
    pub c2_spectrum: Option<SpectrumRecord>,
    pub artifact: SpectrumArtifact,
}

pub fn analyze_table(table: &TrajectoryTable, options: ProcessOptions) -> Result<Analysis> {
    let dt = table.dt()?;
    let processed = process_readout_with(&table.g2(), dt, options)?;
    let c2_spectrum = table
        .c2_sq()
        .map(|c2| power_spectrum(&c2, dt))
        .transpose()?;
    let spec = &processed.spectrum;
    let half = spec.nyquist();
    let status = match &spec.main_peak {
        None => PeakStatus::Flat,
        Some(p) if p.significant => PeakStatus::SignificantPeak,
        Some(_) => PeakStatus::NoSignificantPeak,
    };
    let artifact = SpectrumArtifact {
        schema: format!("unsharp-monitor/spectrum/v{SCHEMA_VERSION}"),
        config: table.config.clone(),
        m: spec.len(),
        dt_over_tr: dt,
        status,
        main_peak: spec.main_peak.as_ref().map(|p| PeakReport::new(p, spec)),
        c2_sq_peak: c2_spectrum
            .as_ref()
            .and_then(|s| s.main_peak.as_ref().map(|p| PeakReport::new(p, s))),
        noise_floor: processed.filtered.noise_floor,
        truncated_at: processed.filtered.truncated_at,
        frequencies_over_omega_r: (0..=half).map(|l| l as f64 / spec.span()).collect(),
        power: spec.power[..=half].to_vec(),
        processed_power: processed.filtered.power[..=half].to_vec(),
        wiener_weights: processed.filtered.wiener_weights[..=half].to_vec(),
    };
    Ok(Analysis {
        processed,
        c2_spectrum,
        artifact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    /// Pearson correlation of the raw best guesses with `|c2|²`.
    pub raw: Option<f64>,
    /// Same for the processed readout.
    pub processed: Option<f64>,
}

/// Regime quantities of a configuration, plus run diagnostics when a
/// trajectory was simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: EmbeddedConfig,
    pub p1: f64,
    pub p2: f64,
    pub p0: f64,
    pub dp: f64,
    pub tau: f64,
    pub n_per_series: u32,
    pub dt_over_tr: f64,
    #[serde(rename = "T_lr")]
    pub t_lr: f64,
    pub f: f64,
    pub n_min: u32,
    /// `null` when the operations are proportional to the identity.
    pub nbound_rhs: Option<f64>,
    pub nbound_ratio: f64,
    pub regime: Regime,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub correlations: Option<Correlations>,
    pub readout_peak: Option<PeakReport>,
    pub c2_sq_peak: Option<PeakReport>,
}

impl Report {
    pub fn new(resolved: &Resolved) -> Result<Self> {
        let t = &resolved.trajectory;
        let regime = RegimeParams::evaluate(&t.params, t.tau, t.spec.t_r, t.n_per_series)?;
        Ok(Report {
            schema: format!("unsharp-monitor/report/v{SCHEMA_VERSION}"),
            config: EmbeddedConfig::from(resolved),
            p1: t.params.p1(),
            p2: t.params.p2(),
            p0: t.params.p0(),
            dp: t.params.dp(),
            tau: t.tau,
            n_per_series: t.n_per_series,
            dt_over_tr: resolved.check.dt_series,
            t_lr: regime.t_lr,
            f: regime.f,
            n_min: regime.n_min,
            nbound_rhs: regime.nbound.rhs,
            nbound_ratio: regime.nbound.ratio,
            regime: classify_regime(regime.f, &resolved.thresholds),
            seed: t.seed,
            warnings: resolved
                .check
                .warnings
                .iter()
                .map(|w| w.to_string())
                .collect(),
            correlations: None,
            readout_peak: None,
            c2_sq_peak: None,
        })
    }

    pub fn with_analysis(mut self, table: &TrajectoryTable, analysis: &Analysis) -> Self {
        let g2 = table.g2();
        self.correlations = table.c2_sq().map(|c2| Correlations {
            raw: pearson(&g2, &c2),
            processed: pearson(&analysis.processed.values, &c2),
        });
        self.readout_peak = analysis.artifact.main_peak;
        self.c2_sq_peak = analysis.artifact.c2_sq_peak;
        self
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Plots `|c2|²` against the processed readout.
pub fn gnuplot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't / T_R'\n\
         set ylabel '|c_2|^2, G_2'\n\
         plot '{csv_name}' using 2:3 with lines title '|c_2|^2', \\\n\
         \x20    '{csv_name}' using 2:5 with lines title 'processed G_2'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> TrajectoryTable {
        TrajectoryTable {
            config: None,
            rows: (1..=8)
                .map(|m| Row {
                    m,
                    t: m as f64 * 0.05,
                    c2_sq: Some(0.25),
                    g2: 0.1 * m as f64,
                    g2_processed: None,
                })
                .collect(),
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = table();
        let csv = t.to_csv().unwrap();
        assert!(csv.lines().nth(1).unwrap() == "m,t_over_TR,c2_sq,g2,g2_processed");
        assert!(!csv.contains('\r'));
        let back = TrajectoryTable::from_csv(&csv).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_rows_report_line() {
        let mut csv = table().to_csv().unwrap();
        csv = csv.replace("\n3,", "\n3x,");
        let err = TrajectoryTable::from_csv(&csv).unwrap_err().to_string();
        assert!(err.starts_with("line 5:"), "{err}");

        let short = "m,t_over_TR,c2_sq,g2,g2_processed\n1,0.05,0.1,0.2,\n2,0.1,0.1\n";
        let err = TrajectoryTable::from_csv(short).unwrap_err().to_string();
        assert!(err.starts_with("line 3:"), "{err}");

        let uneven = "m,t_over_TR,g2\n1,0.05,0.2\n2,0.3,0.1\n";
        let err = TrajectoryTable::from_csv(uneven).unwrap_err().to_string();
        assert!(err.starts_with("line 3:"), "{err}");
    }

    #[test]
    fn minimal_columns_accepted() {
        let text = "m,t_over_TR,g2\n1,0.5,1\n2,1,0\n3,1.5,1\n4,2,0\n";
        let t = TrajectoryTable::from_csv(text).unwrap();
        assert_eq!(t.dt().unwrap(), 0.5);
        assert!(t.c2_sq().is_none());
    }
}
