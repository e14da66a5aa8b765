//! Parameter sweeps over `(p0, Δp, τ, N)` with several seeds per point.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unsharp_core::trajectory::derive_seed;

use crate::commands::run_simulation;
use crate::config::{RunConfig, SCHEMA_VERSION};

/// Caps the number of worker threads used by a sweep.
pub const THREADS_ENV: &str = "UNSHARP_MONITOR_THREADS";

pub const SWEEP_FILE: &str = "sweep.csv";

pub const SWEEP_HEADER: [&str; 13] = [
    "index",
    "p0",
    "dp",
    "tau",
    "n_per_series",
    "seed",
    "seeds_used",
    "f",
    "regime",
    "nbound_ratio",
    "peak_error",
    "corr_raw",
    "corr_processed",
];

/// Grid axes. Points are enumerated with `p0` outermost and `N` innermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub p0: Vec<f64>,
    pub dp: Vec<f64>,
    pub tau: Vec<f64>,
    pub n_per_series: Vec<u32>,
    /// Independent trajectories per grid point.
    pub seeds: usize,
}

impl Grid {
    /// Missing axes fall back to the single value of `base`.
    pub fn with_defaults(
        base: &RunConfig,
        p0: Vec<f64>,
        dp: Vec<f64>,
        tau: Vec<f64>,
        n_per_series: Vec<u32>,
        seeds: usize,
    ) -> Result<Grid> {
        let (base_p0, base_dp) = match (base.p0, base.dp, base.p1, base.p2) {
            (Some(p0), Some(dp), _, _) => (Some(p0), Some(dp)),
            (_, _, Some(p1), Some(p2)) => (Some(0.5 * (p1 + p2)), Some(p2 - p1)),
            _ => (None, None),
        };
        let axis = |given: Vec<f64>, fallback: Option<f64>, name: &str| -> Result<Vec<f64>> {
            if !given.is_empty() {
                return Ok(given);
            }
            fallback
                .map(|v| vec![v])
                .with_context(|| format!("sweep axis `{name}` has no values"))
        };
        let n_per_series = if n_per_series.is_empty() {
            vec![base
                .n_per_series
                .context("sweep axis `n_per_series` has no values")?]
        } else {
            n_per_series
        };
        if seeds == 0 {
            bail!("invalid sweep field `seeds`: must be >= 1");
        }
        Ok(Grid {
            p0: axis(p0, base_p0, "p0")?,
            dp: axis(dp, base_dp, "dp")?,
            tau: axis(tau, base.tau, "tau")?,
            n_per_series,
            seeds,
        })
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &p0 in &self.p0 {
            for &dp in &self.dp {
                for &tau in &self.tau {
                    for &n in &self.n_per_series {
                        out.push(GridPoint {
                            index: out.len(),
                            p0,
                            dp,
                            tau,
                            n_per_series: n,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub p0: f64,
    pub dp: f64,
    pub tau: f64,
    pub n_per_series: u32,
}

/// Aggregated result for one grid point; stochastic columns are medians
/// over the seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    /// Seed of the first trajectory at this point.
    pub seed: u64,
    pub seeds_used: usize,
    pub f: f64,
    pub regime: String,
    pub nbound_ratio: f64,
    /// `|ω_peak/Ω_R − 1|` of the raw readout spectrum.
    pub peak_error: f64,
    pub corr_raw: f64,
    pub corr_processed: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<(GridPoint, String)>,
    pub total: usize,
}

/// Seed of the `replicate`-th trajectory at grid point `index`.
pub fn trajectory_seed(base: u64, index: usize, replicate: usize, seeds: usize) -> u64 {
    derive_seed(base, (index * seeds + replicate) as u64)
}

struct Metrics {
    peak_error: f64,
    corr_raw: f64,
    corr_processed: f64,
}

/// Median of the finite entries; NaN when there are none.
fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run(base: &RunConfig, grid: &Grid) -> Result<SweepOutcome> {
    let base_seed = base.seed.unwrap_or(crate::config::DEFAULT_SEED);
    let points = grid.points();
    let total = points.len();
    let mut valid = Vec::new();
    let mut skipped = Vec::new();
    for point in points {
        let cfg = base.clone().overlay(RunConfig {
            p0: Some(point.p0),
            dp: Some(point.dp),
            tau: Some(point.tau),
            n_per_series: Some(point.n_per_series),
            ..RunConfig::default()
        });
        match cfg.resolve() {
            Ok(_) => valid.push((point, cfg)),
            Err(e) => skipped.push((point, format!("{e:#}"))),
        }
    }

    let jobs: Vec<(usize, usize)> = (0..valid.len())
        .flat_map(|v| (0..grid.seeds).map(move |r| (v, r)))
        .collect();
    let evaluate = |&(v, r): &(usize, usize)| -> Result<Metrics> {
        let (point, cfg) = &valid[v];
        let mut cfg = cfg.clone();
        cfg.seed = Some(trajectory_seed(base_seed, point.index, r, grid.seeds));
        let sim = run_simulation(&cfg.resolve()?)?;
        let corr = sim.report.correlations;
        Ok(Metrics {
            peak_error: sim
                .report
                .readout_peak
                .map_or(f64::NAN, |p| (p.frequency_over_omega_r - 1.0).abs()),
            corr_raw: corr.and_then(|c| c.raw).unwrap_or(f64::NAN),
            corr_processed: corr.and_then(|c| c.processed).unwrap_or(f64::NAN),
        })
    };
    let metrics: Vec<Metrics> =
        with_thread_cap(|| jobs.par_iter().map(evaluate).collect::<Result<Vec<_>>>())??;

    let mut rows = Vec::with_capacity(valid.len());
    for (v, (point, cfg)) in valid.iter().enumerate() {
        let chunk = &metrics[v * grid.seeds..(v + 1) * grid.seeds];
        let report = crate::artifacts::Report::new(&cfg.resolve()?)?;
        rows.push(SweepRow {
            point: *point,
            seed: trajectory_seed(base_seed, point.index, 0, grid.seeds),
            seeds_used: grid.seeds,
            f: report.f,
            regime: report.regime.as_str().to_string(),
            nbound_ratio: report.nbound_ratio,
            peak_error: median(chunk.iter().map(|m| m.peak_error)),
            corr_raw: median(chunk.iter().map(|m| m.corr_raw)),
            corr_processed: median(chunk.iter().map(|m| m.corr_processed)),
        });
    }
    Ok(SweepOutcome {
        rows,
        skipped,
        total,
    })
}

/// Runs `f` on a pool limited by [`THREADS_ENV`], or on the global pool.
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(value) => {
            let n: usize = value
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .with_context(|| {
                    format!("{THREADS_ENV} must be a positive integer, got {value:?}")
                })?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

impl SweepOutcome {
    pub fn to_csv(&self, base: &RunConfig, grid: &Grid) -> Result<String> {
        let mut out = Vec::new();
        {
            use std::io::Write;
            writeln!(out, "# unsharp-monitor sweep v{SCHEMA_VERSION}")?;
            let mut base = base.clone();
            base.out_dir = None;
            writeln!(out, "# config: {}", serde_json::to_string(&base)?)?;
            writeln!(out, "# grid: {}", serde_json::to_string(grid)?)?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        w.write_record(SWEEP_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.point.index.to_string(),
                r.point.p0.to_string(),
                r.point.dp.to_string(),
                r.point.tau.to_string(),
                r.point.n_per_series.to_string(),
                r.seed.to_string(),
                r.seeds_used.to_string(),
                r.f.to_string(),
                r.regime.clone(),
                r.nbound_ratio.to_string(),
                r.peak_error.to_string(),
                r.corr_raw.to_string(),
                r.corr_processed.to_string(),
            ])?;
        }
        w.flush()?;
        drop(w);
        {
            use std::io::Write;
            for (point, reason) in &self.skipped {
                writeln!(out, "# skipped point {}: {reason}", point.index)?;
            }
            writeln!(
                out,
                "# points: {}, evaluated: {}, skipped: {}",
                self.total,
                self.rows.len(),
                self.skipped.len()
            )?;
        }
        Ok(String::from_utf8(out)?)
    }
}

/// Writes `sweep.csv` into `out_dir`, reporting skipped points on stderr.
pub fn sweep(base: &RunConfig, grid: &Grid, out_dir: &std::path::Path) -> Result<PathBuf> {
    let outcome = run(base, grid)?;
    for (point, reason) in &outcome.skipped {
        eprintln!("warning: skipping grid point {}: {reason}", point.index);
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let path = out_dir.join(SWEEP_FILE);
    crate::artifacts::write_file(&path, &outcome.to_csv(base, grid)?)?;
    Ok(path)
}

/// Loads a grid from JSON, naming the offending field on error.
pub fn grid_from_json(text: &str) -> Result<Grid> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("invalid sweep field `{}`: {}", e.path(), e.inner()))
}
