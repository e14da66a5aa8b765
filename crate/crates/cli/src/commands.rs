//! `simulate`, `analyze` and `report`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use unsharp_core::analysis::ProcessOptions;
use unsharp_core::trajectory::simulate_trajectory_with;

use crate::artifacts::{
    analyze_table, gnuplot_script, to_json, write_file, Analysis, Report, TrajectoryTable,
};
use crate::config::{EmbeddedConfig, Resolved};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SPECTRUM_FILE: &str = "spectrum.json";
pub const REPORT_FILE: &str = "report.json";
pub const PROCESSED_FILE: &str = "processed.csv";
pub const GNUPLOT_FILE: &str = "plot.gp";

/// In-memory result of one simulated run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub table: TrajectoryTable,
    pub analysis: Analysis,
    pub report: Report,
}

/// Simulates and analyzes without touching the filesystem.
pub fn run_simulation(resolved: &Resolved) -> Result<Simulation> {
    let record = simulate_trajectory_with(&resolved.trajectory, resolved.engine)?;
    let mut table = TrajectoryTable::from_record(EmbeddedConfig::from(resolved), &record);
    let analysis = analyze_table(&table, resolved.options)?;
    table.set_processed(&analysis.processed.values);
    let report = Report::new(resolved)?.with_analysis(&table, &analysis);
    Ok(Simulation {
        table,
        analysis,
        report,
    })
}

pub fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Writes the trajectory CSV, spectrum JSON and report JSON.
pub fn simulate(resolved: &Resolved, gnuplot: bool) -> Result<Vec<PathBuf>> {
    print_warnings(
        &resolved
            .check
            .warnings
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>(),
    );
    let sim = run_simulation(resolved)?;
    let dir = &resolved.out_dir;
    create_dir(dir)?;
    let mut written = vec![
        emit(dir, TRAJECTORY_FILE, &sim.table.to_csv()?)?,
        emit(dir, SPECTRUM_FILE, &to_json(&sim.analysis.artifact)?)?,
        emit(dir, REPORT_FILE, &to_json(&sim.report)?)?,
    ];
    if gnuplot {
        written.push(emit(dir, GNUPLOT_FILE, &gnuplot_script(TRAJECTORY_FILE))?);
    }
    Ok(written)
}

/// Re-runs the readout processing on a trajectory CSV.
///
/// Processing options come from the embedded config when present. The
/// processed column is recomputed from `g2`, so the command is idempotent.
pub fn analyze(input: &Path, out_dir: &Path, gnuplot: bool) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("cannot read {}", input.display()))?;
    let mut table = TrajectoryTable::from_csv(&text)
        .with_context(|| format!("malformed trajectory {}", input.display()))?;
    let options = table
        .config
        .as_ref()
        .map(|c| ProcessOptions {
            wiener: c.wiener,
            truncate: c.truncate,
        })
        .unwrap_or_default();
    let analysis = analyze_table(&table, options)?;
    table.set_processed(&analysis.processed.values);
    create_dir(out_dir)?;
    let mut written = vec![
        emit(out_dir, SPECTRUM_FILE, &to_json(&analysis.artifact)?)?,
        emit(out_dir, PROCESSED_FILE, &table.to_csv()?)?,
    ];
    if gnuplot {
        written.push(emit(
            out_dir,
            GNUPLOT_FILE,
            &gnuplot_script(PROCESSED_FILE),
        )?);
    }
    Ok(written)
}

/// Regime quantities of a configuration as JSON, without simulating.
pub fn report(resolved: &Resolved) -> Result<String> {
    let report = Report::new(resolved)?;
    print_warnings(&report.warnings);
    to_json(&report)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn emit(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    write_file(&path, contents)?;
    Ok(path)
}
