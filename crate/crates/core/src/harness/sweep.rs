use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method};
use super::trial::{Experiment, OperatingPoint, TrialRecord};
use crate::error::{Error, Result};
use crate::pilot::{dbm_to_watts, SubarrayLayout};

pub const CSV_HEADER: &str = "sweep_value,method,mean_nmse,mean_rate,trials,seed";

/// Averages of one method at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: String,
    pub method: Method,
    pub mean_nmse: f64,
    pub mean_rate: f64,
    /// Trials that produced an estimate.
    pub trials: usize,
    /// Trials whose estimator reported an error.
    pub failures: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, sweep_value: &str, method: Method) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.method == method)
    }

    /// Rows of one method in sweep order.
    pub fn series(&self, method: Method) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.method == method).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{}",
                r.sweep_value, r.method, r.mean_nmse, r.mean_rate, r.trials, r.seed
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Runs every trial at one operating point. Trials run in parallel but the
/// records come back in trial order.
pub fn run_point(config: &ExperimentConfig, point: OperatingPoint) -> Result<Vec<TrialRecord>> {
    let exp = Experiment::new(config, point)?;
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| exp.run_trial(t))
        .collect()
}

/// Per-method averages over a set of trial records.
pub fn summarize(config: &ExperimentConfig, sweep_value: &str, records: &[TrialRecord]) -> Vec<SweepRow> {
    config
        .methods
        .iter()
        .map(|&method| {
            let (mut nmse, mut rate, mut ok, mut failures) = (0.0, 0.0, 0usize, 0usize);
            for r in records {
                match r.outcomes.iter().find(|o| o.method == method).map(|o| &o.metrics) {
                    Some(Ok(m)) => {
                        nmse += m.nmse;
                        rate += m.rate;
                        ok += 1;
                    }
                    Some(Err(_)) => failures += 1,
                    None => {}
                }
            }
            let n = ok.max(1) as f64;
            SweepRow {
                sweep_value: sweep_value.to_string(),
                method,
                mean_nmse: if ok > 0 { nmse / n } else { f64::NAN },
                mean_rate: if ok > 0 { rate / n } else { f64::NAN },
                trials: ok,
                failures,
                seed: config.seed,
            }
        })
        .collect()
}

/// Formats a pilot power in dBm as it appears in the `sweep_value` column.
pub fn power_label(dbm: f64) -> String {
    format!("{dbm}")
}

/// Formats a subarray split as `NExFE`.
pub fn split_label(near: usize, far: usize) -> String {
    format!("{near}x{far}")
}

/// Averages over `trials` scenes for every pilot power. Scenes depend only on
/// the trial index, so every power level sees the same channels.
pub fn sweep_power(config: &ExperimentConfig) -> Result<SweepTable> {
    config.validate()?;
    let mut table = SweepTable::default();
    for (j, &dbm) in config.pilot_power_dbm.iter().enumerate() {
        let point = OperatingPoint {
            pilot_power_w: dbm_to_watts(dbm),
            layout: config.layout,
            sweep_index: j as u64,
        };
        let records = run_point(config, point)?;
        table.rows.extend(summarize(config, &power_label(dbm), &records));
    }
    Ok(table)
}

/// Averages over `trials` scenes for every subarray split at the sweep's
/// pilot power. The far subarray keeps its configured start index.
pub fn sweep_subarray(config: &ExperimentConfig) -> Result<SweepTable> {
    config.validate()?;
    let sweep = &config.subarray_sweep;
    if sweep.splits.is_empty() {
        return Err(Error::Config("subarray sweep has no splits".into()));
    }
    let count = config.waveguide.antenna_count();
    let mut table = SweepTable::default();
    for (j, &(near, far)) in sweep.splits.iter().enumerate() {
        let layout = SubarrayLayout::new(near, far, config.layout.far_start, count)?;
        let point = OperatingPoint {
            pilot_power_w: dbm_to_watts(sweep.pilot_power_dbm),
            layout,
            sweep_index: j as u64,
        };
        let records = run_point(config, point)?;
        table.rows.extend(summarize(config, &split_label(near, far), &records));
    }
    Ok(table)
}
