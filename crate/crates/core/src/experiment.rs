//! Configuration files, seeded Monte-Carlo sweeps and CSV output.
//!
//! A configuration is flat `section.key = value` text (valid TOML). An
//! optional top-level `preset = "paper" | "desk"` picks the base values that
//! unspecified keys fall back to; without it the published parameter set is
//! used.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::ao::{run_benchmark, Algorithm};
use crate::channel::{dbm_to_watts, sample_realization, Point, Scenario};
use crate::{Error, Result};

fn merge(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses configuration text; missing keys take the preset's values.
pub fn parse_scenario(text: &str) -> std::result::Result<Scenario, String> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
    let base = match table.remove("preset") {
        None => Scenario::paper(),
        Some(toml::Value::String(name)) => match name.as_str() {
            "paper" => Scenario::paper(),
            "desk" => Scenario::desk(),
            other => return Err(format!("unknown preset `{other}` (expected `paper` or `desk`)")),
        },
        Some(other) => return Err(format!("preset must be a string, got {other}")),
    };
    let mut merged = toml::Table::try_from(&base).map_err(|e| e.to_string())?;
    merge(&mut merged, table);
    Scenario::deserialize(toml::Value::Table(merged)).map_err(|e| e.message().to_string())
}

/// Reads and validates a configuration file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|source| Error::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    let scenario = parse_scenario(&text).map_err(|message| Error::ConfigParse {
        path: path.to_path_buf(),
        message,
    })?;
    scenario.validate()?;
    Ok(scenario)
}

fn format_value(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(x) => format!("{x:?}"),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Array(a) => {
            let items: Vec<String> = a.iter().map(format_value).collect();
            format!("[{}]", items.join(", "))
        }
        other => other.to_string(),
    }
}

/// Writes every field as one `section.key = value` line.
pub fn dump_scenario(scenario: &Scenario) -> String {
    let table = toml::Table::try_from(scenario).expect("scenario serializes");
    let mut out = String::new();
    for (section, body) in &table {
        if let toml::Value::Table(fields) = body {
            for (key, value) in fields {
                out.push_str(&format!("{section}.{key} = {}\n", format_value(value)));
            }
        }
    }
    out
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    /// Flight period in seconds.
    Period,
    /// Squared normalized error bound.
    DeltaA2,
    /// DL weight.
    Weight,
    /// Average DL and UL power in dBm; peaks keep their ratio to the average.
    Pbar,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Period => "T",
            Axis::DeltaA2 => "deltaA2",
            Axis::Weight => "w",
            Axis::Pbar => "Pbar",
        }
    }

    /// The scenario at one axis value.
    pub fn apply(&self, scenario: &Scenario, value: f64) -> Scenario {
        let mut s = scenario.clone();
        match self {
            Axis::Period => s.flight.period = value,
            Axis::DeltaA2 => s = s.with_delta_a2(value),
            Axis::Weight => s.power.dl_weight = value,
            Axis::Pbar => {
                let watts = dbm_to_watts(value);
                let ratio = |peak: f64, avg: f64| if avg > 0.0 { peak / avg } else { 4.0 };
                let dl = ratio(s.power.dl_peak, s.power.dl_average);
                let ul = ratio(s.power.ul_peak, s.power.ul_average);
                s.power.dl_average = watts;
                s.power.ul_average = watts;
                s.power.dl_peak = dl * watts;
                s.power.ul_peak = ul * watts;
            }
        }
        s
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "T" | "period" => Ok(Axis::Period),
            "deltaA2" | "delta_a2" => Ok(Axis::DeltaA2),
            "w" | "weight" => Ok(Axis::Weight),
            "Pbar" | "pbar" => Ok(Axis::Pbar),
            other => Err(Error::InvalidSweep(format!(
                "unknown axis `{other}` (expected T, deltaA2, w or Pbar)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub realizations: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("no axis values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("axis values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep("axis values must be strictly increasing".into()));
        }
        if self.realizations < 1 {
            return Err(Error::InvalidSweep("need at least one realization".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidSweep("no algorithms selected".into()));
        }
        Ok(())
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSweep(format!("bad axis value `{}`", t.trim())))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub axis: Option<Axis>,
    pub value: f64,
    pub seed: u64,
    pub r_sec: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `ok` or the failure message.
    pub status: String,
    /// Seconds; kept out of the CSV files so they stay byte-stable.
    pub wall_time: f64,
    pub trajectory: Vec<Point>,
    pub speed: Vec<f64>,
    pub trace: Vec<f64>,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// One algorithm on one seeded realization.
pub fn run_single(scenario: &Scenario, algorithm: Algorithm, seed: u64) -> ResultRow {
    let start = Instant::now();
    let realization = sample_realization(scenario, seed);
    let outcome = run_benchmark(algorithm, scenario, &realization);
    let wall_time = start.elapsed().as_secs_f64();
    match outcome {
        Ok(out) => ResultRow {
            algorithm,
            axis: None,
            value: 0.0,
            seed,
            r_sec: out.report.r_sec,
            iterations: out.report.iterations,
            converged: out.report.converged,
            status: "ok".into(),
            wall_time,
            speed: out.design.trajectory.speeds(scenario),
            trajectory: out.design.trajectory.q,
            trace: out.report.per_iteration,
        },
        Err(e) => ResultRow {
            algorithm,
            axis: None,
            value: 0.0,
            seed,
            r_sec: 0.0,
            iterations: 0,
            converged: false,
            status: format!("failed: {e}"),
            wall_time,
            trajectory: Vec::new(),
            speed: Vec::new(),
            trace: Vec::new(),
        },
    }
}

/// Runs every (value, realization, algorithm) cell; seed = base seed + realization index.
pub fn run_sweep(spec: &SweepSpec, scenario: &Scenario) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let scenarios: Vec<Scenario> = spec
        .values
        .iter()
        .map(|&v| {
            let s = spec.axis.apply(scenario, v);
            s.validate().map_err(|e| {
                Error::InvalidSweep(format!("{} = {v}: {e}", spec.axis))
            })?;
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (vi, _) in spec.values.iter().enumerate() {
        for r in 0..spec.realizations {
            for &alg in &spec.algorithms {
                cells.push((vi, spec.base_seed + r as u64, alg));
            }
        }
    }
    let mut rows: Vec<(usize, ResultRow)> = cells
        .into_par_iter()
        .map(|(vi, seed, alg)| {
            let mut row = run_single(&scenarios[vi], alg, seed);
            row.axis = Some(spec.axis);
            row.value = spec.values[vi];
            (vi, row)
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1.seed, a.1.algorithm).cmp(&(b.0, b.1.seed, b.1.algorithm)));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "algorithm",
    "axis",
    "value",
    "seed",
    "r_sec",
    "iterations",
    "converged",
    "status",
];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv(path: &Path, header: &[&str], records: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in records {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run_dir(out: &Path, row: &ResultRow, distinct_values: bool) -> PathBuf {
    match (distinct_values, row.axis) {
        (true, Some(axis)) => out.join(format!("{}_{}", axis.name(), row.value)),
        _ => out.to_path_buf(),
    }
}

/// Writes `summary.csv`, per-run trajectory and trace files and a timing log.
pub fn emit_results(rows: &[ResultRow], out: &Path) -> Result<Vec<PathBuf>> {
    let mkdir = |p: &Path| {
        fs::create_dir_all(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    mkdir(out)?;
    let mut written = Vec::new();

    let summary = out.join("summary.csv");
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.algorithm.name().to_string(),
                r.axis.map(|a| a.name().to_string()).unwrap_or_default(),
                r.value.to_string(),
                r.seed.to_string(),
                r.r_sec.to_string(),
                r.iterations.to_string(),
                r.converged.to_string(),
                r.status.clone(),
            ]
        })
        .collect();
    write_csv(&summary, &SUMMARY_HEADER, &records)?;
    written.push(summary);

    let distinct = rows.windows(2).any(|w| w[0].value != w[1].value);
    for row in rows.iter().filter(|r| r.is_ok()) {
        let dir = run_dir(out, row, distinct);
        mkdir(&dir)?;
        let traj = dir.join(format!("trajectory_{}_{}.csv", row.algorithm.name(), row.seed));
        let records: Vec<Vec<String>> = row
            .trajectory
            .iter()
            .zip(&row.speed)
            .enumerate()
            .map(|(n, (q, v))| vec![(n + 1).to_string(), q[0].to_string(), q[1].to_string(), v.to_string()])
            .collect();
        write_csv(&traj, &["n", "x", "y", "speed"], &records)?;
        written.push(traj);

        let trace = dir.join(format!("trace_{}_{}.csv", row.algorithm.name(), row.seed));
        let records: Vec<Vec<String>> = row
            .trace
            .iter()
            .enumerate()
            .map(|(j, r)| vec![(j + 1).to_string(), r.to_string()])
            .collect();
        write_csv(&trace, &["j", "R_sec"], &records)?;
        written.push(trace);
    }

    let timing = out.join("timing.log");
    let text: String = rows
        .iter()
        .map(|r| format!("{} value={} seed={} wall_seconds={:.3}\n", r.algorithm, r.value, r.seed, r.wall_time))
        .collect();
    fs::write(&timing, text).map_err(|source| Error::Io {
        path: timing.clone(),
        source,
    })?;
    written.push(timing);
    Ok(written)
}

/// Summary row as read back from `summary.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummaryRecord {
    pub algorithm: String,
    pub axis: String,
    pub value: f64,
    pub seed: u64,
    pub r_sec: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: String,
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|rec| rec.map_err(csv_err(path))).collect()
}

/// Mean `r_sec` of the successful rows of one algorithm at one axis value.
pub fn mean_rate(rows: &[ResultRow], algorithm: Algorithm, value: f64) -> Option<f64> {
    let picked: Vec<f64> = rows
        .iter()
        .filter(|r| r.algorithm == algorithm && r.value == value && r.is_ok())
        .map(|r| r.r_sec)
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}
