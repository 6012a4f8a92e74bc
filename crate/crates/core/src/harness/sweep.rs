use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{run_experiment, ExperimentConfig, PointSpec};
use crate::error::{Error, Result};
use crate::eval::complexity_rmps;
use crate::par::map_ordered;

/// One result row: a grid point evaluated for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub label: String,
    pub seed: u64,
    pub snr_db: f64,
    pub fiber_length_km: f64,
    pub n_out: usize,
    pub n_res: usize,
    /// `None` when the point failed.
    pub ber: Option<f64>,
    pub ser: Option<f64>,
    pub per_position_ber: Vec<f64>,
    pub rmps: f64,
    /// Ridge regularization the readout was fitted with.
    pub ridge_lambda: Option<f64>,
    pub train_symbols: usize,
    pub test_symbols: usize,
    pub wall_time_s: f64,
    /// Failure message; `None` for a completed point.
    pub error: Option<String>,
}

impl SweepRecord {
    /// `1 / (2 n_bits)` for the test region of this record.
    pub fn ber_floor(&self) -> f64 {
        0.25 / self.test_symbols.max(1) as f64
    }

    fn key(&self) -> PointKey {
        PointKey::new(self.fiber_length_km, self.n_out, self.seed, self.snr_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct PointKey(u64, usize, u64, u64);

impl PointKey {
    fn new(length: f64, n_out: usize, seed: u64, snr: f64) -> Self {
        PointKey(length.to_bits(), n_out, seed, snr.to_bits())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `0` uses every core, `1` runs in order on this thread.
    pub threads: usize,
    /// Append-only JSON-lines log. Points already present are not rerun.
    pub log: Option<PathBuf>,
}

/// Grid points in output order: length, then readout width, then seed, then SNR.
pub fn grid_points(cfg: &ExperimentConfig) -> Vec<PointSpec> {
    let mut points = Vec::new();
    for &fiber_length_km in &cfg.fiber_length_km {
        for &n_out in &cfg.n_out {
            for &seed in &cfg.seeds {
                for &snr_db in &cfg.snr_db {
                    points.push(PointSpec {
                        label: cfg.label.clone(),
                        link: cfg.link.clone(),
                        esn: cfg.esn.clone(),
                        fiber_length_km,
                        snr_db,
                        n_out,
                        total_symbols: cfg.total_symbols,
                        train_fraction: cfg.train_fraction,
                        seed,
                    });
                }
            }
        }
    }
    points
}

/// Evaluates one point; failures become error records.
pub fn run_point(point: &PointSpec) -> SweepRecord {
    let rmps = complexity_rmps(&point.esn_config());
    let mut record = SweepRecord {
        label: point.label.clone(),
        seed: point.seed,
        snr_db: point.snr_db,
        fiber_length_km: point.fiber_length_km,
        n_out: point.n_out,
        n_res: point.esn.n_res,
        ber: None,
        ser: None,
        per_position_ber: Vec::new(),
        rmps,
        ridge_lambda: None,
        train_symbols: 0,
        test_symbols: 0,
        wall_time_s: 0.0,
        error: None,
    };
    match run_experiment(point) {
        Ok(out) => {
            record.ber = Some(out.report.ber);
            record.ser = Some(out.report.ser);
            record.per_position_ber = out.report.per_position_ber;
            record.ridge_lambda = Some(out.ridge_lambda);
            record.train_symbols = out.train_symbols;
            record.test_symbols = out.test_symbols;
            record.wall_time_s = out.wall_time_s;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Reads the records of a log; a torn final line from an interrupted run
/// is ignored.
pub fn read_log(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let mut records = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => records.push(r),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(records)
}

/// Runs every grid point × seed and returns the records in grid order.
///
/// Points are independent, so they are spread over `opts.threads` workers;
/// the returned order and contents do not depend on scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &SweepOptions) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let points = grid_points(cfg);

    let mut done: HashMap<PointKey, SweepRecord> = HashMap::new();
    let log = match &opts.log {
        Some(path) => {
            for r in read_log(path)? {
                done.insert(r.key(), r);
            }
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            Some((path.clone(), Mutex::new(file)))
        }
        None => None,
    };

    let todo: Vec<&PointSpec> = points
        .iter()
        .filter(|p| !done.contains_key(&PointKey::new(p.fiber_length_km, p.n_out, p.seed, p.snr_db)))
        .collect();
    let fresh = map_ordered(&todo, opts.threads, |p| -> Result<SweepRecord> {
        let record = run_point(p);
        if let Some((path, file)) = &log {
            let mut line = serde_json::to_string(&record)?;
            line.push('\n');
            let mut f = file.lock().expect("log lock");
            f.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
            f.flush().map_err(|e| Error::io(path, e))?;
        }
        Ok(record)
    });
    for r in fresh {
        let r = r?;
        done.insert(r.key(), r);
    }

    Ok(points
        .iter()
        .map(|p| {
            done.remove(&PointKey::new(p.fiber_length_km, p.n_out, p.seed, p.snr_db))
                .expect("every grid point has a record")
        })
        .collect())
}
