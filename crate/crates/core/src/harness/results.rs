use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SweepRecord};
use crate::error::{Error, Result};
use crate::eval::{snr_at_threshold, BerSnrCurve, CurvePoint, FecThreshold};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_LOG: &str = "records.jsonl";

const COLUMNS: [&str; 15] = [
    "label",
    "seed",
    "snr_db",
    "fiber_length_km",
    "n_out",
    "n_res",
    "ber",
    "ser",
    "per_position_ber",
    "rmps",
    "ridge_lambda",
    "train_symbols",
    "test_symbols",
    "wall_time_s",
    "error",
];

/// Run metadata written next to the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub parallel_build: bool,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub n_records: usize,
    pub n_failed: usize,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, threads: usize, started_unix_s: u64, records: &[SweepRecord]) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seeds: config.seeds.clone(),
            threads,
            parallel_build: crate::par::is_parallel(),
            started_unix_s,
            finished_unix_s: unix_now(),
            n_records: records.len(),
            n_failed: records.iter().filter(|r| r.error.is_some()).count(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Writes `records` as CSV, header first. No records gives a header-only file.
pub fn write_results_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(COLUMNS).map_err(csv_err(path))?;
    for r in records {
        let per_position = r
            .per_position_ber
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.label.clone(),
            r.seed.to_string(),
            r.snr_db.to_string(),
            r.fiber_length_km.to_string(),
            r.n_out.to_string(),
            r.n_res.to_string(),
            opt(r.ber),
            opt(r.ser),
            per_position,
            r.rmps.to_string(),
            opt(r.ridge_lambda),
            r.train_symbols.to_string(),
            r.test_symbols.to_string(),
            r.wall_time_s.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rd.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(Error::ArtifactParse(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        )));
    }
    let bad = |line: usize, col: &str| Error::ArtifactParse(format!("{}: record {line}: bad {col}", path.display()));
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err(path))?;
        let f = |c: usize| row.get(c).unwrap_or("");
        macro_rules! num {
            ($c:expr) => {
                f($c).parse().map_err(|_| bad(i + 1, COLUMNS[$c]))?
            };
        }
        macro_rules! opt_num {
            ($c:expr) => {
                match f($c) {
                    "" => None,
                    s => Some(s.parse().map_err(|_| bad(i + 1, COLUMNS[$c]))?),
                }
            };
        }
        let per_position_ber = match f(8) {
            "" => Vec::new(),
            s => s
                .split(';')
                .map(|v| v.parse().map_err(|_| bad(i + 1, COLUMNS[8])))
                .collect::<Result<_>>()?,
        };
        out.push(SweepRecord {
            label: f(0).to_string(),
            seed: num!(1),
            snr_db: num!(2),
            fiber_length_km: num!(3),
            n_out: num!(4),
            n_res: num!(5),
            ber: opt_num!(6),
            ser: opt_num!(7),
            per_position_ber,
            rmps: num!(9),
            ridge_lambda: opt_num!(10),
            train_symbols: num!(11),
            test_symbols: num!(12),
            wall_time_s: num!(13),
            error: Some(f(14)).filter(|s| !s.is_empty()).map(str::to_string),
        });
    }
    Ok(out)
}

/// Writes `results.csv` and `manifest.json` into `out_dir`.
pub fn write_results(records: &[SweepRecord], manifest: &RunManifest, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_results_csv(records, &out_dir.join(RESULTS_FILE))?;
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Identifies one BER curve: a link length and an equalizer shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesKey {
    pub fiber_length_km: f64,
    pub n_out: usize,
    pub n_res: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianPoint {
    pub snr_db: f64,
    /// Median over seeds, with error-free seeds counted at their floor.
    pub ber: f64,
    /// The median itself is a floor value.
    pub floored: bool,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub key: SeriesKey,
    pub points: Vec<MedianPoint>,
    pub rmps: f64,
}

impl Series {
    pub fn curve(&self) -> Result<BerSnrCurve> {
        BerSnrCurve::new(
            self.points
                .iter()
                .map(|p| CurvePoint {
                    snr_db: p.snr_db,
                    ber: p.ber,
                    floored: p.floored,
                })
                .collect(),
        )
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Groups successful records into per-series median curves. Series keep the
/// order in which they first appear; points are sorted by SNR.
pub fn median_series(records: &[SweepRecord]) -> Vec<Series> {
    let mut groups: Vec<(SeriesKey, f64, Vec<&SweepRecord>)> = Vec::new();
    for r in records.iter().filter(|r| r.error.is_none() && r.ber.is_some()) {
        let key = SeriesKey {
            fiber_length_km: r.fiber_length_km,
            n_out: r.n_out,
            n_res: r.n_res,
        };
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.2.push(r),
            None => groups.push((key, r.rmps, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(key, rmps, recs)| {
            let mut snrs: Vec<f64> = recs.iter().map(|r| r.snr_db).collect();
            snrs.sort_by(f64::total_cmp);
            snrs.dedup();
            let points = snrs
                .into_iter()
                .map(|snr| {
                    let mut vals: Vec<(f64, bool)> = recs
                        .iter()
                        .filter(|r| r.snr_db == snr)
                        .map(|r| match r.ber {
                            Some(b) if b > 0.0 => (b, false),
                            _ => (r.ber_floor(), true),
                        })
                        .collect();
                    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let floored = 2 * vals.iter().filter(|v| v.1).count() > vals.len();
                    let bers: Vec<f64> = vals.iter().map(|v| v.0).collect();
                    MedianPoint {
                        snr_db: snr,
                        ber: median(&bers),
                        floored,
                        n_seeds: vals.len(),
                    }
                })
                .collect();
            Series { key, points, rmps }
        })
        .collect()
}

/// Paths of the three plot tables.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub ber_vs_snr: PathBuf,
    pub penalty: PathBuf,
    pub complexity: PathBuf,
    /// Series without a threshold crossing, with the reason.
    pub notes: Vec<String>,
}

/// Writes the plot tables: median BER against SNR per series
/// (`fig2a.csv`), the SNR penalty at the FEC threshold relative to
/// `reference` (`fig2b.csv`) and the cost per variant (`fig2c.csv`).
///
/// Without an explicit reference, the back-to-back single-output series
/// with the fewest nodes is used.
pub fn emit_plot_data(
    records: &[SweepRecord],
    fec: &FecThreshold,
    reference: Option<SeriesKey>,
    out_dir: &Path,
) -> Result<PlotFiles> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let series = median_series(records);
    let files = PlotFiles {
        ber_vs_snr: out_dir.join("fig2a.csv"),
        penalty: out_dir.join("fig2b.csv"),
        complexity: out_dir.join("fig2c.csv"),
        notes: Vec::new(),
    };

    let mut w = writer(&files.ber_vs_snr)?;
    row(&mut w, &files.ber_vs_snr, ["fiber_length_km", "n_out", "n_res", "snr_db", "ber_median", "floored", "n_seeds"])?;
    for s in &series {
        for p in &s.points {
            row(
                &mut w,
                &files.ber_vs_snr,
                [
                    s.key.fiber_length_km.to_string(),
                    s.key.n_out.to_string(),
                    s.key.n_res.to_string(),
                    p.snr_db.to_string(),
                    p.ber.to_string(),
                    p.floored.to_string(),
                    p.n_seeds.to_string(),
                ],
            )?;
        }
    }
    w.flush().map_err(|e| Error::io(&files.ber_vs_snr, e))?;

    let reference = reference.or_else(|| {
        series
            .iter()
            .filter(|s| s.key.fiber_length_km == 0.0 && s.key.n_out == 1)
            .min_by_key(|s| s.key.n_res)
            .map(|s| s.key)
    });
    let ref_snr = reference
        .and_then(|k| series.iter().find(|s| s.key == k))
        .map(|s| s.curve().and_then(|c| snr_at_threshold(&c, fec)));

    let mut notes = Vec::new();
    let mut w = writer(&files.penalty)?;
    row(&mut w, &files.penalty, ["fiber_length_km", "n_out", "n_res", "snr_at_threshold_db", "penalty_db", "status"])?;
    for s in &series {
        let own = s.curve().and_then(|c| snr_at_threshold(&c, fec));
        let (snr, penalty, status) = match (&own, &ref_snr) {
            (Ok(a), Some(Ok(b))) => (a.to_string(), (a - b).to_string(), "ok".to_string()),
            (Ok(a), Some(Err(e))) => (a.to_string(), String::new(), format!("reference: {e}")),
            (Ok(a), None) => (a.to_string(), String::new(), "no reference series".to_string()),
            (Err(e), _) => (String::new(), String::new(), e.to_string()),
        };
        if status != "ok" {
            notes.push(format!(
                "{} km, n_out {}, n_res {}: {status}",
                s.key.fiber_length_km, s.key.n_out, s.key.n_res
            ));
        }
        row(
            &mut w,
            &files.penalty,
            [
                s.key.fiber_length_km.to_string(),
                s.key.n_out.to_string(),
                s.key.n_res.to_string(),
                snr,
                penalty,
                status,
            ],
        )?;
    }
    w.flush().map_err(|e| Error::io(&files.penalty, e))?;

    let mut w = writer(&files.complexity)?;
    row(&mut w, &files.complexity, ["n_out", "n_res", "rmps"])?;
    let mut seen: Vec<(usize, usize)> = Vec::new();
    for s in &series {
        if seen.contains(&(s.key.n_out, s.key.n_res)) {
            continue;
        }
        seen.push((s.key.n_out, s.key.n_res));
        row(
            &mut w,
            &files.complexity,
            [s.key.n_out.to_string(), s.key.n_res.to_string(), s.rmps.to_string()],
        )?;
    }
    w.flush().map_err(|e| Error::io(&files.complexity, e))?;

    Ok(PlotFiles { notes, ..files })
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn row<I, S>(w: &mut csv::Writer<File>, path: &Path, fields: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(csv_err(path))
}
