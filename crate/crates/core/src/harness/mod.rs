//! Experiment configuration, sweeps and result files.

mod config;
mod experiment;
mod results;
mod sweep;

pub use config::{default_snr_grid, load_config, ExperimentConfig};
pub use experiment::{run_experiment, train_readout, PointOutcome, PointSpec, Split};
pub use results::{
    emit_plot_data, median_series, read_results_csv, unix_now, write_results, write_results_csv, MedianPoint,
    PlotFiles, RunManifest, Series, SeriesKey, MANIFEST_FILE, RECORDS_LOG, RESULTS_FILE,
};
pub use sweep::{grid_points, read_log, run_point, run_sweep, SweepOptions, SweepRecord};
