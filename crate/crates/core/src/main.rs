use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rcpam4::error::{Error, Result};
use rcpam4::esn::EsnConfig;
use rcpam4::eval::{complexity_rmps, FecThreshold};
use rcpam4::harness::{
    emit_plot_data, load_config, read_results_csv, run_experiment, run_sweep, unix_now, write_results,
    ExperimentConfig, PointSpec, RunManifest, SweepOptions, RECORDS_LOG, RESULTS_FILE,
};

#[derive(Parser)]
#[command(name = "rcpam4", version, about = "Sliced PAM4 link simulation and reservoir equalizer sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one grid point and print its error report as JSON.
    Simulate(SimulateArgs),
    /// Run every grid point of a config and write results into a directory.
    Sweep(SweepArgs),
    /// Print real multiplications per symbol for a list of output widths.
    Complexity(ComplexityArgs),
    /// Turn a results table into plot-ready CSV files.
    Plotdata(PlotArgs),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use this single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Total symbols per frame.
    #[arg(long)]
    symbols: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Fiber length in km; defaults to the first configured length.
    #[arg(long)]
    length: Option<f64>,
    /// SNR in dB; defaults to the first configured value.
    #[arg(long)]
    snr: Option<f64>,
    /// Symbols per reservoir step; defaults to the first configured width.
    #[arg(long)]
    n_out: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory; an existing run there is resumed.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated output widths.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 17, 23])]
    n_out: Vec<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding results.csv; the plot tables are written there too.
    #[arg(long)]
    out: PathBuf,
    /// Results table to read instead of `<out>/results.csv`.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Pre-FEC BER threshold for the penalty table.
    #[arg(long, default_value_t = rcpam4::eval::KP4_BER)]
    threshold: f64,
}

fn base_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::with_lengths(vec![0.0]),
    };
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(n) = common.symbols {
        cfg.total_symbols = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = base_config(&args.common)?;
    let point = PointSpec {
        label: cfg.label.clone(),
        link: cfg.link.clone(),
        esn: cfg.esn.clone(),
        fiber_length_km: args.length.unwrap_or(cfg.fiber_length_km[0]),
        snr_db: args.snr.unwrap_or(cfg.snr_db[0]),
        n_out: args.n_out.unwrap_or(cfg.n_out[0]),
        total_symbols: cfg.total_symbols,
        train_fraction: cfg.train_fraction,
        seed: cfg.seeds[0],
    };
    point.esn_config().validate()?;
    let outcome = run_experiment(&point)?;
    println!("{}", serde_json::to_string_pretty(&outcome)?);
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let cfg = base_config(&args.common)?;
    let out = &args.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    // Resuming is only sound when the directory belongs to the same sweep.
    let snapshot = out.join("config.toml");
    let text = cfg.to_toml();
    match std::fs::read_to_string(&snapshot) {
        Ok(old) if old != text => {
            return Err(Error::config(
                "out",
                format!("{} holds a sweep of a different config", out.display()),
            ))
        }
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            std::fs::write(&snapshot, &text).map_err(|e| Error::io(&snapshot, e))?
        }
        Err(e) => return Err(Error::io(&snapshot, e)),
    }

    let started = unix_now();
    let opts = SweepOptions {
        threads: args.parallel,
        log: Some(out.join(RECORDS_LOG)),
    };
    let records = run_sweep(&cfg, &opts)?;
    let manifest = RunManifest::new(&cfg, args.parallel, started, &records);
    write_results(&records, &manifest, out)?;
    let plots = emit_plot_data(&records, &FecThreshold::default(), None, out)?;
    for note in &plots.notes {
        eprintln!("note: {note}");
    }
    eprintln!(
        "{} records ({} failed) written to {}",
        manifest.n_records,
        manifest.n_failed,
        out.join(RESULTS_FILE).display()
    );
    Ok(())
}

fn complexity(args: &ComplexityArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::with_lengths(vec![0.0]),
    };
    println!("{:>6} {:>6} {:>6} {:>12}", "n_out", "n_in", "n_res", "rmps");
    for &n_out in &args.n_out {
        let esn = EsnConfig::new(cfg.esn.clone(), n_out, &cfg.link, 0);
        esn.validate()?;
        println!(
            "{:>6} {:>6} {:>6} {:>12.4}",
            n_out,
            esn.n_in(),
            esn.params.n_res,
            complexity_rmps(&esn)
        );
    }
    Ok(())
}

fn plotdata(args: &PlotArgs) -> Result<()> {
    let fec = FecThreshold::new(args.threshold)?;
    let records_path = args.records.clone().unwrap_or_else(|| args.out.join(RESULTS_FILE));
    let records = read_results_csv(&records_path)?;
    let files = emit_plot_data(&records, &fec, None, &args.out)?;
    for note in &files.notes {
        eprintln!("note: {note}");
    }
    for path in [&files.ber_vs_snr, &files.penalty, &files.complexity] {
        println!("{}", display(path));
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Complexity(a) => complexity(a),
        Command::Plotdata(a) => plotdata(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
