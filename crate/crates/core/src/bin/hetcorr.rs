use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hetcorr::analysis::{allan_variance_with, AllanOptions};
use hetcorr::harness::{
    gain_opt_report, oracle_report, read_series_column, run_preset, run_scenario,
    write_oracle_table, write_preset_list, ScenarioConfig,
};
use hetcorr::Error;

#[derive(Parser)]
#[command(
    name = "hetcorr",
    version,
    about = "Dual balanced-receiver heterodyne correlation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutArgs {
    /// Output directory [default: $HETCORR_OUT_DIR/<name>, else ./hetcorr-out/<name>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario described by a TOML config
    Run {
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a named preset
    Preset {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List the available presets
    Presets,
    /// Print every closed-form oracle at a config's parameters
    Oracles { config: PathBuf },
    /// Allan variance of one column of a series file
    Allan {
        series: PathBuf,
        /// Column name or zero-based index [default: ac_a, else 0]
        #[arg(long)]
        column: Option<String>,
        /// Readout interval in seconds [default: from the file, else 1]
        #[arg(long)]
        interval: Option<f64>,
        /// Use the overlapping estimator
        #[arg(long)]
        overlapping: bool,
    },
    /// Optimum amplifier gain for a config's ADC, with a simulated check
    GainOpt {
        config: PathBuf,
        /// Target RMS at the ADC in volts [default: full scale / 4]
        #[arg(long)]
        target_rms: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn out_dir(explicit: Option<PathBuf>, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let base = std::env::var_os("HETCORR_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("hetcorr-out"));
        base.join(name)
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn execute(cli: Cli) -> hetcorr::Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let dir = out_dir(out.out, &stem(&config));
            let (manifest, summary) = run_scenario(&cfg, &dir, out.workers)?;
            writeln!(
                w,
                "wrote {} files to {}",
                manifest.files.len(),
                dir.display()
            )?;
            if let Some(r) = &summary.response {
                writeln!(
                    w,
                    "t_rec_ac_k={:.1} t_rec_cc_k={:.1} improvement={:.2}",
                    r.ac.t_rec, r.cc.t_rec, r.improvement_factor
                )?;
            }
            if let Some(c) = summary.zero_signal_c_lo {
                writeln!(w, "zero_signal_c_lo={c:.4}")?;
            }
        }
        Command::Preset { name, seed, out } => {
            let dir = out_dir(out.out, &name);
            let outcome = run_preset(&name, seed, &dir, out.workers)?;
            let files = outcome.manifest.as_ref().map_or(0, |m| m.files.len());
            writeln!(w, "preset {name}: wrote {files} files to {}", dir.display())?;
            if let Some(r) = outcome.summary.as_ref().and_then(|s| s.response.as_ref()) {
                writeln!(
                    w,
                    "t_rec_ac_k={:.1} t_rec_cc_k={:.1} improvement={:.2}",
                    r.ac.t_rec, r.cc.t_rec, r.improvement_factor
                )?;
            }
            if let Some(s) = outcome.summary.as_ref().and_then(|s| s.series.as_ref()) {
                writeln!(
                    w,
                    "white_slope={:.3} scatter_ratio={:.3} cc_over_ac_allan={:.4} floor_ratio_sq={:.4}",
                    s.white_slope_ac, s.scatter_ratio, s.allan_ratio_cc_over_ac, s.floor_ratio_squared
                )?;
            }
            for r in &outcome.gain_rows {
                writeln!(
                    w,
                    "gain_db={:.2} delta_db={:.2} c_lo={:.4} clip={:.2e}",
                    r.gain_db, r.delta_db, r.c_lo, r.clip_fraction
                )?;
            }
        }
        Command::Presets => write_preset_list(&mut w)?,
        Command::Oracles { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            write_oracle_table(&mut w, &oracle_report(&cfg)?)?;
        }
        Command::Allan {
            series,
            column,
            interval,
            overlapping,
        } => {
            let col = read_series_column(BufReader::new(File::open(&series)?), column.as_deref())?;
            let dt = interval.or(col.interval).unwrap_or(1.0);
            let res = allan_variance_with(&col.values, dt, AllanOptions { overlapping })?;
            writeln!(
                w,
                "# allan column={} readouts={} interval_s={dt:e}",
                col.name,
                col.values.len()
            )?;
            writeln!(w, "tau_s,variance,differences")?;
            for i in 0..res.taus.len() {
                writeln!(
                    w,
                    "{:e},{:e},{}",
                    res.taus[i], res.variances[i], res.counts[i]
                )?;
            }
        }
        Command::GainOpt {
            config,
            target_rms,
            workers,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let target = target_rms.unwrap_or(cfg.adc.full_scale / 4.0);
            write_oracle_table(&mut w, &gain_opt_report(&cfg, target, workers)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation { .. } | Error::Parse(_) | Error::InvalidArgument(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
