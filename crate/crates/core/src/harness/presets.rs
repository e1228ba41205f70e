use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::{ScenarioConfig, Switching};
use super::output::{run_scenario_as, OutputDir, RunManifest, CONFIG_NAME};
use super::pipeline::simulate;
use super::report::{oracle_report, write_oracle_table, OracleRow};
use super::summary::{summarize, ScenarioSummary};
use crate::analysis::tables::{volts2_to_dbm, write_gain_table, GainRow};
use crate::error::{Error, Result};
use crate::waveform::{
    clip_probability, optimum_gain_db, optimum_gain_db_explicit, LoMode, ReceiverSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "power-sweep",
        description: "six source levels, balanced pair with c_LO = 0.047: AC/CC response and noise temperatures",
    },
    PresetInfo {
        name: "single-pd-control",
        description: "single-photodiode LO pickup: c_LO near 1 and no cross-correlation gain",
    },
    PresetInfo {
        name: "gain-study",
        description: "zero-signal AC/CC powers and c_LO at three amplifier gains",
    },
    PresetInfo {
        name: "allan-run",
        description: "zero-signal readout series with slow gain drift: Allan variance of AC and CC",
    },
    PresetInfo {
        name: "gain-opt",
        description: "optimum amplifier gain for the ADC, checked by simulation",
    },
    PresetInfo {
        name: "oracle-report",
        description: "every closed-form expression at the default parameters",
    },
    PresetInfo {
        name: "dicke-switch",
        description: "source switched on and off at 100 Hz; on-minus-off spectra",
    },
];

pub fn list_presets() -> &'static [PresetInfo] {
    PRESETS
}

fn unknown(name: &str) -> Error {
    let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
    Error::arg(format!(
        "unknown preset '{name}'; valid presets: {}",
        names.join(", ")
    ))
}

/// Source levels of the response sweeps, in units of the receiver floor.
const SWEEP_STEPS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];

/// Injected zero-signal LO correlation of the balanced-pair presets.
pub const PRESET_C_LO: f64 = 0.047;

/// Zero-signal RMS voltage targeted at the ADC by the simulation presets.
const PRESET_RMS: f64 = 0.1;

/// Gain (dB) putting the zero-signal RMS of `rx` at `target_rms`.
pub fn gain_for_floor_rms(
    rx: &ReceiverSpec,
    mode: LoMode,
    sample_rate: f64,
    target_rms: f64,
) -> f64 {
    let var = rx.floor_voltage_psd(mode) * sample_rate / 2.0;
    20.0 * (target_rms / var.sqrt()).log10()
}

/// Source density (W/Hz) whose signal power equals the zero-signal floor.
fn floor_equivalent_psd(rx: &ReceiverSpec, mode: LoMode) -> f64 {
    rx.floor_voltage_psd(mode) / rx.signal_voltage_psd(1.0)
}

fn with_gain(mut cfg: ScenarioConfig, gain_db: f64) -> ScenarioConfig {
    cfg.rx_a.amp_gain_db = gain_db;
    cfg.rx_b.amp_gain_db = gain_db;
    cfg
}

/// Scenario a preset is built on, before seed overrides.
pub fn preset_config(name: &str) -> Result<ScenarioConfig> {
    let base = ScenarioConfig::default();
    let fs = base.sample_rate_hz;
    let cfg = match name {
        "power-sweep" => {
            let unit = floor_equivalent_psd(&base.rx_a, LoMode::BalancedPair);
            ScenarioConfig {
                duration_s: 3.3,
                injected_c_lo: Some(PRESET_C_LO),
                sweep_psd_w_per_hz: Some(SWEEP_STEPS.iter().map(|s| s * unit).collect()),
                ..base.clone()
            }
        }
        "single-pd-control" => {
            let mut cfg = ScenarioConfig {
                duration_s: 1.0,
                ..base.clone()
            };
            cfg.source.lo_mode = LoMode::SinglePdPair;
            cfg.rx_a.fano_lo = 100.0;
            cfg.rx_b.fano_lo = 100.0;
            let unit = floor_equivalent_psd(&cfg.rx_a, LoMode::SinglePdPair);
            cfg.sweep_psd_w_per_hz = Some(SWEEP_STEPS.iter().map(|s| s * unit).collect());
            cfg
        }
        "gain-study" => ScenarioConfig {
            duration_s: 1.0,
            injected_c_lo: Some(PRESET_C_LO),
            ..base.clone()
        },
        "allan-run" => ScenarioConfig {
            // 16384 readouts of 16 chunks each.
            duration_s: (16384 * 16 * base.chunk.fft_length) as f64 / fs,
            injected_c_lo: Some(PRESET_C_LO),
            gain_drift_per_sqrt_s: 0.24,
            readout_chunks: Some(16),
            ..base.clone()
        },
        "gain-opt" => ScenarioConfig {
            duration_s: 0.2,
            ..base.clone()
        },
        "oracle-report" => ScenarioConfig {
            injected_c_lo: Some(PRESET_C_LO),
            ..base.clone()
        },
        "dicke-switch" => {
            let mut cfg = ScenarioConfig {
                duration_s: 1.0,
                injected_c_lo: Some(PRESET_C_LO),
                switching: Switching::Dicke { rate_hz: 100.0 },
                ..base.clone()
            };
            cfg.source.psd = floor_equivalent_psd(&cfg.rx_a, LoMode::BalancedPair);
            cfg
        }
        other => return Err(unknown(other)),
    };
    let gain = gain_for_floor_rms(&cfg.rx_a, cfg.source.lo_mode, fs, PRESET_RMS);
    let gain = (gain * 100.0).round() / 100.0;
    Ok(with_gain(cfg, gain))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PresetOutcome {
    pub manifest: Option<RunManifest>,
    pub summary: Option<ScenarioSummary>,
    pub gain_rows: Vec<GainRow>,
    pub report: Vec<OracleRow>,
}

/// Run preset `name`, writing its products to `out_dir`.
pub fn run_preset(
    name: &str,
    seed: Option<u64>,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<PresetOutcome> {
    let mut cfg = preset_config(name)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    match name {
        "gain-study" => run_gain_study(&cfg, out_dir, workers),
        "gain-opt" => {
            let mut out = OutputDir::create(out_dir)?;
            out.write_str(CONFIG_NAME, &cfg.to_toml_string()?)?;
            let rows = gain_opt_report(&cfg, cfg.adc.full_scale / 4.0, workers)?;
            out.write_with("gain_opt.csv", |w| write_oracle_table(w, &rows))?;
            let manifest = out.finish(&cfg, Some(name))?;
            Ok(PresetOutcome {
                manifest: Some(manifest),
                report: rows,
                ..Default::default()
            })
        }
        "oracle-report" => {
            let mut out = OutputDir::create(out_dir)?;
            out.write_str(CONFIG_NAME, &cfg.to_toml_string()?)?;
            let rows = oracle_report(&cfg)?;
            out.write_with("oracles.csv", |w| write_oracle_table(w, &rows))?;
            let manifest = out.finish(&cfg, Some(name))?;
            Ok(PresetOutcome {
                manifest: Some(manifest),
                report: rows,
                ..Default::default()
            })
        }
        _ => {
            let (manifest, summary) = run_scenario_as(&cfg, out_dir, workers, Some(name))?;
            Ok(PresetOutcome {
                manifest: Some(manifest),
                summary: Some(summary),
                ..Default::default()
            })
        }
    }
}

/// RMS targets of the gain study, as fractions of the ADC full scale:
/// quantization-limited, nominal, and clipping.
const GAIN_STUDY_RMS: [f64; 3] = [0.0125, 0.125, 0.375];

fn run_gain_study(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<PresetOutcome> {
    let mut out = OutputDir::create(out_dir)?;
    out.write_str(CONFIG_NAME, &cfg.to_toml_string()?)?;
    let mut rows = Vec::new();
    for (i, frac) in GAIN_STUDY_RMS.iter().enumerate() {
        let target = frac * cfg.adc.full_scale;
        let gain = gain_for_floor_rms(&cfg.rx_a, cfg.source.lo_mode, cfg.sample_rate_hz, target);
        let gain = (gain * 100.0).round() / 100.0;
        let run = ScenarioConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..with_gain(cfg.clone(), gain)
        };
        let outcome = simulate(&run, workers)?;
        let summary = summarize(&run, &outcome)?;
        let p = &summary.points[0];
        let width = (summary.band_channels[1] - summary.band_channels[0]) as f64;
        let z = run.rx_a.z_load;
        let ac = volts2_to_dbm(0.5 * (p.ac_a + p.ac_b) * width, z);
        let cc = volts2_to_dbm(p.cross_mag * width, z);
        rows.push(GainRow {
            gain_db: gain,
            ac_zero_dbm: ac,
            cc_zero_dbm: cc,
            delta_db: ac - cc,
            c_lo: p.c_lo,
            clip_fraction: p.clip_fraction_a.max(p.clip_fraction_b),
        });
        out.write_with(&format!("spectrum_g{i:02}.csv"), |w| {
            outcome.points[0].spectrum.write_text(w)
        })?;
    }
    out.write_with("gain_study.csv", |w| write_gain_table(w, &rows))?;
    let manifest = out.finish(cfg, Some("gain-study"))?;
    Ok(PresetOutcome {
        manifest: Some(manifest),
        gain_rows: rows,
        ..Default::default()
    })
}

/// Optimum gain from the closed form, then a short zero-signal run at that
/// gain to report the achieved ADC loading.
pub fn gain_opt_report(
    cfg: &ScenarioConfig,
    target_rms: f64,
    workers: Option<usize>,
) -> Result<Vec<OracleRow>> {
    cfg.validate()?;
    let bw = cfg.sample_rate_hz / 2.0;
    let g = optimum_gain_db(&cfg.rx_a, &cfg.adc, bw, target_rms)?;
    let run = ScenarioConfig {
        sweep_psd_w_per_hz: None,
        readout_chunks: None,
        switching: Switching::None,
        write_waveforms: false,
        ..with_gain(cfg.clone(), g)
    };
    let mut run = run;
    run.source.psd = 0.0;
    let outcome = simulate(&run, workers)?;
    let p = &outcome.points[0];
    let rms = p.adc_rms[0];
    let row = |name: &str, value: f64, unit: &str| OracleRow {
        name: name.into(),
        value,
        unit: unit.into(),
    };
    Ok(vec![
        row("target_rms", target_rms, "V"),
        row("bandwidth", bw, "Hz"),
        row("optimum_gain", g, "dB"),
        row(
            "optimum_gain_reference",
            optimum_gain_db_explicit(0.4, 50.0, 0.75 * 1.257, 1.9e14, 1.6e9, 1e-3)?,
            "dB",
        ),
        row("simulated_rms", rms, "V"),
        row("simulated_clip_fraction", p.clip_fraction[0], "1"),
        row(
            "closed_form_clip_probability",
            clip_probability(cfg.adc.full_scale / 2.0 / rms)?,
            "1",
        ),
        row(
            "floor_rms_gain",
            gain_for_floor_rms(
                &cfg.rx_a,
                cfg.source.lo_mode,
                cfg.sample_rate_hz,
                target_rms,
            ),
            "dB",
        ),
    ])
}

/// Write a table of preset names and descriptions.
pub fn write_preset_list<W: Write>(mut w: W) -> Result<()> {
    for p in PRESETS {
        writeln!(w, "{:<18} {}", p.name, p.description)?;
    }
    Ok(())
}
