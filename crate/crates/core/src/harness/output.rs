use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ScenarioConfig;
use super::pipeline::{simulate, SimulationOutcome};
use super::summary::{projected_cross, summarize, ScenarioSummary};
use crate::analysis::tables::{write_receiver_table, ReceiverRow, TABLE_VERSION};
use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_NAME: &str = "manifest.json";
pub const CONFIG_NAME: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub wall_clock_s: f64,
    pub config_file: String,
    /// Config echo, identical to the contents of `config_file`.
    pub config: String,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Recompute every digest; returns the paths that do not match.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for f in &self.files {
            if digest_file(&dir.join(&f.path))? != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}

pub fn digest_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Collects the files of one run and writes the manifest last.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write a file through `f` and register it.
    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.root.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn write_str(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        self.write_with(name, |w| Ok(w.write_all(content.as_bytes())?))
    }

    /// Register a file written by other means.
    pub fn register(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn finish(self, config: &ScenarioConfig, preset: Option<&str>) -> Result<RunManifest> {
        let config_text = fs::read_to_string(self.root.join(CONFIG_NAME))?;
        let files = self
            .files
            .iter()
            .map(|name| {
                let path = self.root.join(name);
                Ok(FileDigest {
                    path: name.clone(),
                    sha256: digest_file(&path)?,
                    bytes: fs::metadata(&path)?.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            artifact: "hetcorr".into(),
            version: ARTIFACT_VERSION.into(),
            preset: preset.map(str::to_string),
            seed: config.seed,
            wall_clock_s: self.started.elapsed().as_secs_f64(),
            config_file: CONFIG_NAME.into(),
            config: config_text,
            files,
        };
        let json =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(self.root.join(MANIFEST_NAME), json)?;
        Ok(manifest)
    }
}

/// Simulate `config` and write all products to `out_dir`.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<(RunManifest, ScenarioSummary)> {
    run_scenario_as(config, out_dir, workers, None)
}

pub(crate) fn run_scenario_as(
    config: &ScenarioConfig,
    out_dir: &Path,
    workers: Option<usize>,
    preset: Option<&str>,
) -> Result<(RunManifest, ScenarioSummary)> {
    config.validate()?;
    let mut out = OutputDir::create(out_dir)?;
    let outcome = simulate(config, workers)?;
    let summary = summarize(config, &outcome)?;
    write_products(&mut out, config, &outcome, &summary)?;
    let manifest = out.finish(config, preset)?;
    Ok((manifest, summary))
}

fn write_products(
    out: &mut OutputDir,
    config: &ScenarioConfig,
    outcome: &SimulationOutcome,
    summary: &ScenarioSummary,
) -> Result<()> {
    out.write_str(CONFIG_NAME, &config.to_toml_string()?)?;
    for (i, p) in outcome.points.iter().enumerate() {
        out.write_with(&format!("spectrum_p{i:02}.csv"), |w| {
            p.spectrum.write_text(w)
        })?;
        if let Some(d) = &p.dicke {
            out.write_with(&format!("dicke_on_p{i:02}.csv"), |w| d.on.write_text(w))?;
            out.write_with(&format!("dicke_off_p{i:02}.csv"), |w| d.off.write_text(w))?;
        }
        if let Some((a, b)) = &p.waveforms {
            for (seg, tag) in [(a, "a"), (b, "b")] {
                let base = out.root().join(format!("waveform_p{i:02}_{tag}"));
                seg.write_raw(&base, &format!("point {i} receiver {tag}"))?;
                out.register(&format!("waveform_p{i:02}_{tag}.f32"));
                out.register(&format!("waveform_p{i:02}_{tag}.hdr"));
            }
        }
    }
    out.write_with("response.csv", |w| {
        writeln!(w, "# hetcorr-table v{TABLE_VERSION} response channel_width_hz={:e}", summary.channel_width_hz)?;
        writeln!(w, "point,psd_w_per_hz,t_source_kelvin,ac_a,ac_b,cc_re,cc_im,cc_mag,c_lo,clip_a,clip_b,adc_rms_a,adc_rms_b")?;
        for (i, p) in summary.points.iter().enumerate() {
            writeln!(
                w,
                "{i},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                p.psd_w_per_hz,
                p.t_source_kelvin,
                p.ac_a,
                p.ac_b,
                p.cross_re,
                p.cross_im,
                p.cross_mag,
                p.c_lo,
                p.clip_fraction_a,
                p.clip_fraction_b,
                p.adc_rms_a,
                p.adc_rms_b
            )?;
        }
        Ok(())
    })?;
    if let Some(r) = &summary.response {
        let row = |name: &str, t: &crate::analysis::NoiseTempResult| ReceiverRow {
            receiver: name.into(),
            channel_bw_hz: t.channel_bw,
            p_s_at_y2_watts: t.t_rec * BOLTZMANN * t.channel_bw,
            t_rec_kelvin: t.t_rec,
            quantum_ratio: t.quantum_ratio,
        };
        let rows = [
            row("ac_a", &r.ac_a),
            row("ac_b", &r.ac_b),
            row("ac", &r.ac),
            row("cc", &r.cc),
        ];
        out.write_with("noise_temps.csv", |w| write_receiver_table(w, &rows))?;
    }
    if let (Some(k), Some(series)) = (config.readout_chunks, outcome.points[0].series.as_ref()) {
        let interval = (k * config.chunk.fft_length) as f64 / config.sample_rate_hz;
        let proj = projected_cross(series);
        out.write_with("series.csv", |w| {
            writeln!(
                w,
                "# hetcorr-series v1 readout_interval_s={interval:e} channel={}",
                config.series_channel()
            )?;
            writeln!(w, "readout,time_s,ac_a,ac_b,cc_re,cc_im,cc_projected")?;
            for (i, (r, p)) in series.iter().zip(&proj).enumerate() {
                writeln!(
                    w,
                    "{i},{:e},{:e},{:e},{:e},{:e},{:e}",
                    i as f64 * interval,
                    r.ac_a,
                    r.ac_b,
                    r.cross.re,
                    r.cross.im,
                    p
                )?;
            }
            Ok(())
        })?;
    }
    if let Some(s) = &summary.series {
        out.write_with("allan.csv", |w| {
            writeln!(w, "# hetcorr-table v{TABLE_VERSION} allan")?;
            writeln!(w, "tau_s,ac_variance,cc_variance,cc_over_ac,differences")?;
            for i in 0..s.ac_allan.taus.len() {
                writeln!(
                    w,
                    "{:e},{:e},{:e},{:e},{}",
                    s.ac_allan.taus[i],
                    s.ac_allan.variances[i],
                    s.cc_allan.variances[i],
                    s.cc_allan.variances[i] / s.ac_allan.variances[i],
                    s.ac_allan.counts[i]
                )?;
            }
            Ok(())
        })?;
    }
    let json = serde_json::to_string_pretty(summary).map_err(|e| Error::Parse(e.to_string()))?;
    out.write_str("summary.json", &json)?;
    Ok(())
}
