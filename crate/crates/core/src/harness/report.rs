//! Every closed form evaluated at a scenario's parameters.

use std::io::Write;

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::analysis::tables::TABLE_VERSION;
use crate::analysis::{
    radiometer_sigma, snr_oracles, t_rec_from_power, t_sys_ac_closed_form, t_sys_cc_closed_form,
    OracleInputs, SignalNoise,
};
use crate::constants::{quantum_temperature, quantum_temperature_dsb, PLANCK};
use crate::error::Result;
use crate::photon::{
    cross_residual_closed_form, fano_balanced_closed_form, lo_correlation_closed_form,
};
use crate::waveform::{
    clip_probability, optimum_gain_db, optimum_gain_db_explicit, quantization_ceiling_db,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

fn row(name: &str, value: f64, unit: &str) -> OracleRow {
    OracleRow {
        name: name.into(),
        value,
        unit: unit.into(),
    }
}

pub fn oracle_report(config: &ScenarioConfig) -> Result<Vec<OracleRow>> {
    config.validate()?;
    let rx = &config.rx_a;
    let nu = rx.optical_frequency;
    let mode = config.source.lo_mode;
    let fano = rx.effective_fano(mode);
    let resp = rx.responsivity();
    let tq = quantum_temperature(nu);
    let bw = config.channel_width();
    let c_model =
        lo_correlation_closed_form(rx.eta, rx.splitter_r, config.rx_b.splitter_r, rx.fano_lo);
    let c_lo = config.injected_c_lo.unwrap_or(c_model);

    let mut rows = vec![
        row("quantum_temperature", tq, "K"),
        row("quantum_temperature_dsb", quantum_temperature_dsb(nu), "K"),
        row("responsivity", resp, "A/W"),
        row("effective_fano", fano, "1"),
    ];
    let t_ac = t_sys_ac_closed_form(fano, rx.eta, rx.amp_temp, rx.z_load, resp, rx.p_lo, nu)?;
    rows.push(row("t_sys_ac", t_ac, "K"));
    rows.push(row("t_sys_ac_over_t_q", t_ac / tq, "1"));
    let gamma = config.source.gamma_magnitude;
    if gamma > 0.0 {
        let t_cc = t_sys_cc_closed_form(c_lo, gamma, fano, rx.eta, nu)?;
        rows.push(row("c_lo_used", c_lo, "1"));
        rows.push(row("t_sys_cc", t_cc, "K"));
        rows.push(row("laser_limited_improvement", gamma / c_lo, "1"));
    }
    rows.push(row(
        "radiometer_sigma_1s",
        radiometer_sigma(t_ac, bw, 1.0)?,
        "K",
    ));
    rows.push(row(
        "fano_balanced",
        fano_balanced_closed_form(rx.eta, rx.splitter_r, rx.fano_lo),
        "1",
    ));
    rows.push(row(
        "cross_residual_per_photon",
        cross_residual_closed_form(rx.eta, rx.splitter_r, config.rx_b.splitter_r, rx.fano_lo),
        "1",
    ));
    rows.push(row("lo_correlation_model", c_model, "1"));
    rows.push(row(
        "lo_correlation_40_60_f10",
        lo_correlation_closed_form(rx.eta, 0.4, 0.4, 10.0),
        "1",
    ));

    let target = config.adc.full_scale / 4.0;
    rows.push(row(
        "optimum_gain_scenario_band",
        optimum_gain_db(rx, &config.adc, config.sample_rate_hz / 2.0, target)?,
        "dB",
    ));
    rows.push(row(
        "optimum_gain_reference",
        optimum_gain_db_explicit(0.4, 50.0, 0.75 * 1.257, 1.9e14, 1.6e9, 1e-3)?,
        "dB",
    ));
    rows.push(row("clip_probability_1p5", clip_probability(1.5)?, "1"));
    rows.push(row("clip_probability_2", clip_probability(2.0)?, "1"));
    rows.push(row(
        "quantization_ceiling",
        quantization_ceiling_db(config.adc.bits.max(2))?,
        "dB",
    ));
    rows.push(row(
        "t_rec_at_135fW_y2",
        t_rec_from_power(135e-15, 2.0, 6.25e6)?,
        "K",
    ));
    rows.push(row(
        "t_rec_at_2160fW_y2",
        t_rec_from_power(2160e-15, 2.0, 6.25e6)?,
        "K",
    ));

    let hv = PLANCK * nu;
    let n_s = if config.source.psd > 0.0 {
        config.source.psd / hv
    } else {
        1.0
    };
    for (noise, tag) in [
        (SignalNoise::Poissonian, "poissonian"),
        (SignalNoise::BoseEinstein, "bose_einstein"),
    ] {
        let o = snr_oracles(&OracleInputs {
            n_s,
            n_lo: rx.p_lo / (hv * bw),
            dnu_s: bw,
            dnu_lo: bw,
            df: 1.0,
            gamma_mag: gamma,
            c_lo,
            fano,
            eta: rx.eta,
            frequency: nu,
            amp_temp: rx.amp_temp,
            z_load: rx.z_load,
            dark_current: rx.dark_current,
            signal_noise: noise,
        })?;
        let p = |n: &str| format!("{n}_{tag}");
        rows.push(row(&p("snr_het_pre"), o.snr_het_pre, "1"));
        rows.push(row(&p("snr_het_pre_limit"), o.snr_het_pre_limit, "1"));
        rows.push(row(&p("snr_cc_pre"), o.snr_cc_pre, "1"));
        rows.push(row(&p("snr_cc_pre_limit"), o.snr_cc_pre_limit, "1"));
        rows.push(row(&p("nr_het"), o.nr_het, "1"));
        rows.push(row(&p("nr_het_limit"), o.nr_het_limit, "1"));
        rows.push(row(&p("snr_post"), o.snr_post, "1"));
        rows.push(row(&p("snr_het_el"), o.snr_het_el, "1"));
        rows.push(row(&p("snr_het_el_limit"), o.snr_het_el_limit, "1"));
        if noise == SignalNoise::Poissonian {
            rows.push(row("nespd", o.nespd, "W/Hz"));
        }
    }
    Ok(rows)
}

pub fn write_oracle_table<W: Write>(mut w: W, rows: &[OracleRow]) -> Result<()> {
    writeln!(w, "# hetcorr-table v{TABLE_VERSION} oracles")?;
    writeln!(w, "name,value,unit")?;
    for r in rows {
        writeln!(w, "{},{:e},{}", r.name, r.value, r.unit)?;
    }
    Ok(())
}
