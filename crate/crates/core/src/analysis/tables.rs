//! Delimited result tables with a versioned comment header.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverRow {
    pub receiver: String,
    pub channel_bw_hz: f64,
    /// Source power giving Y = 2 in one channel.
    pub p_s_at_y2_watts: f64,
    pub t_rec_kelvin: f64,
    pub quantum_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub gain_db: f64,
    pub ac_zero_dbm: f64,
    pub cc_zero_dbm: f64,
    pub delta_db: f64,
    pub c_lo: f64,
    pub clip_fraction: f64,
}

fn header<W: Write>(w: &mut W, kind: &str, columns: &[&str]) -> Result<()> {
    writeln!(w, "# hetcorr-table v{TABLE_VERSION} {kind}")?;
    writeln!(w, "{}", columns.join(","))?;
    Ok(())
}

/// Per-receiver noise temperatures.
pub fn write_receiver_table<W: Write>(mut w: W, rows: &[ReceiverRow]) -> Result<()> {
    header(
        &mut w,
        "receiver-temperatures",
        &[
            "receiver",
            "channel_bw_hz",
            "p_s_at_y2_watts",
            "t_rec_kelvin",
            "quantum_ratio",
        ],
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:.3},{:.4}",
            r.receiver, r.channel_bw_hz, r.p_s_at_y2_watts, r.t_rec_kelvin, r.quantum_ratio
        )?;
    }
    Ok(())
}

/// Zero-input AC/CC powers per gain setting.
pub fn write_gain_table<W: Write>(mut w: W, rows: &[GainRow]) -> Result<()> {
    header(
        &mut w,
        "gain-study",
        &[
            "gain_db",
            "ac_zero_dbm",
            "cc_zero_dbm",
            "delta_db",
            "c_lo",
            "clip_fraction",
        ],
    )?;
    for r in rows {
        writeln!(
            w,
            "{:.2},{:.3},{:.3},{:.3},{:.5},{:.6}",
            r.gain_db, r.ac_zero_dbm, r.cc_zero_dbm, r.delta_db, r.c_lo, r.clip_fraction
        )?;
    }
    Ok(())
}

/// Power in dBm of a mean-square voltage across `z_load`.
pub fn volts2_to_dbm(v2: f64, z_load: f64) -> f64 {
    10.0 * (v2 / z_load / 1e-3).log10()
}
