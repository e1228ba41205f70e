//! C ABI over the hetcorr library.
//!
//! Every fallible function returns a [`HetcorrStatus`]; on failure the
//! message is kept per thread and read back with
//! [`hetcorr_last_error_message`]. Handles are opaque and must be released
//! with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hetcorr::analysis::{allan_variance_with, AllanOptions};
use hetcorr::correlator::{Channelizer, ChunkSpec, SpectrumAccumulator};
use hetcorr::harness::{preset_config, run_scenario, ScenarioConfig, ScenarioSummary};
use hetcorr::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HetcorrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Undefined = 4,
    InconsistentData = 5,
    FitFailure = 6,
    Parse = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> HetcorrStatus {
    match err {
        Error::InvalidArgument(_) => HetcorrStatus::InvalidArgument,
        Error::Undefined(_) => HetcorrStatus::Undefined,
        Error::InconsistentData(_) => HetcorrStatus::InconsistentData,
        Error::FitFailure(_) => HetcorrStatus::FitFailure,
        Error::Validation { .. } => HetcorrStatus::Validation,
        Error::Parse(_) => HetcorrStatus::Parse,
        Error::Io(_) => HetcorrStatus::Io,
    }
}

fn fail(status: HetcorrStatus, msg: &str) -> HetcorrStatus {
    set_error(msg);
    status
}

/// Run `f`, mapping library errors and panics to status codes.
fn guard<F>(f: F) -> HetcorrStatus
where
    F: FnOnce() -> Result<HetcorrStatus, Error>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => {
            if s == HetcorrStatus::Ok {
                set_error("");
            }
            s
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => fail(HetcorrStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error::InvalidArgument("null string".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("string is not UTF-8".into()))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> HetcorrStatus {
    if out.is_null() {
        return fail(HetcorrStatus::NullPointer, "null output pointer");
    }
    *out = v;
    HetcorrStatus::Ok
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hetcorr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// Closed forms.

/// Quantum temperature `h nu / k_B` in kelvin.
#[no_mangle]
pub extern "C" fn hetcorr_quantum_temperature(frequency_hz: f64) -> f64 {
    hetcorr::constants::quantum_temperature(frequency_hz)
}

/// Balanced-output Fano factor for efficiency `eta`, splitter reflectance
/// `r` and LO Fano factor `fano_lo`.
#[no_mangle]
pub extern "C" fn hetcorr_fano_balanced(eta: f64, r: f64, fano_lo: f64) -> f64 {
    hetcorr::photon::fano_balanced_closed_form(eta, r, fano_lo)
}

/// Zero-signal LO correlation between two balanced pairs.
#[no_mangle]
pub extern "C" fn hetcorr_lo_correlation(eta: f64, r_a: f64, r_b: f64, fano_lo: f64) -> f64 {
    hetcorr::photon::lo_correlation_closed_form(eta, r_a, r_b, fano_lo)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_optimum_gain_db(
    target_rms: f64,
    z_load: f64,
    responsivity: f64,
    optical_frequency: f64,
    bandwidth: f64,
    p_lo: f64,
    out: *mut f64,
) -> HetcorrStatus {
    guard(|| {
        let g = hetcorr::waveform::optimum_gain_db_explicit(
            target_rms,
            z_load,
            responsivity,
            optical_frequency,
            bandwidth,
            p_lo,
        )?;
        Ok(write_out(out, g))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_clip_probability(ratio: f64, out: *mut f64) -> HetcorrStatus {
    guard(|| Ok(write_out(out, hetcorr::waveform::clip_probability(ratio)?)))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_t_rec_from_power(
    p_s_at_y: f64,
    y: f64,
    channel_bw: f64,
    out: *mut f64,
) -> HetcorrStatus {
    guard(|| {
        Ok(write_out(
            out,
            hetcorr::analysis::t_rec_from_power(p_s_at_y, y, channel_bw)?,
        ))
    })
}

/// Allan variance at octave-spaced averaging times. Writes up to `capacity`
/// points and the number available to `written`; returns
/// `BUFFER_TOO_SMALL` if `capacity` is short.
///
/// # Safety
/// `series` must point to `n` doubles; `taus` and `variances` to `capacity`
/// doubles; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_allan_variance(
    series: *const f64,
    n: usize,
    interval: f64,
    overlapping: bool,
    taus: *mut f64,
    variances: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> HetcorrStatus {
    guard(|| {
        if series.is_null()
            || written.is_null()
            || (capacity > 0 && (taus.is_null() || variances.is_null()))
        {
            return Ok(fail(HetcorrStatus::NullPointer, "null pointer argument"));
        }
        let xs = std::slice::from_raw_parts(series, n);
        let res = allan_variance_with(xs, interval, AllanOptions { overlapping })?;
        let k = res.taus.len();
        *written = k;
        if k > capacity {
            return Ok(fail(
                HetcorrStatus::BufferTooSmall,
                "output capacity too small",
            ));
        }
        ptr::copy_nonoverlapping(res.taus.as_ptr(), taus, k);
        ptr::copy_nonoverlapping(res.variances.as_ptr(), variances, k);
        Ok(HetcorrStatus::Ok)
    })
}

// Scenarios.

/// Opaque scenario configuration.
pub struct HetcorrScenario {
    config: ScenarioConfig,
}

/// Opaque result of a scenario run.
pub struct HetcorrResult {
    summary: ScenarioSummary,
    json: String,
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Parse a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut HetcorrScenario,
) -> HetcorrStatus {
    guard(|| {
        if out.is_null() {
            return Ok(fail(HetcorrStatus::NullPointer, "null output pointer"));
        }
        let config = ScenarioConfig::from_toml_str(str_arg(toml)?)?;
        *out = boxed(HetcorrScenario { config });
        Ok(HetcorrStatus::Ok)
    })
}

/// Scenario of a named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_scenario_from_preset(
    name: *const c_char,
    out: *mut *mut HetcorrScenario,
) -> HetcorrStatus {
    guard(|| {
        if out.is_null() {
            return Ok(fail(HetcorrStatus::NullPointer, "null output pointer"));
        }
        let config = preset_config(str_arg(name)?)?;
        *out = boxed(HetcorrScenario { config });
        Ok(HetcorrStatus::Ok)
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_scenario_set_seed(
    scenario: *mut HetcorrScenario,
    seed: u64,
) -> HetcorrStatus {
    match scenario.as_mut() {
        Some(s) => {
            s.config.seed = seed;
            HetcorrStatus::Ok
        }
        None => fail(HetcorrStatus::NullPointer, "null scenario"),
    }
}

/// Set simulated time per sweep point.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_scenario_set_duration(
    scenario: *mut HetcorrScenario,
    duration_s: f64,
) -> HetcorrStatus {
    match scenario.as_mut() {
        Some(s) => {
            let old = s.config.duration_s;
            s.config.duration_s = duration_s;
            if let Err(e) = s.config.validate() {
                s.config.duration_s = old;
                set_error(e.to_string());
                return status_of(&e);
            }
            HetcorrStatus::Ok
        }
        None => fail(HetcorrStatus::NullPointer, "null scenario"),
    }
}

/// Simulate and write products to `out_dir`. `workers = 0` uses every core.
///
/// # Safety
/// `scenario` must be a live handle, `out_dir` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_scenario_run(
    scenario: *const HetcorrScenario,
    out_dir: *const c_char,
    workers: usize,
    out: *mut *mut HetcorrResult,
) -> HetcorrStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return Ok(fail(HetcorrStatus::NullPointer, "null scenario"));
        };
        if out.is_null() {
            return Ok(fail(HetcorrStatus::NullPointer, "null output pointer"));
        }
        let dir = str_arg(out_dir)?;
        let w = (workers > 0).then_some(workers);
        let (_, summary) = run_scenario(&s.config, Path::new(dir), w)?;
        let json = serde_json::to_string(&summary).map_err(|e| Error::Parse(e.to_string()))?;
        *out = boxed(HetcorrResult { summary, json });
        Ok(HetcorrStatus::Ok)
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_scenario_free(scenario: *mut HetcorrScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Receiver temperatures from the response fit; fails with `UNDEFINED` when
/// the run had fewer than two sweep points.
///
/// # Safety
/// `result` must be a live handle; outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_result_t_rec(
    result: *const HetcorrResult,
    t_rec_ac: *mut f64,
    t_rec_cc: *mut f64,
) -> HetcorrStatus {
    let Some(r) = result.as_ref() else {
        return fail(HetcorrStatus::NullPointer, "null result");
    };
    let Some(resp) = &r.summary.response else {
        return fail(HetcorrStatus::Undefined, "run has no response sweep");
    };
    if write_out(t_rec_ac, resp.ac.t_rec) != HetcorrStatus::Ok {
        return HetcorrStatus::NullPointer;
    }
    write_out(t_rec_cc, resp.cc.t_rec)
}

/// Zero-signal c_LO; `UNDEFINED` when no sweep point has zero source power.
///
/// # Safety
/// `result` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_result_zero_signal_c_lo(
    result: *const HetcorrResult,
    out: *mut f64,
) -> HetcorrStatus {
    let Some(r) = result.as_ref() else {
        return fail(HetcorrStatus::NullPointer, "null result");
    };
    match r.summary.zero_signal_c_lo {
        Some(c) => write_out(out, c),
        None => fail(HetcorrStatus::Undefined, "run has no zero-signal point"),
    }
}

/// Copy the run summary as JSON into `buf` (NUL-terminated). `needed`
/// receives the buffer size required, including the terminator.
///
/// # Safety
/// `result` must be a live handle; `buf` null or `len` writable bytes;
/// `needed` valid.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_result_summary_json(
    result: *const HetcorrResult,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HetcorrStatus {
    let Some(r) = result.as_ref() else {
        return fail(HetcorrStatus::NullPointer, "null result");
    };
    if needed.is_null() {
        return fail(HetcorrStatus::NullPointer, "null output pointer");
    }
    *needed = r.json.len() + 1;
    if buf.is_null() || len < r.json.len() + 1 {
        return fail(
            HetcorrStatus::BufferTooSmall,
            "buffer too small for summary",
        );
    }
    ptr::copy_nonoverlapping(r.json.as_ptr(), buf as *mut u8, r.json.len());
    *buf.add(r.json.len()) = 0;
    HetcorrStatus::Ok
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_result_free(result: *mut HetcorrResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

// Streaming correlator.

/// Opaque two-input FX correlator.
pub struct HetcorrCorrelator {
    channelizer: Channelizer,
    acc: SpectrumAccumulator,
    pending_a: Vec<f64>,
    pending_b: Vec<f64>,
}

/// New correlator with `fft_length`-point chunks (a power of two).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_correlator_new(
    fft_length: usize,
    sample_rate: f64,
    out: *mut *mut HetcorrCorrelator,
) -> HetcorrStatus {
    guard(|| {
        if out.is_null() {
            return Ok(fail(HetcorrStatus::NullPointer, "null output pointer"));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidArgument("sample_rate must be > 0".into()));
        }
        let spec = ChunkSpec::new(fft_length)?;
        *out = boxed(HetcorrCorrelator {
            channelizer: Channelizer::new(spec)?,
            acc: SpectrumAccumulator::for_spec(spec, sample_rate),
            pending_a: Vec::new(),
            pending_b: Vec::new(),
        });
        Ok(HetcorrStatus::Ok)
    })
}

/// Feed `n` samples of each input. Samples that do not complete a chunk
/// are kept for the next call.
///
/// # Safety
/// `c` must be a live handle; `a` and `b` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_correlator_push(
    c: *mut HetcorrCorrelator,
    a: *const f64,
    b: *const f64,
    n: usize,
) -> HetcorrStatus {
    guard(|| {
        let Some(c) = c.as_mut() else {
            return Ok(fail(HetcorrStatus::NullPointer, "null correlator"));
        };
        if n > 0 && (a.is_null() || b.is_null()) {
            return Ok(fail(HetcorrStatus::NullPointer, "null sample pointer"));
        }
        if n == 0 {
            return Ok(HetcorrStatus::Ok);
        }
        c.pending_a
            .extend_from_slice(std::slice::from_raw_parts(a, n));
        c.pending_b
            .extend_from_slice(std::slice::from_raw_parts(b, n));
        let len = c.channelizer.spec().fft_length;
        let full = c.pending_a.len() / len * len;
        c.channelizer
            .accumulate_samples(&c.pending_a[..full], &c.pending_b[..full], &mut c.acc)?;
        c.pending_a.drain(..full);
        c.pending_b.drain(..full);
        Ok(HetcorrStatus::Ok)
    })
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_correlator_channels(c: *const HetcorrCorrelator) -> usize {
    c.as_ref().map_or(0, |c| c.acc.n_channels())
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_correlator_chunks(c: *const HetcorrCorrelator) -> u64 {
    c.as_ref().map_or(0, |c| c.acc.chunk_count)
}

/// Copy mean auto and cross spectra; each output holds `capacity` doubles.
///
/// # Safety
/// `c` must be a live handle; each output must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_correlator_read(
    c: *const HetcorrCorrelator,
    auto_a: *mut f64,
    auto_b: *mut f64,
    cross_re: *mut f64,
    cross_im: *mut f64,
    capacity: usize,
) -> HetcorrStatus {
    guard(|| {
        let Some(c) = c.as_ref() else {
            return Ok(fail(HetcorrStatus::NullPointer, "null correlator"));
        };
        if [auto_a, auto_b, cross_re, cross_im]
            .iter()
            .any(|p| p.is_null())
        {
            return Ok(fail(HetcorrStatus::NullPointer, "null output pointer"));
        }
        let n = c.acc.n_channels();
        if capacity < n {
            return Ok(fail(
                HetcorrStatus::BufferTooSmall,
                "capacity below channel count",
            ));
        }
        let aa = c.acc.mean_auto_a()?;
        let ab = c.acc.mean_auto_b()?;
        let x = c.acc.mean_cross()?;
        for k in 0..n {
            *auto_a.add(k) = aa[k];
            *auto_b.add(k) = ab[k];
            *cross_re.add(k) = x[k].re;
            *cross_im.add(k) = x[k].im;
        }
        Ok(HetcorrStatus::Ok)
    })
}

/// # Safety
/// `c` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hetcorr_correlator_free(c: *mut HetcorrCorrelator) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
