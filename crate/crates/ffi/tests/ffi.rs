use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hetcorr_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        hetcorr_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn closed_forms_match_library() {
    let mut g = 0.0;
    let s =
        unsafe { hetcorr_optimum_gain_db(0.4, 50.0, 0.75 * 1.257, 1.9e14, 1.6e9, 1e-3, &mut g) };
    assert_eq!(s, HetcorrStatus::Ok);
    assert!((g - 85.5).abs() < 0.1);
    let mut p = 0.0;
    assert_eq!(
        unsafe { hetcorr_clip_probability(1.5, &mut p) },
        HetcorrStatus::Ok
    );
    assert!((p - 0.3247).abs() < 1e-4);
    let mut t = 0.0;
    assert_eq!(
        unsafe { hetcorr_t_rec_from_power(135e-15, 2.0, 6.25e6, &mut t) },
        HetcorrStatus::Ok
    );
    assert!((t / 1565.0 - 1.0).abs() < 0.01);
    assert!((hetcorr_fano_balanced(1.0, 0.5, 10.0) - 1.0).abs() < 1e-12);
    assert!(hetcorr_lo_correlation(1.0, 0.5, 0.5, 10.0).abs() < 1e-12);
    assert!(hetcorr_quantum_temperature(1.9267e14) > 9000.0);
}

#[test]
fn errors_set_status_and_message() {
    let mut p = 0.0;
    assert_eq!(
        unsafe { hetcorr_clip_probability(-1.0, &mut p) },
        HetcorrStatus::InvalidArgument
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { hetcorr_clip_probability(1.0, ptr::null_mut()) },
        HetcorrStatus::NullPointer
    );

    let bad = CString::new("seed = 1\nduration_s = -1").unwrap();
    let mut sc = ptr::null_mut();
    let s = unsafe { hetcorr_scenario_from_toml(bad.as_ptr(), &mut sc) };
    assert_eq!(s, HetcorrStatus::Parse);
    assert!(sc.is_null());

    let name = CString::new("no-such-preset").unwrap();
    assert_eq!(
        unsafe { hetcorr_scenario_from_preset(name.as_ptr(), &mut sc) },
        HetcorrStatus::InvalidArgument
    );
    assert!(last_error().contains("power-sweep"));

    let mut ok = 0.0;
    assert_eq!(
        unsafe { hetcorr_clip_probability(2.0, &mut ok) },
        HetcorrStatus::Ok
    );
    assert!(last_error().is_empty());
}

#[test]
fn allan_reports_capacity() {
    let xs: Vec<f64> = (0..256)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut taus = [0.0; 2];
    let mut vars = [0.0; 2];
    let mut n = 0usize;
    let s = unsafe {
        hetcorr_allan_variance(
            xs.as_ptr(),
            xs.len(),
            0.5,
            false,
            taus.as_mut_ptr(),
            vars.as_mut_ptr(),
            2,
            &mut n,
        )
    };
    assert_eq!(s, HetcorrStatus::BufferTooSmall);
    let mut taus = vec![0.0; n];
    let mut vars = vec![0.0; n];
    let s = unsafe {
        hetcorr_allan_variance(
            xs.as_ptr(),
            xs.len(),
            0.5,
            false,
            taus.as_mut_ptr(),
            vars.as_mut_ptr(),
            n,
            &mut n,
        )
    };
    assert_eq!(s, HetcorrStatus::Ok);
    assert_eq!(taus[0], 0.5);
    assert!((vars[0] - 2.0).abs() < 1e-12);
}

#[test]
fn scenario_run_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let name = CString::new("power-sweep").unwrap();
    let mut sc = ptr::null_mut();
    unsafe {
        assert_eq!(
            hetcorr_scenario_from_preset(name.as_ptr(), &mut sc),
            HetcorrStatus::Ok
        );
        assert_eq!(hetcorr_scenario_set_duration(sc, 0.02), HetcorrStatus::Ok);
        assert_eq!(
            hetcorr_scenario_set_duration(sc, -1.0),
            HetcorrStatus::Validation
        );
        assert_eq!(hetcorr_scenario_set_seed(sc, 3), HetcorrStatus::Ok);
        let out = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut res = ptr::null_mut();
        assert_eq!(
            hetcorr_scenario_run(sc, out.as_ptr(), 1, &mut res),
            HetcorrStatus::Ok,
            "{}",
            last_error()
        );
        let (mut ac, mut cc) = (0.0, 0.0);
        assert_eq!(
            hetcorr_result_t_rec(res, &mut ac, &mut cc),
            HetcorrStatus::Ok
        );
        assert!(ac > cc && cc > 0.0);
        let mut c = 0.0;
        assert_eq!(
            hetcorr_result_zero_signal_c_lo(res, &mut c),
            HetcorrStatus::Ok
        );
        assert!(c > 0.0 && c < 0.2);
        let mut needed = 0usize;
        assert_eq!(
            hetcorr_result_summary_json(res, ptr::null_mut(), 0, &mut needed),
            HetcorrStatus::BufferTooSmall
        );
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            hetcorr_result_summary_json(res, buf.as_mut_ptr(), needed, &mut needed),
            HetcorrStatus::Ok
        );
        let json = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(json.contains("\"response\""));
        hetcorr_result_free(res);
        hetcorr_scenario_free(sc);
    }
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn streaming_correlator_matches_batch() {
    let n = 64;
    let a: Vec<f64> = (0..n * 5)
        .map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0)
        .collect();
    let b: Vec<f64> = (0..n * 5)
        .map(|i| ((i * 53 % 97) as f64 - 48.0) / 48.0)
        .collect();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(hetcorr_correlator_new(n, 1e6, &mut c), HetcorrStatus::Ok);
        // Uneven pushes; the remainder is carried over.
        assert_eq!(
            hetcorr_correlator_push(c, a.as_ptr(), b.as_ptr(), 100),
            HetcorrStatus::Ok
        );
        assert_eq!(
            hetcorr_correlator_push(c, a[100..].as_ptr(), b[100..].as_ptr(), a.len() - 100),
            HetcorrStatus::Ok
        );
        assert_eq!(hetcorr_correlator_chunks(c), 5);
        let ch = hetcorr_correlator_channels(c);
        assert_eq!(ch, n / 2);
        let mut out = vec![vec![0.0; ch]; 4];
        let [aa, ab, re, im] = &mut out[..] else {
            unreachable!()
        };
        assert_eq!(
            hetcorr_correlator_read(
                c,
                aa.as_mut_ptr(),
                ab.as_mut_ptr(),
                re.as_mut_ptr(),
                im.as_mut_ptr(),
                ch
            ),
            HetcorrStatus::Ok
        );
        hetcorr_correlator_free(c);

        let spec = hetcorr::correlator::ChunkSpec::new(n).unwrap();
        let mut acc = hetcorr::correlator::SpectrumAccumulator::for_spec(spec, 1e6);
        hetcorr::correlator::Channelizer::new(spec)
            .unwrap()
            .accumulate_samples(&a, &b, &mut acc)
            .unwrap();
        let want = acc.mean_cross().unwrap();
        for k in 0..ch {
            assert_eq!(re[k], want[k].re);
            assert_eq!(im[k], want[k].im);
        }
        assert_eq!(*aa, acc.mean_auto_a().unwrap());
    }
    assert_eq!(
        unsafe { hetcorr_correlator_new(100, 1e6, &mut c) },
        HetcorrStatus::Validation
    );
}

#[test]
fn header_declares_api_and_compiles_as_c() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/hetcorr.h")).unwrap();
    for f in [
        "hetcorr_scenario_run",
        "hetcorr_correlator_push",
        "hetcorr_allan_variance",
        "HETCORR_STATUS_OK",
    ] {
        assert!(header.contains(f), "{f}");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .status()
        .expect("C compiler");
    assert!(status.success());
}

#[test]
fn version_is_static_string() {
    let v = unsafe { CStr::from_ptr(hetcorr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
