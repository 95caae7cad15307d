use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use twoscale_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        ts_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn mittag_leffler_value_and_domain_error() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ts_mittag_leffler(0.5, 1.0, &mut v), TsStatus::Ok);
        assert!((v - 0.427_583_576_155_807).abs() < 1e-12);
        assert_eq!(ts_last_error_message(ptr::null_mut(), 0), 0);

        assert_eq!(ts_mittag_leffler(1.5, 1.0, &mut v), TsStatus::InvalidInput);
        assert!(last_error().contains("alpha"));
        assert_eq!(
            ts_mittag_leffler(0.5, 1.0, ptr::null_mut()),
            TsStatus::NullPointer
        );
    }
}

#[test]
fn error_message_truncates() {
    unsafe {
        ts_mittag_leffler(2.0, 1.0, ptr::null_mut());
        let full = ts_last_error_message(ptr::null_mut(), 0);
        let mut buf = [1 as std::ffi::c_char; 5];
        assert_eq!(ts_last_error_message(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(buf[4], 0);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 4);
    }
}

#[test]
fn l1_weights_match_core() {
    let (alpha, tau, m) = (0.6, 1.0 / 32.0, 32);
    let mut b = vec![0.0; m];
    let mut d = vec![0.0; m];
    unsafe {
        assert_eq!(
            ts_l1_weights(alpha, tau, m, b.as_mut_ptr(), d.as_mut_ptr(), m),
            TsStatus::Ok
        );
    }
    let w = twoscale::l1_weights(alpha, tau, m).unwrap();
    assert_eq!(&b[..], &w.b[..m]);
    assert_eq!(&d[..], &w.d[..m]);

    let mut short = vec![0.0; m - 1];
    unsafe {
        let st = ts_l1_weights(alpha, tau, m, short.as_mut_ptr(), ptr::null_mut(), m - 1);
        assert_eq!(st, TsStatus::BufferTooSmall);
    }
}

#[test]
fn solve_through_handles() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            ts_problem_preset(TsPreset::A, 0.5, 0.4, &mut p),
            TsStatus::Ok
        );
        let mut t = ptr::null_mut();
        assert_eq!(ts_solve(p, 16, 8, 1, &mut t), TsStatus::Ok);

        let (mut count, mut dofs) = (0, 0);
        assert_eq!(ts_trajectory_snapshot_count(t, &mut count), TsStatus::Ok);
        assert_eq!(ts_trajectory_dofs(t, &mut dofs), TsStatus::Ok);
        assert_eq!((count, dofs), (9, 15));

        let expect = twoscale::solve(
            &twoscale::preset_a(0.5, 0.4).unwrap(),
            16,
            8,
            &Default::default(),
        )
        .unwrap();
        let mut vals = vec![0.0; dofs];
        let mut time = -1.0;
        assert_eq!(
            ts_trajectory_snapshot(t, 8, &mut time, vals.as_mut_ptr(), dofs),
            TsStatus::Ok
        );
        assert_eq!(time, 1.0);
        assert_eq!(&vals[..], expect.final_state().coeffs());

        assert_eq!(
            ts_trajectory_snapshot(t, 9, &mut time, vals.as_mut_ptr(), dofs),
            TsStatus::OutOfRange
        );
        assert_eq!(
            ts_trajectory_snapshot(t, 0, &mut time, vals.as_mut_ptr(), dofs - 1),
            TsStatus::BufferTooSmall
        );

        ts_trajectory_free(t);
        ts_problem_free(p);
    }
}

#[test]
fn bad_inputs_map_to_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            ts_problem_preset(TsPreset::B, 1.2, 0.4, &mut p),
            TsStatus::InvalidInput
        );
        assert!(p.is_null());
        let mut t = ptr::null_mut();
        assert_eq!(
            ts_solve(ptr::null(), 8, 8, 0, &mut t),
            TsStatus::NullPointer
        );
        assert!(last_error().contains("problem"));

        assert_eq!(
            ts_problem_preset(TsPreset::B, 0.5, 0.4, &mut p),
            TsStatus::Ok
        );
        assert_eq!(ts_solve(p, 0, 8, 0, &mut t), TsStatus::InvalidInput);
        ts_problem_free(p);

        let mut rows = 0;
        assert_eq!(ts_table_rows(9, &mut rows), TsStatus::InvalidInput);
        assert_eq!(ts_table_rows(4, &mut rows), TsStatus::Ok);
        assert_eq!(rows, 4);

        ts_problem_free(ptr::null_mut());
        ts_trajectory_free(ptr::null_mut());
        ts_report_free(ptr::null_mut());
    }
}

#[test]
fn study_report_accessors() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            ts_problem_preset(TsPreset::A, 0.4, 0.3, &mut p),
            TsStatus::Ok
        );
        let levels = [8usize, 16, 32, 64];
        let mut r = ptr::null_mut();
        let st = ts_run_study(
            p,
            TsVary::Spatial,
            levels.as_ptr(),
            levels.len(),
            64,
            f64::NAN,
            &mut r,
        );
        assert_eq!(st, TsStatus::Ok, "{}", last_error());

        let (mut alpha, mut s, mut len) = (0.0, 0.0, 0);
        assert_eq!(ts_report_orders(r, &mut alpha, &mut s), TsStatus::Ok);
        assert_eq!((alpha, s), (0.4, 0.3));
        assert_eq!(ts_report_len(r, &mut len), TsStatus::Ok);
        assert_eq!(len, 3);
        let mut errors = [0.0; 3];
        let mut rates = [0.0; 2];
        assert_eq!(ts_report_errors(r, errors.as_mut_ptr(), 3), TsStatus::Ok);
        assert_eq!(ts_report_rates(r, rates.as_mut_ptr(), 2), TsStatus::Ok);
        assert!(errors.iter().all(|e| e.is_finite() && *e > 0.0));
        for (k, rate) in rates.iter().enumerate() {
            assert!((rate - (errors[k] / errors[k + 1]).log2()).abs() < 1e-14);
        }
        ts_report_free(r);

        let bad = [8usize, 12];
        let st = ts_run_study(p, TsVary::Spatial, bad.as_ptr(), 2, 64, f64::NAN, &mut r);
        assert_eq!(st, TsStatus::InvalidInput);
        ts_problem_free(p);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/twoscale.h");
    assert!(header.exists(), "header not generated");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "ts_solve",
        "ts_run_table_row",
        "ts_last_error_message",
        "TS_STATUS_OK",
        "typedef struct TsProblem",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ TsProblem *p = 0; double v; \
             if (ts_mittag_leffler(0.5, 1.0, &v) != TS_STATUS_OK) return 1; ts_problem_free(p); return 0; }}\n",
            header.display()
        ),
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(status.success());
}
