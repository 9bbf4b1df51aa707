use std::ffi::{CStr, CString};
use std::ptr;

use sensetrack_ffi::*;

fn last_error() -> String {
    let p = st_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(kind: &str) -> *mut StScenario {
    let k = CString::new(kind).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { st_scenario_builtin(k.as_ptr(), &mut s) }, StStatus::Ok);
    assert!(!s.is_null());
    s
}

const DOC: &str = r#"
lambda = 0.0
horizon = 3

[chain]
columns = [[0.9, 0.1], [0.2, 0.8]]
prior = [0.5, 0.5]

[[controls]]
cost = 0.0
means = [[0.0], [10.0]]
covariances = [[[1.0]], [[1.0]]]
"#;

#[test]
fn scenario_roundtrip_and_counts() {
    let text = CString::new(DOC).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { st_scenario_from_toml(text.as_ptr(), &mut s) }, StStatus::Ok);
    let (mut n, mut m) = (0usize, 0usize);
    unsafe {
        assert_eq!(st_scenario_num_states(s, &mut n), StStatus::Ok);
        assert_eq!(st_scenario_num_controls(s, &mut m), StStatus::Ok);
        st_scenario_free(s);
    }
    assert_eq!((n, m), (2, 1));
}

#[test]
fn kalman_update_matches_hand_value() {
    let text = CString::new(DOC).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { st_scenario_from_toml(text.as_ptr(), &mut s) }, StStatus::Ok);
    let p = [0.5, 0.5];
    let y = [0.0];
    let mut post = [0.0; 2];
    let st = unsafe { st_kalman_update(s, p.as_ptr(), 2, 0, y.as_ptr(), 1, post.as_mut_ptr()) };
    assert_eq!(st, StStatus::Ok);
    assert!((post[0] - (0.5 + 12.5 / 26.0)).abs() < 1e-12);
    unsafe { st_scenario_free(s) };
}

#[test]
fn validation_error_reports_invariant() {
    let bad = DOC.replace("[0.9, 0.1]", "[0.9, 0.2]");
    let text = CString::new(bad).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { st_scenario_from_toml(text.as_ptr(), &mut s) }, StStatus::Validation);
    assert!(s.is_null());
    assert!(last_error().contains("NonStochastic"), "{}", last_error());
}

#[test]
fn null_pointers_are_rejected() {
    let mut n = 0usize;
    assert_eq!(unsafe { st_scenario_num_states(ptr::null(), &mut n) }, StStatus::NullPointer);
    assert!(last_error().contains("scenario"));
    let s = builtin("crossing");
    assert_eq!(unsafe { st_scenario_num_states(s, ptr::null_mut()) }, StStatus::NullPointer);
    unsafe { st_scenario_free(s) };
    unsafe { st_scenario_free(ptr::null_mut()) };
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut s = ptr::null_mut();
    let st = unsafe { st_scenario_builtin(bytes.as_ptr() as *const std::ffi::c_char, &mut s) };
    assert_eq!(st, StStatus::InvalidString);
}

#[test]
fn lambda_out_of_range() {
    let s = builtin("crossing");
    assert_eq!(unsafe { st_scenario_set_lambda(s, 1.5) }, StStatus::Validation);
    assert_eq!(unsafe { st_scenario_set_lambda(s, 1.0) }, StStatus::Ok);
    let p = [0.3, 0.7];
    let mut c = 0.0;
    assert_eq!(unsafe { st_current_cost(s, p.as_ptr(), 2, 1, &mut c) }, StStatus::Ok);
    assert_eq!(c, 0.5);
    unsafe { st_scenario_free(s) };
}

#[test]
fn myopic_and_dp_agree_at_last_stage() {
    let s = builtin("crossing");
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { st_dp_solve(s, 200, &mut sol) }, StStatus::Ok);
    for &p0 in &[0.1, 0.25, 0.5, 0.9] {
        let p = [p0, 1.0 - p0];
        let (mut a, mut b) = (0usize, 0usize);
        assert_eq!(unsafe { st_myopic_decide(s, p.as_ptr(), 2, 5, &mut a) }, StStatus::Ok);
        assert_eq!(unsafe { st_dp_policy(sol, 5, p.as_ptr(), 2, &mut b) }, StStatus::Ok);
        assert_eq!(a, b, "p0 = {p0}");
        let mut v = 0.0;
        assert_eq!(unsafe { st_dp_value(sol, 1, p.as_ptr(), 2, &mut v) }, StStatus::Ok);
        assert!(v > 0.0 && v <= 5.0);
    }
    let p = [0.5, 0.5];
    let mut u = 0usize;
    assert_eq!(unsafe { st_dp_policy(sol, 6, p.as_ptr(), 2, &mut u) }, StStatus::Validation);
    assert!(last_error().contains("StageOutOfRange"));
    unsafe {
        st_dp_free(sol);
        st_scenario_free(s);
    }
}

#[test]
fn monte_carlo_is_deterministic() {
    let s = builtin("crossing");
    let name = CString::new("myopic").unwrap();
    let mut a = StMetrics::default();
    let mut b = StMetrics::default();
    assert_eq!(unsafe { st_monte_carlo(s, name.as_ptr(), 200, 9, &mut a) }, StStatus::Ok);
    assert_eq!(unsafe { st_monte_carlo(s, name.as_ptr(), 200, 9, &mut b) }, StStatus::Ok);
    assert_eq!(a.amse.to_bits(), b.amse.to_bits());
    assert_eq!(a.runs, 200);
    assert!((0.0..=1.0).contains(&a.adp));
    let bad = CString::new("nope").unwrap();
    assert_eq!(unsafe { st_monte_carlo(s, bad.as_ptr(), 10, 9, &mut a) }, StStatus::Validation);
    unsafe { st_scenario_free(s) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sensetrack.h")).unwrap();
    for sym in [
        "st_last_error",
        "st_scenario_from_toml",
        "st_scenario_builtin",
        "st_scenario_free",
        "st_scenario_num_states",
        "st_scenario_num_controls",
        "st_scenario_set_lambda",
        "st_current_cost",
        "st_kalman_update",
        "st_myopic_decide",
        "st_dp_solve",
        "st_dp_free",
        "st_dp_policy",
        "st_dp_value",
        "st_monte_carlo",
        "typedef struct StScenario StScenario",
        "ST_STATUS_OK = 0",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(&src, "#include \"sensetrack.h\"\nint main(void) { StStatus s = ST_STATUS_OK; return (int)s; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
