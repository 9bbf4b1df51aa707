//! C ABI over `sensetrack`.
//!
//! Every function returns an [`StStatus`]; on failure the message is available from
//! [`st_last_error`] on the same thread. Handles are opaque and released with their `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use nalgebra::DVector;
use sensetrack::config::parse_scenario;
use sensetrack::cost::scenario_cost;
use sensetrack::dp::{backward_induction, build_grid, DpOptions, DpSolution};
use sensetrack::estimator::{kalman_update, Belief};
use sensetrack::model::Scenario;
use sensetrack::sim::{default_scenario, monte_carlo, Overrides, ScenarioKind};
use sensetrack::strategy::{decide, CeWwlbConfig, StrategySpec};
use sensetrack::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    Validation = 3,
    Numeric = 4,
    Panic = 5,
}

/// Opaque scenario handle.
pub struct StScenario(Scenario);

/// Opaque dynamic-programming solution handle.
pub struct StDpSolution(DpSolution);

/// Monte Carlo summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StMetrics {
    pub lambda: f64,
    pub amse: f64,
    pub amse_ci: f64,
    pub adp: f64,
    pub adp_ci: f64,
    pub aec: f64,
    pub aec_ci: f64,
    pub runs: usize,
    pub horizon: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null(&'static str),
    Utf8,
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            StStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string is not valid UTF-8".into());
            StStatus::InvalidString
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(format!("{} ({})", e, e.invariant()));
            if e.exit_code() == 2 {
                StStatus::Numeric
            } else {
                StStatus::Validation
            }
        }
        Err(_) => {
            set_error("internal panic".into());
            StStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Fail::Utf8)
}

unsafe fn as_slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Message of the last failure on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn st_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a TOML scenario document.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn st_scenario_from_toml(text: *const c_char, out: *mut *mut StScenario) -> StStatus {
    guard(|| {
        let s = parse_scenario(unsafe { as_str(text, "text") }?)?;
        unsafe { write(out, Box::into_raw(Box::new(StScenario(s))), "out") }
    })
}

/// Built-in scenario: `two_state_scalar`, `crossing`, `two_sensor` or `body_sensing_like`.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn st_scenario_builtin(kind: *const c_char, out: *mut *mut StScenario) -> StStatus {
    guard(|| {
        let kind = ScenarioKind::parse(unsafe { as_str(kind, "kind") }?)?;
        let s = default_scenario(kind, Overrides::default())?;
        unsafe { write(out, Box::into_raw(Box::new(StScenario(s))), "out") }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn st_scenario_free(s: *mut StScenario) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_scenario_num_states(s: *const StScenario, out: *mut usize) -> StStatus {
    guard(|| unsafe { write(out, as_ref(s, "scenario")?.0.n(), "out") })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_scenario_num_controls(s: *const StScenario, out: *mut usize) -> StStatus {
    guard(|| unsafe { write(out, as_ref(s, "scenario")?.0.num_controls(), "out") })
}

/// Replace the trade-off weight.
///
/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn st_scenario_set_lambda(s: *mut StScenario, lambda: f64) -> StStatus {
    guard(|| {
        let h = unsafe { s.as_mut() }.ok_or(Fail::Null("scenario"))?;
        h.0 = h.0.with_lambda(lambda)?;
        Ok(())
    })
}

/// Current cost of `control` at predicted belief `p[0..n]`.
///
/// # Safety
/// `p` must point to `n` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_current_cost(
    s: *const StScenario,
    p: *const f64,
    n: usize,
    control: usize,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let sc = &unsafe { as_ref(s, "scenario") }?.0;
        let b = Belief::from_slice(unsafe { as_slice(p, n, "p") }?)?;
        unsafe { write(out, scenario_cost(sc, &b, control)?, "out") }
    })
}

/// One Kalman-like correction: `posterior[0..n]` from prediction `p[0..n]` and observation `y[0..d]`.
///
/// # Safety
/// Arrays must have the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn st_kalman_update(
    s: *const StScenario,
    p: *const f64,
    n: usize,
    control: usize,
    y: *const f64,
    d: usize,
    posterior: *mut f64,
) -> StStatus {
    guard(|| {
        let sc = &unsafe { as_ref(s, "scenario") }?.0;
        let b = Belief::from_slice(unsafe { as_slice(p, n, "p") }?)?;
        let y = DVector::from_column_slice(unsafe { as_slice(y, d, "y") }?);
        let fs = kalman_update(&b, sc.kernel_set(control)?, &y)?;
        if posterior.is_null() {
            return Err(Fail::Null("posterior"));
        }
        let out = unsafe { std::slice::from_raw_parts_mut(posterior, n) };
        out.copy_from_slice(fs.posterior.as_slice());
        Ok(())
    })
}

/// Myopic control at predicted belief `p[0..n]` for `stage ∈ [1, L]`.
///
/// # Safety
/// `p` must point to `n` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_myopic_decide(
    s: *const StScenario,
    p: *const f64,
    n: usize,
    stage: usize,
    out: *mut usize,
) -> StStatus {
    guard(|| {
        let sc = &unsafe { as_ref(s, "scenario") }?.0;
        let b = Belief::from_slice(unsafe { as_slice(p, n, "p") }?)?;
        let strategy = sensetrack::strategy::StrategyKind::myopic(sc);
        unsafe { write(out, decide(&strategy, &b, stage, sc, None)?, "out") }
    })
}

/// Backward induction on a grid of the given resolution with default quadrature.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_dp_solve(s: *const StScenario, resolution: usize, out: *mut *mut StDpSolution) -> StStatus {
    guard(|| {
        let sc = &unsafe { as_ref(s, "scenario") }?.0;
        let grid = Arc::new(build_grid(sc.n(), resolution)?);
        let sol = backward_induction(sc, grid, &DpOptions::default())?;
        unsafe { write(out, Box::into_raw(Box::new(StDpSolution(sol))), "out") }
    })
}

/// # Safety
/// `sol` must come from [`st_dp_solve`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn st_dp_free(sol: *mut StDpSolution) {
    if !sol.is_null() {
        drop(unsafe { Box::from_raw(sol) });
    }
}

/// Policy (nearest grid point) at `p[0..n]` for `stage ∈ [1, L]`.
///
/// # Safety
/// `p` must point to `n` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_dp_policy(
    sol: *const StDpSolution,
    stage: usize,
    p: *const f64,
    n: usize,
    out: *mut usize,
) -> StStatus {
    guard(|| {
        let sol = &unsafe { as_ref(sol, "solution") }?.0;
        let p = Belief::from_slice(unsafe { as_slice(p, n, "p") }?)?;
        unsafe { write(out, sol.policy_at(stage, p.as_slice())?, "out") }
    })
}

/// Interpolated cost-to-go at `p[0..n]` for `stage ∈ [1, L]`.
///
/// # Safety
/// `p` must point to `n` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_dp_value(
    sol: *const StDpSolution,
    stage: usize,
    p: *const f64,
    n: usize,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let sol = &unsafe { as_ref(sol, "solution") }?.0;
        let p = Belief::from_slice(unsafe { as_slice(p, n, "p") }?)?;
        unsafe { write(out, sol.value_at(stage, p.as_slice())?, "out") }
    })
}

/// Monte Carlo metrics of a strategy (`dp`, `myopic`, `ce-wwlb`, `ea:<count>`, `fixed:<id>`).
///
/// # Safety
/// `strategy` must be a NUL-terminated string; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_monte_carlo(
    s: *const StScenario,
    strategy: *const c_char,
    runs: usize,
    seed: u64,
    out: *mut StMetrics,
) -> StStatus {
    guard(|| {
        let sc = &unsafe { as_ref(s, "scenario") }?.0;
        let spec = StrategySpec::parse(
            unsafe { as_str(strategy, "strategy") }?,
            1000,
            DpOptions::default(),
            CeWwlbConfig::default(),
        )?;
        let r = monte_carlo(sc, &spec.build(sc)?, runs, seed)?;
        let m = StMetrics {
            lambda: r.lambda,
            amse: r.amse,
            amse_ci: r.amse_ci,
            adp: r.adp,
            adp_ci: r.adp_ci,
            aec: r.aec,
            aec_ci: r.aec_ci,
            runs: r.runs,
            horizon: r.horizon,
        };
        unsafe { write(out, m, "out") }
    })
}
