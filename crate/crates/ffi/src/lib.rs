//! C interface to `ydof`.
//!
//! Handles are opaque and owned by the caller: every `*_new` has a matching
//! `*_free`. Every fallible call returns a [`YdofStatus`]; on failure the
//! message is available from [`ydof_last_error`] on the same thread. Strings
//! returned through `char **` are released with [`ydof_string_free`].
//!
//! DoF tuples cross the boundary as two `int64_t[6]` arrays, numerators and
//! denominators, in the order `d12, d13, d21, d23, d31, d32`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ydof::linalg::Tolerances;
use ydof::planner::{self, CaseLabel, PatternPlan};
use ydof::region::{self, HalfspaceSystem, VertexSet};
use ydof::simulate::{self, Mode, SimOptions, SymbolSource};
use ydof::{AntennaConfig, DofTuple, Error, Q};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YdofStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed antenna counts, tuple or option.
    InvalidArgument = 2,
    /// The tuple lies outside the DoF region.
    NotInRegion = 3,
    /// The construction does not apply to this tuple or channel draw.
    Infeasible = 4,
    /// A rank or conditioning check failed.
    Numerical = 5,
    /// An index was past the end.
    OutOfRange = 6,
    /// Any other failure, including a caught panic.
    Internal = 7,
}

/// A DoF region with its vertices.
pub struct YdofRegion {
    config: AntennaConfig,
    system: HalfspaceSystem,
    vertices: VertexSet,
}

/// A pattern plan for one tuple.
pub struct YdofPlan {
    plan: PatternPlan,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct YdofPlanInfo {
    /// 1 or 2.
    pub case_label: u32,
    /// Symbol-extension factor.
    pub t: u32,
    /// Relay dimensions used over the `t` slots.
    pub j: u64,
    pub gamma: u64,
    pub total_streams: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct YdofMonteCarlo {
    pub trials: usize,
    pub successes: usize,
    /// Largest recovery error over the trials that produced one.
    pub max_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> YdofStatus {
    match e {
        Error::InvalidConfig(_) | Error::InvalidTuple(_) | Error::InvalidObjective(_) | Error::DegenerateObjective | Error::Usage(_) => {
            YdofStatus::InvalidArgument
        }
        Error::NotInRegion(_) => YdofStatus::NotInRegion,
        Error::PlanInfeasible(_) | Error::RelayDimension { .. } | Error::AlignmentInfeasible(_) => YdofStatus::Infeasible,
        Error::RankCondition(_)
        | Error::RelayMacSingular { .. }
        | Error::RelayBcSingular { .. }
        | Error::DegenerateNoise(_) => YdofStatus::Numerical,
        _ => YdofStatus::Internal,
    }
}

/// Runs `f`, records any error or panic and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), (YdofStatus, String)>) -> YdofStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            YdofStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            YdofStatus::Internal
        }
    }
}

fn lib(e: Error) -> (YdofStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (YdofStatus, String) {
    (YdofStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (YdofStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (YdofStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn read_tuple(num: *const i64, den: *const i64) -> Result<DofTuple, (YdofStatus, String)> {
    if num.is_null() || den.is_null() {
        return Err(null("tuple array"));
    }
    let num = std::slice::from_raw_parts(num, 6);
    let den = std::slice::from_raw_parts(den, 6);
    let mut q = [Q::from_integer(0); 6];
    for i in 0..6 {
        if den[i] <= 0 {
            return Err((YdofStatus::InvalidArgument, format!("denominator {} must be positive", den[i])));
        }
        q[i] = Q::new(num[i], den[i]);
    }
    DofTuple::new(q).map_err(lib)
}

fn json_out<T: serde::Serialize + ?Sized>(value: &T, dst: &mut *mut c_char) -> Result<(), (YdofStatus, String)> {
    let s = serde_json::to_string(value).map_err(|e| (YdofStatus::Internal, e.to_string()))?;
    *dst = CString::new(s).map_err(|e| (YdofStatus::Internal, e.to_string()))?.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ydof_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ydof_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the region for antenna counts `m1, m2, m3` and relay antennas `n`.
///
/// # Safety
/// `out_region` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_region_new(m1: u32, m2: u32, m3: u32, n: u32, out_region: *mut *mut YdofRegion) -> YdofStatus {
    guard(|| {
        let dst = out(out_region, "out_region")?;
        let config = AntennaConfig::new(m1, m2, m3, n).map_err(lib)?;
        let system = region::build_region(&config);
        let vertices = region::enumerate_vertices(&system);
        *dst = Box::into_raw(Box::new(YdofRegion { config, system, vertices }));
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`ydof_region_new`] and not have been freed. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ydof_region_free(r: *mut YdofRegion) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Exact membership test.
///
/// # Safety
/// `num` and `den` must point to six values each; `inside` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_region_contains(
    r: *const YdofRegion,
    num: *const i64,
    den: *const i64,
    inside: *mut bool,
) -> YdofStatus {
    guard(|| {
        let r = deref(r, "region")?;
        let dst = out(inside, "inside")?;
        let d = read_tuple(num, den)?;
        *dst = region::contains(&r.system, &d);
        Ok(())
    })
}

/// # Safety
/// `r` must be a live region; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_region_vertex_count(r: *const YdofRegion, count: *mut usize) -> YdofStatus {
    guard(|| {
        *out(count, "count")? = deref(r, "region")?.vertices.len();
        Ok(())
    })
}

/// Writes vertex `index` as numerators and denominators.
///
/// # Safety
/// `num` and `den` must each have room for six values.
#[no_mangle]
pub unsafe extern "C" fn ydof_region_vertex(r: *const YdofRegion, index: usize, num: *mut i64, den: *mut i64) -> YdofStatus {
    guard(|| {
        let r = deref(r, "region")?;
        if num.is_null() || den.is_null() {
            return Err(null("vertex array"));
        }
        let v = r.vertices.vertices.get(index).ok_or_else(|| {
            (YdofStatus::OutOfRange, format!("vertex {index} of {}", r.vertices.len()))
        })?;
        let num = std::slice::from_raw_parts_mut(num, 6);
        let den = std::slice::from_raw_parts_mut(den, 6);
        for (i, q) in v.coords.0.iter().enumerate() {
            num[i] = *q.numer();
            den[i] = *q.denom();
        }
        Ok(())
    })
}

/// Halfspaces and vertices as JSON. Release with [`ydof_string_free`].
///
/// # Safety
/// `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_region_to_json(r: *const YdofRegion, json: *mut *mut c_char) -> YdofStatus {
    guard(|| {
        let r = deref(r, "region")?;
        let dst = out(json, "json")?;
        let rep = ydof::report::region_report(&r.config, true).map_err(lib)?;
        json_out(&rep, dst)
    })
}

/// Plans a tuple of the region. Fails with `YDOF_STATUS_NOT_IN_REGION` outside it and
/// `YDOF_STATUS_INFEASIBLE` when the construction's conditions do not hold.
///
/// # Safety
/// `r` must be a live region, `num`/`den` six values each, `out_plan`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_plan_new(
    r: *const YdofRegion,
    num: *const i64,
    den: *const i64,
    out_plan: *mut *mut YdofPlan,
) -> YdofStatus {
    guard(|| {
        let r = deref(r, "region")?;
        let dst = out(out_plan, "out_plan")?;
        let d = read_tuple(num, den)?;
        let plan = planner::plan(&d, &r.config).map_err(lib)?;
        planner::feasibility_report(&plan).into_result().map_err(lib)?;
        *dst = Box::into_raw(Box::new(YdofPlan { plan }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`ydof_plan_new`] and not have been freed. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ydof_plan_free(p: *mut YdofPlan) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live plan; `info` writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_plan_info(p: *const YdofPlan, info: *mut YdofPlanInfo) -> YdofStatus {
    guard(|| {
        let plan = &deref(p, "plan")?.plan;
        *out(info, "info")? = YdofPlanInfo {
            case_label: match plan.case {
                CaseLabel::I => 1,
                CaseLabel::II => 2,
            },
            t: plan.t,
            j: plan.j,
            gamma: plan.gamma,
            total_streams: plan.total_streams(),
        };
        Ok(())
    })
}

/// The full plan as JSON. Release with [`ydof_string_free`].
///
/// # Safety
/// `p` must be a live plan; `json` writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_plan_to_json(p: *const YdofPlan, json: *mut *mut c_char) -> YdofStatus {
    guard(|| {
        let plan = &deref(p, "plan")?.plan;
        json_out(plan, out(json, "json")?)
    })
}

/// One noiseless trial with channel seed `seed`: writes the largest relative
/// symbol error. A trial that synthesizes but misses the default tolerance
/// still returns `YDOF_STATUS_OK`; compare `max_error` yourself.
///
/// # Safety
/// `p` must be a live plan; `max_error` writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_simulate_noiseless(p: *const YdofPlan, seed: u64, max_error: *mut f64) -> YdofStatus {
    guard(|| {
        let plan = &deref(p, "plan")?.plan;
        let dst = out(max_error, "max_error")?;
        let rep = simulate::run_trial(plan, seed, Mode::Noiseless, &SimOptions::default()).map_err(lib)?;
        *dst = rep.recovery.map_or(f64::NAN, |r| r.max_error);
        Ok(())
    })
}

/// Noiseless trials with seeds `seed_base + i`.
///
/// # Safety
/// `p` must be a live plan; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_monte_carlo_noiseless(
    p: *const YdofPlan,
    trials: usize,
    seed_base: u64,
    result: *mut YdofMonteCarlo,
) -> YdofStatus {
    guard(|| {
        let plan = &deref(p, "plan")?.plan;
        let dst = out(result, "result")?;
        let opts = SimOptions { source: SymbolSource::Gaussian, ..SimOptions::default() };
        let rep = simulate::monte_carlo(&plan.config, &plan.dof, trials, seed_base, Mode::Noiseless, &opts).map_err(lib)?;
        *dst = YdofMonteCarlo { trials: rep.trials, successes: rep.successes, max_error: rep.max_error.unwrap_or(f64::NAN) };
        Ok(())
    })
}

/// Sum-rate slope against `log2 P` for one channel seed over a power grid
/// in dB (at least two points).
///
/// # Safety
/// `grid_db` must point to `len` values; `slope` writable.
#[no_mangle]
pub unsafe extern "C" fn ydof_rate_slope(
    p: *const YdofPlan,
    seed: u64,
    grid_db: *const f64,
    len: usize,
    slope: *mut f64,
) -> YdofStatus {
    guard(|| {
        let plan = &deref(p, "plan")?.plan;
        let dst = out(slope, "slope")?;
        if grid_db.is_null() {
            return Err(null("grid_db"));
        }
        let grid = std::slice::from_raw_parts(grid_db, len).to_vec();
        if grid.len() < 2 || grid.iter().any(|x| !x.is_finite()) {
            return Err((YdofStatus::InvalidArgument, "power grid needs at least 2 finite points".into()));
        }
        let opts = SimOptions { power_grid_db: grid, tolerances: Tolerances::default(), ..SimOptions::default() };
        let rep = simulate::run_trial(plan, seed, Mode::Rates, &opts).map_err(lib)?;
        *dst = rep.rates.map_or(f64::NAN, |c| c.slope);
        Ok(())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ydof_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
