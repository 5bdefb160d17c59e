//! C interface to `stackroute`.
//!
//! Instances and outcomes cross the boundary as opaque handles created and
//! destroyed by this library. Every fallible call returns an [`SrStatus`];
//! on failure, [`sr_last_error`] holds a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use stackroute::bounds::{poa_bound, Region};
use stackroute::equilibria::{SolveError, SolverConfig};
use stackroute::game::{play, GameError, StackelbergOutcome};
use stackroute::model::{min_asymmetry, GameInstance};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or an instance that fails validation.
    InvalidInstance = 3,
    /// Parameter outside its domain.
    InvalidArgument = 4,
    NotConverged = 5,
    /// Caller buffer is shorter than required.
    BufferTooSmall = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrRegion {
    /// Bound is infinite.
    A0 = 0,
    A1 = 1,
    LambdaStar = 2,
    LambdaPlus = 3,
}

impl From<Region> for SrRegion {
    fn from(r: Region) -> Self {
        match r {
            Region::A0 => SrRegion::A0,
            Region::A1 => SrRegion::A1,
            Region::LambdaStar => SrRegion::LambdaStar,
            Region::LambdaPlus => SrRegion::LambdaPlus,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrBound {
    /// `INFINITY` in region `A0`.
    pub value: f64,
    pub region: SrRegion,
}

/// Solver settings. Zero fields fall back to the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrSolverOptions {
    pub relative_gap_tol: f64,
    pub max_iterations: u64,
    pub multistart_count: u64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrSummary {
    pub alpha: f64,
    pub optimal_cost: f64,
    pub induced_cost: f64,
    pub empirical_poa: f64,
    pub wardrop_gap: f64,
    pub optimum_certified: bool,
    pub follower_converged: bool,
    pub repair_rounds: u32,
}

/// Per-link flow vectors stored in an outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrFlow {
    OptimalAutonomous = 0,
    OptimalHuman = 1,
    Leader = 2,
    Follower = 3,
}

/// Opaque network instance.
pub struct SrInstance(GameInstance);

/// Opaque result of one Stackelberg game.
pub struct SrOutcome(StackelbergOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (SrStatus, String)>) -> SrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SrStatus::Panic
        }
    }
}

fn null(what: &str) -> (SrStatus, String) {
    (SrStatus::NullPointer, format!("{what} is null"))
}

fn solve_status(e: &SolveError) -> SrStatus {
    match e {
        SolveError::FollowerNotConverged(_) | SolveError::OptimumNotConverged(_) => SrStatus::NotConverged,
        SolveError::Model(_) => SrStatus::InvalidInstance,
        _ => SrStatus::InvalidArgument,
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse and validate an instance from JSON text.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_instance_from_json(json: *const c_char, out: *mut *mut SrInstance) -> SrStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (SrStatus::InvalidUtf8, e.to_string()))?;
        let g = GameInstance::from_json(text).map_err(|e| (SrStatus::InvalidInstance, e.to_string()))?;
        *out = Box::into_raw(Box::new(SrInstance(g)));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from [`sr_instance_from_json`] and not be freed
/// already. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_instance_free(instance: *mut SrInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of links; 0 for NULL.
///
/// # Safety
/// `instance` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sr_instance_link_count(instance: *const SrInstance) -> size_t {
    instance.as_ref().map_or(0, |g| g.0.links().len())
}

/// Smallest `a / h` over all links.
///
/// # Safety
/// `instance` must be a live handle; `mu` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_instance_min_asymmetry(instance: *const SrInstance, mu: *mut f64) -> SrStatus {
    guard(|| {
        let g = instance.as_ref().ok_or_else(|| null("instance"))?;
        let mu = mu.as_mut().ok_or_else(|| null("mu"))?;
        *mu = min_asymmetry(&g.0).map_err(|e| (SrStatus::InvalidInstance, e.to_string()))?;
        Ok(())
    })
}

/// Worst-case price of anarchy under SCALE at autonomy fraction `alpha`
/// and asymmetry `mu`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_poa_bound(alpha: f64, mu: f64, out: *mut SrBound) -> SrStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = poa_bound(alpha, mu).map_err(|e| (SrStatus::InvalidArgument, e.to_string()))?;
        *out = SrBound {
            value: r.bound.value(),
            region: r.region.into(),
        };
        Ok(())
    })
}

/// Library defaults, for callers that want to tweak one field.
#[no_mangle]
pub extern "C" fn sr_solver_options_default() -> SrSolverOptions {
    let d = SolverConfig::default();
    SrSolverOptions {
        relative_gap_tol: d.relative_gap_tol,
        max_iterations: d.max_iterations as u64,
        multistart_count: d.multistart_count as u64,
        seed: d.seed,
    }
}

fn to_config(opts: Option<&SrSolverOptions>) -> SolverConfig {
    let mut c = SolverConfig::default();
    if let Some(o) = opts {
        if o.relative_gap_tol > 0.0 {
            c.relative_gap_tol = o.relative_gap_tol;
        }
        if o.max_iterations > 0 {
            c.max_iterations = o.max_iterations as usize;
        }
        if o.multistart_count > 0 {
            c.multistart_count = o.multistart_count as usize;
        }
        c.seed = o.seed;
    }
    c
}

/// Play the SCALE Stackelberg game. An outcome whose solvers stopped short
/// is still returned with `SR_STATUS_OK`; check the flags in its summary.
///
/// # Safety
/// `instance` must be a live handle, `opts` NULL or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_play(
    instance: *const SrInstance,
    opts: *const SrSolverOptions,
    out: *mut *mut SrOutcome,
) -> SrStatus {
    guard(|| {
        let g = instance.as_ref().ok_or_else(|| null("instance"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = to_config(opts.as_ref());
        let o = play(&g.0, &config).map_err(|e| {
            let status = match &e {
                GameError::Solve(s) => solve_status(s),
                GameError::Model(_) | GameError::HeterogeneousAlpha => SrStatus::InvalidInstance,
                GameError::AlphaOutOfRange(_) => SrStatus::InvalidArgument,
            };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(SrOutcome(o)));
        Ok(())
    })
}

/// # Safety
/// `outcome` must come from [`sr_play`] and not be freed already. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_outcome_free(outcome: *mut SrOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// # Safety
/// `outcome` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_outcome_summary(outcome: *const SrOutcome, out: *mut SrSummary) -> SrStatus {
    guard(|| {
        let o = &outcome.as_ref().ok_or_else(|| null("outcome"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = SrSummary {
            alpha: o.alpha,
            optimal_cost: o.optimal_cost,
            induced_cost: o.induced_cost,
            empirical_poa: o.empirical_poa,
            wardrop_gap: o.wardrop_gap,
            optimum_certified: o.optimum_certified,
            follower_converged: o.follower_converged,
            repair_rounds: o.repair_rounds as u32,
        };
        Ok(())
    })
}

/// Copy one per-link flow vector into `buf`, in instance link order.
/// `len` is the buffer capacity; the link count is written to `written`
/// when it is non-NULL, including on `SR_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// `outcome` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_outcome_link_flows(
    outcome: *const SrOutcome,
    which: SrFlow,
    buf: *mut f64,
    len: size_t,
    written: *mut size_t,
) -> SrStatus {
    guard(|| {
        let o = &outcome.as_ref().ok_or_else(|| null("outcome"))?.0;
        let v = match which {
            SrFlow::OptimalAutonomous => &o.optimal_flow.autonomous.link,
            SrFlow::OptimalHuman => &o.optimal_flow.human.link,
            SrFlow::Leader => &o.leader_flow.link,
            SrFlow::Follower => &o.follower_flow.link,
        };
        if let Some(w) = written.as_mut() {
            *w = v.len();
        }
        if len < v.len() {
            return Err((SrStatus::BufferTooSmall, format!("need {} entries, got {len}", v.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}
