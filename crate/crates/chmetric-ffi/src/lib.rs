//! C ABI for the chmetric library.
//!
//! Handles are opaque pointers created and released by `chm_*` constructors
//! and `chm_*_free`; every fallible call returns a `ChmStatus` and writes
//! its result through an out pointer. The build script regenerates
//! `include/chmetric.h` from these declarations.

use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use chmetric::transform::zero_scaled;
use chmetric::{metric, Error, PeakonParams, ScaledSnapshot};

/// Result codes returned by every fallible `chm_*` call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChmStatus {
    /// The call succeeded.
    ChmOk = 0,
    /// A required pointer argument was null.
    ChmNullArgument = 1,
    /// A parameter was outside the admissible range.
    ChmInvalidArgument = 2,
    /// The requested quantity is undefined at the given time.
    ChmUndefined = 3,
    /// The two states live on different grids.
    ChmMismatch = 4,
    /// Internal failure; the output pointers are untouched.
    ChmInternal = 5,
}

/// Field selector for `chm_scaled_field`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChmField {
    /// Rescaled energy variable on (0, 1).
    ChmFieldEta = 0,
    /// Rescaled position.
    ChmFieldPosition = 1,
    /// Rescaled velocity.
    ChmFieldVelocity = 2,
    /// Square root of the rescaled pressure.
    ChmFieldPressureSqrt = 3,
}

/// Distance between two rescaled states, split into its four terms.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ChmDistance {
    /// L2 gap of the rescaled positions.
    pub position: f64,
    /// L2 gap of the rescaled velocities.
    pub velocity: f64,
    /// L2 gap of the square-root pressures.
    pub pressure_sqrt: f64,
    /// Gap of the amplitudes.
    pub amplitude: f64,
    /// Sum of the four terms.
    pub total: f64,
}

/// Opaque handle to a conservative peakon-antipeakon solution.
pub struct ChmSolution {
    params: PeakonParams,
}

/// Opaque handle to a rescaled state on the unit interval.
pub struct ChmScaled {
    snap: ScaledSnapshot,
}

fn status_of(err: &Error) -> ChmStatus {
    match err {
        Error::InvalidInput(_)
        | Error::ZeroEnergy
        | Error::ZeroSolution
        | Error::EtaOutOfRange { .. }
        | Error::TargetOutOfRange { .. }
        | Error::UnknownFigure { .. } => ChmStatus::ChmInvalidArgument,
        Error::BetaUndefinedAtBreaking { .. } => ChmStatus::ChmUndefined,
        Error::GridMismatch { .. } => ChmStatus::ChmMismatch,
        _ => ChmStatus::ChmInternal,
    }
}

fn guarded(f: impl FnOnce() -> ChmStatus) -> ChmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(ChmStatus::ChmInternal)
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn chm_status_message(status: ChmStatus) -> *const c_char {
    let text: &'static str = match status {
        ChmStatus::ChmOk => "ok\0",
        ChmStatus::ChmNullArgument => "null argument\0",
        ChmStatus::ChmInvalidArgument => "invalid argument\0",
        ChmStatus::ChmUndefined => "undefined at this time\0",
        ChmStatus::ChmMismatch => "grid mismatch\0",
        ChmStatus::ChmInternal => "internal error\0",
    };
    text.as_ptr() as *const c_char
}

/// Create a solution with energy parameter `e` (conserved energy C = e^2)
/// breaking at time `t0`. On success writes the new handle to `out`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn chm_solution_new(
    e: f64,
    t0: f64,
    out: *mut *mut ChmSolution,
) -> ChmStatus {
    if out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    guarded(|| match PeakonParams::new(e, t0) {
        Ok(params) => {
            *out = Box::into_raw(Box::new(ChmSolution { params }));
            ChmStatus::ChmOk
        }
        Err(e) => status_of(&e),
    })
}

/// Release a solution handle. Null is a no-op.
///
/// # Safety
/// `solution` must be null or a handle from `chm_solution_new` that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn chm_solution_free(solution: *mut ChmSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Conserved energy C of the solution.
///
/// # Safety
/// `solution` must be null or a live solution handle; `out` must be null or
/// valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn chm_solution_energy(
    solution: *const ChmSolution,
    out: *mut f64,
) -> ChmStatus {
    if solution.is_null() || out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    *out = (*solution).params.c();
    ChmStatus::ChmOk
}

/// Pointwise velocity u(t, x) of the solution.
///
/// # Safety
/// `solution` must be null or a live solution handle; `out` must be null or
/// valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn chm_velocity_at(
    solution: *const ChmSolution,
    t: f64,
    x: f64,
    out: *mut f64,
) -> ChmStatus {
    if solution.is_null() || out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    let params = &(*solution).params;
    guarded(|| {
        *out = params.u_exact(t, x);
        ChmStatus::ChmOk
    })
}

/// Closed-form rescaled state of the solution at time `t` on `n` midpoint
/// nodes. On success writes the new handle to `out`.
///
/// # Safety
/// `solution` must be null or a live solution handle; `out` must be null or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn chm_scaled_exact(
    solution: *const ChmSolution,
    t: f64,
    n: usize,
    out: *mut *mut ChmScaled,
) -> ChmStatus {
    if solution.is_null() || out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    if n == 0 {
        return ChmStatus::ChmInvalidArgument;
    }
    let params = &(*solution).params;
    guarded(|| match params.scaled_snapshot_exact(t, n) {
        Ok(snap) => {
            *out = Box::into_raw(Box::new(ChmScaled { snap }));
            ChmStatus::ChmOk
        }
        Err(e) => status_of(&e),
    })
}

/// The zero solution as a rescaled state on `n` midpoint nodes.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn chm_scaled_zero(n: usize, out: *mut *mut ChmScaled) -> ChmStatus {
    if out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    if n == 0 {
        return ChmStatus::ChmInvalidArgument;
    }
    guarded(|| {
        *out = Box::into_raw(Box::new(ChmScaled {
            snap: zero_scaled(n),
        }));
        ChmStatus::ChmOk
    })
}

/// Release a rescaled-state handle. Null is a no-op.
///
/// # Safety
/// `scaled` must be null or a handle from `chm_scaled_exact` or
/// `chm_scaled_zero` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn chm_scaled_free(scaled: *mut ChmScaled) {
    if !scaled.is_null() {
        drop(Box::from_raw(scaled));
    }
}

/// Number of grid nodes of a rescaled state; 0 for a null handle.
///
/// # Safety
/// `scaled` must be null or a live rescaled-state handle.
#[no_mangle]
pub unsafe extern "C" fn chm_scaled_len(scaled: *const ChmScaled) -> usize {
    if scaled.is_null() {
        0
    } else {
        (*scaled).snap.eta.len()
    }
}

/// Amplitude sqrt(2C) of a rescaled state (0 for the zero solution).
///
/// # Safety
/// `scaled` must be null or a live rescaled-state handle; `out` must be null
/// or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn chm_scaled_amplitude(
    scaled: *const ChmScaled,
    out: *mut f64,
) -> ChmStatus {
    if scaled.is_null() || out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    *out = (*scaled).snap.a;
    ChmStatus::ChmOk
}

/// Copy one field of a rescaled state into `buf`, which must hold `len`
/// doubles with `len` equal to `chm_scaled_len`.
///
/// # Safety
/// `scaled` must be null or a live rescaled-state handle; `buf` must be null
/// or valid for writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chm_scaled_field(
    scaled: *const ChmScaled,
    field: ChmField,
    buf: *mut f64,
    len: usize,
) -> ChmStatus {
    if scaled.is_null() || buf.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    let snap = &(*scaled).snap;
    let src = match field {
        ChmField::ChmFieldEta => &snap.eta,
        ChmField::ChmFieldPosition => &snap.y,
        ChmField::ChmFieldVelocity => &snap.u,
        ChmField::ChmFieldPressureSqrt => &snap.psqrt,
    };
    if len != src.len() {
        return ChmStatus::ChmMismatch;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, len);
    ChmStatus::ChmOk
}

/// Distance between two rescaled states on the same grid, written to `out`
/// term by term.
///
/// # Safety
/// `a` and `b` must each be null or a live rescaled-state handle; `out` must
/// be null or valid for writing one `ChmDistance`.
#[no_mangle]
pub unsafe extern "C" fn chm_distance(
    a: *const ChmScaled,
    b: *const ChmScaled,
    out: *mut ChmDistance,
) -> ChmStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        return ChmStatus::ChmNullArgument;
    }
    let (a, b) = (&(*a).snap, &(*b).snap);
    guarded(|| match metric::distance(a, b) {
        Ok(d) => {
            *out = ChmDistance {
                position: d.d_y,
                velocity: d.d_u,
                pressure_sqrt: d.d_p,
                amplitude: d.d_a,
                total: d.total,
            };
            ChmStatus::ChmOk
        }
        Err(e) => status_of(&e),
    })
}
