//! C ABI for `fkm-cone`.
//!
//! Every function returns an [`FkmStatus`]; results go through out-pointers.
//! Clifford systems are opaque handles created by [`fkm_system_new`] and
//! released with [`fkm_system_free`]. The message of the most recent failure
//! on the calling thread is available from [`fkm_last_error`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use fkm_cone::certify::{certify_fkm, Verdict};
use fkm_cone::clifford::{build_system, verify_relations, CliffordSystem};
use fkm_cone::foliation::eval_f;
use fkm_cone::lawlor::{vanishing_angle, Profile, VanishingAngleQuery};
use fkm_cone::radius::normal_radius;
use fkm_cone::Error;

/// Opaque Clifford system handle.
pub struct FkmSystem(CliffordSystem);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FkmStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    FocalPoint = 3,
    SolverFailure = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FkmProfile {
    BoundF = 0,
    Limit = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FkmVerdict {
    Certified = 0,
    Inconclusive = 1,
    Invalid = 2,
}

/// Plain-data view of an FKM certificate. Absent values are NaN (or 0 for `n`).
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FkmCertificate {
    pub verdict: FkmVerdict,
    pub n: usize,
    pub alpha_sq: f64,
    pub theta_rad: f64,
    pub normal_radius: f64,
    pub margin: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FkmStatus {
    match e {
        Error::InvalidParameter(_) | Error::Json(_) | Error::Io(_) => FkmStatus::InvalidArgument,
        Error::FocalPoint { .. } => FkmStatus::FocalPoint,
        Error::SolverFailure { .. } => FkmStatus::SolverFailure,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FkmStatusError>) -> FkmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FkmStatus::Ok,
        Ok(Err(FkmStatusError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FkmStatus::Internal
        }
    }
}

struct FkmStatusError(FkmStatus, String);

impl From<Error> for FkmStatusError {
    fn from(e: Error) -> Self {
        FkmStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> FkmStatusError {
    FkmStatusError(FkmStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fkm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds the Clifford system for `(m, k)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_new(m: usize, k: usize, out: *mut *mut FkmSystem) -> FkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = build_system(m, k)?;
        *out = Box::into_raw(Box::new(FkmSystem(sys)));
        Ok(())
    })
}

/// Parses a system from its JSON form.
///
/// # Safety
/// `json` must point to `len` readable bytes; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_from_json(
    json: *const c_char,
    len: usize,
    out: *mut *mut FkmSystem,
) -> FkmStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let bytes = std::slice::from_raw_parts(json as *const u8, len);
        let text = std::str::from_utf8(bytes)
            .map_err(|e| FkmStatusError(FkmStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(FkmSystem(CliffordSystem::from_json(text)?)));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_free(sys: *mut FkmSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Matrix size `kδ(m)`, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_dim(sys: *const FkmSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.dim())
}

/// Number of generators `m - 1`, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_num_generators(sys: *const FkmSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.num_generators())
}

/// Copies generator `q` (zero-based) in row-major order into `out`, which
/// must hold `dim * dim` entries.
///
/// # Safety
/// `sys` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_generator(
    sys: *const FkmSystem,
    q: usize,
    out: *mut i8,
    len: usize,
) -> FkmStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = s.0.generators().get(q).ok_or_else(|| {
            FkmStatusError(
                FkmStatus::InvalidArgument,
                format!("generator index {q} out of range"),
            )
        })?;
        let data = g.row_major();
        if len < data.len() {
            return Err(FkmStatusError(
                FkmStatus::InvalidArgument,
                format!("buffer holds {len} entries, need {}", data.len()),
            ));
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
        Ok(())
    })
}

/// Checks the Clifford relations exactly.
///
/// # Safety
/// `sys` must be a live handle and `ok` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_system_verify(sys: *const FkmSystem, ok: *mut bool) -> FkmStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let ok = ok.as_mut().ok_or_else(|| null("ok"))?;
        *ok = verify_relations(&s.0).ok;
        Ok(())
    })
}

/// `F(x, y)` for vectors of length `len = dim`.
///
/// # Safety
/// `x`, `y` must be valid for `len` reads and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn fkm_eval_f(
    sys: *const FkmSystem,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> FkmStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        if x.is_null() || y.is_null() {
            return Err(null("vector"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (x, y) = (
            std::slice::from_raw_parts(x, len),
            std::slice::from_raw_parts(y, len),
        );
        *out = eval_f(&s.0, x, y)?;
        Ok(())
    })
}

/// Lawlor vanishing angle for cone dimension `dim` and curvature bound
/// `alpha_sq`. `theta` receives NaN when the angle does not exist.
///
/// # Safety
/// `exists` and `theta` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_vanishing_angle(
    dim: usize,
    alpha_sq: f64,
    profile: FkmProfile,
    exists: *mut bool,
    theta: *mut f64,
) -> FkmStatus {
    guard(|| {
        let exists = exists.as_mut().ok_or_else(|| null("exists"))?;
        let theta = theta.as_mut().ok_or_else(|| null("theta"))?;
        if !(alpha_sq >= 0.0) {
            return Err(FkmStatusError(
                FkmStatus::InvalidArgument,
                format!("alpha_sq = {alpha_sq}"),
            ));
        }
        let profile = match profile {
            FkmProfile::BoundF => Profile::BoundF,
            FkmProfile::Limit => Profile::Limit,
        };
        let r = vanishing_angle(&VanishingAngleQuery::new(dim, alpha_sq.sqrt(), profile)?)?;
        *exists = r.exists;
        *theta = r.theta.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Closed-form normal radius for `(m, n)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_normal_radius(m: usize, n: usize, out: *mut f64) -> FkmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = normal_radius(m, n)?.n_rad;
        Ok(())
    })
}

/// Area-minimization certificate for the `(m, k)` FKM cone.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fkm_certify(m: usize, k: usize, out: *mut FkmCertificate) -> FkmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = certify_fkm(m, k)?;
        *out = FkmCertificate {
            verdict: match c.verdict {
                Verdict::Certified => FkmVerdict::Certified,
                Verdict::Inconclusive => FkmVerdict::Inconclusive,
                Verdict::Invalid => FkmVerdict::Invalid,
            },
            n: c.n.unwrap_or(0),
            alpha_sq: c.alpha_sq.unwrap_or(f64::NAN),
            theta_rad: c.theta_rad.unwrap_or(f64::NAN),
            normal_radius: c.n_rad.unwrap_or(f64::NAN),
            margin: c.margin.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}
