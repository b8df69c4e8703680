//! C ABI for the multistable library.
//!
//! Specs and mollifiers are opaque handles created by `ms_*_new` and released
//! by `ms_*_free`. Every other function returns an `MsStatus` and writes its
//! result through an out-pointer; on failure `ms_last_error_message` describes
//! the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use multistable::asymptote::{ratio, tail_asymptote, tail_constant};
use multistable::charfn::cf;
use multistable::cli::parse_spec_str;
use multistable::function_space::{ExponentFunction, MultistableSpec, StepFunction};
use multistable::inversion::{density, tail_probability};
use multistable::prooflab::{self, build_mollifier, Mollifier, DEFAULT_TABLE_RESOLUTION};
use multistable::quadrature::{Estimate, QuadratureConfig};
use multistable::{sampler, Error};

pub type MsStatus = i32;

pub const MS_OK: MsStatus = 0;
/// A required pointer argument was null.
pub const MS_NULL_POINTER: MsStatus = 1;
/// An argument is outside the domain of the function.
pub const MS_DOMAIN: MsStatus = 2;
/// A quadrature stopped before reaching its tolerance.
pub const MS_ACCURACY: MsStatus = 3;
/// A spec document could not be parsed or validated.
pub const MS_PARSE: MsStatus = 4;
/// The library panicked; this is a bug.
pub const MS_PANIC: MsStatus = 5;

/// Opaque handle to a validated spec `(f, α)`.
pub struct MsSpec(MultistableSpec);

/// Opaque handle to a tabulated mollifier.
pub struct MsMollifier(Mollifier);

/// A value with its absolute error bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MsEstimate {
    pub value: f64,
    pub error: f64,
}

impl From<Estimate> for MsEstimate {
    fn from(e: Estimate) -> Self {
        Self {
            value: e.value,
            error: e.error,
        }
    }
}

/// One point of `P(|I(f)| > λ) / T_f(λ)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MsRatio {
    pub lambda: f64,
    pub asymptote: f64,
    pub probability: f64,
    pub probability_error: f64,
    pub ratio: f64,
    pub abs_err_bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(MsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) => MS_DOMAIN,
            Error::Accuracy { .. } => MS_ACCURACY,
        };
        Failure(code, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MS_OK
        }
        Ok(Err(Failure(code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic");
            MS_PANIC
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MS_NULL_POINTER, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, n))
    }
}

fn config(abs_tol: f64, rel_tol: f64) -> Result<QuadratureConfig, Failure> {
    let cfg = QuadratureConfig {
        abs_tol,
        rel_tol,
        ..QuadratureConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Message for the last failing call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a spec from the step function (`n_breakpoints = n_coefficients + 1`)
/// and the exponent (`n_alpha_values = n_alpha_breakpoints + 1`).
///
/// # Safety
/// Each array pointer must be valid for its stated length; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ms_spec_new(
    breakpoints: *const f64,
    n_breakpoints: usize,
    coefficients: *const f64,
    n_coefficients: usize,
    alpha_breakpoints: *const f64,
    n_alpha_breakpoints: usize,
    alpha_values: *const f64,
    n_alpha_values: usize,
    out: *mut *mut MsSpec,
) -> MsStatus {
    guard(|| {
        let f = StepFunction::new(
            slice(breakpoints, n_breakpoints, "breakpoints")?.to_vec(),
            slice(coefficients, n_coefficients, "coefficients")?.to_vec(),
        )?;
        let alpha = ExponentFunction::new(
            slice(alpha_breakpoints, n_alpha_breakpoints, "alpha_breakpoints")?.to_vec(),
            slice(alpha_values, n_alpha_values, "alpha_values")?.to_vec(),
        )?;
        write(out, Box::into_raw(Box::new(MsSpec(MultistableSpec::new(f, alpha)))))
    })
}

/// Parses a JSON spec document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_spec_from_json(json: *const c_char, out: *mut *mut MsSpec) -> MsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(MS_PARSE, format!("spec is not UTF-8: {e}")))?;
        let spec = parse_spec_str(text).map_err(|e| Failure(MS_PARSE, e.to_string()))?;
        write(out, Box::into_raw(Box::new(MsSpec(spec))))
    })
}

/// # Safety
/// `spec` must come from `ms_spec_new`/`ms_spec_from_json` and not be freed
/// twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_spec_free(spec: *mut MsSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Tabulates the mollifier for `q > 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_mollifier_new(q: f64, out: *mut *mut MsMollifier) -> MsStatus {
    guard(|| {
        let m = build_mollifier(q, DEFAULT_TABLE_RESOLUTION)?;
        write(out, Box::into_raw(Box::new(MsMollifier(m))))
    })
}

/// # Safety
/// `moll` must come from `ms_mollifier_new` and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_mollifier_free(moll: *mut MsMollifier) {
    if !moll.is_null() {
        drop(Box::from_raw(moll));
    }
}

/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_quasinorm(spec: *const MsSpec, rel_tol: f64, out: *mut f64) -> MsStatus {
    guard(|| write(out, deref(spec, "spec")?.0.quasinorm(rel_tol)?))
}

/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_cf(spec: *const MsSpec, theta: f64, out: *mut f64) -> MsStatus {
    guard(|| write(out, cf(&deref(spec, "spec")?.0, theta)))
}

/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_density(
    spec: *const MsSpec,
    x: f64,
    abs_tol: f64,
    rel_tol: f64,
    out: *mut MsEstimate,
) -> MsStatus {
    guard(|| {
        let e = density(&deref(spec, "spec")?.0, x, &config(abs_tol, rel_tol)?)?;
        write(out, e.into())
    })
}

/// `P(|I(f)| > λ)`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_tail(
    spec: *const MsSpec,
    lambda: f64,
    abs_tol: f64,
    rel_tol: f64,
    out: *mut MsEstimate,
) -> MsStatus {
    guard(|| {
        let e = tail_probability(&deref(spec, "spec")?.0, lambda, &config(abs_tol, rel_tol)?)?;
        write(out, e.into())
    })
}

/// `T_f(λ)`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_tail_asymptote(spec: *const MsSpec, lambda: f64, out: *mut f64) -> MsStatus {
    guard(|| write(out, tail_asymptote(&deref(spec, "spec")?.0, lambda)?))
}

/// `C(γ)` for `0 < γ < 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_tail_constant(gamma: f64, out: *mut f64) -> MsStatus {
    guard(|| write(out, tail_constant(gamma)?))
}

/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_ratio(
    spec: *const MsSpec,
    lambda: f64,
    abs_tol: f64,
    rel_tol: f64,
    out: *mut MsRatio,
) -> MsStatus {
    guard(|| {
        let r = ratio(&deref(spec, "spec")?.0, lambda, &config(abs_tol, rel_tol)?)?;
        write(
            out,
            MsRatio {
                lambda: r.lambda,
                asymptote: r.asymptote,
                probability: r.probability.value,
                probability_error: r.probability.error,
                ratio: r.ratio,
                abs_err_bound: r.abs_err_bound,
            },
        )
    })
}

/// Writes `n` draws of `I(f)` into `out`; deterministic given `seed`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_sample(spec: *const MsSpec, n: usize, seed: u64, out: *mut f64) -> MsStatus {
    guard(|| {
        let spec = deref(spec, "spec")?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let draws = sampler::sample(&spec.0, n, seed)?;
        ptr::copy_nonoverlapping(draws.as_ptr(), out, n);
        Ok(())
    })
}

/// `h_q(γ) = ∫|θ|^γ φ_q(θ) dθ` for `0 ≤ γ < 2`.
///
/// # Safety
/// `moll` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_h_q(moll: *const MsMollifier, gamma: f64, out: *mut MsEstimate) -> MsStatus {
    guard(|| write(out, prooflab::h_q(&deref(moll, "mollifier")?.0, gamma)?.into()))
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_eta(
    spec: *const MsSpec,
    moll: *const MsMollifier,
    xi: f64,
    out: *mut MsEstimate,
) -> MsStatus {
    guard(|| {
        write(
            out,
            prooflab::eta(&deref(spec, "spec")?.0, &deref(moll, "mollifier")?.0, xi)?.into(),
        )
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_tau(
    spec: *const MsSpec,
    moll: *const MsMollifier,
    xi: f64,
    out: *mut MsEstimate,
) -> MsStatus {
    guard(|| {
        write(
            out,
            prooflab::tau(&deref(spec, "spec")?.0, &deref(moll, "mollifier")?.0, xi)?.into(),
        )
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_rho(
    spec: *const MsSpec,
    moll: *const MsMollifier,
    xi: f64,
    out: *mut MsEstimate,
) -> MsStatus {
    guard(|| {
        write(
            out,
            prooflab::rho(&deref(spec, "spec")?.0, &deref(moll, "mollifier")?.0, xi)?.into(),
        )
    })
}
