//! C ABI for the `fermat` crate.
//!
//! Every fallible function returns a [`FermatStatus`] and writes its result
//! through an out-pointer. On failure the out-pointer is left untouched and a
//! message is available from [`fermat_last_error_message`] on the same thread.
//! Handles are opaque, owned by the caller and released with the matching
//! `*_free` function. Strings returned by the library are released with
//! [`fermat_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fermat::literal::to_json;
use fermat::{
    format_fermat, lift_eval, parse_fermat, Error, Expr, FermatReal, QsFunction, QuadratureConfig,
    VectorField3,
};
use num_traits::ToPrimitive;

/// Outcome of a library call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FermatStatus {
    Ok = 0,
    /// Malformed literal, expression or unknown variable.
    ParseError = 1,
    /// Evaluation outside a domain, non-invertible value, and similar.
    DomainError = 2,
    /// Quadrature did not reach the requested tolerance.
    ToleranceError = 3,
    NullPointer = 4,
    InvalidArgument = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque Fermat real.
pub struct FermatRealHandle(FermatReal);

/// Opaque expression in named variables.
pub struct FermatExprHandle(Expr);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FermatStatus {
    if e.is_parse_error() {
        FermatStatus::ParseError
    } else if matches!(e, Error::ToleranceNotReached { .. }) {
        FermatStatus::ToleranceError
    } else {
        FermatStatus::DomainError
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FermatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FermatStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer passed for `{what}`"));
            FermatStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_last_error(msg);
            FermatStatus::InvalidArgument
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            FermatStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("`{what}` is not valid UTF-8")))
}

unsafe fn read_strs<'a>(
    p: *const *const c_char,
    n: usize,
    what: &'static str,
) -> Result<Vec<&'a str>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    std::slice::from_raw_parts(p, n)
        .iter()
        .map(|&s| read_str(s, what))
        .collect()
}

unsafe fn read_params<'a>(
    names: *const *const c_char,
    values: *const *const FermatRealHandle,
    n: usize,
) -> Result<Vec<(&'a str, FermatReal)>, Failure> {
    let names = read_strs(names, n, "names")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if values.is_null() {
        return Err(Failure::Null("values"));
    }
    let values = std::slice::from_raw_parts(values, n);
    names
        .into_iter()
        .zip(values)
        .map(|(name, &v)| Ok((name, deref(v, "values")?.0.clone())))
        .collect()
}

fn config(tol: f64) -> Result<QuadratureConfig, Failure> {
    if tol > 0.0 {
        Ok(QuadratureConfig::with_tol(tol)?)
    } else {
        Ok(QuadratureConfig::from_env()?)
    }
}

fn boxed_real(x: FermatReal) -> *mut FermatRealHandle {
    Box::into_raw(Box::new(FermatRealHandle(x)))
}

fn boxed_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior nul removed")
        .into_raw()
}

/// Message for the most recent failed call on this thread, or null. The
/// pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn fermat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fermat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a literal such as `1 + 2 eps(2) - eps(1)`.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_parse(
    text: *const c_char,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let x = parse_fermat(read_str(text, "text")?)?;
        *out = boxed_real(x);
        Ok(())
    })
}

/// Builds `std + Σ coeffs[i] dt_{nums[i]/dens[i]}` from `n` terms.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_from_parts(
    std: f64,
    nums: *const i64,
    dens: *const i64,
    coeffs: *const f64,
    n: usize,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mut x = FermatReal::real(std);
        if n > 0 {
            if nums.is_null() || dens.is_null() || coeffs.is_null() {
                return Err(Failure::Null("terms"));
            }
            let nums = std::slice::from_raw_parts(nums, n);
            let dens = std::slice::from_raw_parts(dens, n);
            let coeffs = std::slice::from_raw_parts(coeffs, n);
            for i in 0..n {
                if dens[i] <= 0 || nums[i] < dens[i] {
                    return Err(Failure::Arg(format!(
                        "term {i}: order {}/{} is not a rational >= 1",
                        nums[i], dens[i]
                    )));
                }
                x = x + FermatReal::term(coeffs[i], fermat::rational(nums[i], dens[i]));
            }
        }
        *out = boxed_real(x);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_free(x: *mut FermatRealHandle) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fermat_real_clone(
    x: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed_real(deref(x, "x")?.0.clone());
        Ok(())
    })
}

unsafe fn binary(
    a: *const FermatRealHandle,
    b: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
    op: impl FnOnce(&FermatReal, &FermatReal) -> Result<FermatReal, Error>,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let r = op(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        *out = boxed_real(r);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fermat_real_add(
    a: *const FermatRealHandle,
    b: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    binary(a, b, out, |a, b| Ok(a + b))
}

#[no_mangle]
pub unsafe extern "C" fn fermat_real_sub(
    a: *const FermatRealHandle,
    b: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    binary(a, b, out, |a, b| Ok(a - b))
}

#[no_mangle]
pub unsafe extern "C" fn fermat_real_mul(
    a: *const FermatRealHandle,
    b: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    binary(a, b, out, |a, b| Ok(a * b))
}

/// `a / b`; fails with `FERMAT_STATUS_DOMAIN_ERROR` when `st(b) = 0`.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_div(
    a: *const FermatRealHandle,
    b: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    binary(a, b, out, |a, b| a.checked_div(b))
}

#[no_mangle]
pub unsafe extern "C" fn fermat_real_pow_int(
    x: *const FermatRealHandle,
    n: u32,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed_real(deref(x, "x")?.0.powi(n));
        Ok(())
    })
}

/// `x^(num/den)` under the same rules as the `^` operator of the literal
/// grammar.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_pow_rational(
    x: *const FermatRealHandle,
    num: i64,
    den: i64,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if den == 0 {
            return Err(Failure::Arg("zero denominator".into()));
        }
        *out = boxed_real(deref(x, "x")?.0.pow(&fermat::rational(num, den))?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fermat_real_invert(
    x: *const FermatRealHandle,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed_real(deref(x, "x")?.0.invert()?);
        Ok(())
    })
}

/// Writes -1, 0 or 1 to `out` as `a` is below, equal to or above `b` in the
/// total order.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_compare(
    a: *const FermatRealHandle,
    b: *const FermatRealHandle,
    out: *mut c_int,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = match deref(a, "a")?.0.compare(&deref(b, "b")?.0) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        Ok(())
    })
}

/// Standard part; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_std(x: *const FermatRealHandle) -> f64 {
    x.as_ref().map_or(f64::NAN, |x| x.0.std())
}

/// Number of infinitesimal terms; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_term_count(x: *const FermatRealHandle) -> usize {
    x.as_ref().map_or(0, |x| x.0.terms().len())
}

/// Term `i` in decreasing order of `dt` order, as `coeff dt_{num/den}`.
#[no_mangle]
pub unsafe extern "C" fn fermat_real_term(
    x: *const FermatRealHandle,
    i: usize,
    num: *mut i64,
    den: *mut i64,
    coeff: *mut f64,
) -> FermatStatus {
    guard(|| {
        let x = deref(x, "x")?;
        let (num, den, coeff) = (
            out_ptr(num, "num")?,
            out_ptr(den, "den")?,
            out_ptr(coeff, "coeff")?,
        );
        let term = x
            .0
            .terms()
            .get(i)
            .ok_or_else(|| Failure::Arg(format!("term index {i} out of range")))?;
        let (n, d) = match (term.order.numer().to_i64(), term.order.denom().to_i64()) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(Failure::Arg(format!("order {} overflows i64", term.order))),
        };
        *num = n;
        *den = d;
        *coeff = term.coeff;
        Ok(())
    })
}

/// Canonical text form; release with [`fermat_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fermat_real_to_string(
    x: *const FermatRealHandle,
    out: *mut *mut c_char,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed_string(format_fermat(&deref(x, "x")?.0));
        Ok(())
    })
}

/// Canonical JSON form; release with [`fermat_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fermat_real_to_json(
    x: *const FermatRealHandle,
    out: *mut *mut c_char,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed_string(to_json(&deref(x, "x")?.0).to_string());
        Ok(())
    })
}

/// Parses an expression over the `nvars` variable names in `vars`.
#[no_mangle]
pub unsafe extern "C" fn fermat_expr_parse(
    text: *const c_char,
    vars: *const *const c_char,
    nvars: usize,
    out: *mut *mut FermatExprHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let vars = read_strs(vars, nvars, "vars")?;
        let e = fermat::parse(read_str(text, "text")?, &vars)?;
        *out = Box::into_raw(Box::new(FermatExprHandle(e)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fermat_expr_free(e: *mut FermatExprHandle) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Symbolic partial derivative with respect to `var`.
#[no_mangle]
pub unsafe extern "C" fn fermat_expr_diff(
    e: *const FermatExprHandle,
    var: *const c_char,
    out: *mut *mut FermatExprHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = deref(e, "e")?.0.diff(read_str(var, "var")?);
        *out = Box::into_raw(Box::new(FermatExprHandle(d)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fermat_expr_to_string(
    e: *const FermatExprHandle,
    out: *mut *mut c_char,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed_string(deref(e, "e")?.0.to_string());
        Ok(())
    })
}

/// Evaluates the lift of `e` with `names[i]` bound to `values[i]`.
#[no_mangle]
pub unsafe extern "C" fn fermat_expr_lift_eval(
    e: *const FermatExprHandle,
    names: *const *const c_char,
    values: *const *const FermatRealHandle,
    n: usize,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let e = deref(e, "e")?;
        let env: HashMap<String, FermatReal> = read_params(names, values, n)?
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        *out = boxed_real(lift_eval(&e.0, &env)?);
        Ok(())
    })
}

/// `∫_from^to f(var) dvar` for `f` given as text over `var` and the `n`
/// named Fermat parameters. A non-positive `tol` uses the defaults.
#[no_mangle]
pub unsafe extern "C" fn fermat_integrate(
    text: *const c_char,
    var: *const c_char,
    param_names: *const *const c_char,
    param_values: *const *const FermatRealHandle,
    n: usize,
    from: *const FermatRealHandle,
    to: *const FermatRealHandle,
    tol: f64,
    out: *mut *mut FermatRealHandle,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let params = read_params(param_names, param_values, n)?;
        let f = QsFunction::parse(
            read_str(text, "text")?,
            read_str(var, "var")?,
            &params,
            fermat::FInterval::real_line(),
        )?;
        let cfg = config(tol)?;
        let r = fermat::integrate(&f, &deref(from, "from")?.0, &deref(to, "to")?.0, &cfg)?;
        *out = boxed_real(r);
        Ok(())
    })
}

unsafe fn field(components: *const *const c_char) -> Result<VectorField3, Failure> {
    let c = read_strs(components, 3, "components")?;
    Ok(VectorField3::parse([c[0], c[1], c[2]], &[])?)
}

unsafe fn point(at: *const f64) -> Result<[f64; 3], Failure> {
    if at.is_null() {
        return Err(Failure::Null("at"));
    }
    let s = std::slice::from_raw_parts(at, 3);
    Ok([s[0], s[1], s[2]])
}

/// Divergence at `at[0..3]` of the field whose three components are given as
/// text in `x`, `y`, `z`.
#[no_mangle]
pub unsafe extern "C" fn fermat_divergence(
    components: *const *const c_char,
    at: *const f64,
    tol: f64,
    out: *mut f64,
) -> FermatStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let f = field(components)?;
        let p = fermat::InfinitesimalParallelepiped::canonical(point(at)?);
        *out = fermat::divergence(&f, &p, &config(tol)?)?;
        Ok(())
    })
}

/// Curl at `at[0..3]`, written to `out[0..3]`.
#[no_mangle]
pub unsafe extern "C" fn fermat_curl(
    components: *const *const c_char,
    at: *const f64,
    tol: f64,
    out: *mut f64,
) -> FermatStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let f = field(components)?;
        let c = fermat::curl(&f, point(at)?, &config(tol)?)?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&c);
        Ok(())
    })
}

/// Sets the global threshold below which coefficients are dropped.
#[no_mangle]
pub extern "C" fn fermat_set_coeff_epsilon(eps: f64) -> FermatStatus {
    guard(|| {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Failure::Arg(format!("epsilon must be finite and >= 0, got {eps}")));
        }
        fermat::set_coeff_epsilon(eps);
        Ok(())
    })
}
