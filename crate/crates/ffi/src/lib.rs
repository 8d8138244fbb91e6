//! C ABI over the `lbcp` library.
//!
//! Every fallible function returns an [`LbcpStatus`] and writes its result
//! through an out-pointer. On failure, [`lbcp_last_error_message`] returns a
//! description of the most recent error on the calling thread. Objects are
//! opaque handles created by `*_parse` / `*_from_toml` functions and released
//! with the matching `*_free`. Strings returned by the library must be
//! released with [`lbcp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lbcp::config::ModelFile;
use lbcp::cp_priors::{shifted_binomial_prior, UniformLocationPrior};
use lbcp::distributions::DistributionSpec;
use lbcp::divergence::{hellinger, kl};
use lbcp::error::Error;
use lbcp::evidence::posterior_model_probs;
use lbcp::experiments::{analyze, AnalysisMethod, AnalysisOptions, Sample};
use lbcp::model_priors::{model_prior_probabilities, two_model_prior_coefficient, LocationPriorKind, McConfig, NestedModelSequence};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbcpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed literal, config or data.
    Parse = 3,
    /// Argument outside its domain.
    Domain = 4,
    /// Numeric routine failed (non-convergence, accuracy, undefined posterior).
    Numeric = 5,
    Unsupported = 6,
    Io = 7,
    /// Output buffer too small; the error message states the required length.
    BufferTooSmall = 8,
    Panic = 9,
}

/// Location prior selector for [`lbcp_two_model_prior_coefficient`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbcpLocationPrior {
    Uniform = 0,
    ShiftedBinomial = 1,
}

/// Evidence method selector for [`lbcp_analyze_json`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbcpMethod {
    Exact = 0,
    MonteCarlo = 1,
    Schwarz = 2,
}

/// Opaque distribution handle.
pub struct LbcpDistribution(DistributionSpec);

/// Opaque nested model sequence handle.
pub struct LbcpModelSequence(NestedModelSequence);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> LbcpStatus {
    match e {
        Error::Parse(_) | Error::Data(_) => LbcpStatus::Parse,
        Error::Io(_) => LbcpStatus::Io,
        Error::Unsupported(_) => LbcpStatus::Unsupported,
        Error::Replicate { source, .. } => status_of(source),
        e if e.is_numeric() => LbcpStatus::Numeric,
        _ => LbcpStatus::Domain,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (LbcpStatus, String)>) -> LbcpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LbcpStatus::Ok
        }
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            LbcpStatus::Panic
        }
    }
}

fn lib<T>(r: lbcp::error::Result<T>) -> Result<T, (LbcpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (LbcpStatus, String) {
    (LbcpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LbcpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LbcpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (LbcpStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (LbcpStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = v;
    Ok(())
}

/// Message of the last failed call on this thread ("" after a success).
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn lbcp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lbcp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a literal such as `poisson:3` or `weibull:1.5,5`.
///
/// # Safety
/// `literal` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_distribution_parse(literal: *const c_char, out: *mut *mut LbcpDistribution) -> LbcpStatus {
    guard(|| {
        let s = str_arg(literal, "literal")?;
        let d: DistributionSpec = lib(s.parse())?;
        write_out(out, Box::into_raw(Box::new(LbcpDistribution(d))), "out")
    })
}

/// Releases a distribution handle; null is ignored.
///
/// # Safety
/// `d` must come from [`lbcp_distribution_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lbcp_distribution_free(d: *mut LbcpDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Log density (or log mass) at `x`; −∞ outside the support.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_distribution_log_density(d: *const LbcpDistribution, x: f64, out: *mut f64) -> LbcpStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("distribution"))?;
        write_out(out, d.0.log_density(x), "out")
    })
}

/// Mean of the distribution.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_distribution_mean(d: *const LbcpDistribution, out: *mut f64) -> LbcpStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("distribution"))?;
        write_out(out, lib(d.0.mean())?, "out")
    })
}

/// KL(p‖q) to absolute tolerance `tol`; +∞ when p is not dominated by q.
///
/// # Safety
/// `p` and `q` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_kl(p: *const LbcpDistribution, q: *const LbcpDistribution, tol: f64, out: *mut f64) -> LbcpStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("p"))?;
        let q = q.as_ref().ok_or_else(|| null("q"))?;
        write_out(out, lib(kl(&p.0, &q.0, tol))?.value, "out")
    })
}

/// Hellinger distance √(1 − ∫√(pq)).
///
/// # Safety
/// `p` and `q` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_hellinger(p: *const LbcpDistribution, q: *const LbcpDistribution, tol: f64, out: *mut f64) -> LbcpStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("p"))?;
        let q = q.as_ref().ok_or_else(|| null("q"))?;
        write_out(out, lib(hellinger(&p.0, &q.0, tol))?, "out")
    })
}

/// Log mass of each location vector under the uniform prior with k change
/// points among n observations.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_uniform_location_log_mass(n: usize, k: usize, out: *mut f64) -> LbcpStatus {
    guard(|| write_out(out, lib(UniformLocationPrior::new(n, k))?.log_mass(), "out"))
}

/// Shifted binomial prior on a single location: writes the mass of
/// m = 1..n−1 to `masses[m − 1]`. `len` must be at least n − 1.
///
/// # Safety
/// `masses` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lbcp_shifted_binomial_prior(n: usize, masses: *mut f64, len: usize) -> LbcpStatus {
    guard(|| {
        let p = lib(shifted_binomial_prior(n))?;
        if len < n.saturating_sub(1) {
            return Err((LbcpStatus::BufferTooSmall, format!("need {} slots, got {len}", n - 1)));
        }
        if masses.is_null() {
            return Err(null("masses"));
        }
        let out = std::slice::from_raw_parts_mut(masses, len);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (m, w) in p.iter() {
            out[*m - 1] = w;
        }
        Ok(())
    })
}

/// E[n − m₁] under the chosen single-location prior.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_two_model_prior_coefficient(prior: LbcpLocationPrior, n: usize, out: *mut f64) -> LbcpStatus {
    guard(|| {
        let kind = match prior {
            LbcpLocationPrior::Uniform => LocationPriorKind::Uniform,
            LbcpLocationPrior::ShiftedBinomial => LocationPriorKind::ShiftedBinomial,
        };
        write_out(out, lib(two_model_prior_coefficient(kind, n))?, "out")
    })
}

/// Posterior model probabilities from prior probabilities and log evidences.
///
/// # Safety
/// `priors`, `log_evidences` and `out` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lbcp_posterior_model_probs(
    priors: *const f64,
    log_evidences: *const f64,
    len: usize,
    out: *mut f64,
) -> LbcpStatus {
    guard(|| {
        let p = slice_arg(priors, len, "priors")?;
        let e = slice_arg(log_evidences, len, "log_evidences")?;
        let post = lib(posterior_model_probs(p, e))?;
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&post);
        Ok(())
    })
}

/// Builds a model sequence from TOML text (see the CLI documentation for
/// the schema).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_model_sequence_from_toml(toml: *const c_char, out: *mut *mut LbcpModelSequence) -> LbcpStatus {
    guard(|| {
        let s = str_arg(toml, "toml")?;
        let seq = lib(ModelFile::parse(s).and_then(|f| f.sequence()))?;
        write_out(out, Box::into_raw(Box::new(LbcpModelSequence(seq))), "out")
    })
}

/// Number of models (K + 1) in the sequence.
///
/// # Safety
/// `seq` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lbcp_model_sequence_len(seq: *const LbcpModelSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.segments.len())
}

/// Releases a model sequence; null is ignored.
///
/// # Safety
/// `seq` must come from [`lbcp_model_sequence_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lbcp_model_sequence_free(seq: *mut LbcpModelSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Loss-based model prior probabilities for sample size n. Writes K + 1
/// probabilities to `probs`; `len` must be at least K + 1.
///
/// # Safety
/// `seq` must be a live handle and `probs` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lbcp_model_priors(
    seq: *const LbcpModelSequence,
    n: usize,
    draws: usize,
    seed: u64,
    probs: *mut f64,
    len: usize,
) -> LbcpStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        let k1 = seq.0.segments.len();
        if len < k1 {
            return Err((LbcpStatus::BufferTooSmall, format!("need {k1} slots, got {len}")));
        }
        if probs.is_null() {
            return Err(null("probs"));
        }
        let mc = McConfig { draws, seed, ..Default::default() };
        let r = lib(model_prior_probabilities(&seq.0, n, &mc))?;
        std::slice::from_raw_parts_mut(probs, k1).copy_from_slice(&r.probs);
        Ok(())
    })
}

/// Full analysis of `data` under the sequence, returned as a JSON report in
/// `out_json` (release with [`lbcp_string_free`]).
///
/// # Safety
/// `seq` must be a live handle, `data` point to `len` doubles and `out_json`
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn lbcp_analyze_json(
    seq: *const LbcpModelSequence,
    data: *const f64,
    len: usize,
    method: LbcpMethod,
    draws: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> LbcpStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        let x = slice_arg(data, len, "data")?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let opts = AnalysisOptions {
            method: match method {
                LbcpMethod::Exact => AnalysisMethod::Exact,
                LbcpMethod::MonteCarlo => AnalysisMethod::Mc,
                LbcpMethod::Schwarz => AnalysisMethod::Bic,
            },
            draws,
            seed,
            location_prior: seq.0.location_prior,
            ..Default::default()
        };
        let report = lib(analyze("analysis", &seq.0, &Sample::new(x.to_vec()), &opts))?;
        let json = lib(report.to_json())?;
        let c = CString::new(json).map_err(|_| (LbcpStatus::Panic, "report contains NUL".to_string()))?;
        *out_json = c.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lbcp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
