//! C ABI over the `bsrelay` library.
//!
//! Every fallible function returns a [`BsrStatus`] and writes its result
//! through an out-pointer. On failure, [`bsr_last_error_message`] describes
//! the error for the calling thread. Parameters live behind the opaque
//! [`BsrParams`] handle, created by [`bsr_params_new`] or
//! [`bsr_params_from_toml`] and released with [`bsr_params_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bsrelay::perf::{self, OutageOptions, Scheme};
use bsrelay::statmodels::{build_af_models, build_df_dest_models, build_df_relay_models};
use bsrelay::sysmodel::{ChannelRealization, ReflectionPreset, SystemParams};
use bsrelay::thresholds::{gaussian_threshold, optimal_threshold, simple_threshold, ThresholdKind};
use bsrelay::{specfun, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    NoCrossing = 5,
    BracketFailure = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsrScheme {
    Df = 0,
    Af = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsrThresholdKind {
    Optimal = 0,
    Gaussian = 1,
    Simple = 2,
}

/// Receiver whose thresholds are requested.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsrLink {
    DfRelay = 0,
    DfDest = 1,
    Af = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsrPreset {
    PerfectOok = 0,
    Bistatic = 1,
}

/// Thresholds of one receiver. `t_optimal` is NaN when the two hypotheses
/// cannot be told apart.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsrThresholds {
    pub t_optimal: f64,
    pub t_gaussian: f64,
    pub t_simple: f64,
    pub bit_of_high_energy: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsrAllocation {
    pub p_slot1_w: f64,
    pub p_slot2_w: f64,
    pub ber: f64,
    pub ber_relay: f64,
    pub ber_dest: f64,
}

/// Opaque system parameter set.
pub struct BsrParams {
    inner: SystemParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BsrStatus {
    match e {
        Error::Domain { .. } | Error::EmptyFrame => BsrStatus::Domain,
        Error::NoCrossing => BsrStatus::NoCrossing,
        Error::BracketFailure(_) => BsrStatus::BracketFailure,
        Error::InvalidParam(_) => BsrStatus::InvalidArgument,
        Error::Config(_) => BsrStatus::Config,
        Error::FrameFormat(_) | Error::Csv(_) | Error::Io(_) => BsrStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> BsrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsrStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            BsrStatus::Panic
        }
    }
}

fn null_error(what: &str) -> Error {
    Error::InvalidParam(format!("{what} is null"))
}

unsafe fn params_ref<'a>(p: *const BsrParams) -> Result<&'a BsrParams, Error> {
    p.as_ref().ok_or_else(|| null_error("params"))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(null_error("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn scheme(s: BsrScheme) -> Scheme {
    match s {
        BsrScheme::Df => Scheme::Df,
        BsrScheme::Af => Scheme::Af,
    }
}

fn kind(k: BsrThresholdKind) -> ThresholdKind {
    match k {
        BsrThresholdKind::Optimal => ThresholdKind::Optimal,
        BsrThresholdKind::Gaussian => ThresholdKind::Gaussian,
        BsrThresholdKind::Simple => ThresholdKind::Simple,
    }
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bsr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bsr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New parameter set with default values.
#[no_mangle]
pub extern "C" fn bsr_params_new() -> *mut BsrParams {
    Box::into_raw(Box::new(BsrParams {
        inner: SystemParams::default(),
    }))
}

/// # Safety
/// `params` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn bsr_params_free(params: *mut BsrParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Parses a TOML parameter document into a new handle.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bsr_params_from_toml(toml: *const c_char, out: *mut *mut BsrParams) -> BsrStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null_error("toml"));
        }
        let s = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
        let p = SystemParams::from_toml_str(s)?;
        write_out(out, Box::into_raw(Box::new(BsrParams { inner: p })))
    })
}

/// Sets one real-valued field by its configuration name, e.g.
/// `"power_budget_dbm"`, `"gamma0_re"`. The resulting set must validate.
///
/// # Safety
/// `params` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bsr_params_set(params: *mut BsrParams, key: *const c_char, value: f64) -> BsrStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null_error("params"))?;
        if key.is_null() {
            return Err(null_error("key"));
        }
        let key = CStr::from_ptr(key)
            .to_str()
            .map_err(|_| Error::Config("key is not UTF-8".into()))?;
        let mut next = p.inner.clone();
        next.set_by_key(key, value)?;
        next.validate()?;
        p.inner = next;
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bsr_params_set_preset(params: *mut BsrParams, preset: BsrPreset) -> BsrStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null_error("params"))?;
        let preset = match preset {
            BsrPreset::PerfectOok => ReflectionPreset::PerfectOok,
            BsrPreset::Bistatic => ReflectionPreset::Bistatic,
        };
        p.inner = p.inner.clone().with_reflection_preset(preset);
        Ok(())
    })
}

/// Reads one real-valued top-level field by its configuration name.
///
/// # Safety
/// `params` must be a live handle, `key` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_params_get(params: *const BsrParams, key: *const c_char, out: *mut f64) -> BsrStatus {
    guard(|| {
        let p = params_ref(params)?;
        if key.is_null() {
            return Err(null_error("key"));
        }
        let key = CStr::from_ptr(key)
            .to_str()
            .map_err(|_| Error::Config("key is not UTF-8".into()))?;
        let v = toml_value(&p.inner, key)?;
        write_out(out, v)
    })
}

fn toml_value(s: &SystemParams, key: &str) -> Result<f64, Error> {
    let doc = s.to_toml_string()?;
    let table: toml::Table = doc.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    match table.get(key) {
        Some(toml::Value::Float(f)) => Ok(*f),
        Some(toml::Value::Integer(i)) => Ok(*i as f64),
        _ => Err(Error::Config(format!("unknown real parameter '{key}'"))),
    }
}

/// BER at unit channel gains. For DF, `optimize_allocation` selects the
/// optimal split; otherwise the configured `power_slot1_dbm` is used.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_analytic_ber(
    params: *const BsrParams,
    scheme: BsrScheme,
    threshold: BsrThresholdKind,
    optimize_allocation: bool,
    out: *mut f64,
) -> BsrStatus {
    guard(|| {
        let p = &params_ref(params)?.inner;
        let lp = p.resolve()?;
        let ch = ChannelRealization::unit(&lp);
        let k = kind(threshold);
        let v = match self::scheme(scheme) {
            Scheme::Af => perf::af_ber(&lp, &ch, k)?.value,
            Scheme::Df if optimize_allocation => perf::optimize_power_allocation(&lp, &ch, k)?.achieved_ber,
            Scheme::Df => {
                p.validate_df()?;
                perf::df_ber(&lp, &ch, k)?.end_to_end
            }
        };
        write_out(out, v)
    })
}

/// Thresholds of one receiver at unit channel gains.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_thresholds(params: *const BsrParams, link: BsrLink, out: *mut BsrThresholds) -> BsrStatus {
    guard(|| {
        let lp = params_ref(params)?.inner.resolve()?;
        let ch = ChannelRealization::unit(&lp);
        let pair = match link {
            BsrLink::DfRelay => build_df_relay_models(&lp, &ch),
            BsrLink::DfDest => build_df_dest_models(&lp, &ch),
            BsrLink::Af => build_af_models(&lp, &ch),
        };
        let t_optimal = match optimal_threshold(&pair) {
            Ok(t) => t,
            Err(Error::NoCrossing) => f64::NAN,
            Err(e) => return Err(e),
        };
        write_out(
            out,
            BsrThresholds {
                t_optimal,
                t_gaussian: gaussian_threshold(&pair),
                t_simple: simple_threshold(&pair),
                bit_of_high_energy: pair.bit_of_high_energy(),
            },
        )
    })
}

/// Optimal DF split at unit channel gains.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_optimize_power(
    params: *const BsrParams,
    threshold: BsrThresholdKind,
    out: *mut BsrAllocation,
) -> BsrStatus {
    guard(|| {
        let lp = params_ref(params)?.inner.resolve()?;
        let a = perf::optimize_power_allocation(&lp, &ChannelRealization::unit(&lp), kind(threshold))?;
        write_out(
            out,
            BsrAllocation {
                p_slot1_w: a.p_slot1,
                p_slot2_w: a.p_slot2,
                ber: a.achieved_ber,
                ber_relay: a.ber_relay,
                ber_dest: a.ber_dest,
            },
        )
    })
}

/// Outage probability over `n_periods` Rician draws.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_outage(
    params: *const BsrParams,
    scheme: BsrScheme,
    threshold: BsrThresholdKind,
    master_seed: u64,
    n_periods: u64,
    ber_threshold: f64,
    reoptimize_allocation: bool,
    out: *mut f64,
) -> BsrStatus {
    guard(|| {
        let p = &params_ref(params)?.inner;
        let lp = p.resolve()?;
        let opts = OutageOptions {
            n_periods,
            ber_threshold,
            reoptimize_allocation,
        };
        let o = perf::outage_probability(&lp, self::scheme(scheme), kind(threshold), master_seed, &opts)?;
        write_out(out, o.probability)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_marcum_q(order: u32, a: f64, b: f64, out: *mut f64) -> BsrStatus {
    guard(|| write_out(out, specfun::marcum_q(order, a, b)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_log_bessel_i(order: u32, x: f64, out: *mut f64) -> BsrStatus {
    guard(|| write_out(out, specfun::log_bessel_i(order, x)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsr_reg_gamma_lower(shape: f64, x: f64, out: *mut f64) -> BsrStatus {
    guard(|| write_out(out, specfun::reg_gamma_lower(shape, x)?))
}
