//! C ABI over the simulator.
//!
//! Every fallible call returns a [`BellsimStatus`]; results come back through
//! out-pointers. Circuits and threshold results are opaque handles owned by
//! the caller and released with their `_free` function. The message for the
//! last failing call on the current thread is available from
//! [`bellsim_last_error_message`].

use bellsim::ft::{self, TelecorrectionCircuitSpec, ThresholdResult, ThresholdSearch};
use bellsim::logical::{self, BmInput, PairChannel};
use bellsim::{loss, protocols, Error};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellsimStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    ResourceBound = 3,
    NoContraction = 4,
    CircuitParse = 5,
    Inconsistent = 6,
    DimensionMismatch = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

/// Opaque telecorrection circuit.
pub struct BellsimCircuit(TelecorrectionCircuitSpec);

/// Opaque threshold search result.
pub struct BellsimThreshold(ThresholdResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> BellsimStatus {
    match e {
        Error::Domain(_) => BellsimStatus::Domain,
        Error::ResourceBound { .. } => BellsimStatus::ResourceBound,
        Error::NoContraction { .. } => BellsimStatus::NoContraction,
        Error::CircuitParse { .. } => BellsimStatus::CircuitParse,
        Error::InconsistentDevice { .. } | Error::InconsistentRun => BellsimStatus::Inconsistent,
        Error::DimensionMismatch { .. } => BellsimStatus::DimensionMismatch,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> BellsimStatus
where
    F: FnOnce() -> Result<(), BellsimStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            BellsimStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            BellsimStatus::Panic
        }
    }
}

fn sim<T>(r: bellsim::Result<T>) -> Result<T, BellsimStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn out<'a, T>(p: *mut T) -> Result<&'a mut T, BellsimStatus> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| {
        set_error("null output pointer".into());
        BellsimStatus::NullPointer
    })
}

fn arg<'a, T>(p: *const T) -> Result<&'a T, BellsimStatus> {
    // SAFETY: callers pass either null or a pointer from this library.
    unsafe { p.as_ref() }.ok_or_else(|| {
        set_error("null handle".into());
        BellsimStatus::NullPointer
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bellsim_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Photons consumed by one correction round with the given gate counts.
#[no_mangle]
pub extern "C" fn bellsim_resource_cost(n_h: u64, n_cz: u64, n_plus: u64) -> u64 {
    protocols::resource_cost(n_h, n_cz, n_plus)
}

/// Closed-form logical Bell measurement success with loss on both qubits.
///
/// # Safety
/// `out_p` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_bm_success_lossy(n: usize, eta: f64, out_p: *mut f64) -> BellsimStatus {
    guard(|| {
        let o = out(out_p)?;
        sim(loss::LossChannel::new(eta))?;
        *o = loss::bm_success_prob_lossy(n, eta);
        Ok(())
    })
}

/// Closed-form gate-teleportation success with loss on the input only.
///
/// # Safety
/// `out_p` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_gate_teleport_success(n: usize, eta: f64, out_p: *mut f64) -> BellsimStatus {
    guard(|| {
        let o = out(out_p)?;
        sim(loss::LossChannel::new(eta))?;
        *o = loss::gate_teleport_success_prob(n, eta);
        Ok(())
    })
}

/// Exact logical Bell measurement success averaged over the four inputs.
///
/// # Safety
/// `out_p` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_logical_bm_exact(n: usize, out_p: *mut f64) -> BellsimStatus {
    guard(|| {
        let o = out(out_p)?;
        *o = sim(logical::exact_success_probability(
            BmInput::UniformAverage,
            n,
            &PairChannel::standard(),
        ))?;
        Ok(())
    })
}

/// Sampled logical Bell measurement success: mean and standard error.
///
/// # Safety
/// `mean` and `stderr` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_logical_bm_sample(
    n: usize,
    trials: u64,
    seed: u64,
    mean: *mut f64,
    stderr: *mut f64,
) -> BellsimStatus {
    guard(|| {
        let (m, s) = (out(mean)?, out(stderr)?);
        let e = sim(logical::monte_carlo_success(n, trials, seed))?;
        *m = e.mean;
        *s = e.stderr;
        Ok(())
    })
}

/// Physical-level rates: phase-flip probability of idle locations and
/// heralded failure probability of H/CZ locations.
///
/// # Safety
/// `memory_z` and `gate_fail` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_level1_error_model(
    n: usize,
    eta: f64,
    memory_z: *mut f64,
    gate_fail: *mut f64,
) -> BellsimStatus {
    guard(|| {
        let (m, g) = (out(memory_z)?, out(gate_fail)?);
        let r = sim(ft::level1_error_model(n, eta))?;
        *m = r.memory_z;
        *g = r.gate_fail;
        Ok(())
    })
}

/// Built-in telecorrection round.
///
/// # Safety
/// `out_p` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_circuit_default(out_p: *mut *mut BellsimCircuit) -> BellsimStatus {
    guard(|| {
        let o = out(out_p)?;
        *o = Box::into_raw(Box::new(BellsimCircuit(TelecorrectionCircuitSpec::default_round())));
        Ok(())
    })
}

/// Parses a circuit from its text format.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_circuit_parse(
    text: *const c_char,
    out_p: *mut *mut BellsimCircuit,
) -> BellsimStatus {
    guard(|| {
        let o = out(out_p)?;
        if text.is_null() {
            set_error("null text".into());
            return Err(BellsimStatus::NullPointer);
        }
        let s = CStr::from_ptr(text).to_str().map_err(|_| {
            set_error("circuit text is not UTF-8".into());
            BellsimStatus::InvalidUtf8
        })?;
        let spec = sim(TelecorrectionCircuitSpec::parse(s))?;
        *o = Box::into_raw(Box::new(BellsimCircuit(spec)));
        Ok(())
    })
}

/// Number of locations in the circuit.
///
/// # Safety
/// `circuit` must be null or a live handle; `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_circuit_location_count(
    circuit: *const BellsimCircuit,
    out_p: *mut usize,
) -> BellsimStatus {
    guard(|| {
        let c = arg(circuit)?;
        *out(out_p)? = c.0.locations.len();
        Ok(())
    })
}

/// Releases a circuit. Null is ignored.
///
/// # Safety
/// `circuit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bellsim_circuit_free(circuit: *mut BellsimCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Bisects the loss threshold. `tolerance <= 0` selects the default search.
///
/// # Safety
/// `circuit` must be null or a live handle; `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_find_threshold(
    circuit: *const BellsimCircuit,
    n: usize,
    levels: usize,
    trials: u64,
    seed: u64,
    tolerance: f64,
    out_p: *mut *mut BellsimThreshold,
) -> BellsimStatus {
    guard(|| {
        let c = arg(circuit)?;
        let o = out(out_p)?;
        let mut search = ThresholdSearch::default();
        if tolerance > 0.0 {
            search.tolerance = tolerance;
        }
        let r = sim(ft::find_threshold_with(&c.0, n, levels, trials, seed, search))?;
        *o = Box::into_raw(Box::new(BellsimThreshold(r)));
        Ok(())
    })
}

/// Threshold loss rate of a result.
///
/// # Safety
/// `result` must be null or a live handle; `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_threshold_eta(result: *const BellsimThreshold, out_p: *mut f64) -> BellsimStatus {
    guard(|| {
        let r = arg(result)?;
        *out(out_p)? = r.0.eta_threshold;
        Ok(())
    })
}

/// Levels recorded on the contracting curve.
///
/// # Safety
/// `result` must be null or a live handle; `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_threshold_curve_len(
    result: *const BellsimThreshold,
    out_p: *mut usize,
) -> BellsimStatus {
    guard(|| {
        let r = arg(result)?;
        *out(out_p)? = r.0.contraction_curve.levels.len();
        Ok(())
    })
}

/// Total error rate at `level` (0 = physical) of the contracting curve.
///
/// # Safety
/// `result` must be null or a live handle; `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_threshold_curve_total(
    result: *const BellsimThreshold,
    level: usize,
    out_p: *mut f64,
) -> BellsimStatus {
    guard(|| {
        let r = arg(result)?;
        let o = out(out_p)?;
        match r.0.contraction_curve.levels.get(level) {
            Some(v) => {
                *o = v.total();
                Ok(())
            }
            None => {
                set_error(format!("level {level} out of range"));
                Err(BellsimStatus::Domain)
            }
        }
    })
}

/// Releases a threshold result. Null is ignored.
///
/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bellsim_threshold_free(result: *mut BellsimThreshold) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
