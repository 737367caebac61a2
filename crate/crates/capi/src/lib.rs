//! C ABI for the chainquant library.
//!
//! Opaque handles (`CqPotential`, `CqSystem`), integer status codes, and a
//! thread-local error message. All functions are null-safe; every handle
//! returned by a `*_new`/`*_parse`/`cq_solve_*` call must be released with
//! the matching `*_free`.

use chainquant::potential::{parse_potential, Potential};
use chainquant::quantizer::{
    run_scheme, ChainSystem, ConvergenceReport, IterationConfig, RunStatus, Scheme,
};
use chainquant::wavefunction::{wave_at, WaveConfig};
use chainquant::{Complex64, Sector};
use libc::{c_char, c_double, c_int};
use std::cell::RefCell;
use std::ffi::{CStr, CString};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    NotConverged = 4,
    NumericalError = 5,
}

/// Boundary sector selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CqSector {
    Neumann = 0,
    Dirichlet = 1,
}

/// Iteration scheme selector; `Auto` picks the default for the symmetry
/// order (A for L=3, C for L=6).
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CqScheme {
    Auto = 0,
    A = 1,
    B = 2,
    C = 3,
}

/// Opaque polynomial potential handle.
pub struct CqPotential(Potential);

/// Opaque converged chain-system handle (system plus convergence report).
pub struct CqSystem {
    system: ChainSystem,
    report: ConvergenceReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Message describing the most recent failure on this thread; valid until
/// the next failing call.
#[no_mangle]
pub extern "C" fn cq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version string (static storage).
#[no_mangle]
pub extern "C" fn cq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a potential from term syntax such as `q4+2*q2-0.5*q1`.
///
/// # Safety
/// `spec` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cq_potential_parse(
    spec: *const c_char,
    out: *mut *mut CqPotential,
) -> CqStatus {
    if spec.is_null() || out.is_null() {
        return CqStatus::NullPointer;
    }
    let text = match CStr::from_ptr(spec).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("potential spec is not valid UTF-8");
            return CqStatus::ParseError;
        }
    };
    match parse_potential(text) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(CqPotential(p)));
            CqStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            CqStatus::ParseError
        }
    }
}

/// Build a potential from raw coefficients v1..v_{N-1} (length degree-1).
///
/// # Safety
/// `re`/`im` must point to `len` readable doubles (`im` may be NULL for a
/// real potential); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cq_potential_new(
    degree: u32,
    re: *const c_double,
    im: *const c_double,
    len: usize,
    out: *mut *mut CqPotential,
) -> CqStatus {
    if out.is_null() || (len > 0 && re.is_null()) {
        return CqStatus::NullPointer;
    }
    let mut coeffs = Vec::with_capacity(len);
    for i in 0..len {
        let r = *re.add(i);
        let m = if im.is_null() { 0.0 } else { *im.add(i) };
        coeffs.push(Complex64::new(r, m));
    }
    match Potential::new(degree as usize, coeffs) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(CqPotential(p)));
            CqStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            CqStatus::InvalidArgument
        }
    }
}

/// # Safety
/// `p` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cq_potential_free(p: *mut CqPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Polynomial degree N, or 0 for a null handle.
///
/// # Safety
/// `p` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn cq_potential_degree(p: *const CqPotential) -> u32 {
    if p.is_null() {
        0
    } else {
        (*p).0.degree() as u32
    }
}

/// Effective symmetry-group order L, or 0 for a null handle.
///
/// # Safety
/// `p` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn cq_potential_group_order(p: *const CqPotential) -> u32 {
    if p.is_null() {
        0
    } else {
        (*p).0.group_order() as u32
    }
}

/// Solve the exact quantization conditions for one sector. `tol <= 0` and
/// `max_cycles == 0` select the defaults (1e-10, 200).
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cq_solve_spectrum(
    p: *const CqPotential,
    sector: CqSector,
    scheme: CqScheme,
    k_max: u32,
    k_eval: u32,
    tol: c_double,
    max_cycles: u32,
    out: *mut *mut CqSystem,
) -> CqStatus {
    if p.is_null() || out.is_null() {
        return CqStatus::NullPointer;
    }
    let potential = &(*p).0;
    let sector = match sector {
        CqSector::Neumann => Sector::Neumann,
        CqSector::Dirichlet => Sector::Dirichlet,
    };
    let system = match ChainSystem::semiclassical(
        potential,
        sector,
        k_max as usize,
        (k_eval as usize).max(k_max as usize + 16),
    ) {
        Ok(s) => s,
        Err(e) => {
            set_error(&e.to_string());
            return CqStatus::InvalidArgument;
        }
    };
    let scheme = match scheme {
        CqScheme::Auto => Scheme::default_for(system.group_order()),
        CqScheme::A => Scheme::A,
        CqScheme::B => Scheme::B,
        CqScheme::C => Scheme::C,
    };
    let config = IterationConfig {
        scheme,
        newton_tol: if tol > 0.0 { tol } else { 1e-10 },
        max_cycles: if max_cycles > 0 { max_cycles as usize } else { 200 },
        k_max: k_max as usize,
        k_eval: k_eval as usize,
        ..Default::default()
    };
    match run_scheme(system, &config) {
        Ok((system, report)) => {
            let converged = report.status == RunStatus::Converged;
            *out = Box::into_raw(Box::new(CqSystem { system, report }));
            if converged {
                CqStatus::Ok
            } else {
                set_error("iteration did not converge within max_cycles");
                CqStatus::NotConverged
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            CqStatus::NumericalError
        }
    }
}

/// # Safety
/// `s` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cq_system_free(s: *mut CqSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of chains L.
///
/// # Safety
/// `s` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn cq_system_chain_count(s: *const CqSystem) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).system.group_order()
    }
}

/// Number of explicit levels in chain ℓ.
///
/// # Safety
/// `s` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn cq_system_level_count(s: *const CqSystem, ell: usize) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).system.chain(ell).levels().len()
    }
}

/// Copy chain ℓ's explicit levels into the caller's buffers; `written`
/// receives the number of levels copied (at most `cap`).
///
/// # Safety
/// `out_re`/`out_im` must hold at least `cap` doubles; `written` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn cq_system_levels(
    s: *const CqSystem,
    ell: usize,
    out_re: *mut c_double,
    out_im: *mut c_double,
    cap: usize,
    written: *mut usize,
) -> CqStatus {
    if s.is_null() || out_re.is_null() || out_im.is_null() || written.is_null() {
        return CqStatus::NullPointer;
    }
    let levels = (*s).system.chain(ell).levels();
    let n = levels.len().min(cap);
    for (i, e) in levels.iter().take(n).enumerate() {
        *out_re.add(i) = e.re;
        *out_im.add(i) = e.im;
    }
    *written = n;
    CqStatus::Ok
}

/// Fitted contraction ratio of the run (NaN when unavailable).
///
/// # Safety
/// `s` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn cq_system_contraction_ratio(s: *const CqSystem) -> c_double {
    if s.is_null() {
        return f64::NAN;
    }
    (*s).report.contraction.map(|c| c.ratio).unwrap_or(f64::NAN)
}

/// 1 when the run converged, 0 otherwise (or for a null handle).
///
/// # Safety
/// `s` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn cq_system_converged(s: *const CqSystem) -> c_int {
    if s.is_null() {
        0
    } else {
        c_int::from((*s).report.status == RunStatus::Converged)
    }
}

/// Absolute-normalized ψ at endpoint `a` for the state of energy `energy`
/// (real potential). `converged` receives 1/0.
///
/// # Safety
/// All output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cq_wave_at(
    p: *const CqPotential,
    energy: c_double,
    a: c_double,
    k_max: u32,
    psi_re: *mut c_double,
    psi_im: *mut c_double,
    converged: *mut c_int,
) -> CqStatus {
    if p.is_null() || psi_re.is_null() || psi_im.is_null() || converged.is_null() {
        return CqStatus::NullPointer;
    }
    let mut config = WaveConfig::default();
    if k_max > 0 {
        config.iteration.k_max = k_max as usize;
        config.iteration.k_eval = (12 * k_max as usize).max(256);
    }
    match wave_at(&(*p).0, energy, a, &config) {
        Ok(sample) => {
            *psi_re = sample.psi.re;
            *psi_im = sample.psi.im;
            *converged = c_int::from(sample.converged);
            CqStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            CqStatus::NumericalError
        }
    }
}
