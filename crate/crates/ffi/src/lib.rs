//! C ABI over the `twocenter` solver.
//!
//! Instances and solutions are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns a [`TcStatus`]; outputs are written through pointers only on
//! success.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twocenter::error::Error;
use twocenter::solver::{self, Algorithm, Outcome, SolveResult, SolverConfig};
use twocenter::{Point3, Tolerance};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyInput = 3,
    Degenerate = 4,
    BoundViolated = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcOutcome {
    StrictlyCoverable = 0,
    ExactlyCritical = 1,
    NotCoverable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcAlgorithm {
    Auto = 0,
    Cubic = 1,
    Improved = 2,
    Bruteforce = 3,
}

/// Solver options; obtain defaults from [`tc_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TcConfig {
    pub algorithm: TcAlgorithm,
    pub epsilon: f64,
    pub rho: u32,
    pub seed: u64,
    pub eps_abs: f64,
    pub eps_rel: f64,
}

/// Opaque point set.
pub struct TcInstance {
    points: Vec<Point3>,
}

/// Opaque solve result.
pub struct TcSolution {
    c1: Point3,
    c2: Point3,
    radius: f64,
    partition: Vec<bool>,
    approximate: bool,
}

fn status_of(e: &Error) -> TcStatus {
    match e {
        Error::EmptyInput | Error::EmptyInstance => TcStatus::EmptyInput,
        Error::InvalidBeta(_) | Error::InvalidRadius { .. } => TcStatus::InvalidArgument,
        Error::DegenerateArrangement => TcStatus::Degenerate,
        Error::IntersectionBoundViolated { .. } => TcStatus::BoundViolated,
        _ => TcStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> TcStatus) -> TcStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(TcStatus::Panic)
}

impl TcConfig {
    fn to_config(self) -> Option<SolverConfig> {
        if !(0.0..1.0).contains(&self.epsilon)
            || self.rho < 2
            || self.eps_abs < 0.0
            || self.eps_rel < 0.0
        {
            return None;
        }
        Some(SolverConfig {
            algorithm: match self.algorithm {
                TcAlgorithm::Auto => Algorithm::Auto,
                TcAlgorithm::Cubic => Algorithm::Cubic,
                TcAlgorithm::Improved => Algorithm::Improved,
                TcAlgorithm::Bruteforce => Algorithm::Bruteforce,
            },
            epsilon: self.epsilon,
            rho: self.rho as usize,
            seed: self.seed,
            tol: Tolerance::new(self.eps_abs, self.eps_rel),
            ..SolverConfig::default()
        })
    }
}

/// Default solver options.
#[no_mangle]
pub extern "C" fn tc_config_default() -> TcConfig {
    let d = SolverConfig::default();
    TcConfig {
        algorithm: TcAlgorithm::Auto,
        epsilon: d.epsilon,
        rho: d.rho as u32,
        seed: d.seed,
        eps_abs: d.tol.eps_abs,
        eps_rel: d.tol.eps_rel,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn tc_status_message(status: TcStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        TcStatus::Ok => b"ok\0",
        TcStatus::NullPointer => b"null pointer argument\0",
        TcStatus::InvalidArgument => b"invalid argument\0",
        TcStatus::EmptyInput => b"empty input\0",
        TcStatus::Degenerate => b"degenerate input could not be resolved\0",
        TcStatus::BoundViolated => b"curve intersection bound violated\0",
        TcStatus::Internal => b"internal error\0",
        TcStatus::Panic => b"panic inside the solver\0",
    };
    s.as_ptr().cast()
}

/// Creates an instance from `n` points stored as `xyz[3i..3i+3]`.
///
/// # Safety
/// `xyz` must point to `3 * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tc_instance_new(
    xyz: *const f64,
    n: usize,
    out: *mut *mut TcInstance,
) -> TcStatus {
    guard(|| {
        if xyz.is_null() || out.is_null() {
            return TcStatus::NullPointer;
        }
        if n == 0 {
            return TcStatus::EmptyInput;
        }
        let Some(len) = n.checked_mul(3) else {
            return TcStatus::InvalidArgument;
        };
        let raw = std::slice::from_raw_parts(xyz, len);
        if raw.iter().any(|v| !v.is_finite()) {
            return TcStatus::InvalidArgument;
        }
        let points = raw
            .chunks_exact(3)
            .map(|c| Point3::new(c[0], c[1], c[2]))
            .collect();
        *out = Box::into_raw(Box::new(TcInstance { points }));
        TcStatus::Ok
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must come from [`tc_instance_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tc_instance_free(inst: *mut TcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of points, or 0 for null.
///
/// # Safety
/// `inst` must be null or a live instance.
#[no_mangle]
pub unsafe extern "C" fn tc_instance_len(inst: *const TcInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.points.len())
}

/// Decides whether two balls of radius `r` cover the instance.
///
/// # Safety
/// `inst` must be a live instance, `config` null or readable, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tc_decide(
    inst: *const TcInstance,
    r: f64,
    config: *const TcConfig,
    out: *mut TcOutcome,
) -> TcStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            return TcStatus::NullPointer;
        };
        let cfg = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| tc_config_default());
        let Some(cfg) = cfg.to_config() else {
            return TcStatus::InvalidArgument;
        };
        if !(r > 0.0) || !r.is_finite() {
            return TcStatus::InvalidArgument;
        }
        match solver::decide(&inst.points, r, &cfg) {
            Ok((d, _)) => {
                *out = match d.outcome {
                    Outcome::StrictlyCoverable => TcOutcome::StrictlyCoverable,
                    Outcome::ExactlyCritical => TcOutcome::ExactlyCritical,
                    Outcome::NotCoverable => TcOutcome::NotCoverable,
                };
                TcStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Solves the instance; on success `*out` owns a new solution handle.
///
/// # Safety
/// `inst` must be a live instance, `config` null or readable, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tc_solve(
    inst: *const TcInstance,
    config: *const TcConfig,
    out: *mut *mut TcSolution,
) -> TcStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            return TcStatus::NullPointer;
        };
        let cfg = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| tc_config_default());
        let Some(cfg) = cfg.to_config() else {
            return TcStatus::InvalidArgument;
        };
        let sol = match solver::solve(&inst.points, &cfg) {
            Ok(SolveResult::Exact(s)) => TcSolution {
                c1: s.c1,
                c2: s.c2,
                radius: s.radius,
                partition: s.partition,
                approximate: false,
            },
            Ok(SolveResult::ApproximateBySeb { ball, .. }) => TcSolution {
                c1: ball.center,
                c2: ball.center,
                radius: ball.radius,
                partition: vec![false; inst.points.len()],
                approximate: true,
            },
            Err(e) => return status_of(&e),
        };
        *out = Box::into_raw(Box::new(sol));
        TcStatus::Ok
    })
}

/// Optimal (or, when approximate, enclosing) radius; NaN for null.
///
/// # Safety
/// `sol` must be null or a live solution.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_radius(sol: *const TcSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.radius)
}

/// Whether the solution is the enclosing-ball approximation.
///
/// # Safety
/// `sol` must be null or a live solution.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_is_approximate(sol: *const TcSolution) -> bool {
    sol.as_ref().is_some_and(|s| s.approximate)
}

/// Writes both centers as six doubles `c1.xyz, c2.xyz`.
///
/// # Safety
/// `sol` must be a live solution and `out` must hold six doubles.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_centers(sol: *const TcSolution, out: *mut f64) -> TcStatus {
    let (Some(s), false) = (sol.as_ref(), out.is_null()) else {
        return TcStatus::NullPointer;
    };
    let v = [s.c1.x, s.c1.y, s.c1.z, s.c2.x, s.c2.y, s.c2.z];
    ptr::copy_nonoverlapping(v.as_ptr(), out, 6);
    TcStatus::Ok
}

/// Writes the ball index (0 or 1) of every point into `out[0..len]`;
/// `len` must equal the instance size.
///
/// # Safety
/// `sol` must be a live solution and `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_partition(
    sol: *const TcSolution,
    out: *mut u8,
    len: usize,
) -> TcStatus {
    let (Some(s), false) = (sol.as_ref(), out.is_null()) else {
        return TcStatus::NullPointer;
    };
    if len != s.partition.len() {
        return TcStatus::InvalidArgument;
    }
    for (i, &b) in s.partition.iter().enumerate() {
        *out.add(i) = u8::from(b);
    }
    TcStatus::Ok
}

/// Releases a solution; null is ignored.
///
/// # Safety
/// `sol` must come from [`tc_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tc_solution_free(sol: *mut TcSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
