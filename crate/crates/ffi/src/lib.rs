//! C ABI for the `nasg` solver.
//!
//! Games and reports are opaque handles created and released through this
//! interface. Every fallible function returns a [`NasgStatus`]; on failure
//! [`nasg_last_error`] describes the most recent error on the calling thread.
//! Sets cross the boundary as `uint32_t` bitmasks, bit `i - 1` standing for
//! target `i`. Strings returned by the library are released with
//! [`nasg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nasg::cli::{GameFile, ReportFile};
use nasg::netsec::{solve_network_game, FailureOperator, Network, ValueFunction};
use nasg::oracles::OracleMethod;
use nasg::setfn::{self, GroundSet, SetFunction, Subset, MAX_DENSE_TARGETS};
use nasg::solver::{best_response_gap, solve_bruteforce, solve_compact, EquilibriumReport, SolverConfig};
use nasg::{GameSpec, NasgError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NasgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    Capacity = 4,
    Solver = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NasgFunction {
    Benefit = 0,
    CostAttacker = 1,
    CostDefender = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NasgOracle {
    Auto = 0,
    Bruteforce = 1,
    Separable = 2,
    Additive = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NasgSide {
    Defender = 0,
    Attacker = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NasgValueFunction {
    ConnectedPairs = 0,
    LargestComponent = 1,
    WeightedComponentSum = 2,
}

/// Game under construction: ground size, caps and three set functions.
pub struct NasgGame {
    c: usize,
    k: usize,
    functions: [SetFunction; 3],
}

/// Solver output with its certified best-response gaps.
pub struct NasgReport {
    report: EquilibriumReport,
    file: ReportFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &NasgError) -> NasgStatus {
    match e {
        NasgError::Parse(_) => NasgStatus::Parse,
        NasgError::Capacity(_) => NasgStatus::Capacity,
        NasgError::InvalidInput(_)
        | NasgError::InvalidStrategy(_)
        | NasgError::DimensionMismatch { .. }
        | NasgError::Io(_) => NasgStatus::InvalidInput,
        _ => NasgStatus::Solver,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (NasgStatus, String)>) -> NasgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NasgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside nasg".into());
            NasgStatus::Panic
        }
    }
}

fn lib(e: NasgError) -> (NasgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (NasgStatus, String) {
    (NasgStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (NasgStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (NasgStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (NasgStatus::InvalidInput, format!("{name} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (NasgStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

impl NasgGame {
    fn spec(&self) -> Result<GameSpec, NasgError> {
        let [b, ca, cd] = self.functions.clone();
        GameSpec::new(b, ca, cd, self.c, self.k)
    }
}

fn boxed_report(report: EquilibriumReport, gaps: (f64, f64), error_bound: Option<f64>) -> *mut NasgReport {
    let file = ReportFile::new(&report, gaps, error_bound);
    Box::into_raw(Box::new(NasgReport { report, file }))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nasg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a game on `n` targets with all set functions zero.
///
/// # Safety
/// `out` must be null or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn nasg_game_new(n: usize, c: usize, k: usize, out: *mut *mut NasgGame) -> NasgStatus {
    guard(|| {
        let ground = GroundSet::new(n).map_err(lib)?;
        if c > n || k > n {
            return Err((NasgStatus::InvalidInput, format!("caps c={c}, k={k} exceed n={n}")));
        }
        let functions = [SetFunction::new(ground), SetFunction::new(ground), SetFunction::new(ground)];
        let game = Box::into_raw(Box::new(NasgGame { c, k, functions }));
        write_out(out, game, "out").inspect_err(|_| drop(Box::from_raw(game)))
    })
}

/// Parses a JSON game document.
///
/// # Safety
/// `json` must be null or a nul-terminated string; `out` must be null or
/// valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn nasg_game_from_json(json: *const c_char, out: *mut *mut NasgGame) -> NasgStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let spec = GameFile::parse(text).and_then(|f| f.to_spec()).map_err(lib)?;
        let functions = [spec.benefit().clone(), spec.cost_attacker().clone(), spec.cost_defender().clone()];
        let game = Box::into_raw(Box::new(NasgGame { c: spec.attacker_cap(), k: spec.defender_cap(), functions }));
        write_out(out, game, "out").inspect_err(|_| drop(Box::from_raw(game)))
    })
}

/// Sets `f(mask) = value` for one of the game's set functions.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nasg_game_set(game: *mut NasgGame, which: NasgFunction, mask: u32, value: f64) -> NasgStatus {
    guard(|| {
        let game = game.as_mut().ok_or_else(|| null("game"))?;
        game.functions[which as usize].set(Subset(mask), value).map_err(lib)
    })
}

/// Serializes the game as JSON; free the string with [`nasg_string_free`].
///
/// # Safety
/// `game` must be null or a live handle; `out` must be null or valid for
/// writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn nasg_game_to_json(game: *const NasgGame, out: *mut *mut c_char) -> NasgStatus {
    guard(|| {
        let spec = deref(game, "game")?.spec().map_err(lib)?;
        write_out(out, into_c_string(GameFile::from_spec(&spec).to_json()), "out")
    })
}

/// # Safety
/// `game` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nasg_game_free(game: *mut NasgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Solves with the compact double oracle. `tol` is the best-response gap
/// threshold; pass a negative value for the default.
///
/// # Safety
/// `game` must be null or a live handle; `out` must be null or valid for
/// writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn nasg_solve(
    game: *const NasgGame,
    tol: f64,
    oracle: NasgOracle,
    out: *mut *mut NasgReport,
) -> NasgStatus {
    guard(|| {
        let spec = deref(game, "game")?.spec().map_err(lib)?;
        let oracle = match oracle {
            NasgOracle::Auto => OracleMethod::Auto,
            NasgOracle::Bruteforce => OracleMethod::Bruteforce,
            NasgOracle::Separable => OracleMethod::Separable,
            NasgOracle::Additive => OracleMethod::Additive,
        };
        let mut config = SolverConfig { oracle, ..SolverConfig::default() };
        if tol >= 0.0 {
            config.eps_gap = tol;
        }
        let report = solve_compact(&spec, &config).map_err(lib)?;
        let gaps = best_response_gap(&spec, &report).map_err(lib)?;
        let handle = boxed_report(report, gaps, None);
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// Solves the expanded normal form directly.
///
/// # Safety
/// As for [`nasg_solve`].
#[no_mangle]
pub unsafe extern "C" fn nasg_solve_bruteforce(game: *const NasgGame, out: *mut *mut NasgReport) -> NasgStatus {
    guard(|| {
        let spec = deref(game, "game")?.spec().map_err(lib)?;
        let report = solve_bruteforce(&spec).map_err(lib)?;
        let gaps = best_response_gap(&spec, &report).map_err(lib)?;
        let handle = boxed_report(report, gaps, None);
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// Builds and solves a network game from an edge list (`nodes N` then
/// `u v` lines) or a JSON graph. `param` is the exponent of
/// `WEIGHTED_COMPONENT_SUM`; `theta > 0` selects the threshold cascade,
/// otherwise nodes are simply removed.
///
/// # Safety
/// `graph` must be null or a nul-terminated string; `out` must be null or
/// valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn nasg_net_solve(
    graph: *const c_char,
    value_fn: NasgValueFunction,
    param: f64,
    theta: f64,
    c: usize,
    eps_c: f64,
    out: *mut *mut NasgReport,
) -> NasgStatus {
    guard(|| {
        let net = Network::parse(c_str(graph, "graph")?).map_err(lib)?;
        let t = match value_fn {
            NasgValueFunction::ConnectedPairs => ValueFunction::ConnectedPairs,
            NasgValueFunction::LargestComponent => ValueFunction::LargestComponent,
            NasgValueFunction::WeightedComponentSum => {
                ValueFunction::from_name("weighted_component_sum", param).map_err(lib)?
            }
        };
        let f = if theta > 0.0 {
            FailureOperator::from_name("threshold_cascade", theta).map_err(lib)?
        } else {
            FailureOperator::NodeRemoval
        };
        let (report, approx) = solve_network_game(&net, t, f, c, eps_c, &SolverConfig::default()).map_err(lib)?;
        let gaps = best_response_gap(&approx.spec, &report).map_err(lib)?;
        let handle = boxed_report(report, gaps, Some(approx.error_bound));
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// Game value for the attacker.
///
/// # Safety
/// `report` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_value(report: *const NasgReport, out: *mut f64) -> NasgStatus {
    guard(|| write_out(out, deref(report, "report")?.report.value, "out"))
}

/// # Safety
/// `report` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_converged(report: *const NasgReport, out: *mut bool) -> NasgStatus {
    guard(|| write_out(out, deref(report, "report")?.report.converged, "out"))
}

/// # Safety
/// `report` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_iterations(report: *const NasgReport, out: *mut usize) -> NasgStatus {
    guard(|| write_out(out, deref(report, "report")?.report.iterations, "out"))
}

/// Best-response improvements left to the attacker and the defender.
///
/// # Safety
/// `report` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_gaps(report: *const NasgReport, attacker: *mut f64, defender: *mut f64) -> NasgStatus {
    guard(|| {
        let r = deref(report, "report")?;
        write_out(attacker, r.file.gaps[0], "attacker")?;
        write_out(defender, r.file.gaps[1], "defender")
    })
}

/// Number of pure strategies in one side's mixture.
///
/// # Safety
/// `report` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_atom_count(report: *const NasgReport, side: NasgSide, out: *mut usize) -> NasgStatus {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let m = if side == NasgSide::Defender { &r.defender } else { &r.attacker };
        write_out(out, m.len(), "out")
    })
}

/// Atom `index` of one side's mixture as a bitmask and its probability.
///
/// # Safety
/// `report` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_atom(
    report: *const NasgReport,
    side: NasgSide,
    index: usize,
    mask: *mut u32,
    prob: *mut f64,
) -> NasgStatus {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let m = if side == NasgSide::Defender { &r.defender } else { &r.attacker };
        let &(s, p) = m
            .atoms()
            .get(index)
            .ok_or_else(|| (NasgStatus::OutOfRange, format!("atom {index} of {}", m.len())))?;
        write_out(mask, s.bits(), "mask")?;
        write_out(prob, p, "prob")
    })
}

/// Report as the JSON document written by the command-line tool.
///
/// # Safety
/// `report` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_to_json(report: *const NasgReport, out: *mut *mut c_char) -> NasgStatus {
    guard(|| write_out(out, into_c_string(deref(report, "report")?.file.to_json()), "out"))
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nasg_report_free(report: *mut NasgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nasg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn dense_transform(n: usize, values: *const f64, out: *mut f64, forward: bool) -> NasgStatus {
    guard(|| {
        if n > MAX_DENSE_TARGETS {
            return Err((NasgStatus::Capacity, format!("n={n} exceeds {MAX_DENSE_TARGETS}")));
        }
        if values.is_null() || out.is_null() {
            return Err(null("values/out"));
        }
        let len = 1usize << n;
        let input = std::slice::from_raw_parts(values, len);
        if input.iter().any(|v| !v.is_finite()) {
            return Err((NasgStatus::InvalidInput, "non-finite value".into()));
        }
        let mut table = input.to_vec();
        if forward {
            setfn::moebius_in_place(&mut table);
        } else {
            setfn::zeta_in_place(&mut table);
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&table);
        Ok(())
    })
}

/// Möbius transform of a dense table of `2^n` values indexed by bitmask.
/// `values` and `out` may alias.
///
/// # Safety
/// Both pointers must be null or valid for `2^n` doubles.
#[no_mangle]
pub unsafe extern "C" fn nasg_moebius(n: usize, values: *const f64, out: *mut f64) -> NasgStatus {
    dense_transform(n, values, out, true)
}

/// Zeta transform, the inverse of [`nasg_moebius`].
///
/// # Safety
/// As for [`nasg_moebius`].
#[no_mangle]
pub unsafe extern "C" fn nasg_zeta(n: usize, values: *const f64, out: *mut f64) -> NasgStatus {
    dense_transform(n, values, out, false)
}
