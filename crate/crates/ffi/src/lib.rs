//! C ABI over the `qnash` library.
//!
//! Every function returns a [`QnStatus`]; results come back through out
//! pointers. Games and equilibrium reports are opaque handles released with
//! [`qn_game_free`] and [`qn_report_free`]. On failure, a description of the
//! most recent error on the calling thread is available from
//! [`qn_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qnash::config::{named_payoffs, ConfigError};
use qnash::discord::{discord_with, DiscordOptions};
use qnash::equilibrium::{find_nash_equilibria, CriticalPoint, EquilibriumReport, NashClass, Verdict};
use qnash::game::{expected_payoff, f_function, GameInstance, Player, Priors, StrategyProfile};
use qnash::linalg::Subsystem;
use qnash::states::{StateError, StateSpec};

/// Result code of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BadSpec = 3,
    InvalidState = 4,
    Io = 5,
    InvalidArgument = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnPlayer {
    A = 0,
    B = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnOrientation {
    MeasureB = 0,
    MeasureA = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnVerdict {
    StrictNashFound = 0,
    WeakNashFlat = 1,
    WeakNashFound = 2,
    None = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnNashClass {
    StrictNash = 0,
    WeakNash = 1,
    NotNash = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QnDiscord {
    pub discord: f64,
    pub optimal_theta: f64,
    pub optimal_phi: f64,
    pub mutual_information: f64,
    pub j_value: f64,
}

/// One stationary point; angles are (θa, θa′, θb, θb′).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnCriticalPoint {
    pub angles: [f64; 4],
    pub jacobian_norm: f64,
    pub hessian_diag: [f64; 4],
    pub hessian_class: QnNashClass,
    pub classification: QnNashClass,
    pub payoff_a: f64,
    pub payoff_b: f64,
}

/// Opaque game handle.
pub struct QnGame(GameInstance);

/// Opaque equilibrium report handle.
pub struct QnReport(EquilibriumReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Outcome<T> = Result<T, (QnStatus, String)>;

fn fail<T>(status: QnStatus, msg: impl Into<String>) -> Outcome<T> {
    Err((status, msg.into()))
}

fn guard(body: impl FnOnce() -> Outcome<()>) -> QnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QnStatus::Internal
        }
    }
}

fn state_status(e: &StateError) -> QnStatus {
    match e {
        StateError::Io { .. } => QnStatus::Io,
        StateError::Invalid(_) => QnStatus::InvalidState,
        _ => QnStatus::BadSpec,
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return fail(QnStatus::NullPointer, format!("{what} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(QnStatus::InvalidUtf8, format!("{what} is not UTF-8")),
    }
}

unsafe fn read_profile(angles: *const f64) -> Outcome<StrategyProfile> {
    if angles.is_null() {
        return fail(QnStatus::NullPointer, "angles is null");
    }
    let a = ptr::read(angles as *const [f64; 4]);
    StrategyProfile::new(a).or_else(|e| fail(QnStatus::InvalidArgument, e.to_string()))
}

fn out_ref<'a, T>(p: *mut T, what: &str) -> Outcome<&'a mut T> {
    // SAFETY: callers pass either null or a valid, writable, aligned pointer
    unsafe { p.as_mut() }.ok_or((QnStatus::NullPointer, format!("{what} is null")))
}

fn nash_class(c: NashClass) -> QnNashClass {
    match c {
        NashClass::StrictNash => QnNashClass::StrictNash,
        NashClass::WeakNash => QnNashClass::WeakNash,
        NashClass::NotNash => QnNashClass::NotNash,
    }
}

fn point(p: &CriticalPoint) -> QnCriticalPoint {
    QnCriticalPoint {
        angles: p.angles(),
        jacobian_norm: p.jacobian_norm,
        hessian_diag: p.hessian_diag,
        hessian_class: nash_class(p.hessian_class),
        classification: nash_class(p.classification),
        payoff_a: p.payoff_a,
        payoff_b: p.payoff_b,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next API call on the same thread.
#[no_mangle]
pub extern "C" fn qn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a game from a state spec (`werner:0.1`, `d2:pi/2`, ...) and a payoff
/// table name (`standard` or `biased`) with uniform priors.
///
/// # Safety
/// `state_spec` and `payoffs` must be NUL-terminated strings or null; `out`
/// must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn qn_game_new(state_spec: *const c_char, payoffs: *const c_char, out: *mut *mut QnGame) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let spec = read_str(state_spec, "state_spec")?;
        let table = read_str(payoffs, "payoffs")?;
        let family = StateSpec::parse(spec)
            .and_then(|s| s.build())
            .map_err(|e| (state_status(&e), e.to_string()))?;
        let tensor = named_payoffs(table).map_err(|e: ConfigError| (QnStatus::BadSpec, e.to_string()))?;
        let game = GameInstance::new(tensor, Priors::uniform(), family.rho)
            .map_err(|e| (QnStatus::InvalidState, e.to_string()))?
            .with_label(format!("{spec} {table}"));
        *out = Box::into_raw(Box::new(QnGame(game)));
        Ok(())
    })
}

/// # Safety
/// `game` must come from [`qn_game_new`] and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn qn_game_free(game: *mut QnGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Expected payoff of `player` (0 = Alice, 1 = Bob) at `angles[4]`.
///
/// # Safety
/// `game` must be a live handle; `angles` must point to four doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_game_expected_payoff(
    game: *const QnGame,
    angles: *const f64,
    player: u32,
    out: *mut f64,
) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let game = game.as_ref().ok_or((QnStatus::NullPointer, "game is null".to_string()))?;
        let profile = read_profile(angles)?;
        let player = match player {
            p if p == QnPlayer::A as u32 => Player::A,
            p if p == QnPlayer::B as u32 => Player::B,
            p => return fail(QnStatus::InvalidArgument, format!("unknown player {p}")),
        };
        *out = expected_payoff(&game.0, &profile, player).map_err(|e| (QnStatus::Internal, e.to_string()))?;
        Ok(())
    })
}

/// f = U_A − (U_A + U_B)/2 at `angles[4]`.
///
/// # Safety
/// As for [`qn_game_expected_payoff`].
#[no_mangle]
pub unsafe extern "C" fn qn_game_f(game: *const QnGame, angles: *const f64, out: *mut f64) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let game = game.as_ref().ok_or((QnStatus::NullPointer, "game is null".to_string()))?;
        let profile = read_profile(angles)?;
        *out = f_function(&game.0, &profile).map_err(|e| (QnStatus::Internal, e.to_string()))?;
        Ok(())
    })
}

/// Discord of the state named by `state_spec`, measuring B (`orientation` 0)
/// or A (1).
///
/// # Safety
/// `state_spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_discord(state_spec: *const c_char, orientation: u32, out: *mut QnDiscord) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec = read_str(state_spec, "state_spec")?;
        let measured = match orientation {
            o if o == QnOrientation::MeasureB as u32 => Subsystem::B,
            o if o == QnOrientation::MeasureA as u32 => Subsystem::A,
            o => return fail(QnStatus::InvalidArgument, format!("unknown orientation {o}")),
        };
        let family = StateSpec::parse(spec)
            .and_then(|s| s.build())
            .map_err(|e| (state_status(&e), e.to_string()))?;
        let opts = DiscordOptions {
            measured,
            azimuthal_scan: false,
        };
        let r = discord_with(&family.rho, &opts).map_err(|e| (QnStatus::Internal, e.to_string()))?;
        *out = QnDiscord {
            discord: r.discord,
            optimal_theta: r.optimal_theta.radians(),
            optimal_phi: r.optimal_phi,
            mutual_information: r.mutual_information,
            j_value: r.j_value,
        };
        Ok(())
    })
}

/// Runs the equilibrium search on a `grid`⁴ lattice (grid ≥ 5).
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_find_equilibria(game: *const QnGame, grid: usize, out: *mut *mut QnReport) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let game = game.as_ref().ok_or((QnStatus::NullPointer, "game is null".to_string()))?;
        let report = find_nash_equilibria(&game.0, grid).map_err(|e| (QnStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(QnReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_report_verdict(report: *const QnReport, out: *mut QnVerdict) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let report = report.as_ref().ok_or((QnStatus::NullPointer, "report is null".to_string()))?;
        *out = match report.0.verdict {
            Verdict::StrictNashFound => QnVerdict::StrictNashFound,
            Verdict::WeakNashFlat => QnVerdict::WeakNashFlat,
            Verdict::WeakNashFound => QnVerdict::WeakNashFound,
            Verdict::None => QnVerdict::None,
        };
        Ok(())
    })
}

/// Number of stationary points in the report.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_report_point_count(report: *const QnReport, out: *mut usize) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let report = report.as_ref().ok_or((QnStatus::NullPointer, "report is null".to_string()))?;
        *out = report.0.critical_points.len();
        Ok(())
    })
}

/// Copies point `index` into `out`.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qn_report_point(report: *const QnReport, index: usize, out: *mut QnCriticalPoint) -> QnStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let report = report.as_ref().ok_or((QnStatus::NullPointer, "report is null".to_string()))?;
        let p = report
            .0
            .critical_points
            .get(index)
            .ok_or((QnStatus::InvalidArgument, format!("index {index} out of range")))?;
        *out = point(p);
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`qn_find_equilibria`] and not have been freed, or
/// be null.
#[no_mangle]
pub unsafe extern "C" fn qn_report_free(report: *mut QnReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
