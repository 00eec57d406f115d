//! C ABI over `bubble-core`.
//!
//! Every fallible function returns a [`BubbleStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`bubble_last_error_message`]. Panics never cross the
//! boundary; they surface as `BUBBLE_STATUS_PANIC`.
//!
//! Handles ([`BubbleModel`], [`BubbleSurface`]) are owned by the caller and
//! released with the matching `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bubble_core::mc::{self, McConfig, McEstimate, ZeroHandling};
use bubble_core::pde::{self, GridSpec, PriceSurface};
use bubble_core::{models, Error, LocalVolModel, MartingaleClass, Payoff, RebateSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleStatus {
    Ok = 0,
    InvalidParameter = 1,
    Domain = 2,
    UnstableGrid = 3,
    NotDiagonallyDominant = 4,
    MissingOracle = 5,
    Io = 6,
    Config = 7,
    NullPointer = 8,
    Panic = 9,
}

impl From<&Error> for BubbleStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => BubbleStatus::InvalidParameter,
            Error::Domain { .. } => BubbleStatus::Domain,
            Error::UnstableGrid { .. } => BubbleStatus::UnstableGrid,
            Error::NotDiagonallyDominant { .. } => BubbleStatus::NotDiagonallyDominant,
            Error::MissingOracle(_) => BubbleStatus::MissingOracle,
            Error::Io(_) => BubbleStatus::Io,
            Error::Config(_) => BubbleStatus::Config,
        }
    }
}

/// Opaque model handle.
pub struct BubbleModel {
    inner: LocalVolModel,
}

/// Opaque solved PDE surface.
pub struct BubbleSurface {
    inner: PriceSurface,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubblePayoffKind {
    Identity = 0,
    Power = 1,
    Call = 2,
    Constant = 3,
}

/// `param` is γ, the strike or the constant; ignored for `IDENTITY`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BubblePayoff {
    pub kind: BubblePayoffKind,
    pub param: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleRebateKind {
    Zero = 0,
    Constant = 1,
    Power = 2,
}

/// `param` is the constant or η; ignored for `ZERO`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BubbleRebate {
    pub kind: BubbleRebateKind,
    pub param: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleZeroHandling {
    AbsorbAtZero = 0,
    ExtendPayoff = 1,
}

/// A non-positive or NaN `barrier` means no barrier.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BubbleMcConfig {
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub barrier: f64,
    pub zero_handling: BubbleZeroHandling,
    pub t0: f64,
    pub maturity: f64,
    pub antithetic: bool,
}

/// `keep_every = 0` stores only the first and last time levels.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BubbleGrid {
    pub beta: f64,
    pub n_space: usize,
    pub n_time: usize,
    pub theta: f64,
    pub maturity: f64,
    pub keep_every: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BubbleMcEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub hit_fraction: f64,
    pub overflow_count: u64,
}

impl From<McEstimate> for BubbleMcEstimate {
    fn from(e: McEstimate) -> Self {
        BubbleMcEstimate {
            mean: e.mean,
            std_error: e.std_error,
            n_paths: e.n_paths,
            hit_fraction: e.hit_fraction,
            overflow_count: e.overflow_count,
        }
    }
}

impl From<BubblePayoff> for Payoff {
    fn from(p: BubblePayoff) -> Self {
        match p.kind {
            BubblePayoffKind::Identity => Payoff::Identity,
            BubblePayoffKind::Power => Payoff::Power { gamma: p.param },
            BubblePayoffKind::Call => Payoff::Call { strike: p.param },
            BubblePayoffKind::Constant => Payoff::Constant { value: p.param },
        }
    }
}

impl From<BubbleRebate> for RebateSpec {
    fn from(g: BubbleRebate) -> Self {
        match g.kind {
            BubbleRebateKind::Zero => RebateSpec::Zero,
            BubbleRebateKind::Constant => RebateSpec::Constant { value: g.param },
            BubbleRebateKind::Power => RebateSpec::Power { eta: g.param },
        }
    }
}

impl From<BubbleMcConfig> for McConfig {
    fn from(c: BubbleMcConfig) -> Self {
        let cfg = McConfig::new(c.dt, c.n_paths, c.seed, c.maturity)
            .with_start(c.t0)
            .with_antithetic(c.antithetic)
            .with_zero_handling(match c.zero_handling {
                BubbleZeroHandling::AbsorbAtZero => ZeroHandling::AbsorbAtZero,
                BubbleZeroHandling::ExtendPayoff => ZeroHandling::ExtendPayoff,
            });
        if c.barrier > 0.0 {
            cfg.with_barrier(c.barrier)
        } else {
            cfg
        }
    }
}

impl BubbleGrid {
    fn to_spec(self) -> Result<GridSpec, Error> {
        let g = GridSpec::new(self.beta, self.n_space, self.n_time, self.theta, self.maturity)?;
        g.keeping_every(if self.keep_every == 0 { self.n_time } else { self.keep_every })
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(BubbleStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_last_error(e.to_string());
        Fail(BubbleStatus::from(&e))
    }
}

fn null() -> Fail {
    set_last_error("null pointer argument".into());
    Fail(BubbleStatus::NullPointer)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BubbleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BubbleStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            BubbleStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bubble_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bubble_status_str(status: BubbleStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        BubbleStatus::Ok => b"ok\0",
        BubbleStatus::InvalidParameter => b"invalid parameter\0",
        BubbleStatus::Domain => b"argument outside its domain\0",
        BubbleStatus::UnstableGrid => b"unstable grid\0",
        BubbleStatus::NotDiagonallyDominant => b"matrix not diagonally dominant\0",
        BubbleStatus::MissingOracle => b"no analytic reference\0",
        BubbleStatus::Io => b"i/o error\0",
        BubbleStatus::Config => b"malformed configuration\0",
        BubbleStatus::NullPointer => b"null pointer argument\0",
        BubbleStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn bubble_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `σ(x) = c·x^p` started at `x0`.
#[no_mangle]
pub unsafe extern "C" fn bubble_model_new(c: f64, p: f64, x0: f64, out: *mut *mut BubbleModel) -> BubbleStatus {
    guard(|| {
        let inner = LocalVolModel::power_law(c, p, x0)?;
        write(out, Box::into_raw(Box::new(BubbleModel { inner })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn bubble_model_free(model: *mut BubbleModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn bubble_model_sigma(model: *const BubbleModel, x: f64, out: *mut f64) -> BubbleStatus {
    guard(|| write(out, borrow(model)?.inner.sigma_eval(x)?))
}

/// Writes `true` when the price process is a strict local martingale.
#[no_mangle]
pub unsafe extern "C" fn bubble_model_is_strict_local(model: *const BubbleModel, out: *mut bool) -> BubbleStatus {
    guard(|| {
        let class = borrow(model)?.inner.classify_martingale();
        write(out, class == MartingaleClass::StrictLocalMartingale)
    })
}

#[no_mangle]
pub unsafe extern "C" fn bubble_cev_price(x: f64, t: f64, maturity: f64, out: *mut f64) -> BubbleStatus {
    guard(|| write(out, models::cev_price(x, t, maturity)?))
}

#[no_mangle]
pub unsafe extern "C" fn bubble_cev_family(x: f64, t: f64, maturity: f64, lambda: f64, out: *mut f64) -> BubbleStatus {
    guard(|| write(out, models::cev_family(x, t, maturity, lambda)?))
}

#[no_mangle]
pub unsafe extern "C" fn bubble_martingale_defect(x: f64, t: f64, maturity: f64, out: *mut f64) -> BubbleStatus {
    guard(|| write(out, models::martingale_defect(x, t, maturity)?))
}

#[no_mangle]
pub unsafe extern "C" fn bubble_payoff_eval(payoff: BubblePayoff, x: f64, out: *mut f64) -> BubbleStatus {
    guard(|| {
        let f = Payoff::from(payoff);
        f.validate()?;
        write(out, f.eval(x))
    })
}

/// `f^β(x)`.
#[no_mangle]
pub unsafe extern "C" fn bubble_payoff_truncate(payoff: BubblePayoff, beta: f64, x: f64, out: *mut f64) -> BubbleStatus {
    guard(|| {
        let f = Payoff::from(payoff);
        f.validate()?;
        write(out, f.truncate(beta, x)?)
    })
}

/// Plain Euler-Maruyama estimate; `cfg->barrier` must be unset.
#[no_mangle]
pub unsafe extern "C" fn bubble_mc_price_naive(
    model: *const BubbleModel,
    payoff: BubblePayoff,
    cfg: *const BubbleMcConfig,
    out: *mut BubbleMcEstimate,
) -> BubbleStatus {
    guard(|| {
        let est = mc::price_naive(&borrow(model)?.inner, &payoff.into(), &(*borrow(cfg)?).into())?;
        write(out, est.into())
    })
}

/// Knock-out estimate paying `g(β)` on a hit; `cfg->barrier` is β.
#[no_mangle]
pub unsafe extern "C" fn bubble_mc_price_rebate(
    model: *const BubbleModel,
    payoff: BubblePayoff,
    rebate: BubbleRebate,
    cfg: *const BubbleMcConfig,
    out: *mut BubbleMcEstimate,
) -> BubbleStatus {
    guard(|| {
        let cfg: McConfig = (*borrow(cfg)?).into();
        if cfg.barrier.is_none() {
            return Err(Error::InvalidParameter {
                name: "barrier",
                reason: "the rebate estimator needs a positive barrier".into(),
            }
            .into());
        }
        let est = mc::price_rebate(&borrow(model)?.inner, &payoff.into(), &rebate.into(), &cfg)?;
        write(out, est.into())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bubble_mc_hitting_probability(
    model: *const BubbleModel,
    cfg: *const BubbleMcConfig,
    out: *mut BubbleMcEstimate,
) -> BubbleStatus {
    guard(|| {
        let est = mc::hitting_probability(&borrow(model)?.inner, &(*borrow(cfg)?).into())?;
        write(out, est.into())
    })
}

unsafe fn emit_surface(out: *mut *mut BubbleSurface, inner: PriceSurface) -> Result<(), Fail> {
    write(out, Box::into_raw(Box::new(BubbleSurface { inner })))
}

/// Terminal `f^β`, zero upper boundary.
#[no_mangle]
pub unsafe extern "C" fn bubble_pde_solve_fbeta(
    model: *const BubbleModel,
    payoff: BubblePayoff,
    grid: *const BubbleGrid,
    out: *mut *mut BubbleSurface,
) -> BubbleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = borrow(grid)?.to_spec()?;
        emit_surface(out, pde::solve_fbeta_pde(&borrow(model)?.inner, &payoff.into(), &spec)?)
    })
}

/// Terminal `f`, upper boundary `g(β)`.
#[no_mangle]
pub unsafe extern "C" fn bubble_pde_solve_rebate(
    model: *const BubbleModel,
    payoff: BubblePayoff,
    rebate: BubbleRebate,
    grid: *const BubbleGrid,
    out: *mut *mut BubbleSurface,
) -> BubbleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = borrow(grid)?.to_spec()?;
        emit_surface(out, pde::solve_rebate_pde(&borrow(model)?.inner, &payoff.into(), &rebate.into(), &spec)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn bubble_surface_free(surface: *mut BubbleSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Bilinear interpolation on the stored levels.
#[no_mangle]
pub unsafe extern "C" fn bubble_surface_at(surface: *const BubbleSurface, x: f64, t: f64, out: *mut f64) -> BubbleStatus {
    guard(|| write(out, borrow(surface)?.inner.surface_at(x, t)?))
}

/// Nodes per row (`n_space + 2`) and number of stored time levels.
#[no_mangle]
pub unsafe extern "C" fn bubble_surface_dims(
    surface: *const BubbleSurface,
    n_nodes: *mut usize,
    n_levels: *mut usize,
) -> BubbleStatus {
    guard(|| {
        let s = &borrow(surface)?.inner;
        write(n_nodes, s.width())?;
        write(n_levels, s.levels().len())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bubble_surface_corner_gap(surface: *const BubbleSurface, out: *mut f64) -> BubbleStatus {
    guard(|| write(out, borrow(surface)?.inner.corner_gap()))
}

/// Copies stored level `index` (ascending in time) into `buf`, which must
/// hold `len ≥ n_nodes` values, and writes its time to `t_out`.
#[no_mangle]
pub unsafe extern "C" fn bubble_surface_level(
    surface: *const BubbleSurface,
    index: usize,
    t_out: *mut f64,
    buf: *mut f64,
    len: usize,
) -> BubbleStatus {
    guard(|| {
        let s = &borrow(surface)?.inner;
        if buf.is_null() {
            return Err(null());
        }
        let (j, row) = s.rows().nth(index).ok_or_else(|| {
            Fail::from(Error::InvalidParameter {
                name: "index",
                reason: format!("only {} levels are stored", s.levels().len()),
            })
        })?;
        if len < row.len() {
            return Err(Error::InvalidParameter {
                name: "len",
                reason: format!("buffer holds {len} values, row has {}", row.len()),
            }
            .into());
        }
        std::slice::from_raw_parts_mut(buf, row.len()).copy_from_slice(row);
        write(t_out, s.grid().t(j))
    })
}
