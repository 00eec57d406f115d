//! Local-volatility models and the closed-form CEV oracle.
//!
//! The deflated price follows `dX = σ(X) dW` with `σ(x) = c·x^p`. For `p > 1`
//! the process is a strict local martingale: `E[X(T)] < X(t)` and the pricing
//! PDE has more than one solution. The case `c = 1, p = 2` has explicit prices,
//! collected in the free functions at the bottom of this module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{norm_cdf, two_sided_mass};

/// Functional form of `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum VolKind {
    /// `σ(x) = c·x^p`.
    #[serde(rename = "power")]
    PowerLaw { c: f64, p: f64 },
}

/// Whether `X` is a true martingale or only a local one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleClass {
    TrueMartingale,
    StrictLocalMartingale,
}

/// A driftless local-volatility model together with its initial state.
///
/// Serializes as `{"kind":"power","c":..,"p":..,"x0":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct LocalVolModel {
    kind: VolKind,
    x0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    #[serde(flatten)]
    kind: VolKind,
    x0: f64,
}

impl TryFrom<RawModel> for LocalVolModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        match raw.kind {
            VolKind::PowerLaw { c, p } => LocalVolModel::power_law(c, p, raw.x0),
        }
    }
}

impl From<LocalVolModel> for RawModel {
    fn from(m: LocalVolModel) -> Self {
        RawModel {
            kind: m.kind,
            x0: m.x0,
        }
    }
}

impl LocalVolModel {
    pub fn power_law(c: f64, p: f64, x0: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("c", format!("scale must be positive, got {c}")));
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::invalid("p", format!("exponent must be nonnegative, got {p}")));
        }
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::invalid("x0", format!("initial state must be positive, got {x0}")));
        }
        Ok(LocalVolModel {
            kind: VolKind::PowerLaw { c, p },
            x0,
        })
    }

    /// `dX = X² dW` started at `x0`.
    pub fn cev(x0: f64) -> Result<Self> {
        Self::power_law(1.0, 2.0, x0)
    }

    pub fn kind(&self) -> VolKind {
        self.kind
    }

    pub fn initial_x(&self) -> f64 {
        self.x0
    }

    /// Same volatility, different starting point.
    pub fn with_initial_x(&self, x0: f64) -> Result<Self> {
        match self.kind {
            VolKind::PowerLaw { c, p } => Self::power_law(c, p, x0),
        }
    }

    /// True for `σ(x) = x²`, the only case with closed-form prices here.
    pub fn is_cev(&self) -> bool {
        matches!(self.kind, VolKind::PowerLaw { c, p } if c == 1.0 && p == 2.0)
    }

    /// `σ(x)` for `x ≥ 0`.
    pub fn sigma_eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                name: "x",
                value: x,
                domain: "[0, ∞)",
            });
        }
        Ok(self.sigma(x))
    }

    /// Unchecked `σ(x)`; callers guarantee `x ≥ 0`.
    #[inline]
    pub(crate) fn sigma(&self, x: f64) -> f64 {
        match self.kind {
            VolKind::PowerLaw { c, p } => {
                if x == 0.0 {
                    0.0
                } else if p == 2.0 {
                    c * x * x
                } else if p == 1.0 {
                    c * x
                } else {
                    c * x.powf(p)
                }
            }
        }
    }

    /// Uniqueness criterion `∫₁^∞ x/σ²(x) dx = ∞`.
    ///
    /// For the power law the integrand is `c⁻² x^{1-2p}`, which diverges iff
    /// `p ≤ 1`.
    pub fn classify_martingale(&self) -> MartingaleClass {
        match self.kind {
            VolKind::PowerLaw { p, .. } => {
                if p <= 1.0 {
                    MartingaleClass::TrueMartingale
                } else {
                    MartingaleClass::StrictLocalMartingale
                }
            }
        }
    }
}

fn check_cev_domain(x: f64, t: f64, maturity: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "(0, ∞)",
        });
    }
    if !(t >= 0.0 && t < maturity && maturity.is_finite()) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "[0, T)",
        });
    }
    Ok(maturity - t)
}

/// `E_{x,t}[X(T)]` for `dX = X² dW`: `x(1 - 2Φ(-1/(x√(T-t))))`.
pub fn cev_price(x: f64, t: f64, maturity: f64) -> Result<f64> {
    let tau = check_cev_domain(x, t, maturity)?;
    Ok(x * two_sided_mass(1.0 / (x * tau.sqrt())))
}

/// The one-parameter family `x(1 - λΦ(-1/(x√(T-t))))` of PDE solutions with
/// terminal value `x`. `λ = 0` is the trivial solution `u = x`, `λ = 2` is the
/// price, and `λ > 2` gives solutions that are unbounded below.
pub fn cev_family(x: f64, t: f64, maturity: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            domain: "[0, ∞)",
        });
    }
    let tau = check_cev_domain(x, t, maturity)?;
    if lambda == 2.0 {
        return Ok(x * two_sided_mass(1.0 / (x * tau.sqrt())));
    }
    Ok(x * (1.0 - lambda * norm_cdf(-1.0 / (x * tau.sqrt()))))
}

/// `x - E_{x,t}[X(T)] = 2xΦ(-1/(x√(T-t)))`, the bubble component of the
/// CEV price.
pub fn martingale_defect(x: f64, t: f64, maturity: f64) -> Result<f64> {
    let tau = check_cev_domain(x, t, maturity)?;
    Ok(2.0 * x * norm_cdf(-1.0 / (x * tau.sqrt())))
}
