//! Terminal payoffs, rebates and the tapered payoff `f^β`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terminal payoff `f: [0, ∞) → [0, ∞)` with growth `f(x) ≤ K(1 + x^γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payoff {
    /// `f(x) = x`.
    Identity,
    /// `f(x) = x^γ`, `γ ∈ [0, 1]`, with `0⁰ = 1`.
    Power { gamma: f64 },
    /// `f(x) = (x - K)⁺`.
    Call { strike: f64 },
    /// `f(x) = v`.
    Constant { value: f64 },
}

impl Payoff {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Payoff::Identity => Ok(()),
            Payoff::Power { gamma } if (0.0..=1.0).contains(&gamma) => Ok(()),
            Payoff::Power { gamma } => Err(Error::invalid(
                "gamma",
                format!("power payoff exponent must lie in [0, 1], got {gamma}"),
            )),
            Payoff::Call { strike } if strike.is_finite() && strike > 0.0 => Ok(()),
            Payoff::Call { strike } => Err(Error::invalid(
                "strike",
                format!("strike must be positive, got {strike}"),
            )),
            Payoff::Constant { value } if value.is_finite() && value >= 0.0 => Ok(()),
            Payoff::Constant { value } => Err(Error::invalid(
                "value",
                format!("constant payoff must be nonnegative, got {value}"),
            )),
        }
    }

    /// Growth exponent `γ`.
    pub fn growth_gamma(&self) -> f64 {
        match *self {
            Payoff::Identity | Payoff::Call { .. } => 1.0,
            Payoff::Power { gamma } => gamma,
            Payoff::Constant { .. } => 0.0,
        }
    }

    /// `f(x)`, extended to the negative axis by `f(x) = f(0)`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let x = if x < 0.0 { 0.0 } else { x };
        match *self {
            Payoff::Identity => x,
            Payoff::Power { gamma } => x.powf(gamma),
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Constant { value } => value,
        }
    }

    /// `f^β(x) = f(x)` on `[0, β/2]` and `2f(x)(β - x)/β` on `(β/2, β]`.
    ///
    /// Vanishes at `x = β` so the terminal datum meets the zero upper boundary
    /// continuously.
    pub fn truncate(&self, beta: f64, x: f64) -> Result<f64> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain {
                name: "beta",
                value: beta,
                domain: "(0, ∞)",
            });
        }
        if !(0.0..=beta).contains(&x) {
            return Err(Error::Domain {
                name: "x",
                value: x,
                domain: "[0, β]",
            });
        }
        Ok(self.truncate_unchecked(beta, x))
    }

    #[inline]
    pub(crate) fn truncate_unchecked(&self, beta: f64, x: f64) -> f64 {
        let fx = self.eval(x);
        if x <= 0.5 * beta {
            fx
        } else {
            2.0 * fx * (beta - x) / beta
        }
    }
}

/// Rebate `g(β)` paid when the barrier is reached before maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RebateSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `g(β) = β^η`, `η ∈ [0, 1]`; `η = 1` is linear and only sublinear for `η < 1`.
    Power {
        eta: f64,
    },
}

impl RebateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RebateSpec::Zero => Ok(()),
            RebateSpec::Constant { value } if value.is_finite() && value >= 0.0 => Ok(()),
            RebateSpec::Constant { value } => Err(Error::invalid(
                "value",
                format!("rebate must be nonnegative, got {value}"),
            )),
            RebateSpec::Power { eta } if (0.0..=1.0).contains(&eta) => Ok(()),
            RebateSpec::Power { eta } => Err(Error::invalid(
                "eta",
                format!("rebate exponent must lie in [0, 1], got {eta}"),
            )),
        }
    }

    pub fn growth_eta(&self) -> f64 {
        match *self {
            RebateSpec::Zero | RebateSpec::Constant { .. } => 0.0,
            RebateSpec::Power { eta } => eta,
        }
    }

    /// `g(x)/x → 0`.
    pub fn is_sublinear(&self) -> bool {
        self.growth_eta() < 1.0
    }

    #[inline]
    pub fn eval(&self, beta: f64) -> f64 {
        match *self {
            RebateSpec::Zero => 0.0,
            RebateSpec::Constant { value } => value,
            RebateSpec::Power { eta } => beta.powf(eta),
        }
    }
}

/// The `{"payoff": .., "rebate": ..}` pair consumed by the CLI and FFI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub payoff: Payoff,
    #[serde(default)]
    pub rebate: RebateSpec,
}

/// Convergence exponent `1 - (γ ∨ η)` of the rebate approximation.
pub fn rate_exponent(payoff: &Payoff, rebate: &RebateSpec) -> f64 {
    1.0 - payoff.growth_gamma().max(rebate.growth_eta())
}
