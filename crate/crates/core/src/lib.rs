//! Pricing European claims when the underlying is a strict local martingale.
//!
//! Under a driftless local-volatility model `dX = σ(X) dW`, the pricing PDE can
//! have several solutions and the textbook Euler-Maruyama and finite-difference
//! schemes converge to the wrong one. This crate provides
//!
//! * [`models`]: the power-law volatility family, the martingale classifier and
//!   the closed-form CEV (`σ(x) = x²`) prices used as oracles,
//! * [`payoffs`]: terminal payoffs, rebates and the tapered payoff `f^β`,
//! * [`mc`]: Euler-Maruyama with a discretely monitored knock-out barrier,
//! * [`pde`]: a θ-scheme on the truncated domain `(0, β) × (0, T)`,
//! * [`analysis`]: β-ladders, log-log rate fits and the martingale-defect study,
//! * [`cli`]: the configuration and pipelines behind the `bubble` binary.

// `!(a > b)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod mc;
pub mod models;
pub mod normal;
pub mod payoffs;
pub mod pde;
pub mod svg;
pub mod tridiag;

pub use error::{Error, Result};
pub use models::{LocalVolModel, MartingaleClass, VolKind};
pub use payoffs::{Payoff, RebateSpec};
