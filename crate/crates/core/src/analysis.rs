//! β-ladders, convergence-rate fits and the martingale-defect study.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{self, McConfig, McEstimate};
use crate::models::{cev_price, martingale_defect, LocalVolModel};
use crate::payoffs::{Payoff, RebateSpec};
use crate::pde::{self, GridSpec};

/// Strictly increasing list of barrier levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaLadder {
    betas: Vec<f64>,
}

impl BetaLadder {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::invalid("betas", "ladder is empty"));
        }
        if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::invalid("betas", "barriers must be positive and finite"));
        }
        if betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("betas", "barriers must be strictly increasing"));
        }
        Ok(BetaLadder { betas })
    }

    /// `start, start·ratio, …` up to and including `end` (with a little slack).
    pub fn geometric(start: f64, end: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0 && start > 0.0 && end >= start) {
            return Err(Error::invalid("betas", "need 0 < start ≤ end and ratio > 1"));
        }
        let mut betas = Vec::new();
        let mut b = start;
        while b <= end * (1.0 + 1e-12) {
            betas.push(b);
            b *= ratio;
        }
        Self::new(betas)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn check_above(&self, x0: f64) -> Result<()> {
        if self.betas[0] <= x0 {
            return Err(Error::invalid(
                "betas",
                format!("every barrier must exceed the initial state {x0}, got {}", self.betas[0]),
            ));
        }
        Ok(())
    }
}

/// One priced rung.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub price: f64,
    /// 0 for deterministic pricers.
    pub std_error: f64,
    pub hit_fraction: Option<f64>,
}

/// Something that prices the truncated problem at a given barrier.
pub trait BetaPricer: Sync {
    fn price_at(&self, beta: f64) -> Result<PricePoint>;

    /// Stochastic pricers get their noise floor checked in rate fits.
    fn is_monte_carlo(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// `f^β` PDE with a fixed mesh width and time step across the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeFbetaPricer {
    pub model: LocalVolModel,
    pub payoff: Payoff,
    pub x: f64,
    pub t: f64,
    pub maturity: f64,
    pub mesh_width: f64,
    pub n_time: usize,
    pub theta: f64,
}

impl PdeFbetaPricer {
    /// The coefficients and boundary data do not depend on time, so the grid
    /// spans the remaining horizon `T - t` and is read at its first level.
    pub fn grid(&self, beta: f64) -> Result<GridSpec> {
        GridSpec::with_mesh_width(beta, self.mesh_width, self.n_time, self.theta, self.maturity - self.t)?
            .keeping_every(self.n_time)
    }
}

impl BetaPricer for PdeFbetaPricer {
    fn price_at(&self, beta: f64) -> Result<PricePoint> {
        let surface = pde::solve_fbeta_pde(&self.model, &self.payoff, &self.grid(beta)?)?;
        Ok(PricePoint {
            price: surface.surface_at(self.x, 0.0)?,
            std_error: 0.0,
            hit_fraction: None,
        })
    }

    fn describe(&self) -> String {
        format!("pde-fbeta(h={}, n_time={}, theta={})", self.mesh_width, self.n_time, self.theta)
    }
}

/// Rebate PDE with upper datum `g(β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeRebatePricer {
    pub model: LocalVolModel,
    pub payoff: Payoff,
    pub rebate: RebateSpec,
    pub x: f64,
    pub t: f64,
    pub maturity: f64,
    pub mesh_width: f64,
    pub n_time: usize,
    pub theta: f64,
}

impl BetaPricer for PdeRebatePricer {
    fn price_at(&self, beta: f64) -> Result<PricePoint> {
        let grid = GridSpec::with_mesh_width(beta, self.mesh_width, self.n_time, self.theta, self.maturity - self.t)?
            .keeping_every(self.n_time)?;
        let surface = pde::solve_rebate_pde(&self.model, &self.payoff, &self.rebate, &grid)?;
        Ok(PricePoint {
            price: surface.surface_at(self.x, 0.0)?,
            std_error: 0.0,
            hit_fraction: None,
        })
    }

    fn describe(&self) -> String {
        format!("pde-rebate(h={}, n_time={}, theta={})", self.mesh_width, self.n_time, self.theta)
    }
}

/// Monte Carlo rebate price; the barrier of `cfg` is replaced per rung.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRebatePricer {
    pub model: LocalVolModel,
    pub payoff: Payoff,
    pub rebate: RebateSpec,
    pub cfg: McConfig,
}

impl BetaPricer for McRebatePricer {
    fn price_at(&self, beta: f64) -> Result<PricePoint> {
        let est = mc::price_rebate(&self.model, &self.payoff, &self.rebate, &self.cfg.with_barrier(beta))?;
        Ok(PricePoint {
            price: est.mean,
            std_error: est.std_error,
            hit_fraction: Some(est.hit_fraction),
        })
    }

    fn is_monte_carlo(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("mc-rebate(dt={}, n_paths={}, seed={})", self.cfg.dt, self.cfg.n_paths, self.cfg.seed)
    }
}

/// Reference value for ladder errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Reference {
    /// Closed form.
    Analytic(f64),
    /// Stand-in computed numerically, e.g. a fine solve at a much larger β.
    Proxy(f64),
}

impl Reference {
    pub fn value(&self) -> f64 {
        match *self {
            Reference::Analytic(v) | Reference::Proxy(v) => v,
        }
    }

    pub fn is_proxy(&self) -> bool {
        matches!(self, Reference::Proxy(_))
    }
}

/// Closed-form reference when one exists: CEV with `f(x) = x`.
pub fn analytic_reference(model: &LocalVolModel, payoff: &Payoff, x: f64, t: f64, maturity: f64) -> Result<Reference> {
    if model.is_cev() && *payoff == Payoff::Identity {
        Ok(Reference::Analytic(cev_price(x, t, maturity)?))
    } else {
        Err(Error::MissingOracle(format!("{payoff:?} under {:?}", model.kind())))
    }
}

/// `f^β` PDE price at a large barrier, flagged as a proxy.
pub fn proxy_reference(pricer: &PdeFbetaPricer, beta: f64) -> Result<Reference> {
    Ok(Reference::Proxy(pricer.price_at(beta)?.price))
}

/// Ordinary least squares on `(ln β, ln error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl RateFit {
    /// Fits `ln e = a + s ln β` over the pairs with positive `β` and `e`.
    /// Needs two usable points.
    pub fn loglog(points: &[(f64, f64)]) -> Option<RateFit> {
        let logs: Vec<(f64, f64)> = points
            .iter()
            .filter(|(b, e)| *b > 0.0 && *e > 0.0 && e.is_finite())
            .map(|(b, e)| (b.ln(), e.ln()))
            .collect();
        let n = logs.len();
        if n < 2 {
            return None;
        }
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx <= 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
        Some(RateFit {
            slope,
            intercept,
            r_squared,
            n_points: n,
        })
    }
}

/// One row of `study.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub beta: f64,
    pub price: f64,
    pub error: Option<f64>,
    pub stderr: f64,
    pub hit_frac: Option<f64>,
    pub beta_times_hitprob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub rows: Vec<LadderRow>,
    pub reference: Reference,
    pub fit: Option<RateFit>,
    /// Barriers whose error was zero or within three standard errors.
    pub dropped: Vec<f64>,
    /// Fewer than three usable points survived.
    pub inconclusive: bool,
}

impl RateStudy {
    /// Contents of `fit.json`.
    pub fn fit_json(&self) -> serde_json::Value {
        let f = self.fit;
        serde_json::json!({
            "slope": f.map(|f| f.slope),
            "intercept": f.map(|f| f.intercept),
            "r2": f.map(|f| f.r_squared),
            "n_points": f.map(|f| f.n_points).unwrap_or(0),
            "dropped_points": self.dropped,
            "inconclusive": self.inconclusive,
            "reference": self.reference,
            "reference_is_proxy": self.reference.is_proxy(),
        })
    }
}

/// Prices every rung (concurrently), measures `|price - reference|` and fits
/// the log-log slope.
pub fn rate_study(pricer: &dyn BetaPricer, reference: Reference, ladder: &BetaLadder) -> Result<RateStudy> {
    if ladder.len() < 4 {
        return Err(Error::invalid("betas", format!("a rate study needs at least 4 rungs, got {}", ladder.len())));
    }
    let points: Vec<PricePoint> = ladder
        .betas()
        .par_iter()
        .map(|&b| pricer.price_at(b))
        .collect::<Result<_>>()?;
    let r = reference.value();
    let mut rows = Vec::with_capacity(points.len());
    let mut usable = Vec::new();
    let mut dropped = Vec::new();
    for (&beta, p) in ladder.betas().iter().zip(&points) {
        let error = (p.price - r).abs();
        let noise_floor = if pricer.is_monte_carlo() { 3.0 * p.std_error } else { 0.0 };
        if error > noise_floor && error > 0.0 {
            usable.push((beta, error));
        } else {
            dropped.push(beta);
        }
        rows.push(LadderRow {
            beta,
            price: p.price,
            error: Some(error),
            stderr: p.std_error,
            hit_frac: p.hit_fraction,
            beta_times_hitprob: p.hit_fraction.map(|h| beta * h),
        });
    }
    let inconclusive = usable.len() < 3;
    let fit = if inconclusive { None } else { RateFit::loglog(&usable) };
    Ok(RateStudy {
        rows,
        reference,
        fit,
        dropped,
        inconclusive,
    })
}

/// `β·P̂{τ_Δ < T}` across a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectEstimate {
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub hit_probabilities: Vec<f64>,
    /// Largest-β value, or the two-point Richardson value when requested.
    pub limit: f64,
    pub richardson: bool,
    /// `x - E[X(T)]` from the closed form (CEV only).
    pub reference: Option<f64>,
    pub overflow_count: u64,
}

impl DefectEstimate {
    pub fn rows(&self) -> Vec<LadderRow> {
        self.betas
            .iter()
            .enumerate()
            .map(|(i, &beta)| LadderRow {
                beta,
                price: self.hit_probabilities[i],
                error: self.reference.map(|r| (self.values[i] - r).abs()),
                stderr: self.std_errors[i],
                hit_frac: Some(self.hit_probabilities[i]),
                beta_times_hitprob: Some(self.values[i]),
            })
            .collect()
    }
}

/// Estimates `lim β P{τ^β < T}` from one set of paths. With `richardson`
/// the limit assumes `v(β) ≈ L + a/β` over the two largest rungs.
pub fn defect_study(model: &LocalVolModel, ladder: &BetaLadder, cfg: &McConfig, richardson: bool) -> Result<DefectEstimate> {
    ladder.check_above(model.initial_x())?;
    let est = mc::hitting_ladder(model, cfg, ladder.betas())?;
    let betas = ladder.betas().to_vec();
    let values: Vec<f64> = betas.iter().zip(&est).map(|(b, e)| b * e.mean).collect();
    let std_errors: Vec<f64> = betas.iter().zip(&est).map(|(b, e)| b * e.std_error).collect();
    let n = values.len();
    let limit = if richardson && n >= 2 {
        let (b1, b2) = (betas[n - 2], betas[n - 1]);
        (b2 * values[n - 1] - b1 * values[n - 2]) / (b2 - b1)
    } else {
        values[n - 1]
    };
    let reference = if model.is_cev() {
        Some(martingale_defect(model.initial_x(), cfg.t0, cfg.maturity)?)
    } else {
        None
    };
    Ok(DefectEstimate {
        hit_probabilities: est.iter().map(|e| e.mean).collect(),
        overflow_count: est.first().map(|e| e.overflow_count).unwrap_or(0),
        betas,
        values,
        std_errors,
        limit,
        richardson,
        reference,
    })
}

/// Pairwise agreement between a Monte Carlo price, a PDE price and an
/// optional closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub mc: f64,
    pub mc_stderr: f64,
    pub pde: f64,
    pub analytic: Option<f64>,
    pub mc_pde_gap: f64,
    pub mc_analytic_gap: Option<f64>,
    pub pde_analytic_gap: Option<f64>,
    /// `3·stderr + pde_tolerance`.
    pub tolerance: f64,
    pub consistent: bool,
}

pub fn cross_check(mc_result: &McEstimate, pde_value: f64, pde_tolerance: f64, analytic: Option<f64>) -> CrossCheck {
    let gap = (mc_result.mean - pde_value).abs();
    let tolerance = 3.0 * mc_result.std_error + pde_tolerance;
    CrossCheck {
        mc: mc_result.mean,
        mc_stderr: mc_result.std_error,
        pde: pde_value,
        analytic,
        mc_pde_gap: gap,
        mc_analytic_gap: analytic.map(|a| (mc_result.mean - a).abs()),
        pde_analytic_gap: analytic.map(|a| (pde_value - a).abs()),
        tolerance,
        consistent: gap <= tolerance,
    }
}

/// Writes `study.csv`; missing values are left empty.
pub fn write_study_csv<W: Write>(rows: &[LadderRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "beta,price,error,stderr,hit_frac,beta_times_hitprob")?;
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{:.16e},{},{}",
            r.beta,
            r.price,
            opt(r.error),
            r.stderr,
            opt(r.hit_frac),
            opt(r.beta_times_hitprob)
        )?;
    }
    Ok(())
}
