//! Euler-Maruyama simulation with a discretely monitored up-barrier.
//!
//! Path `i` draws its normals from ChaCha8 stream `i` under the run seed, so a
//! path is a pure function of `(seed, i)`. Paths are grouped into fixed-size
//! chunks, each chunk reduces to a [`Moments`] accumulator, and chunks are
//! merged in index order. The result is bit-identical for any worker count.
//!
//! The barrier is checked at grid times `t0 + nΔ`, `1 ≤ n < N`, where `N` is the
//! number of steps. A grid value `X_n ≥ β` before maturity knocks the path out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::LocalVolModel;
use crate::payoffs::{Payoff, RebateSpec};

/// Magnitude above which a path counts as exploded.
pub const OVERFLOW_LEVEL: f64 = 1e300;

const CHUNK: u64 = 2048;

/// What the recursion does once a grid value is `≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroHandling {
    /// Set the state to 0 and keep it there.
    #[default]
    AbsorbAtZero,
    /// Keep the negative value. `σ` is extended by `σ(x) = σ(0) = 0` so the
    /// state stays put, and the payoff sees it through `f(x) = f(0)`.
    ExtendPayoff,
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Time step `Δ`.
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
    /// Knock-out level `β`; `None` runs the plain scheme.
    pub barrier: Option<f64>,
    #[serde(default)]
    pub zero_handling: ZeroHandling,
    #[serde(default)]
    pub t0: f64,
    pub maturity: f64,
    /// Pair each path with its mirror image and average the pair.
    #[serde(default)]
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(dt: f64, n_paths: u64, seed: u64, maturity: f64) -> Self {
        McConfig {
            dt,
            n_paths,
            seed,
            barrier: None,
            zero_handling: ZeroHandling::default(),
            t0: 0.0,
            maturity,
            antithetic: false,
        }
    }

    pub fn with_barrier(mut self, beta: f64) -> Self {
        self.barrier = Some(beta);
        self
    }

    pub fn without_barrier(mut self) -> Self {
        self.barrier = None;
        self
    }

    pub fn with_zero_handling(mut self, zero_handling: ZeroHandling) -> Self {
        self.zero_handling = zero_handling;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_start(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    /// Number of Euler steps `N = ⌊(T - t0)/Δ⌋`.
    pub fn n_steps(&self) -> u64 {
        ((self.maturity - self.t0) / self.dt + 1e-9).floor() as u64
    }

    /// Checks the configuration against `model` and returns `N`.
    pub fn validate(&self, model: &LocalVolModel) -> Result<u64> {
        if !(self.maturity.is_finite() && self.t0.is_finite() && self.t0 >= 0.0) {
            return Err(Error::invalid("t0", "start and maturity must be finite, t0 ≥ 0"));
        }
        let horizon = self.maturity - self.t0;
        if !(horizon > 0.0) {
            return Err(Error::invalid("maturity", "maturity must exceed the start time"));
        }
        if !(self.dt > 0.0 && self.dt < horizon) {
            return Err(Error::invalid(
                "dt",
                format!("time step must lie in (0, T - t0) = (0, {horizon}), got {}", self.dt),
            ));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths", "need at least one path"));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(Error::invalid("n_paths", "antithetic sampling needs an even path count"));
        }
        if let Some(beta) = self.barrier {
            if !(beta.is_finite() && beta > model.initial_x()) {
                return Err(Error::invalid(
                    "barrier",
                    format!("barrier {beta} must exceed the initial state {}", model.initial_x()),
                ));
            }
        }
        Ok(self.n_steps())
    }
}

/// One simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    /// Knocked out before maturity.
    pub hit: bool,
    /// `X^Δ(T)`, or the state at the knock-out step when `hit`.
    pub terminal_value: f64,
    /// First `n < N` with `X_n ≥ β`.
    pub hit_step: Option<u64>,
    /// The state left `[-1e300, 1e300]` or became non-finite.
    pub overflowed: bool,
}

/// Monte Carlo price with its sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Unbiased sample standard deviation over `√n`.
    #[serde(rename = "stderr")]
    pub std_error: f64,
    /// Samples entering the mean (exploded paths are excluded).
    #[serde(rename = "n")]
    pub n_paths: u64,
    #[serde(rename = "hit_frac")]
    pub hit_fraction: f64,
    pub overflow_count: u64,
}

/// ChaCha8 stream for path `index` under `seed`.
pub fn path_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy)]
struct RawPath {
    terminal: f64,
    /// Largest `X_n` over `1 ≤ n < N` up to the stop.
    running_max: f64,
    stop_step: Option<u64>,
    overflowed: bool,
}

/// Euler recursion `X_{n+1} = X_n + σ(X_n) ΔW_n`, stopped at the first
/// `n < N` with `X_n ≥ stop_level`.
#[inline]
#[allow(clippy::too_many_arguments)]
fn run_path<R: Rng + ?Sized>(
    model: &LocalVolModel,
    x0: f64,
    n_steps: u64,
    sqrt_dt: f64,
    stop_level: f64,
    zero: ZeroHandling,
    mirrored: bool,
    rng: &mut R,
) -> RawPath {
    let mut x = x0;
    let mut running_max = f64::NEG_INFINITY;
    let sign = if mirrored { -1.0 } else { 1.0 };
    for n in 1..=n_steps {
        if x <= 0.0 {
            // frozen at (or below) zero; σ vanishes there in both modes
            break;
        }
        let z: f64 = StandardNormal.sample(rng);
        let next = x + model.sigma(x) * sqrt_dt * (sign * z);
        if !(next.abs() <= OVERFLOW_LEVEL) {
            return RawPath {
                terminal: next,
                running_max: f64::INFINITY,
                stop_step: Some(n.min(n_steps.saturating_sub(1))),
                overflowed: true,
            };
        }
        x = match zero {
            ZeroHandling::AbsorbAtZero if next <= 0.0 => 0.0,
            _ => next,
        };
        if n < n_steps {
            running_max = running_max.max(x);
            if x >= stop_level {
                return RawPath {
                    terminal: x,
                    running_max,
                    stop_step: Some(n),
                    overflowed: false,
                };
            }
        }
    }
    RawPath {
        terminal: x,
        running_max,
        stop_step: None,
        overflowed: false,
    }
}

fn outcome(raw: RawPath, barrier: Option<f64>) -> PathOutcome {
    match barrier {
        Some(_) => PathOutcome {
            hit: raw.stop_step.is_some(),
            terminal_value: raw.terminal,
            hit_step: raw.stop_step,
            overflowed: raw.overflowed,
        },
        None => PathOutcome {
            hit: false,
            terminal_value: raw.terminal,
            hit_step: None,
            overflowed: raw.overflowed,
        },
    }
}

/// Simulates one path, drawing normals from `stream`.
pub fn simulate_path<R: Rng + ?Sized>(
    model: &LocalVolModel,
    cfg: &McConfig,
    stream: &mut R,
) -> Result<PathOutcome> {
    let n_steps = cfg.validate(model)?;
    let stop = cfg.barrier.unwrap_or(f64::INFINITY);
    let raw = run_path(
        model,
        model.initial_x(),
        n_steps,
        cfg.dt.sqrt(),
        stop,
        cfg.zero_handling,
        false,
        stream,
    );
    Ok(outcome(raw, cfg.barrier))
}

/// Streaming mean/variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = n;
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sample_variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    moments: Moments,
    hits: u64,
    overflow: u64,
    paths: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.moments.merge(&other.moments);
        self.hits += other.hits;
        self.overflow += other.overflow;
        self.paths += other.paths;
    }
}

/// Runs `cfg.n_paths` paths and reduces `sample(outcome)` over them. A
/// `None` sample drops the path (or its antithetic pair) from the mean.
fn estimate<F>(model: &LocalVolModel, cfg: &McConfig, sample: F) -> Result<(Tally, u64)>
where
    F: Fn(&PathOutcome) -> Option<f64> + Sync,
{
    let n_steps = cfg.validate(model)?;
    let sqrt_dt = cfg.dt.sqrt();
    let stop = cfg.barrier.unwrap_or(f64::INFINITY);
    let x0 = model.initial_x();
    let one = |mirrored: bool, stream: u64| {
        let mut rng = path_stream(cfg.seed, stream);
        let raw = run_path(model, x0, n_steps, sqrt_dt, stop, cfg.zero_handling, mirrored, &mut rng);
        outcome(raw, cfg.barrier)
    };
    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(cfg.n_paths);
            let mut t = Tally::default();
            let mut i = lo;
            while i < hi {
                if cfg.antithetic {
                    let a = one(false, i / 2);
                    let b = one(true, i / 2);
                    t.paths += 2;
                    t.hits += a.hit as u64 + b.hit as u64;
                    t.overflow += a.overflowed as u64 + b.overflowed as u64;
                    if let (Some(u), Some(v)) = (sample(&a), sample(&b)) {
                        t.moments.push(0.5 * (u + v));
                    }
                    i += 2;
                } else {
                    let a = one(false, i);
                    t.paths += 1;
                    t.hits += a.hit as u64;
                    t.overflow += a.overflowed as u64;
                    if let Some(u) = sample(&a) {
                        t.moments.push(u);
                    }
                    i += 1;
                }
            }
            t
        })
        .collect();
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    Ok((total, n_steps))
}

fn finish(t: &Tally, antithetic: bool) -> McEstimate {
    McEstimate {
        mean: t.moments.mean,
        std_error: t.moments.std_error(),
        n_paths: if antithetic { 2 * t.moments.count } else { t.moments.count },
        hit_fraction: if t.paths == 0 { 0.0 } else { t.hits as f64 / t.paths as f64 },
        overflow_count: t.overflow,
    }
}

/// `E[f(X^Δ(T))]` with no knock-out. Exploded paths are counted in
/// `overflow_count` and left out of the mean.
pub fn price_naive(model: &LocalVolModel, f: &Payoff, cfg: &McConfig) -> Result<McEstimate> {
    f.validate()?;
    if cfg.barrier.is_some() {
        return Err(Error::invalid("barrier", "the naive estimator runs without a barrier"));
    }
    let (tally, _) = estimate(model, cfg, |o| (!o.overflowed).then(|| f.eval(o.terminal_value)))?;
    Ok(finish(&tally, cfg.antithetic))
}

/// `E[g(β)1{τ_Δ < T} + f(X^Δ(T))1{τ_Δ ≥ T}]`.
pub fn price_rebate(
    model: &LocalVolModel,
    f: &Payoff,
    g: &RebateSpec,
    cfg: &McConfig,
) -> Result<McEstimate> {
    f.validate()?;
    g.validate()?;
    let beta = cfg
        .barrier
        .ok_or_else(|| Error::invalid("barrier", "the rebate estimator needs a barrier"))?;
    let rebate = g.eval(beta);
    let (tally, _) = estimate(model, cfg, |o| {
        Some(if o.hit { rebate } else { f.eval(o.terminal_value) })
    })?;
    Ok(finish(&tally, cfg.antithetic))
}

/// `P{τ_Δ < T}` with a binomial standard error.
pub fn hitting_probability(model: &LocalVolModel, cfg: &McConfig) -> Result<McEstimate> {
    if cfg.barrier.is_none() {
        return Err(Error::invalid("barrier", "hitting probability needs a barrier"));
    }
    let (tally, _) = estimate(model, cfg, |o| Some(if o.hit { 1.0 } else { 0.0 }))?;
    let mut est = finish(&tally, cfg.antithetic);
    let p = tally.hits as f64 / tally.paths as f64;
    est.mean = p;
    est.hit_fraction = p;
    est.n_paths = tally.paths;
    est.std_error = (p * (1.0 - p) / tally.paths as f64).sqrt();
    Ok(est)
}

/// Hitting probabilities for several barriers from one set of paths.
///
/// Each path runs until it reaches the largest barrier or maturity; barrier
/// `β_i` counts as hit when the running grid maximum before `T` reaches it.
/// `cfg.barrier` is ignored.
pub fn hitting_ladder(model: &LocalVolModel, cfg: &McConfig, betas: &[f64]) -> Result<Vec<McEstimate>> {
    if betas.is_empty() {
        return Err(Error::invalid("betas", "ladder is empty"));
    }
    let top = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let probe = cfg.with_barrier(top);
    for &b in betas {
        probe.with_barrier(b).validate(model)?;
    }
    let n_steps = probe.validate(model)?;
    let sqrt_dt = cfg.dt.sqrt();
    let x0 = model.initial_x();
    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let counts: Vec<(Vec<u64>, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(cfg.n_paths);
            let mut hits = vec![0u64; betas.len()];
            let mut overflow = 0;
            for i in lo..hi {
                let (stream, mirrored) = if cfg.antithetic { (i / 2, i % 2 == 1) } else { (i, false) };
                let mut rng = path_stream(cfg.seed, stream);
                let raw = run_path(model, x0, n_steps, sqrt_dt, top, cfg.zero_handling, mirrored, &mut rng);
                overflow += raw.overflowed as u64;
                for (h, &b) in hits.iter_mut().zip(betas) {
                    if raw.running_max >= b {
                        *h += 1;
                    }
                }
            }
            (hits, overflow)
        })
        .collect();
    let mut hits = vec![0u64; betas.len()];
    let mut overflow = 0;
    for (h, o) in &counts {
        for (acc, v) in hits.iter_mut().zip(h) {
            *acc += v;
        }
        overflow += o;
    }
    let n = cfg.n_paths as f64;
    Ok(hits
        .iter()
        .map(|&h| {
            let p = h as f64 / n;
            McEstimate {
                mean: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
                n_paths: cfg.n_paths,
                hit_fraction: p,
                overflow_count: overflow,
            }
        })
        .collect())
}
