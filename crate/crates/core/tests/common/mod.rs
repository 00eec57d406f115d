//! Test-only reference values computed independently of the library.
//!
//! Under `σ(x) = x²` the reciprocal `R = 1/X` is a three-dimensional Bessel
//! process, i.e. Brownian motion conditioned to avoid 0. Killing `X` at `β`
//! is killing `R` at `a = 1/β`, and the killed transition density is the
//! image-method density of Brownian motion on `(a, ∞)` weighted by `y/r`:
//!
//! p(r, y) = (y/r)·[φ_τ(y − r) − φ_τ(y + r − 2a)],   y > a.
//!
//! Everything below is quadrature over that density.

#![allow(dead_code)]

pub mod props;

use std::f64::consts::PI;

/// `Φ` from the Maclaurin series of `erf` (|z| ≤ 2) or the continued
/// fraction of `erfc`, in plain f64 with no library special functions.
pub fn phi(x: f64) -> f64 {
    let z = x.abs() / 2f64.sqrt();
    let upper_tail = if z <= 2.0 {
        // erf z = 2/√π Σ (-1)^n z^{2n+1} / (n! (2n+1))
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -z * z / n;
            sum += term / (2.0 * n + 1.0);
        }
        0.5 * (1.0 - 2.0 / PI.sqrt() * sum)
    } else {
        // erfc z = e^{-z²}/√π · 1/(z + 1/2/(z + 1/(z + 3/2/(z + ...))))
        let mut f = z;
        for k in (1..200).rev() {
            f = z + (k as f64 / 2.0) / f;
        }
        0.5 * (-z * z).exp() / PI.sqrt() / f
    };
    if x < 0.0 {
        upper_tail
    } else {
        1.0 - upper_tail
    }
}

fn gauss_kernel(d: f64, tau: f64) -> f64 {
    (-d * d / (2.0 * tau)).exp() / (2.0 * PI * tau).sqrt()
}

/// Killed density of `R` from `r` after `tau`, killing at `a` (0 for none).
pub fn bessel_density(r: f64, y: f64, tau: f64, a: f64) -> f64 {
    if y <= a {
        return 0.0;
    }
    y / r * (gauss_kernel(y - r, tau) - gauss_kernel(y + r - 2.0 * a, tau))
}

/// 8-point Gauss-Legendre on `panels` equal panels of `[lo, hi]`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    const NODES: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
    const WEIGHTS: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let w = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * w;
        let half = 0.5 * w;
        for (n, wt) in NODES.iter().zip(WEIGHTS) {
            total += wt * half * (f(mid - half * n) + f(mid + half * n));
        }
    }
    total
}

/// `E_x[f(X_τ) 1{X stays below β}]` for `σ(x) = x²`; `beta = ∞` for no
/// barrier. `kinks` are x-locations where `f` is not smooth.
pub fn cev_killed_expectation(f: impl Fn(f64) -> f64, x: f64, tau: f64, beta: f64, kinks: &[f64]) -> f64 {
    let r = 1.0 / x;
    let a = if beta.is_finite() { 1.0 / beta } else { 0.0 };
    let top = r + 40.0 * tau.sqrt();
    let mut cuts: Vec<f64> = vec![a, top];
    cuts.extend(kinks.iter().map(|k| 1.0 / k).filter(|&y| y > a && y < top));
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let g = |y: f64| f(1.0 / y) * bessel_density(r, y, tau, a);
    cuts.windows(2).map(|c| integrate(g, c[0], c[1], 4000)).sum()
}

/// `P_x(max X ≥ β before τ)` for `σ(x) = x²`.
pub fn cev_hit_probability(x: f64, tau: f64, beta: f64) -> f64 {
    1.0 - cev_killed_expectation(|_| 1.0, x, tau, beta, &[])
}

/// `E_x[f^β(X_τ) 1{τ^β ≥ T}]`, the limit of the `f^β` PDE.
pub fn cev_fbeta_price(f: impl Fn(f64) -> f64, x: f64, tau: f64, beta: f64) -> f64 {
    let fb = |y: f64| if y <= 0.5 * beta { f(y) } else { 2.0 * f(y) * (beta - y) / beta };
    cev_killed_expectation(fb, x, tau, beta, &[0.5 * beta])
}

