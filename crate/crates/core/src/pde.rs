//! θ-scheme for `u_t + ½σ²(x)u_xx = 0` on the truncated domain `(0, β) × (0, T)`.
//!
//! Space nodes are `x_i = i·h`, `h = β/(n_space + 1)`, `i = 0..=n_space+1`; time
//! levels are `t_j = j·k`, `k = T/n_time`. The scheme marches backward from the
//! terminal row and solves one tridiagonal system per level:
//!
//! ```text
//! (I - θkA) u^j = (I + (1-θ)kA) u^{j+1},   (Au)_i = ½σ(x_i)²(u_{i-1} - 2u_i + u_{i+1})/h²
//! ```
//!
//! With `θ = 1` the matrix is an M-matrix with unit row sums, which gives an
//! exact discrete maximum and comparison principle.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{cev_family, LocalVolModel};
use crate::payoffs::{Payoff, RebateSpec};
use crate::tridiag::Tridiagonal;

fn default_keep_every() -> usize {
    1
}

/// Space-time grid on `[0, β] × [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub beta: f64,
    /// Interior node count. Always odd, so that `β/2` is a node.
    pub n_space: usize,
    pub n_time: usize,
    /// 0 explicit, 1 implicit Euler, ½ Crank-Nicolson.
    pub theta: f64,
    pub maturity: f64,
    /// Store every `keep_every`-th time level (plus `t = 0` and `t = T`).
    #[serde(default = "default_keep_every")]
    pub keep_every: usize,
}

impl GridSpec {
    /// Builds a grid. An even `n_space` is bumped by one so the kink of
    /// `f^β` at `β/2` falls on a node.
    pub fn new(beta: f64, n_space: usize, n_time: usize, theta: f64, maturity: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", format!("barrier must be positive, got {beta}")));
        }
        if n_space < 3 {
            return Err(Error::invalid("n_space", format!("need at least 3 interior nodes, got {n_space}")));
        }
        if n_time == 0 {
            return Err(Error::invalid("n_time", "need at least one time step"));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid("theta", format!("θ must lie in [0, 1], got {theta}")));
        }
        if !(maturity.is_finite() && maturity > 0.0) {
            return Err(Error::invalid("maturity", format!("maturity must be positive, got {maturity}")));
        }
        let n_space = if (n_space + 1) % 2 == 1 { n_space + 1 } else { n_space };
        Ok(GridSpec {
            beta,
            n_space,
            n_time,
            theta,
            maturity,
            keep_every: 1,
        })
    }

    /// Grid whose mesh width is as close to `h` as the snapping allows.
    pub fn with_mesh_width(beta: f64, h: f64, n_time: usize, theta: f64, maturity: f64) -> Result<Self> {
        if !(h > 0.0 && h < beta) {
            return Err(Error::invalid("h", format!("mesh width must lie in (0, β), got {h}")));
        }
        let cells = (beta / h).round().max(4.0) as usize;
        Self::new(beta, cells - 1, n_time, theta, maturity)
    }

    pub fn keeping_every(mut self, keep_every: usize) -> Result<Self> {
        if keep_every == 0 {
            return Err(Error::invalid("keep_every", "must be at least 1"));
        }
        self.keep_every = keep_every;
        Ok(self)
    }

    pub fn h(&self) -> f64 {
        self.beta / (self.n_space + 1) as f64
    }

    pub fn k(&self) -> f64 {
        self.maturity / self.n_time as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n_space + 1 {
            self.beta
        } else {
            i as f64 * self.h()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if j == self.n_time {
            self.maturity
        } else {
            j as f64 * self.k()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_space + 2).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `β/2`.
    pub fn midpoint_node(&self) -> usize {
        self.n_space.div_ceil(2)
    }

    /// `max_i σ²(x_i) k / h²` over interior nodes.
    pub fn diffusion_number(&self, model: &LocalVolModel) -> f64 {
        let kh = self.k() / (self.h() * self.h());
        (1..=self.n_space)
            .map(|i| {
                let s = model.sigma(self.x(i));
                s * s * kh
            })
            .fold(0.0, f64::max)
    }

    /// For θ < 1 the explicit part needs `max σ²k/h² ≤ 1/(1-θ)`.
    pub fn check_stability(&self, model: &LocalVolModel) -> Result<()> {
        if self.theta >= 1.0 {
            return Ok(());
        }
        let ratio = self.diffusion_number(model);
        let bound = 1.0 / (1.0 - self.theta);
        if ratio > bound {
            return Err(Error::UnstableGrid {
                ratio,
                bound,
                theta: self.theta,
            });
        }
        Ok(())
    }

    fn stored(&self, j: usize) -> bool {
        j == 0 || j == self.n_time || j.is_multiple_of(self.keep_every)
    }
}

/// Time-dependent Dirichlet datum `t ↦ u(β, t)`.
#[derive(Clone)]
pub struct AnalyticBoundary {
    label: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl AnalyticBoundary {
    pub fn new(label: impl Into<String>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticBoundary {
            label: label.into(),
            func: Arc::new(func),
        }
    }

    /// `t ↦ cev_family(β, t, T, λ)`, continued by its limit `β` at `t = T`.
    pub fn cev_family(beta: f64, maturity: f64, lambda: f64) -> Self {
        Self::new(format!("cev_family(beta={beta}, lambda={lambda})"), move |t| {
            if t >= maturity {
                beta
            } else {
                cev_family(beta, t, maturity, lambda).unwrap_or(f64::NAN)
            }
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.func)(t)
    }
}

impl fmt::Debug for AnalyticBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticBoundary").field("label", &self.label).finish()
    }
}

/// Datum on the upper barrier `x = β`.
#[derive(Debug, Clone)]
pub enum UpperBoundary {
    Zero,
    /// `u(β, t) = β`, the "price asymptotes to x" choice.
    AsymptoticIdentity,
    RebateConstant(f64),
    Analytic(AnalyticBoundary),
}

impl UpperBoundary {
    pub fn value(&self, t: f64, beta: f64) -> f64 {
        match self {
            UpperBoundary::Zero => 0.0,
            UpperBoundary::AsymptoticIdentity => beta,
            UpperBoundary::RebateConstant(v) => *v,
            UpperBoundary::Analytic(a) => a.eval(t),
        }
    }

    pub fn label(&self) -> String {
        match self {
            UpperBoundary::Zero => "zero".into(),
            UpperBoundary::AsymptoticIdentity => "asymptotic_identity".into(),
            UpperBoundary::RebateConstant(v) => format!("rebate_constant({v})"),
            UpperBoundary::Analytic(a) => format!("analytic:{}", a.label()),
        }
    }
}

/// Dirichlet data on both sides of the truncated domain.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    /// `u(0, t)`, normally `f(0)`.
    pub lower: f64,
    pub upper: UpperBoundary,
}

impl BoundarySpec {
    pub fn new(lower: f64, upper: UpperBoundary) -> Self {
        BoundarySpec { lower, upper }
    }
}

/// Solved values `u(x_i, t_j)` on the stored time levels.
#[derive(Debug, Clone)]
pub struct PriceSurface {
    grid: GridSpec,
    model: LocalVolModel,
    boundary_label: String,
    lower_boundary: f64,
    levels: Vec<usize>,
    /// Row-major, one row of `n_space + 2` values per stored level, ascending in time.
    values: Vec<f64>,
    corner_gap: f64,
}

impl PriceSurface {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> &LocalVolModel {
        &self.model
    }

    /// `|terminal(β) - u(β, T⁻)|`, the mismatch of the data at the corner `(β, T)`.
    pub fn corner_gap(&self) -> f64 {
        self.corner_gap
    }

    /// Stored time levels (indices `j` of `t_j`), ascending.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn width(&self) -> usize {
        self.grid.n_space + 2
    }

    /// Row for time level `j`, if it was stored.
    pub fn row(&self, j: usize) -> Option<&[f64]> {
        let pos = self.levels.binary_search(&j).ok()?;
        Some(self.row_at(pos))
    }

    fn row_at(&self, pos: usize) -> &[f64] {
        let w = self.width();
        &self.values[pos * w..(pos + 1) * w]
    }

    /// Iterator over `(j, row)` for the stored levels.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.levels.iter().enumerate().map(|(pos, &j)| (j, self.row_at(pos)))
    }

    pub fn value(&self, j: usize, i: usize) -> Option<f64> {
        self.row(j).and_then(|r| r.get(i).copied())
    }

    /// Bilinear interpolation at `(x, t)`.
    pub fn surface_at(&self, x: f64, t: f64) -> Result<f64> {
        let g = &self.grid;
        if !(0.0..=g.beta).contains(&x) {
            return Err(Error::Domain { name: "x", value: x, domain: "[0, β]" });
        }
        if !(0.0..=g.maturity).contains(&t) {
            return Err(Error::Domain { name: "t", value: t, domain: "[0, T]" });
        }
        let h = g.h();
        let i = ((x / h).floor() as usize).min(g.n_space);
        let wx = ((x - g.x(i)) / h).clamp(0.0, 1.0);

        let times: Vec<f64> = self.levels.iter().map(|&j| g.t(j)).collect();
        let upper = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
        let (p0, p1) = (upper - 1, upper);
        let span = times[p1] - times[p0];
        let wt = if span > 0.0 { ((t - times[p0]) / span).clamp(0.0, 1.0) } else { 0.0 };

        let at = |pos: usize| {
            let r = self.row_at(pos);
            r[i] + wx * (r[i + 1] - r[i])
        };
        let (a, b) = (at(p0), at(p1));
        Ok(a + wt * (b - a))
    }

    /// CSV with a header row of x-nodes and one row per stored time level,
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t")?;
        for x in self.grid.nodes() {
            write!(out, ",{x:.16e}")?;
        }
        writeln!(out)?;
        for (j, row) in self.rows() {
            write!(out, "{:.16e}", self.grid.t(j))?;
            for v in row {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Sidecar describing how the surface was produced.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": self.grid,
            "model": self.model,
            "boundary": {
                "lower": self.lower_boundary,
                "upper": self.boundary_label,
            },
            "corner_gap": self.corner_gap,
            "h": self.grid.h(),
            "k": self.grid.k(),
            "stored_levels": self.levels.len(),
        })
    }
}

/// Solves the terminal-boundary problem with terminal datum `terminal`
/// sampled at the nodes.
///
/// The terminal row takes the terminal datum at every node, boundary columns
/// included. The boundary columns hold `boundary` at every earlier level.
pub fn solve<F>(model: &LocalVolModel, terminal: F, boundary: &BoundarySpec, grid: &GridSpec) -> Result<PriceSurface>
where
    F: Fn(f64) -> f64,
{
    let w = grid.n_space + 2;
    let n_stored = (0..=grid.n_time).filter(|&j| grid.stored(j)).count();
    let mut values = Vec::with_capacity(n_stored * w);
    let mut levels = Vec::with_capacity(n_stored);
    let corner_gap = solve_visit(model, terminal, boundary, grid, |j, row| {
        if grid.stored(j) {
            values.extend_from_slice(row);
            levels.push(j);
        }
    })?;

    // reorder rows to ascending time
    levels.reverse();
    let mut ordered = Vec::with_capacity(values.len());
    for chunk in values.chunks_exact(w).rev() {
        ordered.extend_from_slice(chunk);
    }

    Ok(PriceSurface {
        grid: *grid,
        model: *model,
        boundary_label: boundary.upper.label(),
        lower_boundary: boundary.lower,
        levels,
        values: ordered,
        corner_gap,
    })
}

/// Same march as [`solve`] without storing anything: `visit(j, row)` sees
/// every level from `j = n_time` down to `0`. Returns the corner gap.
pub fn solve_visit<F, V>(model: &LocalVolModel, terminal: F, boundary: &BoundarySpec, grid: &GridSpec, mut visit: V) -> Result<f64>
where
    F: Fn(f64) -> f64,
    V: FnMut(usize, &[f64]),
{
    grid.check_stability(model)?;
    let n = grid.n_space;
    let w = n + 2;
    let k = grid.k();
    let h = grid.h();
    let theta = grid.theta;

    let mut u: Vec<f64> = (0..w).map(|i| terminal(grid.x(i))).collect();
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid("terminal", format!("terminal datum is not finite at x = {}", grid.x(i))));
    }
    let corner_gap = (u[w - 1] - boundary.upper.value(grid.maturity, grid.beta)).abs();

    // r_i = ½σ²k/h², interior rows 1..=n stored at 0..n
    let r: Vec<f64> = (1..=n)
        .map(|i| {
            let s = model.sigma(grid.x(i));
            0.5 * s * s * k / (h * h)
        })
        .collect();
    let lower: Vec<f64> = r.iter().map(|&ri| -theta * ri).collect();
    let diag: Vec<f64> = r.iter().map(|&ri| 1.0 + 2.0 * theta * ri).collect();
    let factor = Tridiagonal::new(lower.clone(), diag, lower)?.factor()?;

    visit(grid.n_time, &u);
    let mut rhs = vec![0.0; n];
    for j in (0..grid.n_time).rev() {
        let t = grid.t(j);
        let lo = boundary.lower;
        let hi = boundary.upper.value(t, grid.beta);
        if !hi.is_finite() {
            return Err(Error::invalid("boundary", format!("upper boundary is not finite at t = {t}")));
        }
        for i in 0..n {
            let c = u[i + 1];
            let explicit = if theta < 1.0 {
                (1.0 - theta) * r[i] * (u[i] - 2.0 * c + u[i + 2])
            } else {
                0.0
            };
            rhs[i] = c + explicit;
        }
        rhs[0] += theta * r[0] * lo;
        rhs[n - 1] += theta * r[n - 1] * hi;
        factor.solve_in_place(&mut rhs);
        u[0] = lo;
        u[1..=n].copy_from_slice(&rhs);
        u[n + 1] = hi;
        visit(j, &u);
    }
    Ok(corner_gap)
}

/// Terminal `f`, boundaries `u(0,t) = f(0)` and `u(β,t) = g(β)`. The corner
/// `(β, T)` is discontinuous whenever `f(β) ≠ g(β)`.
pub fn solve_rebate_pde(model: &LocalVolModel, f: &Payoff, g: &RebateSpec, grid: &GridSpec) -> Result<PriceSurface> {
    f.validate()?;
    g.validate()?;
    let boundary = BoundarySpec::new(f.eval(0.0), UpperBoundary::RebateConstant(g.eval(grid.beta)));
    solve(model, |x| f.eval(x), &boundary, grid)
}

/// Terminal `f^β`, boundaries `u(0,t) = f(0)` and `u(β,t) = 0`; the data are
/// continuous at the corner by construction.
pub fn solve_fbeta_pde(model: &LocalVolModel, f: &Payoff, grid: &GridSpec) -> Result<PriceSurface> {
    f.validate()?;
    let beta = grid.beta;
    let boundary = BoundarySpec::new(f.eval(0.0), UpperBoundary::Zero);
    solve(model, |x| f.truncate_unchecked(beta, x.min(beta)), &boundary, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::cev_price;

    fn cev() -> LocalVolModel {
        LocalVolModel::cev(1.0).unwrap()
    }

    #[test]
    fn grid_snaps_midpoint() {
        let g = GridSpec::new(4.0, 4, 10, 1.0, 1.0).unwrap();
        assert_eq!(g.n_space, 5);
        assert_eq!(g.x(g.midpoint_node()), 2.0);
        let g = GridSpec::new(50.0, 999, 10, 1.0, 1.0).unwrap();
        assert_eq!(g.n_space, 999);
        assert!((g.x(g.midpoint_node()) - 25.0).abs() < 1e-12);
        assert_eq!(g.x(g.n_space + 1), 50.0);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 5, 10, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1.0, 2, 10, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1.0, 5, 0, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1.0, 5, 10, 1.5, 1.0).is_err());
        assert!(GridSpec::new(1.0, 5, 10, 1.0, 0.0).is_err());
        assert!(GridSpec::new(1.0, 5, 10, 1.0, 1.0).unwrap().keeping_every(0).is_err());
    }

    #[test]
    fn explicit_scheme_stability_gate() {
        let g = GridSpec::new(10.0, 99, 100, 0.0, 1.0).unwrap();
        let err = solve_fbeta_pde(&cev(), &Payoff::Identity, &g).unwrap_err();
        assert!(matches!(err, Error::UnstableGrid { .. }));
        // Crank-Nicolson is gated too
        let g = GridSpec::new(10.0, 99, 100, 0.5, 1.0).unwrap();
        assert!(solve_fbeta_pde(&cev(), &Payoff::Identity, &g).is_err());
        // a stable explicit grid passes
        let lin = LocalVolModel::power_law(0.2, 1.0, 1.0).unwrap();
        let g = GridSpec::new(2.0, 19, 200, 0.0, 1.0).unwrap();
        assert!(g.diffusion_number(&lin) <= 1.0);
        assert!(solve_fbeta_pde(&lin, &Payoff::Identity, &g).is_ok());
    }

    #[test]
    fn constants_are_preserved() {
        for &theta in &[1.0, 0.5] {
            let model = LocalVolModel::power_law(0.3, 1.0, 1.0).unwrap();
            let g = GridSpec::new(3.0, 29, 50, theta, 1.0).unwrap();
            let b = BoundarySpec::new(2.0, UpperBoundary::RebateConstant(2.0));
            let s = solve(&model, |_| 2.0, &b, &g).unwrap();
            for (_, row) in s.rows() {
                assert!(row.iter().all(|v| (v - 2.0).abs() < 1e-13));
            }
        }
    }

    #[test]
    fn asymptotic_boundary_reproduces_identity() {
        for &theta in &[1.0, 0.5, 0.0] {
            let g = GridSpec::new(2.0, 19, 4000, theta, 1.0).unwrap();
            g.check_stability(&cev()).unwrap();
            let b = BoundarySpec::new(0.0, UpperBoundary::AsymptoticIdentity);
            let s = solve(&cev(), |x| x, &b, &g).unwrap();
            for (_, row) in s.rows() {
                for (i, v) in row.iter().enumerate() {
                    assert!((v - g.x(i)).abs() < 1e-10, "theta={theta}");
                }
            }
        }
    }

    #[test]
    fn rebate_corner_gap() {
        let g = GridSpec::new(50.0, 99, 50, 1.0, 1.0).unwrap();
        let s = solve_rebate_pde(&cev(), &Payoff::Identity, &RebateSpec::Zero, &g).unwrap();
        assert_eq!(s.corner_gap(), 50.0);
        let s = solve_rebate_pde(&cev(), &Payoff::Identity, &RebateSpec::Power { eta: 1.0 }, &g).unwrap();
        assert_eq!(s.corner_gap(), 0.0);
        for (_, row) in s.rows() {
            for (i, v) in row.iter().enumerate() {
                assert!((v - g.x(i)).abs() < 1e-9);
            }
        }
        let s = solve_rebate_pde(&cev(), &Payoff::Constant { value: 0.0 }, &RebateSpec::Zero, &g).unwrap();
        assert!(s.rows().all(|(_, r)| r.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn fbeta_corner_is_continuous() {
        for f in [Payoff::Identity, Payoff::Power { gamma: 0.3 }, Payoff::Call { strike: 2.0 }] {
            for &beta in &[4.0, 17.0, 80.0] {
                let g = GridSpec::new(beta, 41, 10, 1.0, 1.0).unwrap();
                let s = solve_fbeta_pde(&cev(), &f, &g).unwrap();
                assert_eq!(s.corner_gap(), 0.0);
                assert_eq!(s.value(g.n_time, g.n_space + 1), Some(0.0));
            }
        }
    }

    #[test]
    fn terminal_and_boundary_rows() {
        let g = GridSpec::new(8.0, 15, 20, 1.0, 1.0).unwrap();
        let s = solve_fbeta_pde(&cev(), &Payoff::Identity, &g).unwrap();
        let top = s.row(g.n_time).unwrap();
        for (i, v) in top.iter().enumerate() {
            assert_eq!(*v, Payoff::Identity.truncate(8.0, g.x(i)).unwrap());
        }
        for (j, row) in s.rows() {
            if j < g.n_time {
                assert_eq!(row[0], 0.0);
                assert_eq!(row[g.n_space + 1], 0.0);
            }
        }
    }

    #[test]
    fn surface_at_interpolates() {
        let g = GridSpec::new(8.0, 15, 20, 1.0, 1.0).unwrap();
        let b = BoundarySpec::new(0.0, UpperBoundary::AsymptoticIdentity);
        let s = solve(&cev(), |x| x, &b, &g).unwrap();
        // node
        assert!((s.surface_at(g.x(3), g.t(5)).unwrap() - s.value(5, 3).unwrap()).abs() < 1e-15);
        // terminal row at β/4
        assert!((s.surface_at(2.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        // midway between nodes of a linear row
        let mid = 0.5 * (g.x(4) + g.x(5));
        let expect = 0.5 * (s.value(0, 4).unwrap() + s.value(0, 5).unwrap());
        assert!((s.surface_at(mid, 0.0).unwrap() - expect).abs() < 1e-12);
        assert!(s.surface_at(8.5, 0.0).is_err());
        assert!(s.surface_at(1.0, 1.5).is_err());
        assert!(s.surface_at(-0.1, 0.5).is_err());
    }

    #[test]
    fn sparse_storage_keeps_endpoints() {
        let g = GridSpec::new(8.0, 15, 20, 1.0, 1.0).unwrap().keeping_every(7).unwrap();
        let s = solve_fbeta_pde(&cev(), &Payoff::Identity, &g).unwrap();
        assert_eq!(s.levels(), &[0, 7, 14, 20]);
        let full = solve_fbeta_pde(&cev(), &Payoff::Identity, &g.keeping_every(1).unwrap()).unwrap();
        assert_eq!(s.row(0).unwrap(), full.row(0).unwrap());
        assert_eq!(s.row(14).unwrap(), full.row(14).unwrap());
    }

    #[test]
    fn fbeta_price_near_cev_oracle() {
        let g = GridSpec::with_mesh_width(20.0, 0.01, 1000, 1.0, 1.0).unwrap().keeping_every(1000).unwrap();
        let s = solve_fbeta_pde(&cev(), &Payoff::Identity, &g).unwrap();
        let v = s.surface_at(1.0, 0.0).unwrap();
        let exact = cev_price(1.0, 0.0, 1.0).unwrap();
        // β = 20 truncation costs about 0.025
        assert!(v < exact && exact - v < 0.04, "{v}");
    }

    #[test]
    fn csv_and_metadata() {
        let g = GridSpec::new(4.0, 3, 2, 1.0, 1.0).unwrap();
        let s = solve_fbeta_pde(&cev(), &Payoff::Identity, &g).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 3);
        assert_eq!(lines[0].split(',').count(), 1 + 5);
        assert!(lines[0].starts_with("t,0.0000000000000000e0"));
        let meta = s.metadata();
        assert_eq!(meta["boundary"]["upper"], "zero");
        assert_eq!(meta["grid"]["n_space"], 3);
    }
}
