//! Randomized invariants of the PDE scheme, the payoff transform and the
//! Monte Carlo engine, each run from a fixed seed. Shared by the
//! `properties` and `acceptance` targets.

use bubble_core::mc::{self, McConfig, ZeroHandling};
use bubble_core::models::LocalVolModel;
use bubble_core::pde::{self, BoundarySpec, GridSpec, UpperBoundary};
use bubble_core::{Payoff, RebateSpec};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub const SUITES: [Suite; 8] = [
    ("discrete maximum principle", maximum_principle),
    ("comparison principle", comparison_principle),
    ("non-negativity", non_negativity),
    ("beta-doubling monotonicity", beta_doubling),
    ("degenerate origin", degenerate_origin),
    ("f^beta transform identities", transform_identities),
    ("determinism under 1 and 4 workers", worker_count_invariance),
    ("common-random-number orderings", crn_orderings),
];

fn runner(cases: u32, seed: u64) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    })
}

fn model() -> impl Strategy<Value = LocalVolModel> {
    (0.2f64..2.0, 0.0f64..2.5).prop_map(|(c, p)| LocalVolModel::power_law(c, p, 1.0).unwrap())
}

fn payoff() -> impl Strategy<Value = Payoff> {
    prop_oneof![
        Just(Payoff::Identity),
        (0.0f64..=1.0).prop_map(|gamma| Payoff::Power { gamma }),
        (0.1f64..5.0).prop_map(|strike| Payoff::Call { strike }),
        (0.0f64..3.0).prop_map(|value| Payoff::Constant { value }),
    ]
}

/// Odd interior counts keep `β/2` on a node without snapping.
fn grid() -> impl Strategy<Value = GridSpec> {
    (1.5f64..30.0, 2usize..40, 1usize..60, 0.1f64..2.0)
        .prop_map(|(beta, half, n_time, t)| GridSpec::new(beta, 2 * half + 1, n_time, 1.0, t).unwrap())
}

fn bounds(surface: &pde::PriceSurface) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, row) in surface.rows() {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn maximum_principle() -> Result<(), String> {
    report(runner(64, 0x5eed_0001).run(&(model(), payoff(), grid(), 0.0f64..10.0), |(m, f, g, top)| {
        let boundary = BoundarySpec::new(f.eval(0.0), UpperBoundary::RebateConstant(top));
        let s = pde::solve(&m, |x| f.eval(x), &boundary, &g).unwrap();
        let terminal: Vec<f64> = g.nodes().iter().map(|&x| f.eval(x)).collect();
        let data_lo = terminal.iter().copied().fold(top.min(f.eval(0.0)), f64::min);
        let data_hi = terminal.iter().copied().fold(top.max(f.eval(0.0)), f64::max);
        let (lo, hi) = bounds(&s);
        let tol = 1e-12 * (1.0 + data_hi.abs());
        prop_assert!(lo >= data_lo - tol, "{} < {}", lo, data_lo);
        prop_assert!(hi <= data_hi + tol, "{} > {}", hi, data_hi);
        Ok(())
    }))
}

pub fn comparison_principle() -> Result<(), String> {
    let strategy = (model(), payoff(), grid(), 0.0f64..2.0, 0.0f64..5.0, 0.0f64..3.0);
    report(runner(64, 0x5eed_0002).run(&strategy, |(m, f, g, bump, top, lift)| {
        let beta = g.beta;
        let low = BoundarySpec::new(f.eval(0.0), UpperBoundary::RebateConstant(top));
        let high = BoundarySpec::new(f.eval(0.0), UpperBoundary::RebateConstant(top + lift));
        // terminal₁ = f + a nonnegative bump vanishing at both ends
        let hat = move |x: f64| bump * (x / beta) * (1.0 - x / beta).max(0.0);
        let s2 = pde::solve(&m, |x| f.eval(x), &low, &g).unwrap();
        let s1 = pde::solve(&m, |x| f.eval(x) + hat(x), &high, &g).unwrap();
        for ((_, r1), (_, r2)) in s1.rows().zip(s2.rows()) {
            for (a, b) in r1.iter().zip(r2) {
                prop_assert!(*a >= *b - 1e-12 * (1.0 + b.abs()), "{} < {}", a, b);
            }
        }
        Ok(())
    }))
}

pub fn non_negativity() -> Result<(), String> {
    report(runner(64, 0x5eed_0003).run(&(model(), payoff(), grid(), 0.0f64..1.0), |(m, f, g, eta)| {
        let s = pde::solve_rebate_pde(&m, &f, &RebateSpec::Power { eta }, &g).unwrap();
        prop_assert!(bounds(&s).0 >= 0.0);
        let s = pde::solve_fbeta_pde(&m, &f, &g).unwrap();
        prop_assert!(bounds(&s).0 >= 0.0);
        Ok(())
    }))
}

pub fn beta_doubling() -> Result<(), String> {
    report(runner(64, 0x5eed_0004).run(&(model(), payoff(), grid()), |(m, f, g)| {
        // same h: β/(n+1) = 2β/(2n+2)
        let wide = GridSpec::new(2.0 * g.beta, 2 * g.n_space + 1, g.n_time, 1.0, g.maturity).unwrap();
        prop_assert!((wide.h() - g.h()).abs() < 1e-12 * g.h());
        let narrow = pde::solve_fbeta_pde(&m, &f, &g).unwrap();
        let broad = pde::solve_fbeta_pde(&m, &f, &wide).unwrap();
        for ((j1, r1), (j2, r2)) in narrow.rows().zip(broad.rows()) {
            prop_assert_eq!(j1, j2);
            for i in 0..r1.len() {
                prop_assert!(r2[i] >= r1[i] - 1e-12 * (1.0 + r1[i].abs()), "level {} node {}: {} < {}", j1, i, r2[i], r1[i]);
            }
        }
        Ok(())
    }))
}

pub fn degenerate_origin() -> Result<(), String> {
    report(runner(64, 0x5eed_0005).run(&(grid(), payoff()), |(g, f)| {
        // f(0) is the smallest datum for the nondecreasing payoffs
        prop_assume!(!matches!(f, Payoff::Constant { .. }));
        let cev = LocalVolModel::cev(1.0).unwrap();
        let s = pde::solve_fbeta_pde(&cev, &f, &g).unwrap();
        let max_data = g.nodes().iter().map(|&x| f.eval(x)).fold(0.0, f64::max);
        for (_, row) in s.rows() {
            prop_assert!(row[1].is_finite());
            prop_assert!(row[1] >= f.eval(0.0) - 1e-12);
            prop_assert!(row[1] <= max_data + 1e-12);
        }
        Ok(())
    }))
}

pub fn transform_identities() -> Result<(), String> {
    let strategy = (payoff(), 0.1f64..200.0, 0.0f64..=1.0, 0.0f64..=1.0);
    report(runner(256, 0x5eed_0006).run(&strategy, |(f, beta, u, v)| {
        let x = u * beta;
        prop_assert_eq!(f.truncate(beta, beta).unwrap(), 0.0);
        let fb = f.truncate(beta, x).unwrap();
        prop_assert!(fb >= 0.0 && fb <= f.eval(x) + 1e-15);
        if x <= 0.5 * beta {
            prop_assert_eq!(fb, f.eval(x));
        }
        // f^{2β} = f on [0, β] ≥ f^β
        prop_assert_eq!(f.truncate(2.0 * beta, x).unwrap(), f.eval(x));
        prop_assert!(f.truncate(2.0 * beta, x).unwrap() >= fb);
        let y = v * beta;
        let id = Payoff::Identity;
        let d = (id.truncate(beta, x).unwrap() - id.truncate(beta, y).unwrap()).abs();
        prop_assert!(d <= 3.0 * (x - y).abs() + 1e-12);
        Ok(())
    }))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

pub fn worker_count_invariance() -> Result<(), String> {
    let strategy = (model(), any::<u64>(), 1u64..6000, 1.5f64..20.0, any::<bool>());
    report(runner(12, 0x5eed_0007).run(&strategy, |(m, seed, n_paths, barrier, extend)| {
        let zero = if extend { ZeroHandling::ExtendPayoff } else { ZeroHandling::AbsorbAtZero };
        let cfg = McConfig::new(1e-2, n_paths, seed, 1.0).with_zero_handling(zero);
        let f = Payoff::Identity;
        let run = || {
            (
                mc::price_naive(&m, &f, &cfg).unwrap(),
                mc::price_rebate(&m, &f, &RebateSpec::Constant { value: 1.0 }, &cfg.with_barrier(barrier)).unwrap(),
                mc::hitting_ladder(&m, &cfg, &[barrier, 2.0 * barrier]).unwrap(),
            )
        };
        let one = in_pool(1, run);
        let four = in_pool(4, run);
        prop_assert_eq!(one, four);
        Ok(())
    }))
}

pub fn crn_orderings() -> Result<(), String> {
    report(runner(12, 0x5eed_0008).run(&(model(), any::<u64>(), 1.5f64..10.0), |(m, seed, beta)| {
        let cfg = McConfig::new(1e-2, 3000, seed, 1.0);
        let f = Payoff::Power { gamma: 0.5 };
        let low = mc::price_rebate(&m, &f, &RebateSpec::Zero, &cfg.with_barrier(beta)).unwrap();
        let high = mc::price_rebate(&m, &f, &RebateSpec::Zero, &cfg.with_barrier(2.0 * beta)).unwrap();
        let naive = mc::price_naive(&m, &f, &cfg).unwrap();
        // pathwise under shared streams
        prop_assert!(high.mean >= low.mean);
        prop_assert!(high.hit_fraction <= low.hit_fraction);
        prop_assert!(low.mean <= naive.mean + 1e-15);
        prop_assert!(high.mean <= naive.mean + 1e-15);
        Ok(())
    }))
}
