//! Acceptance checks, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::time::Instant;

use bubble_core::analysis::{self, BetaLadder, PdeFbetaPricer};
use bubble_core::mc::{self, McConfig, ZeroHandling};
use bubble_core::models::{cev_family, cev_price, LocalVolModel};
use bubble_core::pde::{self, AnalyticBoundary, BoundarySpec, GridSpec, UpperBoundary};
use bubble_core::{Payoff, RebateSpec};
use common::{phi, props};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

const V_CEV: f64 = 0.6826894921;

fn cev() -> LocalVolModel {
    LocalVolModel::cev(1.0).unwrap()
}

fn analytic_price() -> Outcome {
    let v = cev_price(1.0, 0.0, 1.0).unwrap();
    let oracle = 1.0 - 2.0 * phi(-1.0);
    let pass = (v - oracle).abs() < 1e-9 && (v - V_CEV).abs() < 1e-9;
    (pass, format!("V={v:.12} oracle={oracle:.12}"))
}

fn naive_mc() -> Outcome {
    let mut hits = 0;
    let mut means = Vec::new();
    for seed in 1..=20u64 {
        let cfg = McConfig::new(1e-3, 200_000, seed, 1.0).with_zero_handling(ZeroHandling::ExtendPayoff);
        let e = mc::price_naive(&cev(), &Payoff::Identity, &cfg).unwrap();
        if (e.mean - 1.0).abs() < 4.0 * e.std_error {
            hits += 1;
        }
        means.push((e.mean, e.std_error, e.overflow_count));
    }
    let avg = means.iter().map(|m| m.0).sum::<f64>() / 20.0;
    let se = means.iter().map(|m| m.1).sum::<f64>() / 20.0;
    let overflow: u64 = means.iter().map(|m| m.2).sum();
    (hits >= 19, format!("{hits}/20 seeds within 4se of 1; mean of means {avg:.4}, typical se {se:.4}, overflowed paths {overflow}"))
}

fn naive_fdm() -> Outcome {
    let g = GridSpec::new(50.0, 999, 1000, 1.0, 1.0).unwrap();
    let b = BoundarySpec::new(0.0, UpperBoundary::AsymptoticIdentity);
    let mut worst: f64 = 0.0;
    pde::solve_visit(&cev(), |x| x, &b, &g, |_, row| {
        for (i, v) in row.iter().enumerate() {
            worst = worst.max((v - g.x(i)).abs());
        }
    })
    .unwrap();
    (worst < 1e-9, format!("max |u - x| = {worst:.3e}"))
}

fn corrected_mc() -> Outcome {
    let cfg = McConfig::new(1e-4, 400_000, 11, 1.0).with_barrier(50.0).with_zero_handling(ZeroHandling::AbsorbAtZero);
    let e = mc::price_rebate(&cev(), &Payoff::Identity, &RebateSpec::Zero, &cfg).unwrap();
    let gap = (e.mean - 0.6827).abs();
    let tol = 3.0 * e.std_error + 0.03;
    (gap <= tol, format!("mean {:.4} ± {:.4}, gap {gap:.4} vs tol {tol:.4}", e.mean, e.std_error))
}

fn fbeta_at(beta: f64, n_space: usize) -> f64 {
    let g = GridSpec::new(beta, n_space, 10_000, 1.0, 1.0).unwrap().keeping_every(10_000).unwrap();
    pde::solve_fbeta_pde(&cev(), &Payoff::Identity, &g).unwrap().surface_at(1.0, 0.0).unwrap()
}

fn corrected_pde() -> Outcome {
    let errors: Vec<f64> = [(25.0, 2499), (50.0, 4999), (100.0, 9999)]
        .iter()
        .map(|&(beta, n)| (fbeta_at(beta, n) - 0.6826895).abs())
        .collect();
    let pass = errors[2] < 0.01 && errors.windows(2).all(|w| w[1] < w[0]);
    (pass, format!("errors at beta 25/50/100: {:.3e} {:.3e} {:.3e}", errors[0], errors[1], errors[2]))
}

fn rate() -> Outcome {
    let pricer = PdeFbetaPricer {
        model: cev(),
        payoff: Payoff::Power { gamma: 0.5 },
        x: 1.0,
        t: 0.0,
        maturity: 1.0,
        mesh_width: 0.01,
        n_time: 10_000,
        theta: 1.0,
    };
    let reference = analysis::proxy_reference(&pricer, 512.0).unwrap();
    let ladder = BetaLadder::geometric(8.0, 128.0, 2.0).unwrap();
    let study = analysis::rate_study(&pricer, reference, &ladder).unwrap();
    match study.fit {
        Some(fit) if !study.inconclusive => {
            let pass = (-0.65..=-0.35).contains(&fit.slope) && fit.r_squared > 0.95;
            (pass, format!("slope {:.3}, R2 {:.4}, proxy reference {:.6}", fit.slope, fit.r_squared, reference.value()))
        }
        _ => (false, format!("inconclusive fit, dropped {:?}", study.dropped)),
    }
}

fn defect() -> Outcome {
    let ladder = BetaLadder::new(vec![10.0, 20.0, 40.0, 80.0]).unwrap();
    let cfg = McConfig::new(1e-4, 1_000_000, 7, 1.0).with_zero_handling(ZeroHandling::AbsorbAtZero);
    let c = analysis::defect_study(&cev(), &ladder, &cfg, false).unwrap();
    let gbm = LocalVolModel::power_law(0.2, 1.0, 1.0).unwrap();
    let g = analysis::defect_study(&gbm, &ladder, &cfg, false).unwrap();
    let pass = (c.limit - 0.31731).abs() <= 0.05 && g.limit.abs() <= 0.02;
    let ladder_values: Vec<String> = c.values.iter().map(|v| format!("{v:.4}")).collect();
    (pass, format!("CEV beta*P at 80 = {:.4} (ladder {}), GBM = {:.4}", c.limit, ladder_values.join(" "), g.limit))
}

fn family_deviation(lambda: f64) -> f64 {
    let (beta, n_time) = (50.0, 3_000_000);
    let g = GridSpec::new(beta, 399, n_time, 1.0, 1.0).unwrap();
    let b = BoundarySpec::new(0.0, UpperBoundary::Analytic(AnalyticBoundary::cev_family(beta, 1.0, lambda)));
    let mut worst: f64 = 0.0;
    pde::solve_visit(&cev(), |x| x, &b, &g, |j, row| {
        if j < n_time {
            let t = g.t(j);
            for (i, v) in row.iter().enumerate().take(row.len() - 1).skip(1) {
                worst = worst.max((v - cev_family(g.x(i), t, 1.0, lambda).unwrap()).abs());
            }
        }
    })
    .unwrap();
    worst
}

fn family() -> Outcome {
    let devs: Vec<f64> = [0.0, 2.0, 4.0].iter().map(|&l| family_deviation(l)).collect();
    let pass = devs.iter().all(|&d| d < 5e-3);
    (pass, format!("max deviation for lambda 0/2/4: {:.3e} {:.3e} {:.3e}", devs[0], devs[1], devs[2]))
}

fn properties() -> Outcome {
    let failures: Vec<String> = props::SUITES
        .iter()
        .filter_map(|(name, run)| run().err().map(|e| format!("{name}: {e}")))
        .collect();
    let n = props::SUITES.len();
    (failures.is_empty(), if failures.is_empty() { format!("{n}/{n} suites") } else { failures.join("; ") })
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("analytic price", analytic_price),
        ("naive Monte Carlo", naive_mc),
        ("naive finite differences", naive_fdm),
        ("barrier Monte Carlo", corrected_mc),
        ("truncated-payoff PDE", corrected_pde),
        ("convergence rate", rate),
        ("martingale defect", defect),
        ("solution family selection", family),
        ("property suites", properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {id} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
        failed += usize::from(!pass);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
