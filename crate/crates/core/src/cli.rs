//! Command-line front end.
//!
//! Every flag has a JSON twin in the `--config` file (schema `"1"`). Values are
//! resolved flag → file → default, and the fully resolved configuration is
//! written next to the results so a run can be replayed with
//! `--config resolved_config.json`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, BetaLadder, BetaPricer, McRebatePricer, PdeFbetaPricer, PdeRebatePricer};
use crate::error::{Error, Result};
use crate::mc::{self, McConfig, ZeroHandling};
use crate::models::{cev_price, martingale_defect, LocalVolModel, VolKind};
use crate::payoffs::{rate_exponent, Payoff, RebateSpec};
use crate::pde::{self, BoundarySpec, GridSpec, UpperBoundary};
use crate::svg::Chart;

pub const SCHEMA: &str = "1";
/// Default output directory when neither `--out` nor the file sets one.
pub const OUT_DIR_ENV: &str = "BUBBLE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Price,
    RateStudy,
    DefectStudy,
    ReproduceExamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    McNaive,
    McRebate,
    PdeRebate,
    PdeFbeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub zero_handling: ZeroHandling,
    pub antithetic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n_space: usize,
    pub n_time: usize,
    pub theta: f64,
    /// Fixed mesh width for ladders; `None` derives it from the smallest rung
    /// and `n_space`.
    pub mesh_width: Option<f64>,
    pub keep_every: usize,
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub command: Command,
    pub method: Method,
    /// `x0` always equals `x`.
    pub model: LocalVolModel,
    pub x: f64,
    pub t: f64,
    pub maturity: f64,
    pub payoff: Payoff,
    pub rebate: RebateSpec,
    pub beta: Option<f64>,
    pub betas: Vec<f64>,
    pub mc: McParams,
    pub grid: GridParams,
    pub richardson: bool,
    pub surface: bool,
    /// Barrier of the proxy reference solve; `None` means four times the largest rung.
    pub reference_beta: Option<f64>,
    pub threads: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct McFile {
    dt: Option<f64>,
    n_paths: Option<u64>,
    seed: Option<u64>,
    zero_handling: Option<ZeroHandling>,
    antithetic: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    n_space: Option<usize>,
    n_time: Option<usize>,
    theta: Option<f64>,
    mesh_width: Option<f64>,
    keep_every: Option<usize>,
}

/// `--config` contents; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    schema: Option<String>,
    #[allow(dead_code)]
    command: Option<Command>,
    method: Option<Method>,
    model: Option<LocalVolModel>,
    x: Option<f64>,
    t: Option<f64>,
    maturity: Option<f64>,
    payoff: Option<Payoff>,
    rebate: Option<RebateSpec>,
    beta: Option<f64>,
    betas: Option<Vec<f64>>,
    #[serde(default)]
    mc: McFile,
    #[serde(default)]
    grid: GridFile,
    richardson: Option<bool>,
    surface: Option<bool>,
    reference_beta: Option<f64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "bubble", version, about = "Pricing under strict local martingales: Monte Carlo, PDE and convergence studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Price one contract.
    Price(RunArgs),
    /// Error against a reference over a β-ladder, with a log-log slope fit.
    RateStudy(RunArgs),
    /// β·P(τ^β < T) over a β-ladder.
    DefectStudy(RunArgs),
    /// Run the three textbook vignettes and print a pass/fail table.
    ReproduceExamples(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelArg {
    pub c: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderArg(pub Vec<f64>);

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON configuration file (schema "1"); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// `cev` or `power:c:p`.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "T", visible_alias = "maturity")]
    pub maturity: Option<f64>,
    /// `identity`, `power:γ`, `call:K` or `constant:v`.
    #[arg(long, value_parser = parse_payoff)]
    pub payoff: Option<Payoff>,
    /// `zero`, `constant:v` or `power:η`.
    #[arg(long, value_parser = parse_rebate)]
    pub rebate: Option<RebateSpec>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// `start:end:xratio` (e.g. `8:128:x2`) or a comma-separated list.
    #[arg(long, value_parser = parse_ladder)]
    pub betas: Option<LadderArg>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `absorb` or `extend`.
    #[arg(long, value_parser = parse_zero_handling)]
    pub zero_handling: Option<ZeroHandling>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub antithetic: Option<bool>,
    #[arg(long)]
    pub n_space: Option<usize>,
    #[arg(long)]
    pub n_time: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub mesh_width: Option<f64>,
    #[arg(long)]
    pub keep_every: Option<usize>,
    #[arg(long)]
    pub reference_beta: Option<f64>,
    /// Two-point extrapolation of the defect limit.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub richardson: Option<bool>,
    /// Also write the full PDE surface (`surface.csv`, `surface.json`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub surface: Option<bool>,
    /// Output directory [default: $BUBBLE_OUT_DIR, else ./bubble-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub threads: Option<usize>,
}

fn split_num(s: &str, what: &str) -> std::result::Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in {what}"))
}

pub fn parse_model(s: &str) -> std::result::Result<ModelArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["cev"] => Ok(ModelArg { c: 1.0, p: 2.0 }),
        ["power", c, p] => Ok(ModelArg {
            c: split_num(c, "model")?,
            p: split_num(p, "model")?,
        }),
        _ => Err(format!("expected `cev` or `power:c:p`, got `{s}`")),
    }
}

pub fn parse_payoff(s: &str) -> std::result::Result<Payoff, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let f = match parts.as_slice() {
        ["identity"] => Payoff::Identity,
        ["power", g] => Payoff::Power { gamma: split_num(g, "payoff")? },
        ["call", k] => Payoff::Call { strike: split_num(k, "payoff")? },
        ["constant", v] => Payoff::Constant { value: split_num(v, "payoff")? },
        _ => return Err(format!("expected identity|power:γ|call:K|constant:v, got `{s}`")),
    };
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}

pub fn parse_rebate(s: &str) -> std::result::Result<RebateSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let g = match parts.as_slice() {
        ["zero"] => RebateSpec::Zero,
        ["constant", v] => RebateSpec::Constant { value: split_num(v, "rebate")? },
        ["power", e] => RebateSpec::Power { eta: split_num(e, "rebate")? },
        _ => return Err(format!("expected zero|constant:v|power:η, got `{s}`")),
    };
    g.validate().map_err(|e| e.to_string())?;
    Ok(g)
}

pub fn parse_ladder(s: &str) -> std::result::Result<LadderArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let ladder = match parts.as_slice() {
        [a, b, r] => {
            let r = r.strip_prefix('x').unwrap_or(r);
            BetaLadder::geometric(split_num(a, "betas")?, split_num(b, "betas")?, split_num(r, "betas")?)
        }
        [list] => {
            let betas = list.split(',').map(|v| split_num(v, "betas")).collect::<std::result::Result<Vec<_>, _>>()?;
            BetaLadder::new(betas)
        }
        _ => return Err(format!("expected start:end:xratio or a comma list, got `{s}`")),
    };
    ladder.map(|l| LadderArg(l.betas().to_vec())).map_err(|e| e.to_string())
}

pub fn parse_zero_handling(s: &str) -> std::result::Result<ZeroHandling, String> {
    match s {
        "absorb" | "absorb_at_zero" => Ok(ZeroHandling::AbsorbAtZero),
        "extend" | "extend_payoff" => Ok(ZeroHandling::ExtendPayoff),
        _ => Err(format!("expected absorb or extend, got `{s}`")),
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Merges flags over the optional config file over the defaults.
pub fn resolve(command: Command, args: &RunArgs) -> Result<RunConfig> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let file: FileConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            match file.schema.as_deref() {
                Some(SCHEMA) => {}
                Some(other) => return Err(Error::Config(format!("unsupported schema `{other}`, expected `{SCHEMA}`"))),
                None => return Err(Error::Config(format!("config file must declare \"schema\": \"{SCHEMA}\""))),
            }
            file
        }
        None => FileConfig::default(),
    };

    let default_method = match command {
        Command::RateStudy => Method::PdeFbeta,
        Command::DefectStudy => Method::McNaive,
        _ => Method::Analytic,
    };
    let (c, p) = match (args.model, file.model) {
        (Some(m), _) => (m.c, m.p),
        (None, Some(m)) => {
            let VolKind::PowerLaw { c, p } = m.kind();
            (c, p)
        }
        (None, None) => (1.0, 2.0),
    };
    let x = args.x.or(file.x).or(file.model.map(|m| m.initial_x())).unwrap_or(1.0);
    let model = LocalVolModel::power_law(c, p, x)?;
    let out = args
        .out
        .clone()
        .or(file.out)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bubble-out"));

    let betas = match (&args.betas, file.betas) {
        (Some(l), _) => l.0.clone(),
        (None, Some(b)) => b,
        (None, None) => BetaLadder::geometric(8.0, 128.0, 2.0)?.betas().to_vec(),
    };

    let cfg = RunConfig {
        schema: SCHEMA.into(),
        command,
        method: args.method.or(file.method).unwrap_or(default_method),
        model,
        x,
        t: args.t.or(file.t).unwrap_or(0.0),
        maturity: args.maturity.or(file.maturity).unwrap_or(1.0),
        payoff: args.payoff.or(file.payoff).unwrap_or(Payoff::Identity),
        rebate: args.rebate.or(file.rebate).unwrap_or_default(),
        beta: args.beta.or(file.beta),
        betas,
        mc: McParams {
            dt: args.dt.or(file.mc.dt).unwrap_or(1e-3),
            n_paths: args.paths.or(file.mc.n_paths).unwrap_or(100_000),
            seed: args.seed.or(file.mc.seed).unwrap_or(1),
            zero_handling: args.zero_handling.or(file.mc.zero_handling).unwrap_or_default(),
            antithetic: args.antithetic.or(file.mc.antithetic).unwrap_or(false),
        },
        grid: GridParams {
            n_space: args.n_space.or(file.grid.n_space).unwrap_or(999),
            n_time: args.n_time.or(file.grid.n_time).unwrap_or(1000),
            theta: args.theta.or(file.grid.theta).unwrap_or(1.0),
            mesh_width: args.mesh_width.or(file.grid.mesh_width),
            keep_every: args.keep_every.or(file.grid.keep_every).unwrap_or(1),
        },
        richardson: args.richardson.or(file.richardson).unwrap_or(false),
        surface: args.surface.or(file.surface).unwrap_or(false),
        reference_beta: args.reference_beta.or(file.reference_beta),
        threads: args.threads.or(file.threads).unwrap_or_else(default_threads),
        out,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Method-specific checks that do not need the engines.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema `{}`", self.schema)));
        }
        self.payoff.validate()?;
        self.rebate.validate()?;
        if self.threads == 0 {
            return Err(Error::invalid("threads", "need at least one worker"));
        }
        if !(self.t >= 0.0 && self.t < self.maturity) {
            return Err(Error::invalid("t", format!("need 0 ≤ t < T, got t = {}, T = {}", self.t, self.maturity)));
        }
        let needs_beta = matches!(self.method, Method::McRebate | Method::PdeRebate | Method::PdeFbeta);
        match self.command {
            Command::Price => {
                if needs_beta && self.beta.is_none() {
                    return Err(Error::invalid("beta", format!("method {:?} needs --beta", self.method)));
                }
                if self.method == Method::McNaive && self.beta.is_some() {
                    return Err(Error::invalid("beta", "mc-naive runs without a barrier"));
                }
            }
            Command::RateStudy => {
                if !needs_beta {
                    return Err(Error::invalid("method", "rate-study needs mc-rebate, pde-rebate or pde-fbeta"));
                }
                BetaLadder::new(self.betas.clone())?.check_above(self.x)?;
            }
            Command::DefectStudy => {
                if self.method != Method::McNaive {
                    return Err(Error::invalid("method", "defect-study simulates the unbarriered scheme (mc-naive)"));
                }
                BetaLadder::new(self.betas.clone())?.check_above(self.x)?;
            }
            Command::ReproduceExamples => {}
        }
        Ok(())
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig::new(self.mc.dt, self.mc.n_paths, self.mc.seed, self.maturity)
            .with_start(self.t)
            .with_zero_handling(self.mc.zero_handling)
            .with_antithetic(self.mc.antithetic)
    }

    fn ladder_mesh_width(&self) -> f64 {
        self.grid
            .mesh_width
            .unwrap_or_else(|| self.betas[0] / (self.grid.n_space as f64 + 1.0))
    }
}

/// What a finished run reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// False when a reproduce-examples check failed.
    pub all_pass: bool,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Executes a resolved configuration on a pool of `cfg.threads` workers.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let mut art = Artifacts::new(&cfg.out)?;
        art.json("resolved_config.json", cfg)?;
        let (lines, all_pass) = match cfg.command {
            Command::Price => (run_price(cfg, &mut art)?, true),
            Command::RateStudy => (run_rate_study(cfg, &mut art)?, true),
            Command::DefectStudy => (run_defect_study(cfg, &mut art)?, true),
            Command::ReproduceExamples => run_reproduce(cfg, &mut art)?,
        };
        Ok(Outcome {
            lines,
            files: art.files,
            all_pass,
        })
    })
}

fn analytic_if_any(cfg: &RunConfig) -> Option<f64> {
    analysis::analytic_reference(&cfg.model, &cfg.payoff, cfg.x, cfg.t, cfg.maturity)
        .ok()
        .map(|r| r.value())
}

fn run_price(cfg: &RunConfig, art: &mut Artifacts) -> Result<Vec<String>> {
    let analytic = analytic_if_any(cfg);
    let mut result = serde_json::json!({
        "command": "price",
        "method": cfg.method,
        "x": cfg.x,
        "t": cfg.t,
        "maturity": cfg.maturity,
        "beta": cfg.beta,
        "analytic": analytic,
    });
    let line = match cfg.method {
        Method::Analytic => {
            if !cfg.model.is_cev() || cfg.payoff != Payoff::Identity {
                return Err(Error::MissingOracle(format!("{:?} under {:?}", cfg.payoff, cfg.model.kind())));
            }
            let v = cev_price(cfg.x, cfg.t, cfg.maturity)?;
            result["value"] = v.into();
            result["martingale_defect"] = martingale_defect(cfg.x, cfg.t, cfg.maturity)?.into();
            format!("{v:.7}")
        }
        Method::McNaive | Method::McRebate => {
            let mc_cfg = cfg.mc_config();
            let est = if cfg.method == Method::McNaive {
                mc::price_naive(&cfg.model, &cfg.payoff, &mc_cfg)?
            } else {
                mc::price_rebate(&cfg.model, &cfg.payoff, &cfg.rebate, &mc_cfg.with_barrier(cfg.beta.unwrap_or_default()))?
            };
            result["value"] = est.mean.into();
            result["estimate"] = serde_json::to_value(est)?;
            format!(
                "{:.7} ± {:.7} (n = {}, hit_frac = {:.6}, overflow = {})",
                est.mean, est.std_error, est.n_paths, est.hit_fraction, est.overflow_count
            )
        }
        Method::PdeRebate | Method::PdeFbeta => {
            let beta = cfg.beta.unwrap_or_default();
            let g = &cfg.grid;
            // without a stored surface, solve over the remaining horizon only
            let (grid, t_read) = if cfg.surface {
                (GridSpec::new(beta, g.n_space, g.n_time, g.theta, cfg.maturity)?.keeping_every(g.keep_every)?, cfg.t)
            } else {
                (GridSpec::new(beta, g.n_space, g.n_time, g.theta, cfg.maturity - cfg.t)?.keeping_every(g.n_time)?, 0.0)
            };
            let surface = if cfg.method == Method::PdeFbeta {
                pde::solve_fbeta_pde(&cfg.model, &cfg.payoff, &grid)?
            } else {
                pde::solve_rebate_pde(&cfg.model, &cfg.payoff, &cfg.rebate, &grid)?
            };
            let v = surface.surface_at(cfg.x, t_read)?;
            result["value"] = v.into();
            result["corner_gap"] = surface.corner_gap().into();
            result["grid"] = serde_json::to_value(grid)?;
            if cfg.surface {
                let mut buf = Vec::new();
                surface.write_csv(&mut buf)?;
                art.write("surface.csv", &buf)?;
                art.json("surface.json", &surface.metadata())?;
            }
            format!("{v:.7}")
        }
    };
    art.json("result.json", &result)?;
    Ok(vec![line])
}

fn build_pricer(cfg: &RunConfig) -> Result<Box<dyn BetaPricer>> {
    let fbeta = fbeta_pricer(cfg);
    Ok(match cfg.method {
        Method::PdeFbeta => Box::new(fbeta),
        Method::PdeRebate => Box::new(PdeRebatePricer {
            model: cfg.model,
            payoff: cfg.payoff,
            rebate: cfg.rebate,
            x: cfg.x,
            t: cfg.t,
            maturity: cfg.maturity,
            mesh_width: fbeta.mesh_width,
            n_time: fbeta.n_time,
            theta: fbeta.theta,
        }),
        Method::McRebate => Box::new(McRebatePricer {
            model: cfg.model,
            payoff: cfg.payoff,
            rebate: cfg.rebate,
            cfg: cfg.mc_config(),
        }),
        m => return Err(Error::invalid("method", format!("{m:?} cannot run a rate study"))),
    })
}

fn fbeta_pricer(cfg: &RunConfig) -> PdeFbetaPricer {
    PdeFbetaPricer {
        model: cfg.model,
        payoff: cfg.payoff,
        x: cfg.x,
        t: cfg.t,
        maturity: cfg.maturity,
        mesh_width: cfg.ladder_mesh_width(),
        n_time: cfg.grid.n_time,
        theta: cfg.grid.theta,
    }
}

fn run_rate_study(cfg: &RunConfig, art: &mut Artifacts) -> Result<Vec<String>> {
    let ladder = BetaLadder::new(cfg.betas.clone())?;
    let pricer = build_pricer(cfg)?;
    let reference = match analysis::analytic_reference(&cfg.model, &cfg.payoff, cfg.x, cfg.t, cfg.maturity) {
        Ok(r) => r,
        Err(_) => {
            let beta_ref = cfg.reference_beta.unwrap_or(4.0 * ladder.betas()[ladder.len() - 1]);
            analysis::proxy_reference(&fbeta_pricer(cfg), beta_ref)?
        }
    };
    let study = analysis::rate_study(pricer.as_ref(), reference, &ladder)?;
    let mut lines: Vec<String> = study
        .rows
        .iter()
        .map(|r| {
            format!(
                "beta = {:>10} price = {:.7} error = {:.3e} stderr = {:.3e}",
                r.beta,
                r.price,
                r.error.unwrap_or(f64::NAN),
                r.stderr
            )
        })
        .collect();
    let theory = -rate_exponent(&cfg.payoff, &cfg.rebate);
    match study.fit {
        Some(f) => lines.push(format!(
            "slope = {:.4} (theory {theory:.4}), r2 = {:.4}, points = {}",
            f.slope, f.r_squared, f.n_points
        )),
        None => lines.push("fit inconclusive: fewer than 3 usable points".into()),
    }
    if reference.is_proxy() {
        lines.push(format!("reference (proxy) = {:.7}", reference.value()));
    }

    let mut buf = Vec::new();
    analysis::write_study_csv(&study.rows, &mut buf)?;
    art.write("study.csv", &buf)?;
    let mut fit = study.fit_json();
    fit["theory_slope"] = theory.into();
    art.json("fit.json", &fit)?;
    let points: Vec<(f64, f64)> = study.rows.iter().filter_map(|r| r.error.map(|e| (r.beta, e))).collect();
    let mut chart = Chart::new("reference error vs barrier", "beta", "|V - V^beta|")
        .log_log()
        .with_series("error", points);
    if let Some(f) = study.fit {
        let line = ladder.betas().iter().map(|&b| (b, (f.intercept + f.slope * b.ln()).exp())).collect();
        chart = chart.with_series("fit", line);
    }
    art.write("chart.svg", chart.render().as_bytes())?;
    art.json(
        "result.json",
        &serde_json::json!({
            "command": "rate-study",
            "method": cfg.method,
            "pricer": pricer.describe(),
            "study": study,
            "theory_slope": theory,
        }),
    )?;
    Ok(lines)
}

fn run_defect_study(cfg: &RunConfig, art: &mut Artifacts) -> Result<Vec<String>> {
    let ladder = BetaLadder::new(cfg.betas.clone())?;
    let est = analysis::defect_study(&cfg.model, &ladder, &cfg.mc_config(), cfg.richardson)?;
    let mut lines: Vec<String> = est
        .betas
        .iter()
        .zip(&est.values)
        .zip(&est.std_errors)
        .map(|((b, v), s)| format!("beta = {b:>10} beta*P = {v:.6} ± {s:.6}"))
        .collect();
    lines.push(match est.reference {
        Some(r) => format!("limit = {:.6}, reference = {r:.6}", est.limit),
        None => format!("limit = {:.6}", est.limit),
    });
    let mut buf = Vec::new();
    analysis::write_study_csv(&est.rows(), &mut buf)?;
    art.write("study.csv", &buf)?;
    let mut chart = Chart::new("beta * P(tau < T)", "beta", "beta * P")
        .with_series("estimate", est.betas.iter().copied().zip(est.values.iter().copied()).collect());
    chart.log_x = true;
    if let Some(r) = est.reference {
        chart = chart.with_series("x - E[X(T)]", est.betas.iter().map(|&b| (b, r)).collect());
    }
    art.write("chart.svg", chart.render().as_bytes())?;
    art.json(
        "result.json",
        &serde_json::json!({ "command": "defect-study", "estimate": est }),
    )?;
    Ok(lines)
}

#[derive(Debug, Clone, Serialize)]
struct Vignette {
    name: &'static str,
    expected: String,
    observed: String,
    pass: bool,
}

fn run_reproduce(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Vec<String>, bool)> {
    let cev = LocalVolModel::cev(1.0)?;
    let v_true = cev_price(1.0, 0.0, 1.0)?;
    let mut rows = Vec::new();

    let naive_cfg = McConfig::new(1e-3, 20_000, cfg.mc.seed, 1.0).with_zero_handling(ZeroHandling::ExtendPayoff);
    let est = mc::price_naive(&cev, &Payoff::Identity, &naive_cfg)?;
    rows.push(Vignette {
        name: "naive Euler-Maruyama",
        expected: "mean ≈ x = 1 (not V)".into(),
        observed: format!("{:.4} ± {:.4}", est.mean, est.std_error),
        pass: (est.mean - 1.0).abs() < 4.0 * est.std_error,
    });

    let grid = GridSpec::new(50.0, 999, 1000, 1.0, 1.0)?.keeping_every(1000)?;
    let surface = pde::solve(&cev, |x| x, &BoundarySpec::new(0.0, UpperBoundary::AsymptoticIdentity), &grid)?;
    let mut dev: f64 = 0.0;
    for (_, row) in surface.rows() {
        for (i, v) in row.iter().enumerate() {
            dev = dev.max((v - grid.x(i)).abs());
        }
    }
    rows.push(Vignette {
        name: "naive finite differences, u(beta,t) = beta",
        expected: "u ≡ x".into(),
        observed: format!("max |u - x| = {dev:.2e}"),
        pass: dev < 1e-9,
    });

    let fbeta = PdeFbetaPricer {
        model: cev,
        payoff: Payoff::Identity,
        x: 1.0,
        t: 0.0,
        maturity: 1.0,
        mesh_width: 0.01,
        n_time: 2000,
        theta: 1.0,
    };
    let v = fbeta.price_at(100.0)?.price;
    rows.push(Vignette {
        name: "truncated payoff f^beta, beta = 100",
        expected: format!("V = {v_true:.6}"),
        observed: format!("{v:.6}"),
        pass: (v - v_true).abs() < 0.01,
    });

    let all_pass = rows.iter().all(|r| r.pass);
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut lines = vec![format!("{:<w$}  {:<22}  {:<24}  result", "vignette", "expected", "observed")];
    for r in &rows {
        lines.push(format!(
            "{:<w$}  {:<22}  {:<24}  {}",
            r.name,
            r.expected,
            r.observed,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    art.json(
        "result.json",
        &serde_json::json!({ "command": "reproduce-examples", "vignettes": rows, "all_pass": all_pass }),
    )?;
    Ok((lines, all_pass))
}

/// Machine-readable failure report for stderr.
pub fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// Parses `args`, runs, prints, and returns the process exit code: 0 on
/// success, 1 when a reproduce-examples check fails, 2 on errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
    };
    let (command, args) = match &cli.command {
        Cmd::Price(a) => (Command::Price, a),
        Cmd::RateStudy(a) => (Command::RateStudy, a),
        Cmd::DefectStudy(a) => (Command::DefectStudy, a),
        Cmd::ReproduceExamples(a) => (Command::ReproduceExamples, a),
    };
    match resolve(command, args).and_then(|cfg| run(&cfg)) {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            if outcome.all_pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            2
        }
    }
}
