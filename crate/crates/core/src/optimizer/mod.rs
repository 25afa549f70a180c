//! Key-length maximisation over the five protocol parameters.
//!
//! Each optimisation point runs a restart loop. Restart 1 starts from the
//! configured (or carried-over) parameters and later restarts from uniform
//! random draws; the loop ends on the stop rules in [`optimise_skl`].

pub mod nelder_mead;

use std::cell::{Cell, RefCell};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{accumulate_counts, ProtocolParams, SystemParams, WindowEfficiencies};
use crate::error::{Error, Result};
use crate::keymath::{secret_key_length, ErrorCorrectionKind, KeyResult, TailBoundKind};

/// Box bounds for (P_X, P_μ1, P_μ2, μ1, μ2). Both ends are excluded.
pub const DEFAULT_BOUNDS: [(f64, f64); 5] =
    [(0.3, 1.0), (0.6, 0.9999), (0.0, 0.4), (0.3, 1.0), (0.1, 0.5)];

/// Starting point used when initial values are specified.
pub const DEFAULT_INITIAL: [f64; 5] = [0.5, 0.7, 0.1, 0.8, 0.3];

/// Fraction of each box width trimmed from both ends so that returned
/// parameters sit strictly inside the bounds.
const BOUND_INSET: f64 = 1e-9;

/// Slack required on each protocol inequality.
const CONSTRAINT_MARGIN: f64 = 1e-9;

const PARAM_TOLERANCE: f64 = 1e-6;

const MAX_DRAWS: usize = 1000;

/// Everything the objective needs besides the protocol parameters.
#[derive(Debug, Clone, Copy)]
pub struct KeyContext<'a> {
    pub window: &'a WindowEfficiencies,
    pub sys: &'a SystemParams,
    pub bound: TailBoundKind,
    pub ec: ErrorCorrectionKind,
}

/// Key-length chain at `params`.
pub fn evaluate_key(params: &ProtocolParams, ctx: &KeyContext) -> Result<KeyResult> {
    params.validate(ctx.sys.mu3)?;
    let intensities = params.intensities(ctx.sys.mu3)?;
    let counts = accumulate_counts(ctx.window, params, ctx.sys);
    secret_key_length(&counts, &intensities, &ctx.sys.sec, ctx.bound, ctx.ec)
}

/// Secret key length in bits, zero wherever the parameters are infeasible.
pub fn evaluate_objective(params: &ProtocolParams, ctx: &KeyContext) -> u64 {
    evaluate_key(params, ctx).map(|k| k.skl).unwrap_or(0)
}

/// The quantity the optimisers actually climb: the key length before
/// flooring, clamped at zero.
fn objective_value(params: &ProtocolParams, ctx: &KeyContext) -> f64 {
    evaluate_key(params, ctx)
        .map(|k| k.skl_real.max(0.0))
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cobyla,
    NelderMead,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cobyla => "COBYLA",
            Method::NelderMead => "Nelder-Mead",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cobyla" => Ok(Method::Cobyla),
            "nelder-mead" | "neldermead" | "nm" => Ok(Method::NelderMead),
            _ => Err(Error::Config(format!(
                "unknown optimisation method '{s}', expected COBYLA or Nelder-Mead"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialParams {
    Specified(ProtocolParams),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub bounds: [(f64, f64); 5],
    pub init: InitialParams,
    pub nopt_min: usize,
    pub stop_zero: bool,
    pub stop_better: bool,
    pub method: Method,
    pub max_evals_per_restart: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            bounds: DEFAULT_BOUNDS,
            init: InitialParams::Specified(ProtocolParams::from_array(DEFAULT_INITIAL)),
            nopt_min: 10,
            stop_zero: true,
            stop_better: true,
            method: Method::Cobyla,
            max_evals_per_restart: 1000,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "bounds[{i}] = ({lo}, {hi}) must be finite and ordered"
                )));
            }
            if i < 3 && !(lo >= 0.0 && hi <= 1.0) {
                return Err(Error::Config(format!(
                    "bounds[{i}] = ({lo}, {hi}) must lie within [0, 1] for a probability"
                )));
            }
            if i >= 3 && lo < 0.0 {
                return Err(Error::Config(format!(
                    "bounds[{i}] = ({lo}, {hi}) must be non-negative for an intensity"
                )));
            }
        }
        if self.nopt_min == 0 {
            return Err(Error::Config("NoptMin must be at least 1".into()));
        }
        if self.max_evals_per_restart == 0 {
            return Err(Error::Config("max_evals_per_restart must be at least 1".into()));
        }
        if let InitialParams::Specified(p) = self.init {
            let x = p.to_array();
            if let Some(i) = (0..5).find(|&i| !(x[i] > self.bounds[i].0 && x[i] < self.bounds[i].1))
            {
                return Err(Error::Config(format!(
                    "initial value {} for parameter {i} is outside its bounds {:?}",
                    x[i], self.bounds[i]
                )));
            }
        }
        Ok(())
    }

    /// Bounds pulled in slightly so every point the optimisers return is
    /// strictly inside the configured box.
    fn strict_bounds(&self) -> [(f64, f64); 5] {
        self.bounds.map(|(lo, hi)| {
            let inset = BOUND_INSET * (hi - lo);
            (lo + inset, hi - inset)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerMetrics {
    pub restarts: usize,
    pub evaluations: usize,
    pub best_skl: u64,
    /// Termination status reported by the method for each restart.
    pub statuses: Vec<String>,
    pub wall_time: f64,
}

/// The protocol inequalities `1 − P_μ1 − P_μ2`, `μ1 − μ2 − μ3` and `μ2 − μ3`,
/// shifted by the margin. Feasible when every entry is non-negative.
fn constraint_slack(x: &[f64], mu3: f64) -> [f64; 3] {
    [
        1.0 - x[1] - x[2] - CONSTRAINT_MARGIN,
        x[3] - x[4] - mu3 - CONSTRAINT_MARGIN,
        x[4] - mu3 - CONSTRAINT_MARGIN,
    ]
}

fn inside(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).all(|(v, &(lo, hi))| *v >= lo && *v <= hi)
}

/// Uniform draw inside the strict bounds satisfying the protocol constraints.
pub fn random_params<R: Rng>(
    config: &OptimizerConfig,
    rng: &mut R,
    mu3: f64,
) -> Result<ProtocolParams> {
    let bounds = config.strict_bounds();
    for _ in 0..MAX_DRAWS {
        let x: [f64; 5] = std::array::from_fn(|i| rng.gen_range(bounds[i].0..=bounds[i].1));
        if constraint_slack(&x, mu3).iter().all(|&s| s >= 0.0) {
            return Ok(ProtocolParams::from_array(x));
        }
    }
    Err(Error::InfeasibleBounds(MAX_DRAWS))
}

/// Starting point for the first restart at a new optimisation point.
///
/// `previous` carries the optimum and key length of the preceding point.
/// Random initialisation reuses it when that point produced key.
pub fn next_initial_params<R: Rng>(
    config: &OptimizerConfig,
    previous: Option<(ProtocolParams, u64)>,
    rng: &mut R,
    mu3: f64,
) -> Result<ProtocolParams> {
    match config.init {
        InitialParams::Specified(p) => Ok(p),
        InitialParams::Random => match previous {
            Some((p, skl)) if skl > 0 => Ok(p),
            _ => random_params(config, rng, mu3),
        },
    }
}

struct RestartOutcome {
    x: [f64; 5],
    value: f64,
    evaluations: usize,
    status: String,
}

/// Tracks the best feasible point an optimiser has evaluated, so a restart
/// never reports worse than anything it saw.
struct Tracker<'a, 'c> {
    ctx: &'a KeyContext<'c>,
    bounds: [(f64, f64); 5],
    best: RefCell<([f64; 5], f64)>,
    evaluations: Cell<usize>,
}

impl<'a, 'c> Tracker<'a, 'c> {
    fn new(ctx: &'a KeyContext<'c>, bounds: [(f64, f64); 5], x0: [f64; 5]) -> Self {
        Tracker {
            ctx,
            bounds,
            best: RefCell::new((x0, f64::NEG_INFINITY)),
            evaluations: Cell::new(0),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        let feasible = inside(x, &self.bounds)
            && constraint_slack(x, self.ctx.sys.mu3).iter().all(|&s| s >= 0.0);
        if !feasible {
            return 0.0;
        }
        let arr: [f64; 5] = x.try_into().expect("five parameters");
        let v = objective_value(&ProtocolParams::from_array(arr), self.ctx);
        let mut best = self.best.borrow_mut();
        if v > best.1 {
            *best = (arr, v);
        }
        v
    }

    fn finish(self, status: String) -> RestartOutcome {
        let (x, value) = self.best.into_inner();
        RestartOutcome {
            x,
            value,
            evaluations: self.evaluations.get(),
            status,
        }
    }
}

fn run_cobyla(
    x0: [f64; 5],
    bounds: [(f64, f64); 5],
    ctx: &KeyContext,
    max_evals: usize,
) -> RestartOutcome {
    let tracker = Tracker::new(ctx, bounds, x0);
    let mu3 = ctx.sys.mu3;
    let cons: Vec<_> = (0..3)
        .map(|k| move |x: &[f64], _: &mut ()| constraint_slack(x, mu3)[k])
        .collect();
    let rho: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.1 * (hi - lo)).collect();
    let tols = cobyla::StopTols {
        xtol_abs: vec![PARAM_TOLERANCE; 5],
        ..Default::default()
    };
    let outcome = cobyla::minimize(
        |x: &[f64], _: &mut ()| -tracker.value(x),
        &x0,
        &bounds,
        &cons,
        (),
        max_evals,
        cobyla::RhoBeg::Set(rho),
        Some(tols),
    );
    let status = match outcome {
        Ok((s, _, _)) => format!("{s:?}"),
        Err((s, _, _)) => format!("{s:?}"),
    };
    tracker.finish(status)
}

fn run_nelder_mead(
    x0: [f64; 5],
    bounds: [(f64, f64); 5],
    ctx: &KeyContext,
    max_evals: usize,
) -> RestartOutcome {
    let tracker = Tracker::new(ctx, bounds, x0);
    let mu3 = ctx.sys.mu3;
    let scale = 1e3 * tracker.value(&x0).max(1.0);
    let r = nelder_mead::minimize(
        |x| {
            let violation: f64 = constraint_slack(x, mu3).iter().map(|s| (-s).max(0.0)).sum();
            -tracker.value(x) + scale * violation
        },
        &x0,
        &bounds,
        max_evals.saturating_sub(1),
        PARAM_TOLERANCE,
    );
    let status = if r.converged { "XtolReached" } else { "MaxEvalReached" };
    tracker.finish(status.to_string())
}

/// Maximise the key length from a given starting point with restarts.
///
/// The loop stops when
/// - `stop_zero` is set and the first `nopt_min` restarts all found no key;
/// - `stop_better` is set, at least `nopt_min` restarts have run and the best
///   key found beats the key at the first starting point;
/// - the restart count reaches `max(nopt_min, ⌈10·nopt_min·max_evals / mean evals⌉)`.
///
/// The returned parameters are the best feasible point evaluated by any
/// restart, or the starting point if nothing feasible was found.
pub fn optimise_skl(
    config: &OptimizerConfig,
    ctx: &KeyContext,
    start: ProtocolParams,
) -> Result<(ProtocolParams, KeyResult, OptimizerMetrics)> {
    config.validate()?;
    let timer = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bounds = config.strict_bounds();

    let clamp = |p: ProtocolParams| {
        let x = p.to_array();
        ProtocolParams::from_array(std::array::from_fn(|i| x[i].clamp(bounds[i].0, bounds[i].1)))
    };
    let start = clamp(start);
    let incumbent = evaluate_objective(&start, ctx);

    let mut best = (start, f64::NEG_INFINITY);
    let mut metrics = OptimizerMetrics {
        restarts: 0,
        evaluations: 0,
        best_skl: 0,
        statuses: Vec::new(),
        wall_time: 0.0,
    };
    loop {
        let x0 = if metrics.restarts == 0 {
            start
        } else {
            random_params(config, &mut rng, ctx.sys.mu3)?
        };
        let run = match config.method {
            Method::Cobyla => run_cobyla(x0.to_array(), bounds, ctx, config.max_evals_per_restart),
            Method::NelderMead => {
                run_nelder_mead(x0.to_array(), bounds, ctx, config.max_evals_per_restart)
            }
        };
        metrics.restarts += 1;
        metrics.evaluations += run.evaluations;
        metrics.statuses.push(run.status);
        if run.value > best.1 {
            best = (ProtocolParams::from_array(run.x), run.value);
        }
        let best_skl = if best.1 > 0.0 { best.1.floor() as u64 } else { 0 };
        metrics.best_skl = best_skl;

        let n = metrics.restarts;
        if config.stop_zero && n == config.nopt_min && best_skl == 0 {
            break;
        }
        if config.stop_better && n >= config.nopt_min && best_skl > incumbent {
            break;
        }
        let mean_evals = metrics.evaluations as f64 / n as f64;
        let cap = ((10 * config.nopt_min * config.max_evals_per_restart) as f64 / mean_evals)
            .ceil() as usize;
        if n >= config.nopt_min.max(cap) {
            break;
        }
    }

    let params = best.0;
    let key = evaluate_key(&params, ctx).unwrap_or_default();
    metrics.best_skl = key.skl;
    metrics.wall_time = timer.elapsed().as_secs_f64();
    Ok((params, key, metrics))
}
