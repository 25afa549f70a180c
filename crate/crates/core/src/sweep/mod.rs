//! Sweep driver: every (P_ec, QBER_I) pair over the excess-loss and
//! half-window grids, optimised point by point and written out as CSV.

pub mod config;
pub mod output;

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{ProtocolParams, SystemParams};
use crate::error::{Error, Result};
use crate::geometry::{max_elevation, select_window, WindowSpec};
use crate::keymath::{ErrorCorrectionKind, KeyResult};
use crate::lossio::{apply_excess_loss, read_loss_file_with, system_loss_db, LossProfile};
use crate::optimizer::{evaluate_key, next_initial_params, optimise_skl, KeyContext};

pub use config::{GridRange, OutputFlags, SweepConfig};
pub use output::{write_outputs, OutputRow, PointMetrics, COLUMNS};

/// All rows for one (P_ec, QBER_I) pair, in grid order: loss outer, dt inner.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub pec: f64,
    pub qberi: f64,
    pub rows: Vec<OutputRow>,
    pub metrics: Vec<PointMetrics>,
    pub wall_time: f64,
}

/// Key length at one point with error correction applied after optimising
/// without it, next to the in-objective result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcComparison {
    pub in_objective: u64,
    pub post_hoc: u64,
}

/// Seed for the optimiser at a given point so that each point's trajectory
/// does not depend on how many random numbers earlier points consumed.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn weighted_mpn(p: &ProtocolParams, mu3: f64) -> f64 {
    p.mu1 * p.p_mu1 + p.mu2 * p.p_mu2 + mu3 * p.p_mu3()
}

struct PointOutcome {
    params: ProtocolParams,
    key: KeyResult,
    metrics: PointMetrics,
    comparison: Option<EcComparison>,
}

fn system_for(cfg: &SweepConfig, pec: f64, qberi: f64) -> SystemParams {
    SystemParams {
        p_ec: pec,
        qber_i: qberi,
        p_ap: cfg.p_ap,
        source_rate: cfg.source_rate,
        num_passes: cfg.num_passes,
        mu3: cfg.mu3,
        sec: cfg.sec,
        xi: cfg.xi,
    }
}

/// Compute one pair's rows. `sink` receives the per-point stream when
/// printing is enabled.
pub fn compute_pair(
    cfg: &SweepConfig,
    profile: &LossProfile,
    pec: f64,
    qberi: f64,
    pair_index: usize,
    sink: &mut dyn Write,
) -> Result<PairResult> {
    let timer = Instant::now();
    let sys = system_for(cfg, pec, qberi);
    sys.validate()?;
    let base_loss = system_loss_db(profile);
    let max_elev = max_elevation(&cfg.geometry)?;
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.optimizer.seed, usize::MAX - pair_index));
    let mut previous: Option<(ProtocolParams, u64)> = None;
    let dts = cfg.dt_range.values();
    let points = cfg.ls_range.count() * dts.len();

    let mut rows = Vec::with_capacity(points);
    let mut metrics = Vec::with_capacity(points);
    for ls in cfg.ls_range.values() {
        let attenuated = apply_excess_loss(profile, ls)?;
        for &dt in &dts {
            let point_timer = Instant::now();
            let index = pair_index * points + rows.len();
            let spec = WindowSpec {
                dt,
                theta_min: cfg.theta_min,
                shift_elev0: cfg.shift_elev,
            };
            let start = match cfg.specified_params() {
                Some(p) if !cfg.optimise => p,
                _ => next_initial_params(&cfg.optimizer, previous, &mut rng, cfg.mu3)?,
            };
            let outcome = match select_window(&attenuated, &spec) {
                Ok(window) => {
                    let ctx = KeyContext {
                        window: &window,
                        sys: &sys,
                        bound: cfg.bound,
                        ec: cfg.ec,
                    };
                    evaluate_point(cfg, &ctx, start, point_seed(cfg.optimizer.seed, index))?
                }
                Err(Error::EmptyWindow) => PointOutcome {
                    params: start,
                    key: KeyResult::default(),
                    metrics: PointMetrics {
                        restarts: 0,
                        evaluations: 0,
                        status: "EmptyWindow".into(),
                        wall_time: 0.0,
                    },
                    comparison: None,
                },
                Err(e) => return Err(e),
            };
            previous = Some((outcome.params, outcome.key.skl));

            let p = outcome.params;
            let row = OutputRow {
                total_loss: ls + base_loss,
                dt,
                skl: outcome.key.skl,
                qber_x: outcome.key.qber_x,
                phi_x: outcome.key.phi_x,
                n_x: outcome.key.n_x_total,
                n_z: outcome.key.n_z_total,
                lambda_ec: outcome.key.lambda_ec,
                s_x0: outcome.key.s_x0,
                s_x1: outcome.key.s_x1,
                v_z1: outcome.key.v_z1,
                s_z1: outcome.key.s_z1,
                mpn: if cfg.mpn_unweighted {
                    (p.mu1 + p.mu2 + cfg.mu3) / 3.0
                } else {
                    weighted_mpn(&p, cfg.mu3)
                },
                qber_i: qberi,
                p_ec: pec,
                p_ap: cfg.p_ap,
                num_passes: cfg.num_passes,
                source_rate: cfg.source_rate,
                eps_c: cfg.sec.eps_c(),
                eps_s: cfg.sec.eps_s(),
                p_x: p.p_x,
                p1: p.p_mu1,
                p2: p.p_mu2,
                p3: p.p_mu3(),
                mu1: p.mu1,
                mu2: p.mu2,
                mu3: cfg.mu3,
                xi: cfg.xi.to_degrees(),
                min_elev: cfg.theta_min,
                max_elev,
                shift_elev: cfg.shift_elev,
            };
            let mut m = outcome.metrics;
            m.wall_time = point_timer.elapsed().as_secs_f64();
            if cfg.outputs.print {
                print_point(sink, &row, &m, outcome.comparison)?;
            }
            rows.push(row);
            metrics.push(m);
        }
    }
    Ok(PairResult {
        pec,
        qberi,
        rows,
        metrics,
        wall_time: timer.elapsed().as_secs_f64(),
    })
}

fn print_point(
    sink: &mut dyn Write,
    row: &OutputRow,
    m: &PointMetrics,
    cmp: Option<EcComparison>,
) -> Result<()> {
    let mut line = format!(
        "Pec={:e} QBERI={} ls={:.2} dB dt={} s SKL={} restarts={} elapsed={:.3} s",
        row.p_ec,
        row.qber_i,
        row.total_loss,
        row.dt,
        row.skl,
        m.restarts,
        m.wall_time
    );
    if let Some(c) = cmp {
        line.push_str(&format!(
            " | EC in objective: {} after: {}",
            c.in_objective, c.post_hoc
        ));
    }
    writeln!(sink, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn evaluate_point(
    cfg: &SweepConfig,
    ctx: &KeyContext,
    start: ProtocolParams,
    seed: u64,
) -> Result<PointOutcome> {
    if !cfg.optimise {
        let key = evaluate_key(&start, ctx).unwrap_or_default();
        return Ok(PointOutcome {
            params: start,
            key,
            metrics: PointMetrics {
                restarts: 0,
                evaluations: 1,
                status: "Fixed".into(),
                wall_time: 0.0,
            },
            comparison: None,
        });
    }
    let opt = crate::optimizer::OptimizerConfig {
        seed,
        ..cfg.optimizer.clone()
    };
    let (params, key, m) = optimise_skl(&opt, ctx, start)?;
    let comparison = if cfg.compare_ec {
        Some(compare_ec_modes(&opt, ctx, start, key.skl)?)
    } else {
        None
    };
    Ok(PointOutcome {
        params,
        key,
        metrics: PointMetrics {
            restarts: m.restarts,
            evaluations: m.evaluations,
            status: m.statuses.join(";"),
            wall_time: m.wall_time,
        },
        comparison,
    })
}

/// Optimise once more without error-correction leakage in the objective and
/// charge the leakage at the optimum found, for comparison with `in_objective`.
pub fn compare_ec_modes(
    opt: &crate::optimizer::OptimizerConfig,
    ctx: &KeyContext,
    start: ProtocolParams,
    in_objective: u64,
) -> Result<EcComparison> {
    if ctx.ec == ErrorCorrectionKind::None {
        return Ok(EcComparison {
            in_objective,
            post_hoc: in_objective,
        });
    }
    let free = KeyContext {
        ec: ErrorCorrectionKind::None,
        ..*ctx
    };
    let (params, _, _) = optimise_skl(opt, &free, start)?;
    let post_hoc = evaluate_key(&params, ctx).map(|k| k.skl).unwrap_or(0);
    Ok(EcComparison {
        in_objective,
        post_hoc,
    })
}

/// Read the configured loss profile.
pub fn load_profile(cfg: &SweepConfig) -> Result<LossProfile> {
    read_loss_file_with(&cfg.loss_file, cfg.loss_column, cfg.efficiency_unit)
}

/// Every pair's results, in file order (P_ec outer, QBER_I inner).
pub fn compute_sweep(
    cfg: &SweepConfig,
    profile: &LossProfile,
    sink: &mut dyn Write,
) -> Result<Vec<PairResult>> {
    cfg.validate()?;
    let mut results = Vec::new();
    for &pec in &cfg.pec_list {
        for &qberi in &cfg.qberi_list {
            let pair = compute_pair(cfg, profile, pec, qberi, results.len(), sink)?;
            if cfg.outputs.print {
                writeln!(
                    sink,
                    "block Pec={pec:e} QBERI={qberi}: {} points in {:.3} s",
                    pair.rows.len(),
                    pair.wall_time
                )
                .map_err(|e| Error::io("<stdout>", e))?;
            }
            results.push(pair);
        }
    }
    Ok(results)
}

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub results: Vec<PairResult>,
    pub files: Vec<std::path::PathBuf>,
    pub wall_time: f64,
}

/// Full run: check the output directory, read the loss file, compute every
/// point and write the requested files.
pub fn run_sweep(cfg: &SweepConfig, sink: &mut dyn Write) -> Result<SweepReport> {
    let timer = Instant::now();
    cfg.validate()?;
    output::preflight(cfg)?;
    let profile = load_profile(cfg)?;
    let results = compute_sweep(cfg, &profile, sink)?;
    let files = write_outputs(&results, cfg)?;
    let wall_time = timer.elapsed().as_secs_f64();
    if cfg.outputs.print {
        writeln!(sink, "total: {} files in {wall_time:.3} s", files.len())
            .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(SweepReport {
        results,
        files,
        wall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrbitGeometry;
    use crate::lossio::generate_synthetic_profile;
    use std::path::Path;

    fn config(extra: &[&str]) -> SweepConfig {
        let overrides: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        SweepConfig::from_toml_str(
            "loss_file = \"unused.csv\"\nQBERI_list = [0.001]\nPec_list = [1e-8]\n\
             dt_range = [100, 200, 50]\nls_range = [0, 4, 2]\nNoptMin = 2\n\
             max_evals = 200\ntPrint = false",
            Path::new(""),
            &overrides,
        )
        .unwrap()
    }

    fn profile() -> LossProfile {
        generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601).unwrap()
    }

    #[test]
    fn rows_follow_grid_order() {
        let cfg = config(&["tOptimise=false"]);
        let res = compute_sweep(&cfg, &profile(), &mut std::io::sink()).unwrap();
        assert_eq!(res.len(), 1);
        let rows = &res[0].rows;
        assert_eq!(rows.len(), 9);
        let base = system_loss_db(&profile());
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.total_loss, (i / 3) as f64 * 2.0 + base);
            assert_eq!(r.dt, [100.0, 150.0, 200.0][i % 3]);
            assert!((r.p1 + r.p2 + r.p3 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_params_skl_does_not_grow_with_loss() {
        let cfg = config(&["tOptimise=false", "ls_range=[0, 20, 2]"]);
        let res = compute_sweep(&cfg, &profile(), &mut std::io::sink()).unwrap();
        for dt_idx in 0..3 {
            let skl: Vec<u64> = res[0].rows.iter().skip(dt_idx).step_by(3).map(|r| r.skl).collect();
            assert!(skl.windows(2).all(|w| w[1] <= w[0]), "{skl:?}");
        }
    }

    #[test]
    fn empty_window_gives_zero_row() {
        let cfg = config(&["tOptimise=false"]);
        // An offset orbit that never clears the 10 degree mask.
        let low = OrbitGeometry {
            xi_deg: 30.0,
            ..OrbitGeometry::default()
        };
        let p = generate_synthetic_profile(&low, 30.0, 601).unwrap();
        let res = compute_sweep(&cfg, &p, &mut std::io::sink()).unwrap();
        assert!(res[0].rows.iter().all(|r| r.skl == 0));
        assert_eq!(res[0].metrics[0].status, "EmptyWindow");
    }

    #[test]
    fn comparison_with_no_ec_is_identity() {
        let cfg = config(&["errcorrFunc=\"None\""]);
        let p = profile();
        let w = select_window(
            &p,
            &WindowSpec {
                dt: 150.0,
                theta_min: 10.0,
                shift_elev0: 0.0,
            },
        )
        .unwrap();
        let sys = system_for(&cfg, 1e-8, 0.001);
        let ctx = KeyContext {
            window: &w,
            sys: &sys,
            bound: cfg.bound,
            ec: cfg.ec,
        };
        let c = compare_ec_modes(&cfg.optimizer, &ctx, cfg.specified_params().unwrap(), 77).unwrap();
        assert_eq!(c.post_hoc, 77);
    }

    #[test]
    fn printed_stream_has_one_line_per_point() {
        let cfg = config(&["tOptimise=false", "tPrint=true"]);
        let mut out = Vec::new();
        compute_sweep(&cfg, &profile(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("Pec=")).count(), 9);
        assert_eq!(text.lines().filter(|l| l.starts_with("block")).count(), 1);
    }
}
