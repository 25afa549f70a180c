//! Output rows and the CSV files they are written to.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::format::float_repr;

use super::config::SweepConfig;
use super::PairResult;

/// Column names of the main output tables, in file order.
pub const COLUMNS: [&str; 31] = [
    "ls+sysLoss", "dt", "SKL", "QBERx", "phi_x", "nX", "nZ", "lambdaEC", "sX0", "sX1", "vz1",
    "sZ1", "mpn", "QBERI", "Pec", "Pap", "NoPass", "Rrate", "eps_c", "eps_s", "Px", "P1", "P2",
    "P3", "mu1", "mu2", "mu3", "xi", "min_elev", "max_elev", "shift_elev",
];

/// Column names of the optimiser-metrics files.
pub const METRIC_COLUMNS: [&str; 6] =
    ["ls+sysLoss", "dt", "SKL", "restarts", "evaluations", "status"];

/// One sweep point as written to the main output files.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutputRow {
    /// Excess loss plus the profile's own best-case loss, dB.
    pub total_loss: f64,
    pub dt: f64,
    pub skl: u64,
    pub qber_x: f64,
    pub phi_x: f64,
    pub n_x: f64,
    pub n_z: f64,
    pub lambda_ec: f64,
    pub s_x0: f64,
    pub s_x1: f64,
    pub v_z1: f64,
    pub s_z1: f64,
    pub mpn: f64,
    pub qber_i: f64,
    pub p_ec: f64,
    pub p_ap: f64,
    pub num_passes: u32,
    pub source_rate: f64,
    pub eps_c: f64,
    pub eps_s: f64,
    pub p_x: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    /// Degrees.
    pub xi: f64,
    pub min_elev: f64,
    pub max_elev: f64,
    pub shift_elev: f64,
}

impl OutputRow {
    /// Every column as a float, in file order.
    pub fn values(&self) -> [f64; 31] {
        [
            self.total_loss,
            self.dt,
            self.skl as f64,
            self.qber_x,
            self.phi_x,
            self.n_x,
            self.n_z,
            self.lambda_ec,
            self.s_x0,
            self.s_x1,
            self.v_z1,
            self.s_z1,
            self.mpn,
            self.qber_i,
            self.p_ec,
            self.p_ap,
            f64::from(self.num_passes),
            self.source_rate,
            self.eps_c,
            self.eps_s,
            self.p_x,
            self.p1,
            self.p2,
            self.p3,
            self.mu1,
            self.mu2,
            self.mu3,
            self.xi,
            self.min_elev,
            self.max_elev,
            self.shift_elev,
        ]
    }

    /// CSV line without the trailing newline. Integer columns are written
    /// as integers, everything else in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        self.values()
            .iter()
            .enumerate()
            .map(|(i, v)| match i {
                2 => self.skl.to_string(),
                16 => self.num_passes.to_string(),
                _ => float_repr(*v),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Sweep-point optimiser record, without timings so files are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMetrics {
    pub restarts: usize,
    pub evaluations: usize,
    /// Per-restart termination statuses joined by `;`.
    pub status: String,
    pub wall_time: f64,
}

/// Index of the maximal-SKL row for each excess-loss value. Rows are grouped
/// by loss, `dt_count` to a group; ties go to the earliest (smallest dt).
pub fn optimal_indices(rows: &[OutputRow], dt_count: usize) -> Vec<usize> {
    rows.chunks(dt_count)
        .enumerate()
        .map(|(block, chunk)| {
            let mut best = 0;
            for (i, r) in chunk.iter().enumerate() {
                if r.skl > chunk[best].skl {
                    best = i;
                }
            }
            block * dt_count + best
        })
        .collect()
}

fn pair_suffix(pec: f64, qberi: f64) -> String {
    format!("Pec_{}_QBERI_{}", float_repr(pec), float_repr(qberi))
}

pub fn full_data_path(cfg: &SweepConfig, pec: f64, qberi: f64) -> PathBuf {
    cfg.outpath.join(format!("{}_{}.csv", cfg.outbase, pair_suffix(pec, qberi)))
}

pub fn opt_data_path(cfg: &SweepConfig, pec: f64, qberi: f64) -> PathBuf {
    cfg.outpath.join(format!("{}_opt_{}.csv", cfg.outbase, pair_suffix(pec, qberi)))
}

pub fn metrics_path(cfg: &SweepConfig, pec: f64, qberi: f64) -> PathBuf {
    cfg.outpath.join(format!("{}_metrics_{}.csv", cfg.outbase, pair_suffix(pec, qberi)))
}

pub fn multi_opt_path(cfg: &SweepConfig) -> PathBuf {
    cfg.outpath.join(format!("{}_multi_opt.csv", cfg.outbase))
}

fn table<'a>(rows: impl IntoIterator<Item = &'a OutputRow>) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Make sure results can be written before any computation starts.
pub fn preflight(cfg: &SweepConfig) -> Result<()> {
    let dir = &cfg.outpath;
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let probe = dir.join(format!(".{}.probe", cfg.outbase));
    write(&probe, "")?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Write every requested file and return their paths in write order.
pub fn write_outputs(results: &[PairResult], cfg: &SweepConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let dt_count = cfg.dt_range.count();
    let mut multi = Vec::new();
    for pair in results {
        let optimal: Vec<&OutputRow> = optimal_indices(&pair.rows, dt_count)
            .into_iter()
            .map(|i| &pair.rows[i])
            .collect();
        if cfg.outputs.full_data {
            let path = full_data_path(cfg, pair.pec, pair.qberi);
            write(&path, &table(&pair.rows))?;
            written.push(path);
        }
        if cfg.outputs.opti_data {
            let path = opt_data_path(cfg, pair.pec, pair.qberi);
            write(&path, &table(optimal.iter().copied()))?;
            written.push(path);
        }
        if cfg.outputs.metrics {
            let path = metrics_path(cfg, pair.pec, pair.qberi);
            let mut text = METRIC_COLUMNS.join(",");
            text.push('\n');
            for (r, m) in pair.rows.iter().zip(&pair.metrics) {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    float_repr(r.total_loss),
                    float_repr(r.dt),
                    r.skl,
                    m.restarts,
                    m.evaluations,
                    m.status
                ));
            }
            write(&path, &text)?;
            written.push(path);
        }
        multi.extend(optimal);
    }
    if cfg.outputs.multi_opt {
        let path = multi_opt_path(cfg);
        write(&path, &table(multi))?;
        written.push(path);
    }
    Ok(written)
}
