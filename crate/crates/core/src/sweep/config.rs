//! Sweep configuration, read from TOML using the classic variable names.
//!
//! ```toml
//! loss_file  = "FS_loss_XI0.csv"
//! QBERI_list = [0.001, 0.003, 0.005]
//! Pec_list   = [1e-8, 1e-7, 1e-6]
//! dt_range   = [200, 350, 10]
//! ls_range   = [0, 12, 2]
//! ```
//!
//! Every other key has a default. Relative paths are resolved against the
//! directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::ProtocolParams;
use crate::error::{Error, Result};
use crate::geometry::{OrbitGeometry, WindowSpec, EARTH_RADIUS_KM};
use crate::keymath::{ErrorCorrectionKind, SecurityParams, TailBoundKind};
use crate::lossio::{EfficiencyUnit, DEFAULT_EFFICIENCY_COLUMN};
use crate::optimizer::{InitialParams, Method, OptimizerConfig, DEFAULT_BOUNDS, DEFAULT_INITIAL};

/// Inclusive `start, stop, step` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let r = GridRange { start, stop, step };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::Config(format!("range {self:?} must be finite")));
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!("range step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(Error::Config(format!(
                "range stop {} is below start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    /// Number of grid points, `⌊(stop − start)/step⌋ + 1`. A tiny tolerance
    /// keeps an endpoint that is a whole number of steps away from being lost
    /// to rounding.
    pub fn count(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Which output files and streams to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFlags {
    pub full_data: bool,
    pub opti_data: bool,
    pub multi_opt: bool,
    pub metrics: bool,
    pub print: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub loss_file: PathBuf,
    /// Efficiency column in the loss file, counting from 1.
    pub loss_column: usize,
    pub efficiency_unit: EfficiencyUnit,
    /// Orbit geometry; only used for the maximum-elevation column.
    pub geometry: OrbitGeometry,
    /// Orbit offset angle in radians.
    pub xi: f64,
    pub mu3: f64,
    pub sec: SecurityParams,
    pub qberi_list: Vec<f64>,
    pub pec_list: Vec<f64>,
    pub p_ap: f64,
    pub num_passes: u32,
    pub source_rate: f64,
    pub dt_range: GridRange,
    pub ls_range: GridRange,
    pub theta_min: f64,
    pub shift_elev: f64,
    pub bound: TailBoundKind,
    pub ec: ErrorCorrectionKind,
    pub compare_ec: bool,
    /// When false every point is evaluated at the specified initial values.
    pub optimise: bool,
    pub optimizer: OptimizerConfig,
    pub outputs: OutputFlags,
    pub outbase: String,
    pub outpath: PathBuf,
    /// Write the plain mean of the intensities in the `mpn` column instead of
    /// the probability-weighted mean.
    pub mpn_unweighted: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryToml {
    #[serde(rename = "R_E", default = "default_earth_radius")]
    earth_radius: f64,
    #[serde(default = "default_h_sat")]
    h_sat: f64,
    #[serde(default)]
    h_ogs: f64,
}

fn default_earth_radius() -> f64 {
    EARTH_RADIUS_KM
}

fn default_h_sat() -> f64 {
    500.0
}

impl Default for GeometryToml {
    fn default() -> Self {
        GeometryToml {
            earth_radius: default_earth_radius(),
            h_sat: default_h_sat(),
            h_ogs: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ConfigToml {
    loss_file: PathBuf,
    #[serde(default)]
    loss_path: PathBuf,
    #[serde(default = "default_lc")]
    lc: usize,
    #[serde(default)]
    loss_in_db: bool,
    #[serde(default)]
    geometry: GeometryToml,

    #[serde(default)]
    xi: f64,
    #[serde(default)]
    mu3: f64,
    #[serde(default = "default_eps_c")]
    eps_c: f64,
    #[serde(default = "default_eps_s")]
    eps_s: f64,
    #[serde(default = "default_qberi")]
    QBERI_list: Vec<f64>,
    #[serde(default = "default_pec")]
    Pec_list: Vec<f64>,
    #[serde(default = "default_pap")]
    Pap: f64,
    #[serde(default = "default_passes")]
    NoPass: u32,
    #[serde(default = "default_rate")]
    Rrate: f64,

    #[serde(default = "default_dt_range")]
    dt_range: [f64; 3],
    #[serde(default = "default_min_elev")]
    min_elev: f64,
    #[serde(default)]
    shift_elev: f64,
    #[serde(default = "default_ls_range")]
    ls_range: [f64; 3],

    #[serde(default = "default_bound")]
    boundFunc: String,
    #[serde(default = "default_ec")]
    errcorrFunc: String,
    #[serde(default)]
    tCompareEC: bool,

    #[serde(default = "yes")]
    tOptimise: bool,
    #[serde(default = "default_bounds")]
    xb: [[f64; 2]; 5],
    #[serde(default = "yes")]
    tInit: bool,
    #[serde(default = "default_px")]
    Px_i: f64,
    #[serde(default = "default_pk1")]
    pk1_i: f64,
    #[serde(default = "default_pk2")]
    pk2_i: f64,
    #[serde(default = "default_mu1")]
    mu1_i: f64,
    #[serde(default = "default_mu2")]
    mu2_i: f64,
    #[serde(default = "default_method")]
    method: String,
    #[serde(default = "default_nopt")]
    NoptMin: usize,
    #[serde(default = "yes")]
    tStopZero: bool,
    #[serde(default = "yes")]
    tStopBetter: bool,
    #[serde(default = "default_max_evals")]
    max_evals: usize,
    #[serde(default)]
    seed: u64,

    #[serde(default = "yes")]
    tFullData: bool,
    #[serde(default = "yes")]
    tOptiData: bool,
    #[serde(default = "yes")]
    tMultiOpt: bool,
    #[serde(default = "yes")]
    tMetrics: bool,
    #[serde(default = "yes")]
    tPrint: bool,
    #[serde(default)]
    outpath: PathBuf,
    #[serde(default = "default_outbase")]
    outbase: String,
    #[serde(default)]
    mpn_unweighted: bool,
}

fn default_lc() -> usize {
    DEFAULT_EFFICIENCY_COLUMN
}
fn default_eps_c() -> f64 {
    1e-15
}
fn default_eps_s() -> f64 {
    1e-9
}
fn default_qberi() -> Vec<f64> {
    vec![0.001, 0.003, 0.005]
}
fn default_pec() -> Vec<f64> {
    vec![1e-8, 1e-7, 1e-6]
}
fn default_pap() -> f64 {
    0.001
}
fn default_passes() -> u32 {
    1
}
fn default_rate() -> f64 {
    1e9
}
fn default_dt_range() -> [f64; 3] {
    [200.0, 350.0, 10.0]
}
fn default_min_elev() -> f64 {
    10.0
}
fn default_ls_range() -> [f64; 3] {
    [0.0, 12.0, 2.0]
}
fn default_bound() -> String {
    "Chernoff".into()
}
fn default_ec() -> String {
    "logM".into()
}
fn default_bounds() -> [[f64; 2]; 5] {
    DEFAULT_BOUNDS.map(|(lo, hi)| [lo, hi])
}
fn default_px() -> f64 {
    DEFAULT_INITIAL[0]
}
fn default_pk1() -> f64 {
    DEFAULT_INITIAL[1]
}
fn default_pk2() -> f64 {
    DEFAULT_INITIAL[2]
}
fn default_mu1() -> f64 {
    DEFAULT_INITIAL[3]
}
fn default_mu2() -> f64 {
    DEFAULT_INITIAL[4]
}
fn default_method() -> String {
    "COBYLA".into()
}
fn default_nopt() -> usize {
    10
}
fn default_max_evals() -> usize {
    1000
}
fn default_outbase() -> String {
    "out".into()
}

impl SweepConfig {
    /// Parse TOML text. Relative paths are joined onto `base_dir`.
    /// `overrides` are `key=value` pairs applied on top, with the value in
    /// TOML syntax (`seed=7`, `boundFunc="Hoeffding"`, `ls_range=[0,4,2]`).
    pub fn from_toml_str(text: &str, base_dir: &Path, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{item}' is not key=value")))?;
            let parsed: toml::Table = toml::from_str(&format!("v = {}", value.trim()))
                .map_err(|e| Error::Config(format!("override '{item}': {}", e.message())))?;
            table.insert(key.trim().to_string(), parsed["v"].clone());
        }
        let raw: ConfigToml = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        raw.resolve(base_dir)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qberi_list.is_empty() || self.pec_list.is_empty() {
            return Err(Error::Config("QBERI_list and Pec_list must not be empty".into()));
        }
        for &q in &self.qberi_list {
            if !(0.0..0.5).contains(&q) {
                return Err(Error::Config(format!("QBERI {q} outside [0, 0.5)")));
            }
        }
        for &p in self.pec_list.iter().chain([&self.p_ap]) {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("probability {p} outside [0, 1)")));
            }
        }
        if self.num_passes == 0 {
            return Err(Error::Config("NoPass must be at least 1".into()));
        }
        if !(self.source_rate > 0.0 && self.source_rate.is_finite()) {
            return Err(Error::Config(format!("Rrate {} must be positive", self.source_rate)));
        }
        if !(self.mu3 >= 0.0) {
            return Err(Error::Config(format!("mu3 {} must be non-negative", self.mu3)));
        }
        self.dt_range.validate()?;
        self.ls_range.validate()?;
        if self.ls_range.start < 0.0 {
            return Err(Error::Config("ls_range must not start below 0 dB".into()));
        }
        WindowSpec {
            dt: self.dt_range.start,
            theta_min: self.theta_min,
            shift_elev0: self.shift_elev,
        }
        .validate()?;
        self.geometry.validate()?;
        self.optimizer.validate()?;
        if let InitialParams::Specified(p) = self.optimizer.init {
            p.validate(self.mu3)?;
        }
        if self.outbase.is_empty() || self.outbase.contains(['/', '\\']) {
            return Err(Error::Config(format!("outbase '{}' is not a plain name", self.outbase)));
        }
        Ok(())
    }

    /// The parameters used for fixed-parameter runs and as the starting point
    /// of each optimisation when initial values are specified.
    pub fn specified_params(&self) -> Option<ProtocolParams> {
        match self.optimizer.init {
            InitialParams::Specified(p) => Some(p),
            InitialParams::Random => None,
        }
    }
}

impl ConfigToml {
    fn resolve(self, base_dir: &Path) -> Result<SweepConfig> {
        let bound: TailBoundKind = self.boundFunc.parse()?;
        let ec: ErrorCorrectionKind = self.errcorrFunc.parse()?;
        // Asymptotic runs have nothing to compare: the finite-size terms are
        // already gone from the key length.
        let compare_ec = self.tCompareEC && bound.is_finite_key();
        let specified =
            ProtocolParams::new(self.Px_i, self.pk1_i, self.pk2_i, self.mu1_i, self.mu2_i);
        if !self.tOptimise && !self.tInit {
            return Err(Error::Config(
                "tOptimise = false needs tInit = true to supply the fixed parameters".into(),
            ));
        }
        let optimizer = OptimizerConfig {
            bounds: self.xb.map(|[lo, hi]| (lo, hi)),
            init: if self.tInit {
                InitialParams::Specified(specified)
            } else {
                InitialParams::Random
            },
            nopt_min: self.NoptMin,
            stop_zero: self.tStopZero,
            stop_better: self.tStopBetter,
            method: self.method.parse::<Method>()?,
            max_evals_per_restart: self.max_evals,
            seed: self.seed,
        };
        let [ds, de, dst] = self.dt_range;
        let [ls, le, lst] = self.ls_range;
        let cfg = SweepConfig {
            loss_file: base_dir.join(self.loss_path).join(self.loss_file),
            loss_column: self.lc,
            efficiency_unit: if self.loss_in_db {
                EfficiencyUnit::Decibels
            } else {
                EfficiencyUnit::Linear
            },
            geometry: OrbitGeometry {
                earth_radius: self.geometry.earth_radius,
                h_sat: self.geometry.h_sat,
                h_ogs: self.geometry.h_ogs,
                xi_deg: self.xi.to_degrees(),
            },
            xi: self.xi,
            mu3: self.mu3,
            sec: SecurityParams::new(self.eps_c, self.eps_s)?,
            qberi_list: self.QBERI_list,
            pec_list: self.Pec_list,
            p_ap: self.Pap,
            num_passes: self.NoPass,
            source_rate: self.Rrate,
            dt_range: GridRange::new(ds, de, dst)?,
            ls_range: GridRange::new(ls, le, lst)?,
            theta_min: self.min_elev,
            shift_elev: self.shift_elev,
            bound,
            ec,
            compare_ec,
            optimise: self.tOptimise,
            optimizer,
            outputs: OutputFlags {
                full_data: self.tFullData,
                opti_data: self.tOptiData,
                multi_opt: self.tMultiOpt,
                metrics: self.tMetrics,
                print: self.tPrint,
            },
            outbase: self.outbase,
            outpath: base_dir.join(self.outpath),
            mpn_unweighted: self.mpn_unweighted,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
