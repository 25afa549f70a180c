//! Finite-key secret key length for the three-intensity (two-decoy) BB84
//! protocol with weak coherent pulses.
//!
//! Everything here is a pure function of the count statistics and the
//! protocol parameters. The chain is:
//!
//! ```text
//! counts ──► tail bounds ──► s_X,0, s_X,1, s_Z,1, v_Z,1 ──► φ_X ─┐
//!        └─► QBER_X ──► λ_EC ────────────────────────────────────┴──► ℓ
//! ```

mod binomial;
mod bounds;
mod leakage;

pub use binomial::{binomial_cdf_inverse, EXACT_SUMMATION_LIMIT, QUANTILE_SLACK};
pub use bounds::{
    bounded_counts, gamma, phase_error_rate, single_photon_errors, single_photon_events,
    vacuum_events, Bounds, PHASE_ERROR_CEILING,
};
pub use leakage::{lambda_ec, qber_x, RECONCILIATION_EFFICIENCY};

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of pieces the secrecy budget is split into by the estimators.
pub(crate) const EPS_PARTITIONS: f64 = 21.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityParams {
    eps_c: f64,
    eps_s: f64,
}

impl SecurityParams {
    pub fn new(eps_c: f64, eps_s: f64) -> Result<Self> {
        if !(eps_c > 0.0 && eps_c < 1.0) {
            return Err(Error::domain("eps_c", eps_c, "(0, 1)"));
        }
        if !(eps_s > 0.0 && eps_s < 1.0) {
            return Err(Error::domain("eps_s", eps_s, "(0, 1)"));
        }
        Ok(SecurityParams { eps_c, eps_s })
    }

    /// Correctness parameter ε_c.
    pub fn eps_c(&self) -> f64 {
        self.eps_c
    }

    /// Secrecy parameter ε_s.
    pub fn eps_s(&self) -> f64 {
        self.eps_s
    }
}

/// The three pulse intensities and the probability of preparing each.
///
/// Construction enforces `μ1 > μ2 + μ3`, `μ2 > μ3 ≥ 0` and a probability
/// vector in the open simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensitySet {
    mu: [f64; 3],
    p_mu: [f64; 3],
}

impl IntensitySet {
    pub fn new(mu: [f64; 3], p_mu: [f64; 3]) -> Result<Self> {
        if mu.iter().any(|m| !m.is_finite()) || !(mu[2] >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "intensities must be finite with mu3 >= 0, got {mu:?}"
            )));
        }
        if !(mu[1] > mu[2]) {
            return Err(Error::InvalidParams(format!(
                "need mu2 > mu3, got mu2 = {}, mu3 = {}",
                mu[1], mu[2]
            )));
        }
        if !(mu[0] > mu[1] + mu[2]) {
            return Err(Error::InvalidParams(format!(
                "need mu1 > mu2 + mu3, got mu1 = {}, mu2 + mu3 = {}",
                mu[0],
                mu[1] + mu[2]
            )));
        }
        if p_mu.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::InvalidParams(format!(
                "intensity probabilities must lie in (0, 1), got {p_mu:?}"
            )));
        }
        let total: f64 = p_mu.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "intensity probabilities sum to {total}, not 1"
            )));
        }
        Ok(IntensitySet { mu, p_mu })
    }

    pub fn mu(&self) -> [f64; 3] {
        self.mu
    }

    pub fn p_mu(&self) -> [f64; 3] {
        self.p_mu
    }

    /// Probability-weighted mean photon number Σ p_j μ_j.
    pub fn mean_photon_number(&self) -> f64 {
        self.mu.iter().zip(&self.p_mu).map(|(m, p)| m * p).sum()
    }

    /// Unweighted mean of the three intensities.
    pub fn mean_intensity(&self) -> f64 {
        self.mu.iter().sum::<f64>() / 3.0
    }
}

/// Expected sifted events (`n`) and bit errors (`m`) per basis, indexed by
/// intensity. Counts are expectations and therefore real-valued.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CountStatistics {
    pub n_x: [f64; 3],
    pub n_z: [f64; 3],
    pub m_x: [f64; 3],
    pub m_z: [f64; 3],
}

impl CountStatistics {
    pub fn validate(&self) -> Result<()> {
        for (n, m, basis) in [(&self.n_x, &self.m_x, "X"), (&self.n_z, &self.m_z, "Z")] {
            for j in 0..3 {
                if !(m[j] >= 0.0 && n[j].is_finite() && m[j] <= n[j]) {
                    return Err(Error::InvalidParams(format!(
                        "basis {basis}, intensity {}: need 0 <= m <= n, got n = {}, m = {}",
                        j + 1,
                        n[j],
                        m[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_x_total(&self) -> f64 {
        self.n_x.iter().sum()
    }

    pub fn n_z_total(&self) -> f64 {
        self.n_z.iter().sum()
    }

    pub fn m_x_total(&self) -> f64 {
        self.m_x.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: [f64; 3]| v.map(|x| x * factor);
        CountStatistics {
            n_x: s(self.n_x),
            n_z: s(self.n_z),
            m_x: s(self.m_x),
            m_z: s(self.m_z),
        }
    }
}

impl Add for CountStatistics {
    type Output = CountStatistics;

    fn add(self, rhs: Self) -> Self {
        let a = |l: [f64; 3], r: [f64; 3]| [l[0] + r[0], l[1] + r[1], l[2] + r[2]];
        CountStatistics {
            n_x: a(self.n_x, rhs.n_x),
            n_z: a(self.n_z, rhs.n_z),
            m_x: a(self.m_x, rhs.m_x),
            m_z: a(self.m_z, rhs.m_z),
        }
    }
}

/// Concentration inequality used to turn observed counts into bounds on
/// expected counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailBoundKind {
    Chernoff,
    Hoeffding,
    /// No statistical fluctuations: the infinite-key limit.
    Asymptotic,
}

impl TailBoundKind {
    pub const ALL: [TailBoundKind; 3] = [
        TailBoundKind::Chernoff,
        TailBoundKind::Hoeffding,
        TailBoundKind::Asymptotic,
    ];

    pub fn is_finite_key(self) -> bool {
        !matches!(self, TailBoundKind::Asymptotic)
    }
}

impl fmt::Display for TailBoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailBoundKind::Chernoff => "Chernoff",
            TailBoundKind::Hoeffding => "Hoeffding",
            TailBoundKind::Asymptotic => "Asymptotic",
        })
    }
}

impl FromStr for TailBoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Chernoff" => Ok(TailBoundKind::Chernoff),
            "Hoeffding" => Ok(TailBoundKind::Hoeffding),
            "Asymptotic" => Ok(TailBoundKind::Asymptotic),
            other => Err(Error::Config(format!(
                "unknown bound function '{other}', expected one of Chernoff, Hoeffding, Asymptotic"
            ))),
        }
    }
}

/// How the error-correction leakage λ_EC is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCorrectionKind {
    /// Second-order estimate with a binomial quantile correction.
    #[serde(rename = "logM")]
    LogM,
    /// 1.16 × n_X × h(QBER_X).
    #[serde(rename = "block")]
    Block,
    /// 1.16 × total X-basis bit errors.
    #[serde(rename = "mXtot")]
    MXTot,
    None,
}

impl ErrorCorrectionKind {
    pub const ALL: [ErrorCorrectionKind; 4] = [
        ErrorCorrectionKind::LogM,
        ErrorCorrectionKind::Block,
        ErrorCorrectionKind::MXTot,
        ErrorCorrectionKind::None,
    ];
}

impl fmt::Display for ErrorCorrectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorCorrectionKind::LogM => "logM",
            ErrorCorrectionKind::Block => "block",
            ErrorCorrectionKind::MXTot => "mXtot",
            ErrorCorrectionKind::None => "None",
        })
    }
}

impl FromStr for ErrorCorrectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logM" => Ok(ErrorCorrectionKind::LogM),
            "block" => Ok(ErrorCorrectionKind::Block),
            "mXtot" => Ok(ErrorCorrectionKind::MXTot),
            "None" => Ok(ErrorCorrectionKind::None),
            other => Err(Error::Config(format!(
                "unknown error-correction function '{other}', expected one of logM, block, mXtot, None"
            ))),
        }
    }
}

/// Secret key length for one set of statistics together with every
/// intermediate quantity that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KeyResult {
    /// ℓ in bits, floored and clamped at zero.
    pub skl: u64,
    /// The argument of the floor in the key-length expression (may be negative).
    pub skl_real: f64,
    pub qber_x: f64,
    pub phi_x: f64,
    pub n_x_total: f64,
    pub n_z_total: f64,
    pub lambda_ec: f64,
    pub s_x0: f64,
    pub s_x1: f64,
    pub v_z1: f64,
    pub s_z1: f64,
    pub mean_photon_number: f64,
}

/// Binary entropy h(x) in bits, with h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "[0, 1]"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Probability that the source emits an `n`-photon state, averaged over the
/// three intensities.
pub fn tau(n: u32, intensities: &IntensitySet) -> f64 {
    let factorial: f64 = (1..=n).map(f64::from).product();
    intensities
        .mu
        .iter()
        .zip(&intensities.p_mu)
        .map(|(&mu, &p)| (-mu).exp() * mu.powi(n as i32) * p)
        .sum::<f64>()
        / factorial
}

/// The fixed composable-security cost `6 log2(21/ε_s) + log2(2/ε_c)`.
pub fn security_penalty(sec: &SecurityParams) -> f64 {
    6.0 * (EPS_PARTITIONS / sec.eps_s).log2() + (2.0 / sec.eps_c).log2()
}

/// Full key-length chain from count statistics.
///
/// Conditions under which no key can be extracted (an empty basis, no
/// single-photon events) give `skl = 0` with the intermediates filled in as
/// far as they could be computed. Only malformed inputs are errors.
pub fn secret_key_length(
    counts: &CountStatistics,
    intensities: &IntensitySet,
    sec: &SecurityParams,
    bound: TailBoundKind,
    ec: ErrorCorrectionKind,
) -> Result<KeyResult> {
    counts.validate()?;
    let eps_s = sec.eps_s;

    let mut out = KeyResult {
        n_x_total: counts.n_x_total(),
        n_z_total: counts.n_z_total(),
        mean_photon_number: intensities.mean_photon_number(),
        phi_x: PHASE_ERROR_CEILING,
        ..KeyResult::default()
    };

    match qber_x(counts) {
        Ok(q) => out.qber_x = q,
        Err(Error::NoKey(_)) => return Ok(out),
        Err(e) => return Err(e),
    }
    out.lambda_ec = lambda_ec(counts, sec.eps_c, ec)?;

    let nx = bounded_counts(&counts.n_x, intensities, eps_s, bound)?;
    let nz = bounded_counts(&counts.n_z, intensities, eps_s, bound)?;
    let mz = bounded_counts(&counts.m_z, intensities, eps_s, bound)?;

    out.s_x0 = vacuum_events(&nx, intensities)?;
    out.s_x1 = single_photon_events(&nx, out.s_x0, intensities)?;
    let s_z0 = vacuum_events(&nz, intensities)?;
    out.s_z1 = single_photon_events(&nz, s_z0, intensities)?;
    out.v_z1 = single_photon_errors(&mz, intensities)?;

    out.phi_x = match phase_error_rate(out.v_z1, out.s_z1, out.s_x1, eps_s, bound) {
        Ok(phi) => phi,
        Err(Error::NoKey(_)) => return Ok(out),
        Err(e) => return Err(e),
    };

    let penalty = if bound.is_finite_key() {
        security_penalty(sec)
    } else {
        0.0
    };
    out.skl_real =
        out.s_x0 + out.s_x1 * (1.0 - binary_entropy(out.phi_x)?) - out.lambda_ec - penalty;
    out.skl = if out.skl_real > 0.0 {
        out.skl_real.floor() as u64
    } else {
        0
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_intensities() -> IntensitySet {
        IntensitySet::new([0.8, 0.3, 0.0], [0.7, 0.1, 0.2]).unwrap()
    }

    #[test]
    fn entropy_fixed_points() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // mpmath, 30 digits: -0.11*log2(0.11) - 0.89*log2(0.89)
        assert_relative_eq!(
            binary_entropy(0.11).unwrap(),
            0.499915958164528,
            max_relative = 1e-14
        );
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn tau_all_vacuum() {
        let set = IntensitySet {
            mu: [0.0; 3],
            p_mu: [0.3, 0.3, 0.4],
        };
        assert_eq!(tau(0, &set), 1.0);
    }

    #[test]
    fn tau_matches_direct_sum() {
        let set = default_intensities();
        let t0 = 0.7 * (-0.8f64).exp() + 0.1 * (-0.3f64).exp() + 0.2;
        let t1 = 0.7 * 0.8 * (-0.8f64).exp() + 0.1 * 0.3 * (-0.3f64).exp();
        assert_relative_eq!(tau(0, &set), t0, max_relative = 1e-15);
        assert_relative_eq!(tau(1, &set), t1, max_relative = 1e-15);
    }

    #[test]
    fn intensity_set_rejects_bad_orderings() {
        assert!(IntensitySet::new([0.3, 0.3, 0.0], [0.7, 0.1, 0.2]).is_err());
        assert!(IntensitySet::new([0.4, 0.3, 0.2], [0.7, 0.1, 0.2]).is_err());
        assert!(IntensitySet::new([0.8, 0.3, 0.0], [0.7, 0.2, 0.2]).is_err());
        assert!(IntensitySet::new([0.8, 0.3, 0.0], [0.8, 0.2, 0.0]).is_err());
    }

    #[test]
    fn mean_photon_numbers() {
        let set = default_intensities();
        assert_relative_eq!(set.mean_photon_number(), 0.59, max_relative = 1e-15);
        assert_relative_eq!(set.mean_intensity(), 1.1 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_counts_give_no_key() {
        let sec = SecurityParams::new(1e-15, 1e-9).unwrap();
        for bound in TailBoundKind::ALL {
            for ec in ErrorCorrectionKind::ALL {
                let r = secret_key_length(
                    &CountStatistics::default(),
                    &default_intensities(),
                    &sec,
                    bound,
                    ec,
                )
                .unwrap();
                assert_eq!(r.skl, 0);
            }
        }
    }

    #[test]
    fn asymptotic_noiseless_key_is_vacuum_plus_single_photon() {
        // No errors anywhere so v_Z,1 = 0, h(φ) = 0 and λ_EC = 0.
        let n = [4.0e7, 2.0e6, 1.0e5];
        let counts = CountStatistics {
            n_x: n,
            n_z: n,
            m_x: [0.0; 3],
            m_z: [0.0; 3],
        };
        let sec = SecurityParams::new(1e-15, 1e-9).unwrap();
        let set = default_intensities();
        let r = secret_key_length(
            &counts,
            &set,
            &sec,
            TailBoundKind::Asymptotic,
            ErrorCorrectionKind::None,
        )
        .unwrap();
        assert_eq!(r.v_z1, 0.0);
        assert_eq!(r.phi_x, 0.0);
        assert_eq!(r.skl, (r.s_x0 + r.s_x1).floor() as u64);
        assert!(r.skl > 0);
    }

    #[test]
    fn invalid_counts_are_rejected() {
        let counts = CountStatistics {
            n_x: [1.0, 1.0, 1.0],
            m_x: [2.0, 0.0, 0.0],
            ..CountStatistics::default()
        };
        let sec = SecurityParams::new(1e-15, 1e-9).unwrap();
        assert!(secret_key_length(
            &counts,
            &default_intensities(),
            &sec,
            TailBoundKind::Chernoff,
            ErrorCorrectionKind::None
        )
        .is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in TailBoundKind::ALL {
            assert_eq!(k.to_string().parse::<TailBoundKind>().unwrap(), k);
        }
        for k in ErrorCorrectionKind::ALL {
            assert_eq!(k.to_string().parse::<ErrorCorrectionKind>().unwrap(), k);
        }
        assert!("trust".parse::<TailBoundKind>().is_err());
    }
}
