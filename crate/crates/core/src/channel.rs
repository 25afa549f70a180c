//! Expected detection statistics for a transmission window.
//!
//! Weak coherent pulses of mean photon number μ see a transmittance η per
//! time slot. A slot clicks with probability
//! `D = (1 + p_ap)[1 − (1 − 2 p_ec) e^{−ημ}]` and registers a bit error with
//! probability `e = p_ec + QBER_I (1 − e^{−ημ}) + p_ap/2 [1 − (1 − 2 p_ec) e^{−ημ}]`.
//! Sifting keeps a fraction `p_x²` (X) or `(1 − p_x)²` (Z) of events since
//! both ends share the basis bias.

use crate::error::{Error, Result};
use crate::keymath::{CountStatistics, IntensitySet, SecurityParams};

/// Hardware and channel parameters held fixed during optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Extraneous (dark + background) count probability per detector gate.
    pub p_ec: f64,
    /// Intrinsic QBER from misalignment.
    pub qber_i: f64,
    /// After-pulse probability.
    pub p_ap: f64,
    /// Pulse repetition rate in Hz.
    pub source_rate: f64,
    /// Number of identical overpasses.
    pub num_passes: u32,
    /// Intensity of the second decoy (fixed).
    pub mu3: f64,
    pub sec: SecurityParams,
    /// Orbit offset angle in radians; carried through to the output only.
    pub xi: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_ec", self.p_ec), ("qber_i", self.qber_i), ("p_ap", self.p_ap)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::domain(name, v, "[0, 1)"));
            }
        }
        if !(self.source_rate > 0.0) || !self.source_rate.is_finite() {
            return Err(Error::domain("source_rate", self.source_rate, "(0, inf)"));
        }
        if self.num_passes == 0 {
            return Err(Error::InvalidParams("num_passes must be at least 1".into()));
        }
        if !(self.mu3 >= 0.0) {
            return Err(Error::domain("mu3", self.mu3, "[0, inf)"));
        }
        Ok(())
    }
}

/// The five optimisable protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Probability of choosing the X basis (both parties).
    pub p_x: f64,
    pub p_mu1: f64,
    pub p_mu2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl ProtocolParams {
    pub fn new(p_x: f64, p_mu1: f64, p_mu2: f64, mu1: f64, mu2: f64) -> Self {
        ProtocolParams {
            p_x,
            p_mu1,
            p_mu2,
            mu1,
            mu2,
        }
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        ProtocolParams::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.p_x, self.p_mu1, self.p_mu2, self.mu1, self.mu2]
    }

    /// Probability of the second decoy, `1 − p_μ1 − p_μ2`.
    pub fn p_mu3(&self) -> f64 {
        1.0 - self.p_mu1 - self.p_mu2
    }

    pub fn is_feasible(&self, mu3: f64) -> bool {
        self.validate(mu3).is_ok()
    }

    pub fn validate(&self, mu3: f64) -> Result<()> {
        for (name, v) in [("p_x", self.p_x), ("p_mu1", self.p_mu1), ("p_mu2", self.p_mu2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(name, v, "(0, 1)"));
            }
        }
        if !(self.p_mu1 + self.p_mu2 < 1.0) {
            return Err(Error::InvalidParams(format!(
                "p_mu1 + p_mu2 = {} must be below 1",
                self.p_mu1 + self.p_mu2
            )));
        }
        self.intensities(mu3).map(|_| ())
    }

    pub fn intensities(&self, mu3: f64) -> Result<IntensitySet> {
        IntensitySet::new(
            [self.mu1, self.mu2, mu3],
            [self.p_mu1, self.p_mu2, self.p_mu3()],
        )
    }
}

/// Link transmittance per time slot across a transmission window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEfficiencies {
    efficiencies: Vec<f64>,
    slot_duration: f64,
}

impl WindowEfficiencies {
    pub fn new(efficiencies: Vec<f64>, slot_duration: f64) -> Result<Self> {
        if let Some(&bad) = efficiencies.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::domain("efficiency", bad, "[0, 1]"));
        }
        if !(slot_duration > 0.0) {
            return Err(Error::domain("slot_duration", slot_duration, "(0, inf)"));
        }
        Ok(WindowEfficiencies {
            efficiencies,
            slot_duration,
        })
    }

    pub fn efficiencies(&self) -> &[f64] {
        &self.efficiencies
    }

    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    pub fn len(&self) -> usize {
        self.efficiencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.efficiencies.is_empty()
    }

    /// Concatenate two windows with the same slot duration.
    pub fn concat(&self, other: &WindowEfficiencies) -> Result<Self> {
        if self.slot_duration != other.slot_duration {
            return Err(Error::InvalidParams(
                "cannot join windows with different slot durations".into(),
            ));
        }
        let mut effs = self.efficiencies.clone();
        effs.extend_from_slice(&other.efficiencies);
        WindowEfficiencies::new(effs, self.slot_duration)
    }
}

fn no_click_factor(eta: f64, mu: f64, sys: &SystemParams) -> (f64, f64) {
    let attenuated = (-eta * mu).exp();
    (attenuated, 1.0 - (1.0 - 2.0 * sys.p_ec) * attenuated)
}

/// Probability that a pulse of intensity `mu` produces a click.
pub fn slot_click_probability(eta: f64, mu: f64, sys: &SystemParams) -> f64 {
    let (_, raw) = no_click_factor(eta, mu, sys);
    ((1.0 + sys.p_ap) * raw).clamp(0.0, 1.0)
}

/// Probability that a pulse of intensity `mu` produces an erroneous click.
/// Never exceeds [`slot_click_probability`].
pub fn slot_error_probability(eta: f64, mu: f64, sys: &SystemParams) -> f64 {
    let (attenuated, raw) = no_click_factor(eta, mu, sys);
    let e = sys.p_ec + sys.qber_i * (1.0 - attenuated) + 0.5 * sys.p_ap * raw;
    e.clamp(0.0, slot_click_probability(eta, mu, sys))
}

/// Pulses sent per slot summed over all passes.
pub fn pulses_per_slot(window: &WindowEfficiencies, sys: &SystemParams) -> f64 {
    sys.source_rate * window.slot_duration * f64::from(sys.num_passes)
}

/// Expected sifted events and errors for every intensity over `window`.
///
/// Slots are accumulated in time order so the result is reproducible.
pub fn accumulate_counts(
    window: &WindowEfficiencies,
    proto: &ProtocolParams,
    sys: &SystemParams,
) -> CountStatistics {
    let pulses = pulses_per_slot(window, sys);
    let mu = [proto.mu1, proto.mu2, sys.mu3];
    let p_mu = [proto.p_mu1, proto.p_mu2, proto.p_mu3()];
    let sift_x = proto.p_x * proto.p_x;
    let sift_z = (1.0 - proto.p_x) * (1.0 - proto.p_x);

    let mut clicks = [0.0; 3];
    let mut errors = [0.0; 3];
    for &eta in window.efficiencies() {
        for j in 0..3 {
            clicks[j] += slot_click_probability(eta, mu[j], sys);
            errors[j] += slot_error_probability(eta, mu[j], sys);
        }
    }

    let mut counts = CountStatistics::default();
    for j in 0..3 {
        let sent = pulses * p_mu[j];
        counts.n_x[j] = sent * sift_x * clicks[j];
        counts.n_z[j] = sent * sift_z * clicks[j];
        counts.m_x[j] = sent * sift_x * errors[j];
        counts.m_z[j] = sent * sift_z * errors[j];
    }
    counts
}
