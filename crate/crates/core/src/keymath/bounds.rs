use super::{tau, IntensitySet, TailBoundKind, EPS_PARTITIONS};
use crate::error::{Error, Result};

/// Upper clamp applied to the phase error rate. Beyond one half the binary
/// entropy turns back down, so larger estimates carry no extra meaning.
pub const PHASE_ERROR_CEILING: f64 = 0.5;

/// Per-intensity lower and upper bounds on expected counts, already rescaled
/// by `e^{μ_j} / p_{μ_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

/// Bound the expected counts for each intensity from the observed `counts`.
///
/// Lower bounds are clamped at zero. For [`TailBoundKind::Hoeffding`] the
/// deviation is `sqrt(N/2 · ln(21/ε_s))` where `N` is the sum of `counts`.
pub fn bounded_counts(
    counts: &[f64; 3],
    intensities: &IntensitySet,
    eps_s: f64,
    kind: TailBoundKind,
) -> Result<Bounds> {
    if let Some(&bad) = counts.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
        return Err(Error::domain("count", bad, "[0, inf)"));
    }
    if !(eps_s > 0.0 && eps_s < 1.0) {
        return Err(Error::domain("eps_s", eps_s, "(0, 1)"));
    }
    let ln_eps = (EPS_PARTITIONS / eps_s).ln();
    let total: f64 = counts.iter().sum();
    let hoeffding_delta = (total / 2.0 * ln_eps).sqrt();

    let mut lower = [0.0; 3];
    let mut upper = [0.0; 3];
    for j in 0..3 {
        let n = counts[j];
        let scale = intensities.mu[j].exp() / intensities.p_mu[j];
        let (lo, hi) = match kind {
            TailBoundKind::Chernoff => (
                n - 0.5 * ln_eps - (2.0 * n * ln_eps + 0.25 * ln_eps * ln_eps).sqrt(),
                n + ln_eps + (2.0 * n * ln_eps + ln_eps * ln_eps).sqrt(),
            ),
            TailBoundKind::Hoeffding => (n - hoeffding_delta, n + hoeffding_delta),
            TailBoundKind::Asymptotic => (n, n),
        };
        lower[j] = (scale * lo).max(0.0);
        upper[j] = scale * hi;
    }
    Ok(Bounds { lower, upper })
}

fn check_decoy_gap(intensities: &IntensitySet) -> Result<f64> {
    let [_, mu2, mu3] = intensities.mu;
    let gap = mu2 - mu3;
    if gap > 0.0 {
        Ok(gap)
    } else {
        Err(Error::DegenerateIntensities(format!(
            "mu2 = {mu2} must exceed mu3 = {mu3}"
        )))
    }
}

/// Lower bound on vacuum events `s_0`, clamped at zero.
pub fn vacuum_events(bounded: &Bounds, intensities: &IntensitySet) -> Result<f64> {
    let gap = check_decoy_gap(intensities)?;
    let [_, mu2, mu3] = intensities.mu;
    let s0 = tau(0, intensities) * (mu2 * bounded.lower[2] - mu3 * bounded.upper[1]) / gap;
    Ok(s0.max(0.0))
}

/// Lower bound on single-photon events `s_1`, clamped at zero.
///
/// `s0` is the vacuum bound for the same basis.
pub fn single_photon_events(
    bounded: &Bounds,
    s0: f64,
    intensities: &IntensitySet,
) -> Result<f64> {
    let [mu1, mu2, mu3] = intensities.mu;
    let denom = mu1 * (mu2 - mu3) - mu2 * mu2 + mu3 * mu3;
    if !(denom > 0.0) {
        return Err(Error::DegenerateIntensities(format!(
            "mu1 (mu2 - mu3) - mu2^2 + mu3^2 = {denom} must be positive"
        )));
    }
    let tau0 = tau(0, intensities);
    let tau1 = tau(1, intensities);
    let multi = (mu2 * mu2 - mu3 * mu3) / (mu1 * mu1) * (bounded.upper[0] - s0 / tau0);
    let s1 = tau1 * mu1 * (bounded.lower[1] - bounded.upper[2] - multi) / denom;
    Ok(s1.max(0.0))
}

/// Upper bound on bit errors from single-photon events `v_1`, clamped at zero.
/// `bounded_errors` are the bounds on the error counts of the basis.
pub fn single_photon_errors(bounded_errors: &Bounds, intensities: &IntensitySet) -> Result<f64> {
    let gap = check_decoy_gap(intensities)?;
    let v1 = tau(1, intensities) * (bounded_errors.upper[1] - bounded_errors.lower[2]) / gap;
    Ok(v1.max(0.0))
}

/// Finite-size correction applied to the phase error rate.
///
/// Symmetric in `c` and `d`. At `b ∈ {0, 1}` the prefactor vanishes and the
/// limit value 0 is returned. A negative radicand (log argument below one)
/// also gives 0.
pub fn gamma(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("a", a, "(0, 1)"));
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::domain("b", b, "[0, 1]"));
    }
    if !(c > 0.0) {
        return Err(Error::domain("c", c, "(0, inf)"));
    }
    if !(d > 0.0) {
        return Err(Error::domain("d", d, "(0, inf)"));
    }
    if b == 0.0 || b == 1.0 {
        return Ok(0.0);
    }
    let spread = (1.0 - b) * b;
    let radicand = (c + d) * spread / (c * d * std::f64::consts::LN_2)
        * ((c + d) / (c * d * spread) * (EPS_PARTITIONS * EPS_PARTITIONS) / (a * a)).log2();
    Ok(if radicand > 0.0 { radicand.sqrt() } else { 0.0 })
}

/// Upper bound on the phase error rate of the key basis, clamped to
/// `[0, PHASE_ERROR_CEILING]`.
///
/// Returns [`Error::NoKey`] when either single-photon yield is zero.
pub fn phase_error_rate(
    v_z1: f64,
    s_z1: f64,
    s_x1: f64,
    eps_s: f64,
    kind: TailBoundKind,
) -> Result<f64> {
    if !(s_z1 > 0.0) {
        return Err(Error::NoKey("no single-photon events in the Z basis"));
    }
    if !(s_x1 > 0.0) {
        return Err(Error::NoKey("no single-photon events in the X basis"));
    }
    let ratio = (v_z1 / s_z1).max(0.0);
    if ratio >= PHASE_ERROR_CEILING {
        return Ok(PHASE_ERROR_CEILING);
    }
    let phi = match kind {
        TailBoundKind::Asymptotic => ratio,
        _ => ratio + gamma(eps_s, ratio, s_z1, s_x1)?,
    };
    Ok(phi.min(PHASE_ERROR_CEILING))
}
