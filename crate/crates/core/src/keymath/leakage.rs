use super::{binary_entropy, binomial_cdf_inverse, CountStatistics, ErrorCorrectionKind};
use crate::error::{Error, Result};

/// Inefficiency factor of practical error-correction codes.
pub const RECONCILIATION_EFFICIENCY: f64 = 1.16;

/// Bit error rate of the sifted X basis, pooled over intensities.
pub fn qber_x(counts: &CountStatistics) -> Result<f64> {
    let n = counts.n_x_total();
    if !(n > 0.0) {
        return Err(Error::NoKey("no sifted events in the X basis"));
    }
    Ok(counts.m_x_total() / n)
}

#[cfg(not(feature = "ec-log2"))]
fn leak_log(x: f64) -> f64 {
    x.ln()
}

#[cfg(feature = "ec-log2")]
fn leak_log(x: f64) -> f64 {
    x.log2()
}

/// Bits leaked during error correction. Never negative.
///
/// `logM` falls back to `block` when the QBER is 0 or 1, where its log ratio
/// diverges. With no X-basis events the QBER is undefined and every method
/// except `None` reports [`Error::NoKey`].
pub fn lambda_ec(counts: &CountStatistics, eps_c: f64, kind: ErrorCorrectionKind) -> Result<f64> {
    match kind {
        ErrorCorrectionKind::None => Ok(0.0),
        ErrorCorrectionKind::MXTot => Ok(RECONCILIATION_EFFICIENCY * counts.m_x_total()),
        ErrorCorrectionKind::Block => {
            let q = qber_x(counts)?;
            Ok(RECONCILIATION_EFFICIENCY * counts.n_x_total() * binary_entropy(q)?)
        }
        ErrorCorrectionKind::LogM => {
            let q = qber_x(counts)?;
            if q <= 0.0 || q >= 1.0 {
                return lambda_ec(counts, eps_c, ErrorCorrectionKind::Block);
            }
            if !(eps_c > 0.0 && eps_c < 1.0) {
                return Err(Error::domain("eps_c", eps_c, "(0, 1)"));
            }
            let n = counts.n_x_total();
            let quantile = binomial_cdf_inverse(eps_c, n.floor() as u64, 1.0 - q)? as f64;
            let leak = n * binary_entropy(q)?
                + (n * (1.0 - q) - quantile - 1.0) * leak_log((1.0 - q) / q)
                - 0.5 * leak_log(n)
                - leak_log(1.0 / eps_c);
            Ok(leak.max(0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn counts(n: [f64; 3], m: [f64; 3]) -> CountStatistics {
        CountStatistics {
            n_x: n,
            m_x: m,
            n_z: n,
            m_z: m,
        }
    }

    #[test]
    fn qber_cases() {
        let n = [1000.0, 400.0, 100.0];
        assert_eq!(qber_x(&counts(n, [0.0; 3])).unwrap(), 0.0);
        assert_eq!(qber_x(&counts(n, n)).unwrap(), 1.0);
        assert_relative_eq!(qber_x(&counts(n, [50.0, 20.0, 5.0])).unwrap(), 0.05);
        assert!(matches!(
            qber_x(&CountStatistics::default()),
            Err(Error::NoKey(_))
        ));
    }

    #[test]
    fn simple_methods() {
        let c = counts([1000.0, 400.0, 100.0], [50.0, 20.0, 5.0]);
        assert_eq!(lambda_ec(&c, 1e-15, ErrorCorrectionKind::None).unwrap(), 0.0);
        assert_relative_eq!(
            lambda_ec(&c, 1e-15, ErrorCorrectionKind::MXTot).unwrap(),
            87.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            lambda_ec(&c, 1e-15, ErrorCorrectionKind::Block).unwrap(),
            1.16 * 1500.0 * binary_entropy(0.05).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn logm_falls_back_at_zero_qber() {
        let c = counts([1000.0, 400.0, 100.0], [0.0; 3]);
        assert_eq!(lambda_ec(&c, 1e-15, ErrorCorrectionKind::LogM).unwrap(), 0.0);
    }

    #[cfg(not(feature = "ec-log2"))]
    #[test]
    fn logm_representative_value() {
        // n_X = 1.5e6, QBER = 0.02; the quantile comes from the normal branch.
        let c = counts([1.0e6, 4.0e5, 1.0e5], [2.0e4, 8.0e3, 2.0e3]);
        let n: f64 = 1.5e6;
        let q: f64 = 0.02;
        let k = binomial_cdf_inverse(1e-15, 1_500_000, 0.98).unwrap() as f64;
        let expect = n * binary_entropy(q).unwrap() + (n * (1.0 - q) - k - 1.0) * (49.0f64).ln()
            - 0.5 * n.ln()
            - (1e15f64).ln();
        assert_relative_eq!(
            lambda_ec(&c, 1e-15, ErrorCorrectionKind::LogM).unwrap(),
            expect,
            max_relative = 1e-12
        );
        assert!(expect > 1.0 * n * binary_entropy(q).unwrap());
    }
}
