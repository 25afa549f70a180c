use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest trial count handled by exact summation of the mass function.
/// Above this a continuity-corrected normal approximation is used.
pub const EXACT_SUMMATION_LIMIT: u64 = 1_000_000;

/// Relative slack when comparing a summed tail with its target. It absorbs
/// summation rounding so that exact ties (e.g. `F = 1/2` for odd `n` at
/// `p = 1/2`) resolve to the tie point.
pub const QUANTILE_SLACK: f64 = 1e-10;

/// Smallest `k` such that the binomial CDF `F(k; n, p) >= eps`.
///
/// Exact (mass-function summation) for `n <= EXACT_SUMMATION_LIMIT`, normal
/// approximation beyond.
pub fn binomial_cdf_inverse(eps: f64, n: u64, p: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps", eps, "(0, 1)"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    if n <= EXACT_SUMMATION_LIMIT {
        Ok(exact_quantile(eps, n, p))
    } else {
        Ok(normal_quantile(eps, n, p))
    }
}

/// Neumaier-compensated accumulator.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn exact_quantile(eps: f64, n: u64, p: f64) -> u64 {
    // Mass function relative to the mode, built outward by the ratio
    // recurrence; the normalisation cancels in every tail ratio.
    let ratio = p / (1.0 - p);
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);
    let cutoff = 1e-25 * eps.min(1.0 - eps);

    let mut below = Vec::new();
    let mut term = 1.0;
    let mut i = mode;
    while i > 0 {
        // pmf(i-1) / pmf(i) = i / ((n - i + 1) ratio)
        term *= i as f64 / ((n - i + 1) as f64 * ratio);
        if term < cutoff || term == 0.0 {
            break;
        }
        below.push(term);
        i -= 1;
    }
    let lo = mode - below.len() as u64;

    let mut above = Vec::new();
    term = 1.0;
    i = mode;
    while i < n {
        term *= (n - i) as f64 / ((i + 1) as f64) * ratio;
        if term < cutoff || term == 0.0 {
            break;
        }
        above.push(term);
        i += 1;
    }

    // terms[k - lo] is the relative mass at k
    let terms: Vec<f64> = below
        .iter()
        .rev()
        .copied()
        .chain(std::iter::once(1.0))
        .chain(above.iter().copied())
        .collect();
    let hi = lo + terms.len() as u64 - 1;

    let mut total = CompensatedSum::default();
    // Smallest terms first: both tails inward, then the mode.
    let (left, right) = terms.split_at((mode - lo) as usize);
    for &t in left {
        total.add(t);
    }
    for &t in right.iter().rev() {
        total.add(t);
    }
    let total = total.value();

    if eps <= 0.5 {
        let target = eps * total * (1.0 - QUANTILE_SLACK);
        let mut acc = CompensatedSum::default();
        for (offset, &t) in terms.iter().enumerate() {
            acc.add(t);
            if acc.value() >= target {
                return lo + offset as u64;
            }
        }
        hi
    } else {
        // F(k) >= eps  <=>  P(X > k) <= 1 - eps
        let target = (1.0 - eps) * total * (1.0 + QUANTILE_SLACK);
        let mut upper = CompensatedSum::default();
        let mut k = hi;
        while k > lo {
            let t = terms[(k - lo) as usize];
            let mut trial = CompensatedSum {
                sum: upper.sum,
                carry: upper.carry,
            };
            trial.add(t);
            if trial.value() > target {
                break;
            }
            upper = trial;
            k -= 1;
        }
        k
    }
}

fn normal_quantile(eps: f64, n: u64, p: f64) -> u64 {
    let nf = n as f64;
    let sigma = (nf * p * (1.0 - p)).sqrt();
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(eps);
    let k = (nf * p + z * sigma - 0.5).ceil();
    if k <= 0.0 {
        0
    } else if k >= nf {
        n
    } else {
        k as u64
    }
}
