//! Binomial quantile either side of the exact-summation limit.
//!
//!     cargo run --release --example binomial_quantile

use overpass_qkd::keymath::{binomial_cdf_inverse, EXACT_SUMMATION_LIMIT};

fn main() -> overpass_qkd::Result<()> {
    let p = 0.998;
    println!("exact summation up to n = {EXACT_SUMMATION_LIMIT}");
    println!("{:>14} {:>14} {:>12}", "n", "F^-1(1e-15)", "n p - k");
    for n in [100u64, 10_000, 1_000_000, 1_000_001, 100_000_000, 10_000_000_000] {
        let k = binomial_cdf_inverse(1e-15, n, p)?;
        println!("{n:>14} {k:>14} {:>12.1}", n as f64 * p - k as f64);
    }

    // Odd n at p = 1/2 puts exactly half the mass below the median.
    for n in [1u64, 7, 1999] {
        println!("n = {n}: F^-1(0.5) = {}", binomial_cdf_inverse(0.5, n, 0.5)?);
    }
    Ok(())
}
