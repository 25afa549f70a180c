//! Chernoff and Hoeffding intervals around the same counts.
//!
//!     cargo run --release --example tail_bounds

use overpass_qkd::keymath::{bounded_counts, IntensitySet, TailBoundKind};

fn main() -> overpass_qkd::Result<()> {
    let set = IntensitySet::new([0.8, 0.3, 0.0], [0.7, 0.1, 0.2])?;
    for total in [1e3, 1e5, 1e7] {
        let counts = [0.9 * total, 0.09 * total, 0.01 * total];
        println!("n = {counts:?}");
        for kind in TailBoundKind::ALL {
            let b = bounded_counts(&counts, &set, 1e-9, kind)?;
            let width: Vec<String> = (0..3)
                .map(|j| format!("{:.3e}", (b.upper[j] - b.lower[j]) / b.upper[j].max(f64::MIN_POSITIVE)))
                .collect();
            println!("  {:<11} relative width {}", kind.to_string(), width.join(" "));
        }
    }
    Ok(())
}
