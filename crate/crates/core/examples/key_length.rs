//! Key length for one set of count statistics, under every tail bound and
//! error-correction estimate.
//!
//!     cargo run --release --example key_length

use overpass_qkd::keymath::{
    secret_key_length, CountStatistics, ErrorCorrectionKind, IntensitySet, SecurityParams,
    TailBoundKind,
};

fn main() -> overpass_qkd::Result<()> {
    let intensities = IntensitySet::new([0.8, 0.3, 0.0], [0.7, 0.1, 0.2])?;
    let sec = SecurityParams::new(1e-15, 1e-9)?;
    // Roughly a 500 km zenith pass at 40 dB, 1 GHz.
    let counts = CountStatistics {
        n_x: [1.9e6, 1.1e5, 400.0],
        n_z: [1.9e6, 1.1e5, 400.0],
        m_x: [3.1e3, 330.0, 200.0],
        m_z: [3.1e3, 330.0, 200.0],
    };

    println!("{:<11} {:<8} {:>10} {:>10} {:>12} {:>12}", "bound", "EC", "SKL", "phi_x", "lambda_EC", "sX1");
    for bound in TailBoundKind::ALL {
        for ec in ErrorCorrectionKind::ALL {
            let k = secret_key_length(&counts, &intensities, &sec, bound, ec)?;
            println!(
                "{:<11} {:<8} {:>10} {:>10.5} {:>12.1} {:>12.1}",
                bound.to_string(),
                ec.to_string(),
                k.skl,
                k.phi_x,
                k.lambda_ec,
                k.s_x1
            );
        }
    }
    Ok(())
}
