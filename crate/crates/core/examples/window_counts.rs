//! Expected sifted counts and errors accumulated over windows of growing width.
//!
//!     cargo run --release --example window_counts

use overpass_qkd::channel::{accumulate_counts, ProtocolParams, SystemParams};
use overpass_qkd::geometry::{select_window, OrbitGeometry, WindowSpec};
use overpass_qkd::keymath::{qber_x, SecurityParams};
use overpass_qkd::lossio::generate_synthetic_profile;

fn main() -> overpass_qkd::Result<()> {
    let profile = generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601)?;
    let params = ProtocolParams::new(0.5, 0.7, 0.1, 0.8, 0.3);
    let sys = SystemParams {
        p_ec: 1e-8,
        qber_i: 0.001,
        p_ap: 0.001,
        source_rate: 1e9,
        num_passes: 1,
        mu3: 0.0,
        sec: SecurityParams::new(1e-15, 1e-9)?,
        xi: 0.0,
    };

    println!("{:>6} {:>6} {:>14} {:>12} {:>10}", "dt", "slots", "nX", "mX", "QBERx");
    for dt in [50.0, 100.0, 200.0, 300.0] {
        let spec = WindowSpec {
            dt,
            theta_min: 10.0,
            shift_elev0: 0.0,
        };
        let window = select_window(&profile, &spec)?;
        let c = accumulate_counts(&window, &params, &sys);
        println!(
            "{dt:>6} {:>6} {:>14.4e} {:>12.4e} {:>10.6}",
            window.len(),
            c.n_x_total(),
            c.m_x_total(),
            qber_x(&c)?
        );
    }
    Ok(())
}
