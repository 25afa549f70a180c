//! Secret key length against total system loss at fixed protocol parameters,
//! with and without the error-correction cost, for two intrinsic QBERs.
//!
//!     cargo run --release --example loss_curve

use overpass_qkd::channel::{ProtocolParams, SystemParams};
use overpass_qkd::geometry::{select_window, OrbitGeometry, WindowSpec};
use overpass_qkd::keymath::{ErrorCorrectionKind, SecurityParams, TailBoundKind};
use overpass_qkd::lossio::{apply_excess_loss, generate_synthetic_profile, system_loss_db};
use overpass_qkd::optimizer::{evaluate_objective, KeyContext};

fn main() -> overpass_qkd::Result<()> {
    let profile = generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601)?;
    let params = ProtocolParams::new(0.5, 0.7, 0.1, 0.8, 0.3);
    let spec = WindowSpec {
        dt: 250.0,
        theta_min: 10.0,
        shift_elev0: 0.0,
    };

    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "loss dB", "QBERI=0.1%", "no EC", "QBERI=0.5%", "no EC");
    for step in 0..=15 {
        let ls = 2.0 * step as f64;
        let window = select_window(&apply_excess_loss(&profile, ls)?, &spec)?;
        let mut cells = Vec::new();
        for qber_i in [0.001, 0.005] {
            let sys = SystemParams {
                p_ec: 1e-8,
                qber_i,
                p_ap: 0.001,
                source_rate: 1e9,
                num_passes: 1,
                mu3: 0.0,
                sec: SecurityParams::new(1e-15, 1e-9)?,
                xi: 0.0,
            };
            for ec in [ErrorCorrectionKind::LogM, ErrorCorrectionKind::None] {
                let ctx = KeyContext {
                    window: &window,
                    sys: &sys,
                    bound: TailBoundKind::Chernoff,
                    ec,
                };
                cells.push(evaluate_objective(&params, &ctx));
            }
        }
        println!(
            "{:>8.2} {:>14} {:>14} {:>14} {:>14}",
            ls + system_loss_db(&profile),
            cells[0],
            cells[1],
            cells[2],
            cells[3]
        );
    }
    Ok(())
}
