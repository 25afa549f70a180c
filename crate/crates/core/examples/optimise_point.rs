//! Optimise the protocol parameters at one sweep point with both methods.
//!
//!     cargo run --release --example optimise_point

use overpass_qkd::channel::{ProtocolParams, SystemParams};
use overpass_qkd::geometry::{select_window, OrbitGeometry, WindowSpec};
use overpass_qkd::keymath::{ErrorCorrectionKind, SecurityParams, TailBoundKind};
use overpass_qkd::lossio::{apply_excess_loss, generate_synthetic_profile};
use overpass_qkd::optimizer::{evaluate_objective, optimise_skl, KeyContext, Method, OptimizerConfig};

fn main() -> overpass_qkd::Result<()> {
    let profile = generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601)?;
    let spec = WindowSpec {
        dt: 200.0,
        theta_min: 10.0,
        shift_elev0: 0.0,
    };
    let window = select_window(&apply_excess_loss(&profile, 10.0)?, &spec)?;
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
    let ctx = KeyContext {
        window: &window,
        sys: &sys,
        bound: TailBoundKind::Chernoff,
        ec: ErrorCorrectionKind::LogM,
    };
    let start = ProtocolParams::new(0.5, 0.7, 0.1, 0.8, 0.3);
    println!("initial SKL {}", evaluate_objective(&start, &ctx));

    for method in [Method::Cobyla, Method::NelderMead] {
        let cfg = OptimizerConfig {
            method,
            ..OptimizerConfig::default()
        };
        let (p, key, m) = optimise_skl(&cfg, &ctx, start)?;
        println!(
            "{:<12} SKL {:>9}  Px {:.4} P1 {:.4} P2 {:.4} mu1 {:.4} mu2 {:.4}  ({} restarts, {} evaluations)",
            method.to_string(),
            key.skl, p.p_x, p.p_mu1, p.p_mu2, p.mu1, p.mu2, m.restarts, m.evaluations
        );
    }
    Ok(())
}
