//! Generate a synthetic pass, write it out, read it back and add excess loss.
//!
//!     cargo run --release --example loss_profile

use overpass_qkd::geometry::OrbitGeometry;
use overpass_qkd::lossio::{
    apply_excess_loss, generate_synthetic_profile, read_loss_file, system_loss_db, write_loss_file,
    DEFAULT_EFFICIENCY_COLUMN,
};

fn main() -> overpass_qkd::Result<()> {
    let profile = generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601)?;
    let path = std::env::temp_dir().join("synthetic_pass.csv");
    write_loss_file(&profile, &path)?;
    let back = read_loss_file(&path, DEFAULT_EFFICIENCY_COLUMN)?;
    assert_eq!(back.rows(), profile.rows());
    println!("{} slots round-tripped through {}", back.len(), path.display());

    for ls in [0.0, 10.0, 20.0] {
        let p = apply_excess_loss(&back, ls)?;
        let edge = p.rows()[0];
        println!(
            "excess {ls:>4} dB: system loss {:.2} dB, edge slot t = {} s at {:.1} deg, eta = {:.3e}",
            system_loss_db(&p),
            edge.time,
            edge.elevation,
            edge.efficiency
        );
    }
    Ok(())
}
