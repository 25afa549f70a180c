//! A small optimised sweep written to a temporary directory.
//!
//!     cargo run --release --example sweep_run

use overpass_qkd::geometry::OrbitGeometry;
use overpass_qkd::lossio::{generate_synthetic_profile, write_loss_file};
use overpass_qkd::sweep::{run_sweep, SweepConfig};

fn main() -> overpass_qkd::Result<()> {
    let dir = std::env::temp_dir().join("overpass_sweep_example");
    std::fs::create_dir_all(&dir).expect("create example directory");
    let loss = dir.join("loss.csv");
    write_loss_file(&generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601)?, &loss)?;

    let text = format!(
        "loss_file = {:?}\n\
         Pec_list = [1e-8]\n\
         QBERI_list = [0.001]\n\
         ls_range = [0.0, 20.0, 10.0]\n\
         dt_range = [150.0, 250.0, 50.0]\n\
         outpath = {:?}\n\
         outbase = \"example\"\n",
        loss.display().to_string(),
        dir.join("out").display().to_string()
    );
    let cfg = SweepConfig::from_toml_str(&text, &dir, &[])?;
    let report = run_sweep(&cfg, &mut std::io::stdout().lock())?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
