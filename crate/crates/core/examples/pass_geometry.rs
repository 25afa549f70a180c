//! Peak elevation of a pass against the orbit offset angle, and the offset at
//! which the satellite no longer rises.
//!
//!     cargo run --release --example pass_geometry

use overpass_qkd::geometry::{max_elevation, OrbitGeometry};

fn main() {
    for h_sat in [500.0, 1200.0] {
        println!("h_sat = {h_sat} km");
        for xi_deg in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
            let geom = OrbitGeometry {
                h_sat,
                xi_deg,
                ..OrbitGeometry::default()
            };
            match max_elevation(&geom) {
                Ok(theta) => println!("  xi = {xi_deg:>4} deg  theta_max = {theta:7.3} deg"),
                Err(e) => println!("  xi = {xi_deg:>4} deg  {e}"),
            }
        }
    }
}
