//! Overpass geometry and transmission-window selection.

use crate::channel::WindowEfficiencies;
use crate::error::{Error, Result};
use crate::lossio::LossProfile;

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Standard gravitational parameter of the Earth, km³/s².
pub const EARTH_GM: f64 = 398_600.441_8;

/// Circular-orbit pass geometry. Lengths in km, `xi_deg` in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry {
    pub earth_radius: f64,
    pub h_sat: f64,
    pub h_ogs: f64,
    /// Rotation of the orbit plane away from the ground-station zenith,
    /// measured at the Earth's centre.
    pub xi_deg: f64,
}

impl Default for OrbitGeometry {
    fn default() -> Self {
        OrbitGeometry {
            earth_radius: EARTH_RADIUS_KM,
            h_sat: 500.0,
            h_ogs: 0.0,
            xi_deg: 0.0,
        }
    }
}

impl OrbitGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.earth_radius > 0.0) {
            return Err(Error::domain("earth_radius", self.earth_radius, "(0, inf)"));
        }
        if !(self.h_ogs >= 0.0) {
            return Err(Error::domain("h_ogs", self.h_ogs, "[0, h_sat)"));
        }
        if !(self.h_sat > self.h_ogs) {
            return Err(Error::domain("h_sat", self.h_sat, "(h_ogs, inf)"));
        }
        if !(0.0..90.0).contains(&self.xi_deg) {
            return Err(Error::domain("xi", self.xi_deg, "[0, 90) degrees"));
        }
        Ok(())
    }

    /// Orbit radius `R_E + h_sat`.
    pub fn r_sat(&self) -> f64 {
        self.earth_radius + self.h_sat
    }

    /// Ground-station radius `R_E + h_OGS`.
    pub fn r_ogs(&self) -> f64 {
        self.earth_radius + self.h_ogs
    }

    /// Slant range for a central angle `psi` (radians) between station and satellite.
    pub fn slant_range(&self, psi: f64) -> f64 {
        let (rs, rg) = (self.r_sat(), self.r_ogs());
        (rs * rs + rg * rg - 2.0 * rs * rg * psi.cos()).sqrt()
    }

    /// Elevation in degrees above the local horizon at central angle `psi`.
    pub fn elevation_deg(&self, psi: f64) -> f64 {
        let d = self.slant_range(psi);
        ((self.r_sat() * psi.cos() - self.r_ogs()) / d)
            .clamp(-1.0, 1.0)
            .asin()
            .to_degrees()
    }

    /// Orbital angular rate of a circular orbit, rad/s.
    pub fn angular_rate(&self) -> f64 {
        (EARTH_GM / self.r_sat().powi(3)).sqrt()
    }
}

/// Peak elevation (degrees) of a pass whose orbit plane is rotated by ξ from
/// the station zenith: `θ_max = arccos[(R_E + h_sat) sin ξ / d(ξ)]` where
/// `d(ξ)` is the slant range at closest approach.
///
/// The expression only gives |θ|, so offsets at which the orbit never clears
/// the horizon (`(R_E + h_sat) cos ξ < R_E + h_OGS`) are rejected.
pub fn max_elevation(geom: &OrbitGeometry) -> Result<f64> {
    geom.validate()?;
    let xi = geom.xi_deg.to_radians();
    if geom.r_sat() * xi.cos() < geom.r_ogs() {
        return Err(Error::domain("xi", geom.xi_deg, "|xi| < acos((R_E + h_OGS) / (R_E + h_sat))"));
    }
    let arg = geom.r_sat() * xi.sin() / geom.slant_range(xi);
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&arg) {
        return Err(Error::domain("arccos argument", arg, "[-1, 1]"));
    }
    Ok(arg.clamp(-1.0, 1.0).acos().to_degrees())
}

/// Half-window, minimum elevation and centre shift for one transmission window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    /// Half-window in seconds.
    pub dt: f64,
    /// Minimum elevation for transmission, degrees.
    pub theta_min: f64,
    /// Move the window centre this many degrees below the peak, on the
    /// descending side of the pass.
    pub shift_elev0: f64,
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt >= 0.0) {
            return Err(Error::domain("dt", self.dt, "[0, inf)"));
        }
        if !(0.0..90.0).contains(&self.theta_min) {
            return Err(Error::domain("theta_min", self.theta_min, "[0, 90)"));
        }
        if !(self.shift_elev0 >= 0.0) {
            return Err(Error::domain("shift_elev0", self.shift_elev0, "[0, inf)"));
        }
        Ok(())
    }
}

/// Index of the slot the window is centred on.
///
/// The peak-elevation slot (earliest on ties), moved forward in time to the
/// slot whose elevation is closest to `peak − shift_elev0` when a shift is
/// requested (latest on ties).
pub fn window_centre(profile: &LossProfile, shift_elev0: f64) -> usize {
    let rows = profile.rows();
    let mut peak = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.elevation > rows[peak].elevation {
            peak = i;
        }
    }
    if shift_elev0 <= 0.0 {
        return peak;
    }
    let target = rows[peak].elevation - shift_elev0;
    let mut best = peak;
    for (i, r) in rows.iter().enumerate().skip(peak) {
        if (r.elevation - target).abs() <= (rows[best].elevation - target).abs() {
            best = i;
        }
    }
    best
}

/// Select the slots within `dt` seconds of the window centre that are at or
/// above `theta_min`, in time order.
pub fn select_window(profile: &LossProfile, spec: &WindowSpec) -> Result<WindowEfficiencies> {
    spec.validate()?;
    if profile.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let rows = profile.rows();
    let t0 = rows[window_centre(profile, spec.shift_elev0)].time;
    // Relative slack for rounding in the time column.
    let reach = spec.dt + 1e-9 * spec.dt.max(1.0);
    let effs: Vec<f64> = rows
        .iter()
        .filter(|r| (r.time - t0).abs() <= reach)
        .filter(|r| r.elevation >= spec.theta_min)
        .map(|r| r.efficiency)
        .collect();
    if effs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    WindowEfficiencies::new(effs, profile.slot_duration())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lossio::{generate_synthetic_profile, LossRow};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn geom(xi_deg: f64) -> OrbitGeometry {
        OrbitGeometry {
            xi_deg,
            ..OrbitGeometry::default()
        }
    }

    #[test]
    fn zenith_pass_peaks_at_ninety() {
        assert!((max_elevation(&geom(0.0)).unwrap() - 90.0).abs() < 1e-12);
        let high = OrbitGeometry {
            h_sat: 1200.0,
            h_ogs: 2.4,
            ..geom(0.0)
        };
        assert!((max_elevation(&high).unwrap() - 90.0).abs() < 1e-12);
    }

    #[test]
    fn offset_pass_matches_triangle() {
        // mpmath: acos(6871 sin(10°) / sqrt(6871² + 6371² − 2·6871·6371 cos(10°)))
        assert_relative_eq!(
            max_elevation(&geom(10.0)).unwrap(),
            18.344221529570073,
            max_relative = 1e-12
        );
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(max_elevation(&geom(95.0)).is_err());
        // acos(6371/6871) is about 22.0 degrees.
        assert!(max_elevation(&geom(21.9)).unwrap() > 0.0);
        assert!(max_elevation(&geom(22.1)).is_err());
        let sunk = OrbitGeometry {
            h_sat: 0.0,
            h_ogs: 1.0,
            ..geom(0.0)
        };
        assert!(max_elevation(&sunk).is_err());
    }

    fn synthetic() -> LossProfile {
        generate_synthetic_profile(&OrbitGeometry::default(), 30.0, 601).unwrap()
    }

    #[test]
    fn zero_half_window_is_centre_slot() {
        let p = synthetic();
        let w = select_window(
            &p,
            &WindowSpec {
                dt: 0.0,
                theta_min: 10.0,
                shift_elev0: 0.0,
            },
        )
        .unwrap();
        assert_eq!(w.efficiencies(), &[p.rows()[300].efficiency]);
    }

    #[test]
    fn wide_window_keeps_whole_profile() {
        let p = synthetic();
        let w = select_window(
            &p,
            &WindowSpec {
                dt: 1e4,
                theta_min: 0.0,
                shift_elev0: 0.0,
            },
        )
        .unwrap();
        assert_eq!(w.len(), p.len());
    }

    #[test]
    fn window_matches_direct_filter() {
        let p = synthetic();
        let spec = WindowSpec {
            dt: 200.0,
            theta_min: 10.0,
            shift_elev0: 0.0,
        };
        let w = select_window(&p, &spec).unwrap();
        let expect: Vec<f64> = p
            .rows()
            .iter()
            .filter(|r| r.time.abs() <= 200.0 && r.elevation >= 10.0)
            .map(|r| r.efficiency)
            .collect();
        assert_eq!(w.efficiencies(), expect.as_slice());
    }

    #[test]
    fn shift_moves_centre_down_the_descending_side() {
        let p = synthetic();
        let c = window_centre(&p, 20.0);
        assert!(c > 300);
        let target = p.rows()[300].elevation - 20.0;
        let err = (p.rows()[c].elevation - target).abs();
        for r in &p.rows()[300..] {
            assert!(err <= (r.elevation - target).abs());
        }
    }

    #[test]
    fn empty_window_is_an_error() {
        let p = LossProfile::new(
            vec![
                LossRow {
                    time: 0.0,
                    elevation: 5.0,
                    efficiency: 1e-3,
                },
                LossRow {
                    time: 1.0,
                    elevation: 6.0,
                    efficiency: 1e-3,
                },
            ],
            None,
        )
        .unwrap();
        let spec = WindowSpec {
            dt: 10.0,
            theta_min: 10.0,
            shift_elev0: 0.0,
        };
        assert!(matches!(select_window(&p, &spec), Err(Error::EmptyWindow)));
    }

    #[test]
    fn symmetric_profile_gives_symmetric_window() {
        let p = synthetic();
        let w = select_window(
            &p,
            &WindowSpec {
                dt: 150.0,
                theta_min: 20.0,
                shift_elev0: 0.0,
            },
        )
        .unwrap();
        let e = w.efficiencies();
        for i in 0..e.len() {
            assert_eq!(e[i], e[e.len() - 1 - i]);
        }
    }

    proptest! {
        #[test]
        fn max_elevation_decreases_with_offset(a in 0.0f64..21.9, b in 0.0f64..21.9) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(max_elevation(&geom(lo)).unwrap() > max_elevation(&geom(hi)).unwrap());
        }

        #[test]
        fn window_grows_with_dt_and_shrinks_with_theta(
            dt in 0.0f64..400.0, extra in 0.0f64..100.0, theta in 0.0f64..60.0, dtheta in 0.0f64..20.0,
        ) {
            let p = synthetic();
            let count = |dt: f64, theta: f64| {
                select_window(&p, &WindowSpec { dt, theta_min: theta, shift_elev0: 0.0 })
                    .map(|w| w.len())
                    .unwrap_or(0)
            };
            prop_assert!(count(dt + extra, theta) >= count(dt, theta));
            prop_assert!(count(dt, theta + dtheta) <= count(dt, theta));
        }
    }
}
