//! Angle conventions and normalization helpers.
//!
//! Headings are measured in degrees, clockwise from the upwind axis:
//! 0° points straight into the wind (+y in arena coordinates), +90°
//! points to +x. A heading `h` therefore corresponds to the world unit
//! vector `(sin h, cos h)`.

use std::f64::consts::{PI, TAU};

/// Normalize an angle in degrees into (-180, 180].
pub fn normalize_deg(angle: f64) -> f64 {
    let r = angle.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Normalize an angle in radians into (-PI, PI].
pub fn normalize_rad(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// World-frame unit vector for a heading in degrees.
pub fn heading_unit(heading_deg: f64) -> (f64, f64) {
    let r = heading_deg.to_radians();
    (r.sin(), r.cos())
}
