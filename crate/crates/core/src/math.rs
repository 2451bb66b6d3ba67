//! Float math routed through `libm` so the crate builds without `std`.

pub(crate) use libm::{cos, exp, fabs as abs, log as ln, pow as powf, sin, sqrt};

pub(crate) use core::f64::consts::PI;

/// Integer power by repeated squaring.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Round half away from zero.
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
