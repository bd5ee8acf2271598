//! Complex amplitudes and clock-pointer angles.
//!
//! Every path in the crate contributes a unit vector `exp(i·phase)`; sums of
//! those vectors are amplitudes and their squared length is a probability
//! weight. Amplitudes are plain [`Complex64`] values.

use std::f64::consts::{PI, TAU};

pub use num_complex::Complex64;

use crate::error::{ensure_finite, Result};

/// A sum of exponentiated-phase terms.
pub type ComplexAmplitude = Complex64;

/// The imaginary unit, i.e. the phase factor picked up on reflection.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Maps any finite angle into `[0, 2π)`.
///
/// `rem_euclid` can round up to exactly `2π` for tiny negative inputs, which
/// would break the half-open interval tests downstream, so that case folds
/// to zero.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `true` when the normalized angle lies in the upper half-circle `[0, π)`.
pub fn in_upper_half(theta: f64) -> bool {
    normalize_angle(theta) < PI
}

/// Unit vector `(cos θ, sin θ)`.
pub fn unit(theta: f64) -> Result<ComplexAmplitude> {
    ensure_finite("angle", theta)?;
    Ok(Complex64::from_polar(1.0, theta))
}

/// `re² + im²`.
pub fn abs_square(z: ComplexAmplitude) -> f64 {
    z.norm_sqr()
}

/// Length of the shorter arc between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// A clock-pointer: the direction of a path's phase on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ClockPointer(f64);

impl ClockPointer {
    pub fn new(angle: f64) -> Result<Self> {
        ensure_finite("angle", angle)?;
        Ok(Self(normalize_angle(angle)))
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        self.0
    }

    /// Rotates the pointer counterclockwise by `delta`.
    pub fn rotated(self, delta: f64) -> Self {
        Self(normalize_angle(self.0 + delta))
    }

    pub fn as_unit(self) -> ComplexAmplitude {
        Complex64::from_polar(1.0, self.0)
    }
}
