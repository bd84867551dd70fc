//! Time-varying lid velocity profile `u_x = sin(pi t) sin(40 pi x)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::CoreError;
use crate::field::FieldBuffer;

/// Spatial wavenumber factor of the profile (`40 pi x`).
pub const SPATIAL_FREQUENCY: f64 = 40.0;

pub fn lid_velocity_x(x: f64, time: f64) -> f64 {
    libm::sin(PI * time) * libm::sin(SPATIAL_FREQUENCY * PI * x)
}

/// Velocity at each face centre; only the x component is non-zero.
pub fn evaluate_profile(face_centres: &FieldBuffer, time: f64) -> Result<FieldBuffer, CoreError> {
    face_centres.expect_components("face centre components", 3)?;
    let mut data = Vec::with_capacity(face_centres.n_elements() * 3);
    for fc in face_centres.rows() {
        data.extend_from_slice(&[lid_velocity_x(fc[0], time), 0.0, 0.0]);
    }
    FieldBuffer::new(3, data)
}
