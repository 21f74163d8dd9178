//! Reduced Wigner elements `d^2_00` and `d^4_00` and the angles where they vanish.

/// `d^2_00(chi) = (3 cos^2 chi - 1) / 2`.
pub fn d2_00(chi: f64) -> f64 {
    let c2 = chi.cos().powi(2);
    (3.0 * c2 - 1.0) / 2.0
}

/// `d^4_00(chi) = (35 cos^4 chi - 30 cos^2 chi + 3) / 8`.
pub fn d4_00(chi: f64) -> f64 {
    let c2 = chi.cos().powi(2);
    (35.0 * c2 * c2 - 30.0 * c2 + 3.0) / 8.0
}

/// Zeros of the rank-2 and rank-4 elements on `(0, pi/2)`, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicAngles {
    /// `arccos(1/sqrt 3)`, where `d^2_00` vanishes.
    pub magic: f64,
    pub rank4_zero_low: f64,
    pub rank4_zero_high: f64,
}

/// `d^4_00` is a quadratic in `cos^2 chi`, with roots `(30 +- sqrt 480) / 70`.
pub fn characteristic_angles() -> CharacteristicAngles {
    let disc = 480f64.sqrt();
    let c2_big = (30.0 + disc) / 70.0;
    let c2_small = (30.0 - disc) / 70.0;
    CharacteristicAngles {
        magic: magic_angle(),
        rank4_zero_low: c2_big.sqrt().acos(),
        rank4_zero_high: c2_small.sqrt().acos(),
    }
}

pub fn magic_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}
