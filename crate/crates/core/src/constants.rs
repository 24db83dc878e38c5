//! Physical constants and unit conversions.
//!
//! The library works internally in femtoseconds, with energies carried as
//! angular frequencies `E/ħ` in rad/fs. Everything that crosses that boundary
//! goes through this module.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// CODATA 2018 values. Not configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// m/s
    pub speed_of_light: f64,
    /// F/m
    pub vacuum_permittivity: f64,
    /// J·s
    pub planck: f64,
    /// J·s
    pub reduced_planck: f64,
    /// J/K
    pub boltzmann: f64,
}

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const SPEED_OF_LIGHT_CM: f64 = SPEED_OF_LIGHT * 100.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const REDUCED_PLANCK: f64 = PLANCK / (2.0 * PI);
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const CODATA: PhysicalConstants = PhysicalConstants {
    speed_of_light: SPEED_OF_LIGHT,
    vacuum_permittivity: VACUUM_PERMITTIVITY,
    planck: PLANCK,
    reduced_planck: REDUCED_PLANCK,
    boltzmann: BOLTZMANN,
};

pub const FS: f64 = 1e-15;
pub const ANGSTROM3: f64 = 1e-30;

impl PhysicalConstants {
    pub fn speed_of_light_cm(&self) -> f64 {
        self.speed_of_light * 100.0
    }
}

/// Wavenumber (cm⁻¹) to ordinary frequency (Hz): `ν = B c`.
pub fn wavenumber_to_hz(wavenumber: f64) -> f64 {
    wavenumber * SPEED_OF_LIGHT_CM
}

pub fn hz_to_wavenumber(hz: f64) -> f64 {
    hz / SPEED_OF_LIGHT_CM
}

/// Wavenumber (cm⁻¹) to angular frequency in rad/fs.
pub fn wavenumber_to_rad_per_fs(wavenumber: f64) -> f64 {
    2.0 * PI * wavenumber_to_hz(wavenumber) * FS
}

/// Energy (J) to angular frequency in rad/fs.
pub fn joule_to_rad_per_fs(energy: f64) -> f64 {
    energy / REDUCED_PLANCK * FS
}

pub fn w_per_cm2_to_w_per_m2(intensity: f64) -> f64 {
    intensity * 1e4
}

/// Cycle-averaged peak field: `E₀² = 2I/(ε₀c)` in V²/m², for `I` in W/m².
pub fn field_amplitude_squared(intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::Domain(format!("intensity must be nonnegative, got {intensity}")));
    }
    Ok(2.0 * intensity / (VACUUM_PERMITTIVITY * SPEED_OF_LIGHT))
}

/// Depth of the induced-dipole well multiplying cos²θ, in joules.
///
/// `U = −(Δα/4)E₀²` with `Δα = 4πε₀·Δα_vol`, which reduces to
/// `−2π·Δα_vol·I/c`. `delta_alpha` is the polarizability-volume anisotropy in
/// Å³ and `intensity` is in W/m².
pub fn interaction_energy(delta_alpha: f64, intensity: f64) -> Result<f64> {
    if !(delta_alpha >= 0.0) {
        return Err(Error::Domain(format!(
            "polarizability anisotropy must be nonnegative, got {delta_alpha}"
        )));
    }
    let field_sq = field_amplitude_squared(intensity)?;
    let delta_alpha_si = 4.0 * PI * VACUUM_PERMITTIVITY * delta_alpha * ANGSTROM3;
    Ok(-0.25 * delta_alpha_si * field_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn field_squared_values() {
        assert_eq!(field_amplitude_squared(0.0).unwrap(), 0.0);
        // 2 / (8.8541878128e-12 * 299792458)
        assert!(rel(field_amplitude_squared(1.0).unwrap(), 753.460_626) < 1e-8);
        assert!(rel(field_amplitude_squared(2e18).unwrap(), 1.506_921_25e21) < 1e-8);
        assert!(field_amplitude_squared(-1.0).is_err());
        assert!(field_amplitude_squared(f64::NAN).is_err());
    }

    #[test]
    fn interaction_energy_matches_reduced_form() {
        assert_eq!(interaction_energy(0.3, 0.0).unwrap(), 0.0);
        let u = interaction_energy(0.30, 2e18).unwrap();
        let reduced = -2.0 * PI * 0.30e-30 * 2e18 / SPEED_OF_LIGHT;
        assert!(rel(u, reduced) < 1e-12);
        assert!(rel(u, -1.2576e-20) < 1e-3);
        assert!(rel(joule_to_rad_per_fs(u), -0.119_24) < 1e-3);
        assert!(interaction_energy(-0.1, 1.0).is_err());
    }

    #[test]
    fn interaction_energy_is_bilinear() {
        let points = [(0.11, 3.7e15), (0.3, 2e18), (1.7, 9.1e16)];
        for &(a, i) in &points {
            let base = interaction_energy(a, i).unwrap();
            assert!(rel(interaction_energy(2.0 * a, i).unwrap(), 2.0 * base) < 1e-14);
            assert!(rel(interaction_energy(a, 2.0 * i).unwrap(), 2.0 * base) < 1e-14);
            assert!(rel(interaction_energy(a, 0.37 * i).unwrap(), 0.37 * base) < 1e-14);
        }
    }

    #[test]
    fn wavenumber_round_trip() {
        for &b in &[30.4436, 1.9982, 60.853, 0.0372] {
            let back = hz_to_wavenumber(wavenumber_to_hz(b));
            assert!(rel(back, b) < 1e-12);
        }
    }
}
