//! Physical constants (CODATA 2018) used throughout the crate.
//!
//! Everything downstream works in SI units; these are the only numeric
//! definitions of the fundamental constants, so every module agrees on them.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Elementary charge, C (exact). Converts energies quoted in eV to joules.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Apery's constant, zeta(3). Appears in the classical-limit pressure.
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Angular frequency, rad/s, of a photon with the given energy in eV.
pub const fn ev_to_rad_s(energy_ev: f64) -> f64 {
    energy_ev * ELEMENTARY_CHARGE / HBAR
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ev_conversion_matches_hand_computation() {
        // 1 eV = 1.602176634e-19 J; omega = E / hbar.
        let one_ev = ev_to_rad_s(1.0);
        assert!((one_ev - 1.519_267_4e15).abs() / 1.519_267_4e15 < 1e-7);
    }
}
