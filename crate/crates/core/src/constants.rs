//! Physical constants (CODATA 2018 exact SI values) and helpers that derive
//! receiver-level quantities from them.

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default LO wavelength (fiber laser at 1556 nm).
pub const DEFAULT_WAVELENGTH_M: f64 = 1556e-9;

pub fn frequency_from_wavelength(wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_m
}

/// SSB quantum-limit temperature `h nu / k_B`.
pub fn quantum_temperature(frequency_hz: f64) -> f64 {
    PLANCK * frequency_hz / BOLTZMANN
}

/// DSB quantum-limit temperature `h nu / (2 k_B)`.
pub fn quantum_temperature_dsb(frequency_hz: f64) -> f64 {
    0.5 * quantum_temperature(frequency_hz)
}

/// Photodiode responsivity `eta e / (h nu)` in A/W.
pub fn responsivity(eta: f64, frequency_hz: f64) -> f64 {
    eta * ELEMENTARY_CHARGE / (PLANCK * frequency_hz)
}

pub fn db_to_power_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsb_quantum_limit_near_tabulated() {
        let nu = frequency_from_wavelength(DEFAULT_WAVELENGTH_M);
        let tq2 = quantum_temperature_dsb(nu);
        assert!((tq2 / 4612.0 - 1.0).abs() < 5e-3, "T_Q/2 = {tq2}");
    }

    #[test]
    fn responsivity_per_unit_efficiency() {
        // e/(h nu) at 1556 nm is about 1.255 A/W
        let r = responsivity(1.0, frequency_from_wavelength(DEFAULT_WAVELENGTH_M));
        assert!((r - 1.255).abs() < 2e-3, "{r}");
    }
}
