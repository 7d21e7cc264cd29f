//! Physical constants (CODATA 2018).

/// Reduced Planck constant (J s). h = 6.62607015e-34 J s exactly; hbar = h / 2 pi.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K), exact.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_is_h_over_two_pi() {
        let h = 6.626_070_15e-34;
        assert!((HBAR - h / (2.0 * std::f64::consts::PI)).abs() / HBAR < 1e-9);
    }

    #[test]
    fn all_positive() {
        for c in [HBAR, EPSILON_0, SPEED_OF_LIGHT, K_BOLTZMANN, AMU] {
            assert!(c > 0.0);
        }
    }
}
