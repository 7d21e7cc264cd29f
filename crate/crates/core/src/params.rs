//! Parameter records for the molecule, the laser grating and the
//! interferometer, plus the handful of derived scales (de Broglie
//! wavelength, Talbot length, eikonal phase).

use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Bundle of the physical constants the formulas depend on, fixed to
/// CODATA 2018. Kept as a value type so outputs can record the exact
/// constants they were computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Vacuum permittivity (F/m).
    pub epsilon0: f64,
    /// Speed of light (m/s).
    pub c: f64,
    /// Boltzmann constant (J/K).
    pub kb: f64,
    /// Atomic mass unit (kg).
    pub amu: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            hbar: crate::constants::HBAR,
            epsilon0: crate::constants::EPSILON_0,
            c: crate::constants::SPEED_OF_LIGHT,
            kb: crate::constants::K_BOLTZMANN,
            amu: crate::constants::AMU,
        }
    }
}

/// Moment-of-inertia ratio I/I3 of the symmetric top.
///
/// `Linear` is the distinguished I/I3 -> infinity variant (I3 -> 0, so
/// psi-rotations are frozen out); it is evaluated with closed forms rather
/// than a huge finite ratio, which would lose precision in expressions like
/// `[1 - (1 - I/I3) u^2]^(-3/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeRatio {
    /// Finite I/I3; >= 1/2 (the oblate disc boundary), prolate above 1.
    Finite(f64),
    /// The linear-rotor limit I/I3 -> infinity.
    Linear,
}

impl ShapeRatio {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 0.5) {
            return Err(Error::spec(
                "shape_ratio",
                format!("I/I3 must be finite and >= 1/2, got {ratio}"),
            ));
        }
        Ok(ShapeRatio::Finite(ratio))
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ShapeRatio::Linear)
    }

    /// Finite ratio value, if any.
    pub fn ratio(&self) -> Option<f64> {
        match self {
            ShapeRatio::Finite(r) => Some(*r),
            ShapeRatio::Linear => None,
        }
    }
}

/// Symmetric-top molecule: mass, longitudinal velocity, moments of inertia
/// I = I1 = I2 and I3, and the two polarizability components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    /// Total mass M (kg).
    pub mass: f64,
    /// Longitudinal velocity v_z (m/s), constant through the apparatus.
    pub vz: f64,
    /// Moment of inertia I = I1 = I2 (kg m^2).
    pub inertia: f64,
    /// Polarizability along the symmetry axis, alpha_par (C m^2/V).
    pub alpha_par: f64,
    /// Anisotropy Delta alpha = alpha_par - alpha_perp (C m^2/V).
    pub delta_alpha: f64,
    shape: ShapeRatio,
}

impl MoleculeSpec {
    /// Symmetric top with finite I3.
    pub fn new(
        mass: f64,
        vz: f64,
        inertia: f64,
        inertia3: f64,
        alpha_par: f64,
        delta_alpha: f64,
    ) -> Result<Self> {
        if !(inertia3 > 0.0 && inertia3.is_finite()) {
            return Err(Error::spec("inertia3", format!("must be > 0, got {inertia3}")));
        }
        let shape = ShapeRatio::new(inertia / inertia3)?;
        Self::with_shape(mass, vz, inertia, shape, alpha_par, delta_alpha)
    }

    /// Linear-rotor molecule (I/I3 -> infinity).
    pub fn linear(
        mass: f64,
        vz: f64,
        inertia: f64,
        alpha_par: f64,
        delta_alpha: f64,
    ) -> Result<Self> {
        Self::with_shape(mass, vz, inertia, ShapeRatio::Linear, alpha_par, delta_alpha)
    }

    pub fn with_shape(
        mass: f64,
        vz: f64,
        inertia: f64,
        shape: ShapeRatio,
        alpha_par: f64,
        delta_alpha: f64,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::spec("mass", format!("must be > 0, got {mass}")));
        }
        if !(vz > 0.0 && vz.is_finite()) {
            return Err(Error::spec("vz", format!("must be > 0, got {vz}")));
        }
        if !(inertia > 0.0 && inertia.is_finite()) {
            return Err(Error::spec("inertia", format!("must be > 0, got {inertia}")));
        }
        if !(alpha_par > 0.0 && alpha_par.is_finite()) {
            return Err(Error::spec(
                "alpha_par",
                format!("must be > 0, got {alpha_par}"),
            ));
        }
        if !(delta_alpha.is_finite() && delta_alpha.abs() <= alpha_par) {
            return Err(Error::spec(
                "delta_alpha",
                format!("|Delta alpha| must not exceed alpha_par, got {delta_alpha}"),
            ));
        }
        Ok(MoleculeSpec {
            mass,
            vz,
            inertia,
            alpha_par,
            delta_alpha,
            shape,
        })
    }

    /// I/I3 shape variant.
    pub fn shape(&self) -> ShapeRatio {
        self.shape
    }

    /// I3 (kg m^2); `None` for the linear rotor.
    pub fn inertia3(&self) -> Option<f64> {
        self.shape.ratio().map(|r| self.inertia / r)
    }

    /// Relative anisotropy Delta alpha / alpha_par.
    pub fn anisotropy(&self) -> f64 {
        self.delta_alpha / self.alpha_par
    }
}

/// Standing-wave laser grating: power, waists and wavelength.
/// The grating period is lambda/2 by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserGratingSpec {
    /// Laser power P (W).
    pub power: f64,
    /// Beam waist along y (m).
    pub wy: f64,
    /// Beam waist along the flight direction z (m).
    pub wz: f64,
    /// Laser wavelength lambda (m).
    pub wavelength: f64,
}

impl LaserGratingSpec {
    pub fn new(power: f64, wy: f64, wz: f64, wavelength: f64) -> Result<Self> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::spec("power", format!("must be >= 0, got {power}")));
        }
        for (name, v) in [("wy", wy), ("wz", wz), ("wavelength", wavelength)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::spec(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(LaserGratingSpec {
            power,
            wy,
            wz,
            wavelength,
        })
    }

    /// Grating period d = lambda/2, exact.
    pub fn period(&self) -> f64 {
        0.5 * self.wavelength
    }
}

/// Three-grating interferometer geometry plus the rotational temperature of
/// the incoming beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerSpec {
    /// Common grating period d (m).
    pub period: f64,
    /// Grating separation L (m), identical for both stages.
    pub separation: f64,
    /// Opening fraction f of the material gratings, in (0, 1).
    pub opening_fraction: f64,
    /// Rotational temperature T (K) of the source.
    pub temperature: f64,
}

impl InterferometerSpec {
    pub fn new(period: f64, separation: f64, opening_fraction: f64, temperature: f64) -> Result<Self> {
        for (name, v) in [
            ("period", period),
            ("separation", separation),
            ("temperature", temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::spec(name, format!("must be > 0, got {v}")));
            }
        }
        if !(opening_fraction > 0.0 && opening_fraction < 1.0) {
            return Err(Error::spec(
                "opening_fraction",
                format!("must lie in (0, 1), got {opening_fraction}"),
            ));
        }
        Ok(InterferometerSpec {
            period,
            separation,
            opening_fraction,
            temperature,
        })
    }
}

/// De Broglie wavelength lambda_dB = h / (M v_z) = 2 pi hbar / (M v_z).
pub fn de_broglie_wavelength(mol: &MoleculeSpec) -> f64 {
    2.0 * std::f64::consts::PI * HBAR / (mol.mass * mol.vz)
}

/// Talbot length L_T = d^2 / lambda_dB, the near-field self-imaging scale.
pub fn talbot_length(period: f64, lambda_db: f64) -> f64 {
    period * period / lambda_db
}

/// Eikonal phase phi_0 = 4 alpha_par P / (epsilon_0 c hbar w_y v_z sqrt(2 pi)),
/// the peak phase imprinted on a molecule aligned with the field.
pub fn eikonal_phase(mol: &MoleculeSpec, las: &LaserGratingSpec) -> f64 {
    4.0 * mol.alpha_par * las.power
        / (EPSILON_0
            * SPEED_OF_LIGHT
            * HBAR
            * las.wy
            * mol.vz
            * (2.0 * std::f64::consts::PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;

    fn exemplary_molecule() -> MoleculeSpec {
        // M = 1030 amu, v_z = 100 m/s, prolate with I/I3 = 10.
        MoleculeSpec::new(
            1030.0 * AMU,
            100.0,
            5e-45,
            5e-46,
            4.0 * std::f64::consts::PI * EPSILON_0 * 50e-30,
            0.5 * 4.0 * std::f64::consts::PI * EPSILON_0 * 50e-30,
        )
        .unwrap()
    }

    #[test]
    fn de_broglie_exemplary_value() {
        // lambda_dB = h / (M v_z) with M = 1030 amu, v_z = 100 m/s:
        // 6.62607015e-34 / (1030 * 1.66053906660e-27 * 100) = 3.8741e-12 m.
        let mol = exemplary_molecule();
        let l = de_broglie_wavelength(&mol);
        assert!((l - 3.8741e-12).abs() / l < 1e-4, "{l}");
    }

    #[test]
    fn de_broglie_scaling() {
        let mol = exemplary_molecule();
        let l0 = de_broglie_wavelength(&mol);
        let mut m2 = mol;
        m2.vz *= 2.0;
        assert_eq!(de_broglie_wavelength(&m2), l0 / 2.0);
        let m3 = MoleculeSpec::new(
            2.0 * mol.mass,
            mol.vz,
            mol.inertia,
            mol.inertia3().unwrap(),
            mol.alpha_par,
            mol.delta_alpha,
        )
        .unwrap();
        assert_eq!(de_broglie_wavelength(&m3), l0 / 2.0);
    }

    #[test]
    fn talbot_length_exemplary_value() {
        // d = 266 nm with the exemplary lambda_dB gives L_T ~ 1.83 cm.
        let mol = exemplary_molecule();
        let lt = talbot_length(266e-9, de_broglie_wavelength(&mol));
        assert!((lt - 1.83e-2).abs() / lt < 1e-2, "{lt}");
        // Scaling: d -> 2d quadruples, lambda -> 2 lambda halves.
        let l = de_broglie_wavelength(&mol);
        assert_eq!(talbot_length(2.0 * 266e-9, l), 4.0 * lt);
        assert_eq!(talbot_length(266e-9, 2.0 * l), lt / 2.0);
    }

    #[test]
    fn eikonal_phase_linearity_and_zero() {
        let mol = exemplary_molecule();
        let las = LaserGratingSpec::new(1.0, 900e-6, 20e-6, 532e-9).unwrap();
        let p0 = eikonal_phase(&mol, &las);
        assert!(p0 > 0.0);
        let las2 = LaserGratingSpec::new(2.0, 900e-6, 20e-6, 532e-9).unwrap();
        assert!((eikonal_phase(&mol, &las2) - 2.0 * p0).abs() < 1e-15 * p0);
        let las0 = LaserGratingSpec::new(0.0, 900e-6, 20e-6, 532e-9).unwrap();
        assert_eq!(eikonal_phase(&mol, &las0), 0.0);
    }

    #[test]
    fn eikonal_phase_hand_computed_value() {
        // Hand calculation with alpha_par = 4 pi eps0 * 50 A^3, P = 1 W,
        // w_y = 900 um, v_z = 100 m/s:
        //   alpha_par = 4 pi * 8.8541878128e-12 * 50e-30 = 5.56325028e-39 C m^2/V
        //   numerator = 4 * alpha_par * P = 2.22530011e-38
        //   denominator = eps0 c hbar w_y v_z sqrt(2 pi)
        //     eps0 c = 2.65441873e-3; * hbar = 2.79926610e-37;
        //     * 9e-4 * 100 = 2.51933949e-38; * 2.50662827 = 6.31503607e-38
        //   phi_0 = 2.22530011e-38 / 6.31503607e-38 = 0.35237943
        let mol = exemplary_molecule();
        let las = LaserGratingSpec::new(1.0, 900e-6, 20e-6, 532e-9).unwrap();
        let phi0 = eikonal_phase(&mol, &las);
        assert!((phi0 - 0.35237943).abs() < 1e-7, "{phi0}");
    }

    #[test]
    fn laser_period_is_half_wavelength() {
        let las = LaserGratingSpec::new(1.0, 900e-6, 20e-6, 532e-9).unwrap();
        assert_eq!(las.period(), 266e-9);
    }

    #[test]
    fn invariants_rejected() {
        assert!(MoleculeSpec::new(0.0, 100.0, 1e-45, 1e-45, 1e-39, 0.0).is_err());
        // oblate boundary: I/I3 = 0.4 < 1/2 is unphysical
        assert!(MoleculeSpec::new(1e-24, 100.0, 0.4e-45, 1e-45, 1e-39, 0.0).is_err());
        // I/I3 = 1/2 itself is allowed
        assert!(MoleculeSpec::new(1e-24, 100.0, 0.5e-45, 1e-45, 1e-39, 0.0).is_ok());
        // anisotropy bounded by alpha_par
        assert!(MoleculeSpec::new(1e-24, 100.0, 1e-45, 1e-45, 1e-39, 2e-39).is_err());
        assert!(InterferometerSpec::new(266e-9, 1e-2, 1.2, 300.0).is_err());
        assert!(ShapeRatio::new(0.49).is_err());
        assert!(ShapeRatio::new(f64::INFINITY).is_err());
    }

    #[test]
    fn constants_default_is_codata() {
        let c = PhysicalConstants::default();
        assert_eq!(c.c, 299_792_458.0);
        assert_eq!(c.kb, 1.380_649e-23);
        assert!(c.hbar > 0.0 && c.epsilon0 > 0.0 && c.amu > 0.0);
    }
}
