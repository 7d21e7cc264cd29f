//! Eikonal grating physics for the standing-wave laser grating.
//!
//! Quantum side: per-state phase masks exp[i a sin^2(pi x/d)] with
//! a = phi_0 (1 - (Delta alpha / alpha_par) Q_lmk) for the rotationally free
//! transit, the orientation-frozen diabatic factor, and the general
//! Hermitian-matrix transmission exponential. Classical side: eikonal
//! momentum and angular-momentum kicks and the phase-space ensemble
//! transform. The Gaussian z-profile is always integrated analytically,
//! `Integral exp(-2 z^2/w_z^2) dz = w_z sqrt(pi/2)`; numerical z-quadrature
//! exists only in tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_array;
use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::params::{eikonal_phase, LaserGratingSpec, MoleculeSpec};
use crate::quantum::{q_lmk, RotQuantumNumbers};
use crate::rotor::{temporal_average_r, RotorPhasePoint};

/// Time-averaged intensity of the Gaussian standing wave,
/// `I(x,z) = (8P / pi w_y w_z) exp(-2 z^2/w_z^2) sin^2(pi x/d)` (W/m^2).
pub fn laser_intensity(x: f64, z: f64, las: &LaserGratingSpec) -> f64 {
    let d = las.period();
    let s = (std::f64::consts::PI * x / d).sin();
    8.0 * las.power / (std::f64::consts::PI * las.wy * las.wz)
        * (-2.0 * z * z / (las.wz * las.wz)).exp()
        * s
        * s
}

/// Orientation-dependent optical potential,
/// `V = -(4P / pi eps0 c w_z w_y) exp(-2 z^2/w_z^2)
///      (alpha_par - Delta alpha sin^2 theta) sin^2(pi x/d)` (J).
pub fn grating_potential(x: f64, z: f64, theta: f64, mol: &MoleculeSpec, las: &LaserGratingSpec) -> f64 {
    let d = las.period();
    let sx = (std::f64::consts::PI * x / d).sin();
    let st = theta.sin();
    -4.0 * las.power / (std::f64::consts::PI * EPSILON_0 * SPEED_OF_LIGHT * las.wz * las.wy)
        * (-2.0 * z * z / (las.wz * las.wz)).exp()
        * (mol.alpha_par - mol.delta_alpha * st * st)
        * sx
        * sx
}

/// A pure sinusoidal phase mask: transmission exp[i A sin^2(pi x / d)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMask {
    /// Coefficient A multiplying sin^2(pi x/d); dimensionless.
    pub phase_amplitude: f64,
    /// Grating period d (m).
    pub period: f64,
}

impl PhaseMask {
    /// Unit-modulus transmission factor at position x.
    pub fn transmission(&self, x: f64) -> Complex64 {
        let s = (std::f64::consts::PI * x / self.period).sin();
        Complex64::from_polar(1.0, self.phase_amplitude * s * s)
    }
}

/// Phase mask seen by the rotor state |lmk> in a rotationally free transit:
/// amplitude `phi_0 (1 - (Delta alpha/alpha_par) Q_lmk)`.
pub fn free_rotor_phase(q: &RotQuantumNumbers, mol: &MoleculeSpec, las: &LaserGratingSpec) -> PhaseMask {
    let phi0 = eikonal_phase(mol, las);
    PhaseMask {
        phase_amplitude: phi0 * (1.0 - mol.anisotropy() * q_lmk(q.l, q.m, q.k)),
        period: las.period(),
    }
}

/// Diabatic (orientation-frozen) transmission factor
/// `exp[i phi_0 (1 - (Delta alpha/alpha_par) sin^2 theta) sin^2(pi x/d)]`,
/// the analytic z-integral of exp[-(i/hbar v_z) V].
pub fn diabatic_phase(x: f64, theta: f64, mol: &MoleculeSpec, las: &LaserGratingSpec) -> Complex64 {
    let phi0 = eikonal_phase(mol, las);
    let st = theta.sin();
    let mask = PhaseMask {
        phase_amplitude: phi0 * (1.0 - mol.anisotropy() * st * st),
        period: las.period(),
    };
    mask.transmission(x)
}

/// Hermitian z-integrated potential matrix at fixed x, in units of
/// hbar v_z (so the transmission matrix is exp(-i V)).
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    entries: DMatrix<Complex64>,
}

impl PotentialMatrix {
    /// Validates Hermiticity; rejects with the largest asymmetry found.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::input(
                "potential_matrix",
                format!("matrix must be square, got {}x{}", entries.nrows(), entries.ncols()),
            ));
        }
        let mut max_asym = 0.0f64;
        for i in 0..entries.nrows() {
            for j in 0..=i {
                let asym = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                max_asym = max_asym.max(asym);
            }
        }
        let scale = entries.iter().map(|e| e.norm()).fold(0.0f64, f64::max).max(1.0);
        if max_asym > 1e-12 * scale {
            return Err(Error::NonHermitian {
                max_asymmetry: max_asym,
            });
        }
        Ok(PotentialMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// Grating transformation matrix T = exp(-i V) for a Hermitian z-integrated
/// potential matrix V, via eigendecomposition; unitary by construction.
pub fn transmission_matrix(vbar: &PotentialMatrix) -> DMatrix<Complex64> {
    let n = vbar.dim();
    // Hermitian eigendecomposition: V = U diag(w) U^dagger with real w.
    let eig = vbar.entries.clone().symmetric_eigen();
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    for (col, &w) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -w);
        let v = eig.eigenvectors.column(col);
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] += phase * v[i] * v[j].conj();
            }
        }
    }
    t
}

/// Classical eikonal momentum kick in a rotationally free transit, using the
/// temporal average q = 1 - R of sin^2(theta) along the free trajectory:
/// `Delta p_x = (pi hbar phi_0 / d) [1 - (Da/a) (1 - R)] sin(2 pi x/d)`.
pub fn classical_kick_free(
    x: f64,
    e_rot: f64,
    p_phi: f64,
    p_psi: f64,
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
) -> Result<f64> {
    let r = temporal_average_r(e_rot, p_phi, p_psi, mol)?;
    let q_avg = 1.0 - r;
    let phi0 = eikonal_phase(mol, las);
    let d = las.period();
    Ok(std::f64::consts::PI * HBAR * phi0 / d
        * (1.0 - mol.anisotropy() * q_avg)
        * (2.0 * std::f64::consts::PI * x / d).sin())
}

/// Diabatic momentum kick at frozen orientation:
/// `Delta p_x = (pi hbar phi_0 / d) [1 - (Da/a) sin^2 theta] sin(2 pi x/d)`.
pub fn classical_kick_diabatic(x: f64, theta: f64, mol: &MoleculeSpec, las: &LaserGratingSpec) -> f64 {
    let phi0 = eikonal_phase(mol, las);
    let d = las.period();
    let st = theta.sin();
    std::f64::consts::PI * HBAR * phi0 / d
        * (1.0 - mol.anisotropy() * st * st)
        * (2.0 * std::f64::consts::PI * x / d).sin()
}

/// Diabatic angular-momentum kick on p_theta (the only nonzero component for
/// a theta-only potential):
/// `Delta p_theta = -hbar phi_0 (Da/a) sin(2 theta) sin^2(pi x/d)`.
///
/// Sign convention (z-y'-z'' Euler angles): for a prolate molecule
/// (Delta alpha > 0) at a potential antinode, theta in (0, pi/2) gets
/// Delta p_theta < 0, torquing the symmetry axis toward the polarization
/// direction, as the attractive potential minimum at theta = 0 requires.
pub fn classical_torque_diabatic(x: f64, theta: f64, mol: &MoleculeSpec, las: &LaserGratingSpec) -> f64 {
    let phi0 = eikonal_phase(mol, las);
    let d = las.period();
    let sx = (std::f64::consts::PI * x / d).sin();
    -HBAR * phi0 * mol.anisotropy() * (2.0 * theta).sin() * sx * sx
}

/// Transit regime for the classical ensemble transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitMode {
    /// Rotation much faster than the transit: kick from the time-averaged
    /// orientation, rotor state untouched.
    Free,
    /// Transit much faster than rotation: orientation frozen, both p_x and
    /// p_theta receive kicks.
    Diabatic,
}

/// One classical ensemble member: transverse position/momentum plus the
/// orientational phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSample {
    pub x: f64,
    pub p_x: f64,
    pub rotor: RotorPhasePoint,
}

/// Apply the eikonal grating transformation to a classical ensemble.
///
/// Free transit conserves the full rotor state (Omega, p_Omega); the
/// diabatic transit conserves the orientation and (p_phi, p_psi), kicking
/// only p_x and p_theta.
pub fn apply_classical_transform(
    ensemble: &[ClassicalSample],
    mode: TransitMode,
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
) -> Result<Vec<ClassicalSample>> {
    if ensemble.is_empty() {
        return Err(Error::input("apply_classical_transform", "empty ensemble"));
    }
    ensemble
        .iter()
        .map(|s| {
            let mut out = *s;
            match mode {
                TransitMode::Free => {
                    let e = crate::rotor::hamiltonian(&s.rotor, mol)?;
                    out.p_x += classical_kick_free(s.x, e, s.rotor.p_phi, s.rotor.p_psi, mol, las)?;
                }
                TransitMode::Diabatic => {
                    out.p_x += classical_kick_diabatic(s.x, s.rotor.theta, mol, las);
                    out.rotor.p_theta += classical_torque_diabatic(s.x, s.rotor.theta, mol, las);
                }
            }
            Ok(out)
        })
        .collect()
}

/// Fourier coefficients of a sinusoidal phase mask.
#[derive(Debug, Clone)]
pub struct DiffractionOrders {
    /// c_{-n_max} .. c_{n_max}; c_n multiplies exp(2 pi i n x / d).
    coeffs: Vec<Complex64>,
    n_max: usize,
    /// Sum of |c_n|^2 over the kept orders; 1 for a pure phase mask with
    /// sufficient n_max.
    pub captured_mass: f64,
}

impl DiffractionOrders {
    pub fn order(&self, n: i64) -> Complex64 {
        let idx = n + self.n_max as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// True when the kept orders carry all but 1e-8 of the probability.
    pub fn is_converged(&self) -> bool {
        self.captured_mass >= 1.0 - 1e-8
    }
}

/// Diffraction orders of exp[i A sin^2(pi x/d)]:
/// `c_n = (1/d) Integral_0^d exp[i A sin^2(pi x/d)] exp(-2 pi i n x/d) dx`.
///
/// Writing the mask as `exp(iA/2) exp[-(iA/2) cos(2 pi x/d)]` and applying
/// the Jacobi-Anger expansion gives `c_n = exp(iA/2) (-i)^n J_n(A/2)`;
/// symmetric in n. Callers should check `captured_mass` (a truncation
/// warning is exactly a mass deficit beyond 1e-8).
pub fn diffraction_orders(mask: &PhaseMask, n_max: usize) -> DiffractionOrders {
    assert!(n_max >= 1, "need n_max >= 1");
    let z = 0.5 * mask.phase_amplitude;
    let js = bessel_j_array(z.abs(), n_max);
    let global = Complex64::from_polar(1.0, 0.5 * mask.phase_amplitude);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    let mut mass = 0.0;
    for n in 0..=n_max {
        // (-i)^n cycles through 1, -i, -1, i.
        let ipow = match n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        // J_n(-|z|) = (-1)^n J_n(|z|)
        let jn = if z < 0.0 && n % 2 == 1 { -js[n] } else { js[n] };
        let c = global * ipow * jn;
        coeffs[n_max + n] = c;
        coeffs[n_max - n] = c;
        mass += if n == 0 { c.norm_sqr() } else { 2.0 * c.norm_sqr() };
    }
    DiffractionOrders {
        coeffs,
        n_max,
        captured_mass: mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;
    use crate::quadrature;

    fn molecule() -> MoleculeSpec {
        MoleculeSpec::new(1030.0 * AMU, 100.0, 5e-45, 5e-46, 5.56e-39, 2.78e-39).unwrap()
    }

    fn laser(power: f64) -> LaserGratingSpec {
        LaserGratingSpec::new(power, 900e-6, 20e-6, 532e-9).unwrap()
    }

    #[test]
    fn intensity_nodes_and_antinodes() {
        let las = laser(1.0);
        let d = las.period();
        for z in [-3e-5, 0.0, 1e-5] {
            assert_eq!(laser_intensity(0.0, z, &las), 0.0);
        }
        let peak = laser_intensity(d / 2.0, 0.0, &las);
        let want = 8.0 * las.power / (std::f64::consts::PI * las.wy * las.wz);
        assert!((peak - want).abs() < 1e-9 * want);
    }

    #[test]
    fn intensity_z_integral_matches_gaussian() {
        // Integral of exp(-2 z^2 / w_z^2) dz = w_z sqrt(pi/2).
        let las = laser(1.0);
        let d = las.period();
        let x = d / 2.0;
        let num = quadrature::integrate(
            |z| laser_intensity(x, z, &las),
            -8.0 * las.wz,
            8.0 * las.wz,
            1e-14,
            1e-12,
        )
        .unwrap();
        let analytic = 8.0 * las.power / (std::f64::consts::PI * las.wy * las.wz)
            * las.wz
            * (std::f64::consts::PI / 2.0).sqrt();
        assert!(((num.value - analytic) / analytic).abs() < 1e-10);
    }

    #[test]
    fn potential_orientation_dependence() {
        let mol = molecule();
        let las = laser(1.0);
        let d = las.period();
        // Delta alpha = 0: theta-independent.
        let iso = MoleculeSpec::new(mol.mass, mol.vz, mol.inertia, 5e-46, mol.alpha_par, 0.0).unwrap();
        let v1 = grating_potential(d / 3.0, 1e-6, 0.3, &iso, &las);
        let v2 = grating_potential(d / 3.0, 1e-6, 1.2, &iso, &las);
        assert_eq!(v1, v2);
        // theta = pi/2 sees alpha_perp.
        let vperp = grating_potential(d / 2.0, 0.0, std::f64::consts::FRAC_PI_2, &mol, &las);
        let coeff = -4.0 * las.power
            / (std::f64::consts::PI * EPSILON_0 * SPEED_OF_LIGHT * las.wz * las.wy)
            * (mol.alpha_par - mol.delta_alpha);
        assert!(((vperp - coeff) / coeff).abs() < 1e-12);
        // Attractive everywhere for alpha_par >= d_alpha >= 0; deepest at theta = 0.
        for theta in [0.0, 0.4, 1.0, std::f64::consts::FRAC_PI_2] {
            let v = grating_potential(d / 2.0, 0.0, theta, &mol, &las);
            assert!(v <= 0.0);
            assert!(v >= grating_potential(d / 2.0, 0.0, 0.0, &mol, &las));
        }
    }

    #[test]
    fn free_rotor_mask_amplitudes() {
        let mol = molecule();
        let las = laser(1.0);
        let phi0 = eikonal_phase(&mol, &las);
        let q000 = RotQuantumNumbers::new(0, 0, 0).unwrap();
        let m = free_rotor_phase(&q000, &mol, &las);
        let want = phi0 * (1.0 - mol.anisotropy() * 2.0 / 3.0);
        assert!((m.phase_amplitude - want).abs() < 1e-15);
        // Delta alpha = 0: every state sees the same mask.
        let iso = MoleculeSpec::new(mol.mass, mol.vz, mol.inertia, 5e-46, mol.alpha_par, 0.0).unwrap();
        for (l, m_, k) in [(0, 0, 0), (3, 2, -1), (7, -7, 4)] {
            let q = RotQuantumNumbers::new(l, m_, k).unwrap();
            let mask = free_rotor_phase(&q, &iso, &las);
            assert_eq!(mask.phase_amplitude, phi0);
        }
    }

    #[test]
    fn masks_are_unit_modulus() {
        let mol = molecule();
        let las = laser(3.0);
        let q = RotQuantumNumbers::new(2, 1, -1).unwrap();
        let mask = free_rotor_phase(&q, &mol, &las);
        let d = las.period();
        for i in 0..10_000 {
            let x = d * (i as f64 / 10_000.0);
            assert!((mask.transmission(x).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diabatic_matches_free_with_q_substituted() {
        // Structural identity: the diabatic factor at sin^2(theta) = Q equals
        // the free-rotor factor of a state with that Q.
        let mol = molecule();
        let las = laser(2.0);
        let q = RotQuantumNumbers::new(1, 0, 0).unwrap();
        let quantum_q = q_lmk(1, 0, 0); // 0.4
        let theta = quantum_q.sqrt().asin();
        let mask = free_rotor_phase(&q, &mol, &las);
        let d = las.period();
        for i in 0..50 {
            let x = d * (i as f64 / 50.0);
            let diff = (diabatic_phase(x, theta, &mol, &las) - mask.transmission(x)).norm();
            assert!(diff < 1e-12, "x = {x}: {diff}");
        }
    }

    #[test]
    fn diabatic_z_quadrature_oracle() {
        // Numerical z-integral of V/(hbar v_z) against the analytic phase.
        let mol = molecule();
        let las = laser(2.5);
        let d = las.period();
        let (x, theta) = (0.3 * d, 0.7);
        let num = quadrature::integrate(
            |z| grating_potential(x, z, theta, &mol, &las),
            -10.0 * las.wz,
            10.0 * las.wz,
            1e-40,
            1e-12,
        )
        .unwrap();
        let analytic_phase = -num.value / (HBAR * mol.vz);
        let got = diabatic_phase(x, theta, &mol, &las);
        let want = Complex64::from_polar(1.0, analytic_phase);
        assert!((got - want).norm() < 1e-10);
    }

    #[test]
    fn transmission_matrix_identity_and_diagonal() {
        let zero = PotentialMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        let t = transmission_matrix(&zero);
        assert!((&t - DMatrix::<Complex64>::identity(4, 4)).norm() < 1e-14);

        let mut diag = DMatrix::<Complex64>::zeros(3, 3);
        for (i, v) in [0.5, -1.3, 2.2].iter().enumerate() {
            diag[(i, i)] = Complex64::new(*v, 0.0);
        }
        let t = transmission_matrix(&PotentialMatrix::new(diag).unwrap());
        for (i, v) in [0.5, -1.3, 2.2].iter().enumerate() {
            assert!((t[(i, i)] - Complex64::from_polar(1.0, -v)).norm() < 1e-13);
        }
    }

    #[test]
    fn transmission_matrix_unitary_on_random_hermitian() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 5, 11, 21] {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
                for j in 0..i {
                    let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
            }
            let t = transmission_matrix(&PotentialMatrix::new(m).unwrap());
            let unit = &t * t.adjoint();
            assert!(
                (&unit - DMatrix::<Complex64>::identity(n, n)).norm() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn non_hermitian_rejected_with_report() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(0.5, 0.0);
        match PotentialMatrix::new(m) {
            Err(Error::NonHermitian { max_asymmetry }) => {
                assert!((max_asymmetry - 0.5).abs() < 1e-15)
            }
            other => panic!("expected NonHermitian, got {other:?}"),
        }
    }

    #[test]
    fn kick_zeros_and_point_particle() {
        let mol = molecule();
        let las = laser(2.0);
        let d = las.period();
        let e = 1e-21;
        assert!(classical_kick_free(0.0, e, 0.0, 0.0, &mol, &las).unwrap().abs() < 1e-40);
        assert!(classical_kick_free(d / 2.0, e, 0.0, 0.0, &mol, &las)
            .unwrap()
            .abs()
            < 1e-40);
        // Delta alpha = 0 reduces to the point-particle kick.
        let iso = MoleculeSpec::new(mol.mass, mol.vz, mol.inertia, 5e-46, mol.alpha_par, 0.0).unwrap();
        let phi0 = eikonal_phase(&iso, &las);
        let x = d / 4.0;
        let want = std::f64::consts::PI * HBAR * phi0 / d;
        let got = classical_kick_free(x, e, 0.0, 0.0, &iso, &las).unwrap();
        assert!(((got - want) / want).abs() < 1e-12);
    }

    #[test]
    fn kick_is_odd_around_the_nodes() {
        // Delta p ~ sin(2 pi x/d): odd through the potential nodes at x = 0
        // and x = d/2, even about the extremum at x = d/4.
        let mol = molecule();
        let las = laser(2.0);
        let d = las.period();
        let e = 1e-21;
        let kick = |x: f64| classical_kick_free(x, e, 1e-33, 2e-34, &mol, &las).unwrap();
        for i in 1..20 {
            let x = d * (i as f64) / 40.0;
            let a = kick(x);
            assert!((a + kick(d - x)).abs() < 1e-12 * a.abs(), "x = {x}");
            assert!(
                (kick(d / 2.0 + x) + kick(d / 2.0 - x)).abs() < 1e-12 * a.abs(),
                "x = {x}"
            );
            assert!(
                (kick(d / 4.0 + x / 2.0) - kick(d / 4.0 - x / 2.0)).abs() < 1e-12 * a.abs(),
                "x = {x}"
            );
        }
    }

    #[test]
    fn diabatic_kick_quadrature_oracle() {
        // -(1/v_z) d/dx Integral dz V vs the closed form, via central
        // differences of the z-integrated potential.
        let mol = molecule();
        let las = laser(1.5);
        let d = las.period();
        let (x, theta) = (0.37 * d, 1.1);
        let zint = |xx: f64| {
            quadrature::integrate(
                |z| grating_potential(xx, z, theta, &mol, &las),
                -10.0 * las.wz,
                10.0 * las.wz,
                1e-42,
                1e-12,
            )
            .unwrap()
            .value
        };
        let h = d * 1e-6;
        let ddx = (zint(x + h) - zint(x - h)) / (2.0 * h);
        let want = -ddx / mol.vz;
        let got = classical_kick_diabatic(x, theta, &mol, &las);
        assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn torque_zeros_and_quadrature_oracle() {
        let mol = molecule();
        let las = laser(1.5);
        let d = las.period();
        assert_eq!(classical_torque_diabatic(0.3 * d, 0.0, &mol, &las), 0.0);
        assert!(
            classical_torque_diabatic(0.3 * d, std::f64::consts::FRAC_PI_2, &mol, &las).abs()
                < 1e-50
        );
        let iso = MoleculeSpec::new(mol.mass, mol.vz, mol.inertia, 5e-46, mol.alpha_par, 0.0).unwrap();
        assert_eq!(classical_torque_diabatic(0.3 * d, 0.7, &iso, &las), 0.0);

        // Finite-difference-in-theta oracle.
        let (x, theta) = (0.31 * d, 0.9);
        let zint = |th: f64| {
            quadrature::integrate(
                |z| grating_potential(x, z, th, &mol, &las),
                -10.0 * las.wz,
                10.0 * las.wz,
                1e-42,
                1e-12,
            )
            .unwrap()
            .value
        };
        let h = 1e-6;
        let ddtheta = (zint(theta + h) - zint(theta - h)) / (2.0 * h);
        let want = -ddtheta / mol.vz;
        let got = classical_torque_diabatic(x, theta, &mol, &las);
        assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
        // Prolate molecules are torqued toward theta = 0 at antinodes.
        assert!(classical_torque_diabatic(d / 2.0, 0.7, &mol, &las) < 0.0);
    }

    #[test]
    fn ensemble_transform_conservation() {
        let mol = molecule();
        let las = laser(2.0);
        let d = las.period();
        let mut ensemble = Vec::new();
        for i in 0..32 {
            let x = d * i as f64 / 32.0;
            ensemble.push(ClassicalSample {
                x,
                p_x: 0.0,
                rotor: RotorPhasePoint::new(0.1, 1.0 + 0.01 * i as f64, 0.2, 1e-33, 2e-33, 5e-34)
                    .unwrap(),
            });
        }
        // Zero power: nothing changes.
        let las0 = laser(0.0);
        let out = apply_classical_transform(&ensemble, TransitMode::Free, &mol, &las0).unwrap();
        assert_eq!(out, ensemble);
        // Free transit: rotor state bitwise unchanged, position unchanged.
        let out = apply_classical_transform(&ensemble, TransitMode::Free, &mol, &las).unwrap();
        for (a, b) in ensemble.iter().zip(&out) {
            assert_eq!(a.rotor, b.rotor);
            assert_eq!(a.x, b.x);
        }
        // Diabatic: orientation and (p_phi, p_psi) unchanged, p_theta kicked.
        let out = apply_classical_transform(&ensemble, TransitMode::Diabatic, &mol, &las).unwrap();
        for (a, b) in ensemble.iter().zip(&out) {
            assert_eq!(a.rotor.phi, b.rotor.phi);
            assert_eq!(a.rotor.theta, b.rotor.theta);
            assert_eq!(a.rotor.psi, b.rotor.psi);
            assert_eq!(a.rotor.p_phi, b.rotor.p_phi);
            assert_eq!(a.rotor.p_psi, b.rotor.p_psi);
        }
        assert!(apply_classical_transform(&[], TransitMode::Free, &mol, &las).is_err());
    }

    #[test]
    fn mean_kick_matches_formula_at_quarter_period() {
        use rand::{Rng, SeedableRng};
        use rand_distr::{Distribution, StandardNormal};
        let mol = molecule();
        let las = laser(2.0);
        let d = las.period();
        // Thermal rotor ensemble parked at x = d/4, kicked in free mode.
        let scale = (mol.inertia * crate::constants::K_BOLTZMANN * 300.0).sqrt();
        let sigma_psi = (1.0 / 10.0f64).sqrt();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let mut ensemble = Vec::new();
        for _ in 0..20_000 {
            let ct: f64 = rng.gen_range(-0.999999f64..0.999999);
            let theta = ct.acos();
            let w_chi: f64 = StandardNormal.sample(&mut rng);
            let w_theta: f64 = StandardNormal.sample(&mut rng);
            let w_psi: f64 = StandardNormal.sample(&mut rng);
            let p_psi = w_psi * sigma_psi * scale;
            ensemble.push(ClassicalSample {
                x: d / 4.0,
                p_x: 0.0,
                rotor: RotorPhasePoint::new(
                    0.0,
                    theta,
                    0.0,
                    w_chi * theta.sin() * scale + p_psi * ct,
                    w_theta * scale,
                    p_psi,
                )
                .unwrap(),
            });
        }
        let out = apply_classical_transform(&ensemble, TransitMode::Free, &mol, &las).unwrap();
        let mean_kick: f64 = out.iter().map(|s| s.p_x).sum::<f64>() / out.len() as f64;
        // Thermal isotropy pins the mean of q = 1 - R at 2/3.
        let phi0 = eikonal_phase(&mol, &las);
        let pref = std::f64::consts::PI * HBAR * phi0 / d;
        let exact = pref * (1.0 - mol.anisotropy() * 2.0 / 3.0);
        assert!(
            ((mean_kick - exact) / exact).abs() < 5e-3,
            "{mean_kick} vs {exact}"
        );
    }

    #[test]
    fn diffraction_orders_trivial_and_unitary() {
        let mask = PhaseMask {
            phase_amplitude: 0.0,
            period: 266e-9,
        };
        let o = diffraction_orders(&mask, 10);
        assert!((o.order(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for n in 1..=10 {
            assert!(o.order(n).norm() < 1e-15);
        }
        let mask = PhaseMask {
            phase_amplitude: 5.0,
            period: 266e-9,
        };
        let o = diffraction_orders(&mask, 40);
        assert!((o.captured_mass - 1.0).abs() < 1e-10);
        assert!(o.is_converged());
        for n in 1..=10 {
            assert_eq!(o.order(n), o.order(-n));
        }
        // Deliberately insufficient n_max loses mass.
        let o = diffraction_orders(&mask, 2);
        assert!(!o.is_converged());
    }

    #[test]
    fn diffraction_orders_match_defining_integral() {
        let mask = PhaseMask {
            phase_amplitude: 3.7,
            period: 266e-9,
        };
        let o = diffraction_orders(&mask, 20);
        let d = mask.period;
        for n in [-3i64, 0, 1, 2, 5] {
            let re = quadrature::integrate(
                |x| {
                    let t = mask.transmission(x);
                    let ph = -2.0 * std::f64::consts::PI * n as f64 * x / d;
                    (t * Complex64::from_polar(1.0, ph)).re
                },
                0.0,
                d,
                1e-18,
                1e-13,
            )
            .unwrap()
            .value
                / d;
            let im = quadrature::integrate(
                |x| {
                    let t = mask.transmission(x);
                    let ph = -2.0 * std::f64::consts::PI * n as f64 * x / d;
                    (t * Complex64::from_polar(1.0, ph)).im
                },
                0.0,
                d,
                1e-18,
                1e-13,
            )
            .unwrap()
            .value
                / d;
            let want = Complex64::new(re, im);
            assert!(
                (o.order(n) - want).norm() < 1e-10,
                "n = {n}: {} vs {want}",
                o.order(n)
            );
        }
    }
}
