//! Classical mechanics of the free symmetric top.
//!
//! Euler angles (phi, theta, psi) in the z-y'-z'' convention with conjugate
//! momenta (p_phi, p_theta, p_psi). The free top is integrable: E_rot, p_phi
//! and p_psi are conserved, theta(t) is periodic, and the temporal average
//! of cos^2(theta) over one period has the closed form implemented here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{MoleculeSpec, ShapeRatio};

/// A point in the orientational phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorPhasePoint {
    /// Precession angle (rad), in [0, 2 pi).
    pub phi: f64,
    /// Nutation angle (rad), in (0, pi).
    pub theta: f64,
    /// Spin angle (rad), in [0, 2 pi).
    pub psi: f64,
    /// Conjugate momenta (J s).
    pub p_phi: f64,
    pub p_theta: f64,
    pub p_psi: f64,
}

impl RotorPhasePoint {
    pub fn new(phi: f64, theta: f64, psi: f64, p_phi: f64, p_theta: f64, p_psi: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(Error::spec(
                "theta",
                format!("nutation angle must lie in (0, pi), got {theta}"),
            ));
        }
        let tau = 2.0 * std::f64::consts::PI;
        Ok(RotorPhasePoint {
            phi: phi.rem_euclid(tau),
            theta,
            psi: psi.rem_euclid(tau),
            p_phi,
            p_theta,
            p_psi,
        })
    }
}

/// Conserved quantities and temporal averages of a free-top trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalAverages {
    /// Rotational energy E_rot (J).
    pub e_rot: f64,
    /// Period of theta-rotations (s).
    pub tau_rot: f64,
    /// Temporal average of cos^2(theta) over one period, in [0, 1].
    pub r_avg: f64,
    /// Relative frequency of phi-rotations, in [-1, 1].
    pub u1: f64,
    /// Relative frequency of psi-rotations, in [-1, 1].
    pub u2: f64,
}

impl TemporalAverages {
    /// Evaluate all conserved averages of the trajectory through `p`.
    pub fn from_point(p: &RotorPhasePoint, mol: &MoleculeSpec) -> Result<Self> {
        let e_rot = hamiltonian(p, mol)?;
        let tau_rot = rotation_period(e_rot, p.p_psi, mol)?;
        let r_avg = temporal_average_r(e_rot, p.p_phi, p.p_psi, mol)?;
        let (u1, u2) = relative_frequencies(p, mol)?;
        Ok(TemporalAverages {
            e_rot,
            tau_rot,
            r_avg,
            u1,
            u2,
        })
    }
}

/// Hamilton function of the free symmetric top:
/// `H = [ (p_phi - p_psi cos th)^2 / sin^2 th + p_th^2 ] / 2I + p_psi^2 / 2 I3`.
///
/// At sin(theta) = 0 the first term is singular unless
/// p_phi = p_psi cos(theta); in that removable case the limit value is
/// returned.
pub fn hamiltonian(p: &RotorPhasePoint, mol: &MoleculeSpec) -> Result<f64> {
    let s = p.theta.sin();
    let w = p.p_phi - p.p_psi * p.theta.cos();
    let spin = match mol.shape() {
        ShapeRatio::Finite(_) => p.p_psi * p.p_psi / (2.0 * mol.inertia3().unwrap()),
        ShapeRatio::Linear => {
            if p.p_psi == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
    };
    if s == 0.0 {
        if w == 0.0 {
            return Ok(p.p_theta * p.p_theta / (2.0 * mol.inertia) + spin);
        }
        return Err(Error::SingularOrientation { residual: w.abs() });
    }
    Ok((w * w / (s * s) + p.p_theta * p.p_theta) / (2.0 * mol.inertia) + spin)
}

/// Radicand D = 2 E_rot I + p_psi^2 (1 - I/I3), which equals p_rot^2, the
/// square of the angular momentum scale. Along genuine trajectories
/// D = (p_phi - p_psi cos th)^2 / sin^2 th + p_theta^2 + p_psi^2 > 0.
fn radicand(e_rot: f64, p_psi: f64, mol: &MoleculeSpec) -> Result<f64> {
    let d = match mol.shape() {
        ShapeRatio::Finite(ratio) => 2.0 * e_rot * mol.inertia + p_psi * p_psi * (1.0 - ratio),
        ShapeRatio::Linear => {
            if p_psi != 0.0 {
                return Err(Error::domain(
                    "rotation_period",
                    "linear rotor requires p_psi = 0",
                ));
            }
            2.0 * e_rot * mol.inertia
        }
    };
    if !(d > 0.0) {
        return Err(Error::domain(
            "rotation_period",
            format!("non-positive radicand 2 E I + p_psi^2 (1 - I/I3) = {d:.6e}"),
        ));
    }
    Ok(d)
}

/// Period of theta-rotations, `tau_rot = 2 pi I / sqrt(D)`.
pub fn rotation_period(e_rot: f64, p_psi: f64, mol: &MoleculeSpec) -> Result<f64> {
    Ok(2.0 * std::f64::consts::PI * mol.inertia / radicand(e_rot, p_psi, mol)?.sqrt())
}

/// Temporal average of cos^2(theta(t)) over one rotational period:
/// `R = 1/2 - (p_phi^2 + p_psi^2) / 2D + (3/2) (p_phi p_psi / D)^2`.
///
/// Only defined on reachable conserved triples: D > 0 and
/// |p_phi|, |p_psi| <= sqrt(D).
pub fn temporal_average_r(e_rot: f64, p_phi: f64, p_psi: f64, mol: &MoleculeSpec) -> Result<f64> {
    let d = radicand(e_rot, p_psi, mol)?;
    let p_rot = d.sqrt();
    let tol = 1.0 + 1e-9; // admit boundary points up to rounding
    if p_phi.abs() > p_rot * tol || p_psi.abs() > p_rot * tol {
        return Err(Error::domain(
            "temporal_average_r",
            format!(
                "unreachable momenta: |p_phi| = {:.3e}, |p_psi| = {:.3e} exceed p_rot = {:.3e}",
                p_phi.abs(),
                p_psi.abs(),
                p_rot
            ),
        ));
    }
    let a = p_phi * p_phi / d;
    let b = p_psi * p_psi / d;
    Ok(r_tilde(a.min(1.0).sqrt(), b.min(1.0).sqrt()))
}

/// Relative frequencies of phi- and psi-rotations,
/// `u1 = p_phi tau_rot / 2 pi I` and `u2 = p_psi tau_rot / 2 pi I`.
///
/// With tau_rot = 2 pi I / sqrt(D) these reduce to p_phi / sqrt(D) and
/// p_psi / sqrt(D); both lie in [-1, 1] because
/// D - p_phi^2 = (p_phi cos th - p_psi)^2 / sin^2 th + p_th^2 >= 0 and
/// D - p_psi^2 = (p_phi - p_psi cos th)^2 / sin^2 th + p_th^2 >= 0.
pub fn relative_frequencies(p: &RotorPhasePoint, mol: &MoleculeSpec) -> Result<(f64, f64)> {
    let e_rot = hamiltonian(p, mol)?;
    let tau = rotation_period(e_rot, p.p_psi, mol)?;
    let scale = tau / (2.0 * std::f64::consts::PI * mol.inertia);
    let u1 = (p.p_phi * scale).clamp(-1.0, 1.0);
    let u2 = (p.p_psi * scale).clamp(-1.0, 1.0);
    Ok((u1, u2))
}

/// Compact form of the temporal average in terms of relative frequencies:
/// `R~ = 1/2 - (u1^2 + u2^2)/2 + (3/2) u1^2 u2^2`.
///
/// Bilinear in (u1^2, u2^2), hence bounded by its corner values 0, 1/2, 1.
pub fn r_tilde(u1: f64, u2: f64) -> f64 {
    debug_assert!(u1.abs() <= 1.0 + 1e-12 && u2.abs() <= 1.0 + 1e-12);
    let a = u1 * u1;
    let b = u2 * u2;
    (0.5 - 0.5 * (a + b) + 1.5 * a * b).clamp(0.0, 1.0)
}

/// Right-hand side of Hamilton's equations for the free symmetric top, for
/// the state vector `y = [theta, p_theta, phi, psi, integral of cos^2 theta]`.
/// p_phi and p_psi are conserved and enter as parameters. The last component
/// accumulates the running time integral of cos^2(theta(t)) so that temporal
/// averages can be read off directly.
pub fn hamilton_equations(
    mol: &MoleculeSpec,
    p_phi: f64,
    p_psi: f64,
) -> impl Fn(f64, &[f64; 5], &mut [f64; 5]) + '_ {
    let inertia = mol.inertia;
    let inv_i3 = match mol.shape() {
        ShapeRatio::Finite(_) => 1.0 / mol.inertia3().unwrap(),
        ShapeRatio::Linear => 0.0, // p_psi = 0 on linear trajectories
    };
    move |_t, y, dy| {
        let theta = y[0];
        let p_theta = y[1];
        let s = theta.sin();
        let c = theta.cos();
        let w = p_phi - p_psi * c;
        dy[0] = p_theta / inertia;
        dy[1] = (w / inertia) * (w * c / (s * s * s) - p_psi / s);
        dy[2] = w / (inertia * s * s);
        dy[3] = p_psi * inv_i3 - w * c / (inertia * s * s);
        dy[4] = c * c;
    }
}
