//! Sinusoidal fringe visibility of the KDTLI signal.
//!
//! Three routes to the same observable:
//!
//! * `quantum_visibility_sum` — thermal sum over (l, m, k) states,
//!   `V = 2 sinc^2(pi f) sum p_lmk J2[phi_0 (1 - eta Q_lmk) sin(pi L/L_T)]`,
//! * `quantum_visibility_integral` — the high-temperature integral over the
//!   classical alignment distribution p_th(q), evaluated in u-space,
//! * `classical_visibility` — the moire shadow contrast,
//!   `V_cl = 2 sinc^2(pi f) E_q[J2((1 - eta q) phi_0 pi L/L_T)]`,
//!
//! plus velocity averaging and parameter sweeps over laser power, separation,
//! anisotropy, shape ratio and velocity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j2, sinc};
use crate::error::{Error, Result};
use crate::params::{
    de_broglie_wavelength, eikonal_phase, talbot_length, InterferometerSpec, LaserGratingSpec,
    MoleculeSpec, ShapeRatio,
};
use crate::quantum::{ThermalBasis, TruncationPolicy};
use crate::thermal::expectation_over_pth;

/// Which formula produced a visibility value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMode {
    QuantumSum,
    QuantumIntegral,
    Classical,
    Oracle,
}

impl std::fmt::Display for VisibilityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VisibilityMode::QuantumSum => "quantum_sum",
            VisibilityMode::QuantumIntegral => "quantum_integral",
            VisibilityMode::Classical => "classical",
            VisibilityMode::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

/// A signed sinusoidal fringe visibility. The figures of merit plot |V|;
/// the sign carries the fringe phase (inverted fringes give V < 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeResult {
    pub visibility: f64,
    pub mode: VisibilityMode,
    /// Opaque fingerprint of the resolved SI parameters.
    pub params_hash: String,
}

/// FNV-1a over the canonical parameter string; stable across runs.
fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn params_hash(mol: &MoleculeSpec, las: &LaserGratingSpec, ifm: &InterferometerSpec, mode: VisibilityMode) -> String {
    let shape = match mol.shape() {
        ShapeRatio::Finite(r) => format!("{r:.12e}"),
        ShapeRatio::Linear => "linear".to_string(),
    };
    let s = format!(
        "M={:.12e};vz={:.12e};I={:.12e};shape={shape};ap={:.12e};da={:.12e};P={:.12e};wy={:.12e};wz={:.12e};wl={:.12e};d={:.12e};L={:.12e};f={:.12e};T={:.12e};mode={mode}",
        mol.mass, mol.vz, mol.inertia, mol.alpha_par, mol.delta_alpha,
        las.power, las.wy, las.wz, las.wavelength,
        ifm.period, ifm.separation, ifm.opening_fraction, ifm.temperature,
    );
    format!("{:016x}", fnv1a(&s))
}

/// Shared geometry factors; validates that the laser grating period matches
/// the interferometer period (all three gratings share d).
struct Geometry {
    phi0: f64,
    eta: f64,
    sep_ratio: f64, // L / L_T
    prefactor: f64, // 2 sinc^2(pi f)
}

fn geometry(mol: &MoleculeSpec, las: &LaserGratingSpec, ifm: &InterferometerSpec) -> Result<Geometry> {
    let d = ifm.period;
    if ((las.period() - d) / d).abs() > 1e-9 {
        return Err(Error::spec(
            "period",
            format!(
                "laser grating period {} must equal the interferometer period {}",
                las.period(),
                d
            ),
        ));
    }
    let lt = talbot_length(d, de_broglie_wavelength(mol));
    let s = sinc(std::f64::consts::PI * ifm.opening_fraction);
    Ok(Geometry {
        phi0: eikonal_phase(mol, las),
        eta: mol.anisotropy(),
        sep_ratio: ifm.separation / lt,
        prefactor: 2.0 * s * s,
    })
}

/// Quantum fringe visibility as the thermal sum over rotor states.
pub fn quantum_visibility_sum(
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
    ifm: &InterferometerSpec,
    policy: &TruncationPolicy,
) -> Result<FringeResult> {
    let g = geometry(mol, las, ifm)?;
    let sin_t = (std::f64::consts::PI * g.sep_ratio).sin();
    let basis = ThermalBasis::build(mol, ifm.temperature, policy)?;
    let avg = basis.average(|_, _, _, q| bessel_j2(g.phi0 * (1.0 - g.eta * q) * sin_t));
    Ok(FringeResult {
        visibility: g.prefactor * avg,
        mode: VisibilityMode::QuantumSum,
        params_hash: params_hash(mol, las, ifm, VisibilityMode::QuantumSum),
    })
}

/// Quantum fringe visibility as the integral over the thermal alignment
/// distribution (the high-temperature form). Evaluated in u-space, so the
/// density's singular points never enter.
pub fn quantum_visibility_integral(
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
    ifm: &InterferometerSpec,
) -> Result<FringeResult> {
    let g = geometry(mol, las, ifm)?;
    let sin_t = (std::f64::consts::PI * g.sep_ratio).sin();
    let avg = expectation_over_pth(
        |q| bessel_j2(g.phi0 * (1.0 - g.eta * q) * sin_t),
        mol.shape(),
    )?;
    Ok(FringeResult {
        visibility: g.prefactor * avg,
        mode: VisibilityMode::QuantumIntegral,
        params_hash: params_hash(mol, las, ifm, VisibilityMode::QuantumIntegral),
    })
}

/// Classical (moire shadow) fringe visibility.
pub fn classical_visibility(
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
    ifm: &InterferometerSpec,
) -> Result<FringeResult> {
    let g = geometry(mol, las, ifm)?;
    let arg = g.phi0 * std::f64::consts::PI * g.sep_ratio;
    let avg = expectation_over_pth(|q| bessel_j2((1.0 - g.eta * q) * arg), mol.shape())?;
    Ok(FringeResult {
        visibility: g.prefactor * avg,
        mode: VisibilityMode::Classical,
        params_hash: params_hash(mol, las, ifm, VisibilityMode::Classical),
    })
}

fn visibility_by_mode(
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
    ifm: &InterferometerSpec,
    mode: VisibilityMode,
    policy: &TruncationPolicy,
) -> Result<FringeResult> {
    match mode {
        VisibilityMode::QuantumSum => quantum_visibility_sum(mol, las, ifm, policy),
        VisibilityMode::QuantumIntegral => quantum_visibility_integral(mol, las, ifm),
        VisibilityMode::Classical => classical_visibility(mol, las, ifm),
        VisibilityMode::Oracle => Err(Error::input(
            "visibility_by_mode",
            "oracle visibilities come from talbot::simulate_kdtli",
        )),
    }
}

/// Average the sinusoidal visibility over longitudinal velocity classes,
/// recomputing lambda_dB, L_T and phi_0 per class. The sinusoidal Fourier
/// component of the signal averages linearly over classes sharing the fringe
/// period, so the weighted mean of signed visibilities is exact.
pub fn velocity_average(
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
    ifm: &InterferometerSpec,
    v_weights: &[(f64, f64)],
    mode: VisibilityMode,
    policy: &TruncationPolicy,
) -> Result<FringeResult> {
    if v_weights.is_empty() {
        return Err(Error::input("velocity_average", "empty velocity class list"));
    }
    let wsum: f64 = v_weights.iter().map(|(_, w)| w).sum();
    if v_weights.iter().any(|&(v, w)| !(v > 0.0) || w < 0.0) || !(wsum > 0.0) {
        return Err(Error::input(
            "velocity_average",
            "velocities must be positive and weights nonnegative with positive sum",
        ));
    }
    let mut acc = 0.0;
    for &(v, w) in v_weights {
        if w == 0.0 {
            continue;
        }
        let class_mol = MoleculeSpec::with_shape(
            mol.mass,
            v,
            mol.inertia,
            mol.shape(),
            mol.alpha_par,
            mol.delta_alpha,
        )?;
        let r = visibility_by_mode(&class_mol, las, ifm, mode, policy)?;
        acc += w * r.visibility;
    }
    Ok(FringeResult {
        visibility: acc / wsum,
        mode,
        params_hash: params_hash(mol, las, ifm, mode),
    })
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Laser power P (W).
    LaserPower,
    /// Relative separation L / L_T (dimensionless, separation recomputed).
    SeparationRatio,
    /// Relative anisotropy Delta alpha / alpha_par.
    Anisotropy,
    /// Shape ratio I/I3.
    ShapeRatio,
    /// Longitudinal velocity v_z (m/s).
    Velocity,
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepVariable::LaserPower => "laser_power",
            SweepVariable::SeparationRatio => "separation_ratio",
            SweepVariable::Anisotropy => "anisotropy",
            SweepVariable::ShapeRatio => "shape_ratio",
            SweepVariable::Velocity => "velocity",
        };
        f.write_str(s)
    }
}

/// A visibility sweep: one variable, a value list and the fixed base record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub molecule: MoleculeSpec,
    pub laser: LaserGratingSpec,
    pub interferometer: InterferometerSpec,
}

/// One sweep point; failed points carry the error text instead of a value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub visibility_signed: Option<f64>,
    pub visibility_abs: Option<f64>,
    pub error: Option<String>,
}

/// Sweep output in deterministic input order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub mode: VisibilityMode,
    pub rows: Vec<SweepRow>,
}

/// Resolve one sweep point into concrete parameter records.
pub fn apply_sweep_variable(
    spec: &SweepSpec,
    value: f64,
) -> Result<(MoleculeSpec, LaserGratingSpec, InterferometerSpec)> {
    let mut mol = spec.molecule;
    let mut las = spec.laser;
    let mut ifm = spec.interferometer;
    match spec.variable {
        SweepVariable::LaserPower => {
            las = LaserGratingSpec::new(value, las.wy, las.wz, las.wavelength)?;
        }
        SweepVariable::SeparationRatio => {
            let lt = talbot_length(ifm.period, de_broglie_wavelength(&mol));
            ifm = InterferometerSpec::new(
                ifm.period,
                value * lt,
                ifm.opening_fraction,
                ifm.temperature,
            )?;
        }
        SweepVariable::Anisotropy => {
            mol = MoleculeSpec::with_shape(
                mol.mass,
                mol.vz,
                mol.inertia,
                mol.shape(),
                mol.alpha_par,
                value * mol.alpha_par,
            )?;
        }
        SweepVariable::ShapeRatio => {
            mol = MoleculeSpec::with_shape(
                mol.mass,
                mol.vz,
                mol.inertia,
                crate::params::ShapeRatio::new(value)?,
                mol.alpha_par,
                mol.delta_alpha,
            )?;
        }
        SweepVariable::Velocity => {
            mol = MoleculeSpec::with_shape(
                mol.mass,
                value,
                mol.inertia,
                mol.shape(),
                mol.alpha_par,
                mol.delta_alpha,
            )?;
        }
    }
    Ok((mol, las, ifm))
}

/// Evaluate the sweep. Points are independent; they are computed in parallel
/// and reduced in input order, so output is deterministic.
pub fn run_sweep(spec: &SweepSpec, mode: VisibilityMode, policy: &TruncationPolicy) -> Result<SweepTable> {
    if spec.values.is_empty() {
        return Err(Error::input("run_sweep", "empty value list"));
    }
    let rows: Vec<SweepRow> = spec
        .values
        .par_iter()
        .map(|&value| {
            let res = apply_sweep_variable(spec, value)
                .and_then(|(mol, las, ifm)| visibility_by_mode(&mol, &las, &ifm, mode, policy));
            match res {
                Ok(r) => SweepRow {
                    value,
                    visibility_signed: Some(r.visibility),
                    visibility_abs: Some(r.visibility.abs()),
                    error: None,
                },
                Err(e) => SweepRow {
                    value,
                    visibility_signed: None,
                    visibility_abs: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepTable { mode, rows })
}
