//! Run configuration: a flat TOML file with one section per parameter
//! record, in the units experimentalists quote (amu, A^3 polarizability
//! volume, nm, um, m/s, K). Conversion to SI happens here and nowhere else.

use anyhow::{bail, Context};
use serde::Deserialize;

use kdtli::constants::{AMU, EPSILON_0};
use kdtli::{
    de_broglie_wavelength, talbot_length, InterferometerSpec, LaserGratingSpec, MoleculeSpec,
    ShapeRatio, SweepVariable,
};

/// I/I3 in config form: a number or the string "linear".
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RatioConfig {
    Number(f64),
    Name(String),
}

impl RatioConfig {
    pub fn to_shape(&self) -> anyhow::Result<ShapeRatio> {
        match self {
            RatioConfig::Number(x) => Ok(ShapeRatio::new(*x)?),
            RatioConfig::Name(s) if s == "linear" => Ok(ShapeRatio::Linear),
            RatioConfig::Name(s) => bail!("unknown shape ratio {s:?}; use a number or \"linear\""),
        }
    }

    pub fn label(&self) -> String {
        match self {
            RatioConfig::Number(x) => format!("{x}"),
            RatioConfig::Name(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeConfig {
    pub mass_amu: f64,
    pub velocity_mps: f64,
    /// I = I1 = I2 in amu nm^2 (1 amu nm^2 = 1.66054e-45 kg m^2).
    pub inertia_amu_nm2: f64,
    pub shape_ratio: RatioConfig,
    /// Polarizability volume along the symmetry axis, in cubic Angstroms;
    /// alpha_par = 4 pi eps0 * volume.
    pub alpha_par_a3: f64,
    /// Relative anisotropy Delta alpha / alpha_par, in [-1, 1].
    pub anisotropy: f64,
}

impl Default for MoleculeConfig {
    fn default() -> Self {
        // The exemplary beam: M = 1030 amu, v_z = 100 m/s, alpha volume
        // 50 A^3. The moment of inertia is kept small enough that thermal
        // state sums stay tractable while kB T >> hbar^2/I holds by ~3e3.
        MoleculeConfig {
            mass_amu: 1030.0,
            velocity_mps: 100.0,
            inertia_amu_nm2: 3.0,
            shape_ratio: RatioConfig::Number(10.0),
            alpha_par_a3: 50.0,
            anisotropy: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub power_w: f64,
    pub waist_y_um: f64,
    pub waist_z_um: f64,
    pub wavelength_nm: f64,
}

impl Default for LaserConfig {
    fn default() -> Self {
        LaserConfig {
            power_w: 8.0,
            waist_y_um: 900.0,
            waist_z_um: 20.0,
            wavelength_nm: 532.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerConfig {
    /// Either the separation in meters...
    pub separation_m: Option<f64>,
    /// ...or as a multiple of the Talbot length (flag wins if both given).
    pub separation_ratio: Option<f64>,
    pub opening_fraction: f64,
    pub temperature_k: f64,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        InterferometerConfig {
            separation_m: None,
            separation_ratio: Some(0.5),
            opening_fraction: 0.42,
            temperature_k: 600.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            variable: SweepVariable::LaserPower,
            values: None,
            start: Some(0.0),
            stop: Some(15.0),
            points: Some(151),
        }
    }
}

impl SweepConfig {
    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if v.is_empty() {
                bail!("[sweep] values must not be empty");
            }
            return Ok(v.clone());
        }
        let (start, stop, points) = match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) if n >= 2 && b > a => (a, b, n),
            _ => bail!("[sweep] needs either `values` or start < stop with points >= 2"),
        };
        Ok((0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QdistConfig {
    pub ratios: Vec<RatioConfig>,
    pub points: usize,
}

impl Default for QdistConfig {
    fn default() -> Self {
        QdistConfig {
            ratios: vec![
                RatioConfig::Number(0.5),
                RatioConfig::Number(10.0),
                RatioConfig::Name("linear".into()),
            ],
            points: 401,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub ratios: Vec<f64>,
    /// Two temperatures whose r-distributions must coincide.
    pub temperature_pair_k: [f64; 2],
    pub ks_threshold: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 1_000_000,
            ratios: vec![0.5, 1.0, 10.0],
            temperature_pair_k: [300.0, 3000.0],
            ks_threshold: 0.005,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Rotational temperature of the validation ensemble (K). Kept low so
    /// the explicit state list stays small; the thermal-sum formula this is
    /// checked against is exact at any temperature.
    pub temperature_k: f64,
    pub phi0_values: Vec<f64>,
    pub anisotropies: Vec<f64>,
    pub tail_mass: f64,
    pub n_max: usize,
    pub n_sources: usize,
    pub n_bloch: usize,
    /// Pass thresholds: point-particle subgrid and thermal grid.
    pub tol_point: f64,
    pub tol_thermal: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            temperature_k: 0.65,
            phi0_values: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            anisotropies: vec![0.0, 0.5, 0.9],
            tail_mass: 1e-6,
            n_max: 64,
            n_sources: 32,
            n_bloch: 16,
            tol_point: 1e-3,
            tol_thermal: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub molecule: MoleculeConfig,
    #[serde(default)]
    pub laser: LaserConfig,
    #[serde(default)]
    pub interferometer: InterferometerConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub qdist: QdistConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            molecule: MoleculeConfig::default(),
            laser: LaserConfig::default(),
            interferometer: InterferometerConfig::default(),
            sweep: SweepConfig::default(),
            qdist: QdistConfig::default(),
            mc: McConfig::default(),
            oracle: OracleConfig::default(),
            seed: default_seed(),
        }
    }
}

fn default_seed() -> u64 {
    12345
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: RunConfig = toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                Ok(cfg)
            }
        }
    }

    pub fn molecule(&self) -> anyhow::Result<MoleculeSpec> {
        let m = &self.molecule;
        let shape = m.shape_ratio.to_shape()?;
        let alpha = 4.0 * std::f64::consts::PI * EPSILON_0 * m.alpha_par_a3 * 1e-30;
        if !(m.anisotropy.abs() <= 1.0) {
            bail!("[molecule] anisotropy must lie in [-1, 1]");
        }
        Ok(MoleculeSpec::with_shape(
            m.mass_amu * AMU,
            m.velocity_mps,
            m.inertia_amu_nm2 * AMU * 1e-18,
            shape,
            alpha,
            m.anisotropy * alpha,
        )?)
    }

    pub fn laser(&self) -> anyhow::Result<LaserGratingSpec> {
        let l = &self.laser;
        Ok(LaserGratingSpec::new(
            l.power_w,
            l.waist_y_um * 1e-6,
            l.waist_z_um * 1e-6,
            l.wavelength_nm * 1e-9,
        )?)
    }

    pub fn interferometer(&self) -> anyhow::Result<InterferometerSpec> {
        let mol = self.molecule()?;
        let las = self.laser()?;
        let i = &self.interferometer;
        let separation = match (i.separation_m, i.separation_ratio) {
            (Some(m), _) => m,
            (None, Some(ratio)) => {
                ratio * talbot_length(las.period(), de_broglie_wavelength(&mol))
            }
            (None, None) => bail!("[interferometer] needs separation_m or separation_ratio"),
        };
        Ok(InterferometerSpec::new(
            las.period(),
            separation,
            i.opening_fraction,
            i.temperature_k,
        )?)
    }

    /// One-line audit trail of the fully resolved SI parameters, prepended
    /// to every CSV output.
    pub fn resolved_params_line(&self) -> anyhow::Result<String> {
        let mol = self.molecule()?;
        let las = self.laser()?;
        let ifm = self.interferometer()?;
        let shape = match mol.shape() {
            ShapeRatio::Finite(r) => format!("{r:.6e}"),
            ShapeRatio::Linear => "linear".into(),
        };
        Ok(format!(
            "# mass_kg={:.12e} vz_mps={:.12e} inertia_kgm2={:.12e} shape_ratio={} alpha_par_Cm2V={:.12e} delta_alpha_Cm2V={:.12e} power_W={:.12e} waist_y_m={:.12e} waist_z_m={:.12e} wavelength_m={:.12e} period_m={:.12e} separation_m={:.12e} opening_fraction={:.12e} temperature_K={:.12e} seed={}",
            mol.mass,
            mol.vz,
            mol.inertia,
            shape,
            mol.alpha_par,
            mol.delta_alpha,
            las.power,
            las.wy,
            las.wz,
            las.wavelength,
            ifm.period,
            ifm.separation,
            ifm.opening_fraction,
            ifm.temperature,
            self.seed,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_resolves() {
        let cfg = RunConfig::default();
        let mol = cfg.molecule().unwrap();
        assert!((mol.mass - 1030.0 * AMU).abs() < 1e-30);
        let ifm = cfg.interferometer().unwrap();
        assert!((ifm.period - 266e-9).abs() < 1e-15);
        // L/L_T = 0.5 by default
        let lt = talbot_length(ifm.period, de_broglie_wavelength(&mol));
        assert!((ifm.separation / lt - 0.5).abs() < 1e-12);
        assert!(cfg.resolved_params_line().unwrap().starts_with("# mass_kg="));
    }

    #[test]
    fn toml_roundtrip_and_units() {
        let text = r#"
            seed = 7
            [molecule]
            mass_amu = 100.0
            velocity_mps = 200.0
            inertia_amu_nm2 = 1.0
            shape_ratio = "linear"
            alpha_par_a3 = 10.0
            anisotropy = 0.9
            [interferometer]
            separation_m = 0.01
            opening_fraction = 0.3
            temperature_k = 500.0
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.seed, 7);
        let mol = cfg.molecule().unwrap();
        assert!(mol.shape().is_linear());
        assert!((mol.inertia - AMU * 1e-18).abs() < 1e-50);
        let ifm = cfg.interferometer().unwrap();
        assert_eq!(ifm.separation, 0.01);
        // defaulted laser section
        assert_eq!(cfg.laser.power_w, 8.0);
    }

    #[test]
    fn bad_fields_rejected() {
        assert!(toml::from_str::<RunConfig>("[molecule]\nmass_amu = 1.0\n").is_err());
        let cfg: RunConfig = toml::from_str(
            "[molecule]\nmass_amu = 1.0\nvelocity_mps = 1.0\ninertia_amu_nm2 = 1.0\nshape_ratio = 0.1\nalpha_par_a3 = 1.0\nanisotropy = 0.0\n",
        )
        .unwrap();
        assert!(cfg.molecule().is_err(), "ratio below the oblate bound");
    }

    #[test]
    fn sweep_grid_generation() {
        let s = SweepConfig {
            variable: SweepVariable::LaserPower,
            values: None,
            start: Some(0.0),
            stop: Some(1.0),
            points: Some(5),
        };
        assert_eq!(s.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
