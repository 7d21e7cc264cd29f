//! Near-field matter-wave interferometry of rotating symmetric-top molecules.
//!
//! This crate computes the quantum and classical fringe visibility of
//! symmetric-top molecules in a Kapitza-Dirac-Talbot-Lau interferometer
//! (KDTLI): three gratings of common period `d`, the outer two binary
//! material masks and the central one a standing light wave acting as a pure
//! phase grating.
//!
//! The main building blocks are
//!
//! * [`quantum`] — rotor state labels `(l, m, k)`, symmetric-top energies,
//!   thermal weights and the alignment expectation values `Q_lmk`,
//! * [`wigner`] — Wigner small-d matrices and a quadrature oracle for `Q_lmk`,
//! * [`rotor`] — classical free-top mechanics: Hamilton function, rotation
//!   period and temporal averages of the orientation,
//! * [`thermal`] — thermal statistics of those temporal averages: closed-form
//!   densities, u-space expectations and a Monte Carlo sampler,
//! * [`grating`] — eikonal grating transformations (quantum and classical),
//! * [`visibility`] — sinusoidal fringe visibility in sum, integral and
//!   classical form, plus parameter sweeps and velocity averaging,
//! * [`talbot`] — a brute-force order-space simulation of the three-grating
//!   interferometer used as an independent cross-check.
//!
//! All quantities are SI internally; unit conversions happen at the CLI
//! boundary only.

pub mod bessel;
pub mod constants;
pub mod error;
pub mod grating;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod quantum;
pub mod rotor;
pub mod talbot;
pub mod thermal;
pub mod visibility;
pub mod wigner;

pub use error::{Error, Result};
pub use params::{
    de_broglie_wavelength, eikonal_phase, talbot_length, InterferometerSpec, LaserGratingSpec,
    MoleculeSpec, PhysicalConstants, ShapeRatio,
};
pub use quantum::{
    q_lm_linear, q_lmk, rotational_energy, thermal_weight, RotQuantumNumbers, ThermalBasis,
    TruncationPolicy,
};
pub use rotor::{
    hamiltonian, r_tilde, relative_frequencies, rotation_period, temporal_average_r,
    RotorPhasePoint, TemporalAverages,
};
pub use thermal::{
    expectation_over_pth, f_th, ks_distance, ks_two_sample, p_th, q_cdf_uspace, q_density_u,
    r_cdf_uspace, sample_thermal, CdfTable, SampleSet,
};
pub use visibility::{
    apply_sweep_variable, classical_visibility, quantum_visibility_integral,
    quantum_visibility_sum, run_sweep, velocity_average, FringeResult, SweepSpec, SweepTable,
    SweepVariable, VisibilityMode,
};
pub use talbot::{
    extract_sinusoidal_visibility, simulate_kdtli, FringePattern, OrderSpaceState, TalbotOptions,
};
