//! Quantum rotor states: labels, symmetric-top energies, thermal weights
//! and the alignment expectation values Q_lmk = <lmk| sin^2(theta) |lmk>.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_BOLTZMANN};
use crate::error::{Error, Result};
use crate::params::{MoleculeSpec, ShapeRatio};

/// Angular momentum quantum numbers (l, m, k) of the symmetric top.
/// `m` is the space-fixed and `k` the body-fixed projection; both bounded
/// by l in magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RotQuantumNumbers {
    pub l: u32,
    pub m: i32,
    pub k: i32,
}

impl RotQuantumNumbers {
    pub fn new(l: u32, m: i32, k: i32) -> Result<Self> {
        if m.unsigned_abs() > l || k.unsigned_abs() > l {
            return Err(Error::spec(
                "rot_quantum_numbers",
                format!("|m|, |k| must not exceed l: got (l={l}, m={m}, k={k})"),
            ));
        }
        Ok(RotQuantumNumbers { l, m, k })
    }
}

/// Symmetric-top eigenenergy
/// `eps_lk = (hbar^2 / 2I) l(l+1) + (hbar^2 / 2) (1/I3 - 1/I) k^2`.
///
/// Independent of m. For the linear rotor, k != 0 states carry infinite
/// energy (I3 -> 0) and drop out of every thermal average.
pub fn rotational_energy(q: &RotQuantumNumbers, mol: &MoleculeSpec) -> f64 {
    let l = q.l as f64;
    let base = HBAR * HBAR / (2.0 * mol.inertia) * l * (l + 1.0);
    let k2 = (q.k as f64) * (q.k as f64);
    match mol.shape() {
        ShapeRatio::Finite(ratio) => {
            base + HBAR * HBAR / (2.0 * mol.inertia) * (ratio - 1.0) * k2
        }
        ShapeRatio::Linear => {
            if q.k == 0 {
                base
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Unnormalized Boltzmann weight exp(-eps_lk / kB T).
pub fn thermal_weight(q: &RotQuantumNumbers, mol: &MoleculeSpec, temperature: f64) -> f64 {
    (-rotational_energy(q, mol) / (K_BOLTZMANN * temperature)).exp()
}

/// Q_lmk = <lmk| sin^2(theta) |lmk> in closed form:
///
/// `1/2 + (1/2) [(2m)^2 + (2k)^2 - 1] / [(2l-1)(2l+3)]
///      - (3/2) (2mk)^2 / [l(l+1)(2l-1)(2l+3)]`
///
/// The l = 0 state has m = k = 0, where the last term is the 0/0 limit of a
/// vanishing numerator and is defined as 0; the closed form then gives 2/3,
/// the isotropic average of sin^2(theta).
pub fn q_lmk(l: u32, m: i32, k: i32) -> f64 {
    debug_assert!(m.unsigned_abs() <= l && k.unsigned_abs() <= l);
    let lf = l as f64;
    let denom = (2.0 * lf - 1.0) * (2.0 * lf + 3.0);
    let four_m2 = 4.0 * (m as f64) * (m as f64);
    let four_k2 = 4.0 * (k as f64) * (k as f64);
    let second = 0.5 * (four_m2 + four_k2 - 1.0) / denom;
    if l == 0 {
        return 0.5 + second;
    }
    let two_mk = 2.0 * (m as f64) * (k as f64);
    let third = 1.5 * two_mk * two_mk / (lf * (lf + 1.0) * denom);
    0.5 + second - third
}

/// Linear-rotor limit Q_lm0; identical, bit for bit, to `q_lmk(l, m, 0)`.
pub fn q_lm_linear(l: u32, m: i32) -> f64 {
    q_lmk(l, m, 0)
}

/// Controls the adaptive truncation of thermal sums over (l, m, k).
#[derive(Debug, Clone, Copy)]
pub struct TruncationPolicy {
    /// Maximum neglected tail probability mass.
    pub tail_mass: f64,
    /// Hard cap on l before giving up.
    pub l_cap: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_mass: 1e-8,
            l_cap: 10_000,
        }
    }
}

/// Thermally truncated rotational basis: per-l shell weights
/// `s_l = (2l+1) sum_k exp(-eps_lk / kB T)` up to an l_max chosen so the
/// neglected tail mass is below the policy bound.
#[derive(Debug, Clone)]
pub struct ThermalBasis {
    pub l_max: u32,
    /// Shell weights s_0 .. s_{l_max} (unnormalized).
    pub shell_weights: Vec<f64>,
    /// Partition sum over the truncated basis (compensated summation).
    pub partition: f64,
    /// Upper bound on the neglected relative tail mass.
    pub tail_bound: f64,
    beta_l: f64,
    beta_k: f64,
    linear: bool,
}

impl ThermalBasis {
    /// Build the basis for `mol` at temperature `t` (K).
    pub fn build(mol: &MoleculeSpec, temperature: f64, policy: &TruncationPolicy) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::spec(
                "temperature",
                format!("must be > 0, got {temperature}"),
            ));
        }
        let kt = K_BOLTZMANN * temperature;
        // eps_lk / kT = beta_l * l(l+1) + beta_k * k^2
        let beta_l = HBAR * HBAR / (2.0 * mol.inertia) / kt;
        let (beta_k, linear) = match mol.shape() {
            ShapeRatio::Finite(ratio) => (beta_l * (ratio - 1.0), false),
            ShapeRatio::Linear => (0.0, true),
        };

        let mut shells = Vec::new();
        let mut partition = 0.0f64;
        let mut comp = 0.0f64; // Kahan correction
        let mut prev = 0.0f64;
        let mut l = 0u32;
        loop {
            let s = shell_weight(l, beta_l, beta_k, linear);
            // Kahan summation keeps the partition sum accurate enough for
            // the 1e-12-level identities downstream.
            let y = s - comp;
            let t = partition + y;
            comp = (t - partition) - y;
            partition = t;
            shells.push(s);

            if l >= 2 && s < prev && s > 0.0 {
                let ratio = s / prev;
                // Shells decay at least geometrically past the peak:
                // tail <= s * ratio / (1 - ratio).
                let tail = s * ratio / (1.0 - ratio);
                if tail <= policy.tail_mass * partition {
                    return Ok(ThermalBasis {
                        l_max: l,
                        shell_weights: shells,
                        partition,
                        tail_bound: tail / partition,
                        beta_l,
                        beta_k,
                        linear,
                    });
                }
            }
            if l >= policy.l_cap {
                let tail = if prev > 0.0 { s / prev } else { 1.0 };
                return Err(Error::TruncationFailure {
                    l_cap: policy.l_cap,
                    tail,
                });
            }
            prev = s;
            l += 1;
        }
    }

    /// Normalized weight of a single (l, m, k) state. Weights over the
    /// truncated basis sum to 1 by construction.
    pub fn weight(&self, q: &RotQuantumNumbers) -> f64 {
        if q.l > self.l_max {
            return 0.0;
        }
        let lf = q.l as f64;
        let k2 = (q.k as f64) * (q.k as f64);
        if self.linear && q.k != 0 {
            return 0.0;
        }
        (-(self.beta_l * lf * (lf + 1.0) + self.beta_k * k2)).exp() / self.partition
    }

    /// Weighted average of `g(l, m, k, Q_lmk)` over the truncated thermal
    /// ensemble, exploiting the (m -> -m) and (k -> -k) symmetry of both the
    /// weights and Q_lmk. The weights are normalized over the truncated
    /// basis, so a constant g averages to itself exactly.
    pub fn average<G: Fn(u32, i32, i32, f64) -> f64>(&self, g: G) -> f64 {
        let mut num = 0.0f64;
        let mut num_c = 0.0f64;
        let mut den = 0.0f64;
        let mut den_c = 0.0f64;
        let kahan = |acc: &mut f64, comp: &mut f64, v: f64| {
            let y = v - *comp;
            let t = *acc + y;
            *comp = (t - *acc) - y;
            *acc = t;
        };
        for l in 0..=self.l_max {
            let lf = l as f64;
            let el = self.beta_l * lf * (lf + 1.0);
            let k_hi = if self.linear { 0 } else { l as i32 };
            for k in 0..=k_hi {
                let w = (-(el + self.beta_k * (k as f64) * (k as f64))).exp();
                if w == 0.0 {
                    continue;
                }
                let k_mult = if k == 0 { 1.0 } else { 2.0 };
                for m in 0..=l as i32 {
                    let m_mult = if m == 0 { 1.0 } else { 2.0 };
                    let mult = k_mult * m_mult;
                    let q = q_lmk(l, m, k);
                    kahan(&mut num, &mut num_c, mult * w * g(l, m, k, q));
                    kahan(&mut den, &mut den_c, mult * w);
                }
            }
        }
        num / den
    }

    /// Explicit (state, weight) list with (m, k) sign degeneracy folded into
    /// the weights (valid whenever the observable depends on |m|, |k| only,
    /// as Q_lmk does). Weights sum to 1. States with relative weight below
    /// `min_weight` are dropped and the remainder renormalized.
    pub fn ensemble(&self, min_weight: f64) -> Vec<(RotQuantumNumbers, f64)> {
        let mut states = Vec::new();
        let mut total = 0.0;
        for l in 0..=self.l_max {
            let lf = l as f64;
            let el = self.beta_l * lf * (lf + 1.0);
            let k_hi = if self.linear { 0 } else { l as i32 };
            for k in 0..=k_hi {
                let w = (-(el + self.beta_k * (k as f64) * (k as f64))).exp() / self.partition;
                let k_mult = if k == 0 { 1.0 } else { 2.0 };
                for m in 0..=l as i32 {
                    let m_mult = if m == 0 { 1.0 } else { 2.0 };
                    let wtot = w * k_mult * m_mult;
                    if wtot >= min_weight {
                        states.push((RotQuantumNumbers { l, m, k }, wtot));
                        total += wtot;
                    }
                }
            }
        }
        for s in &mut states {
            s.1 /= total;
        }
        states
    }
}

fn shell_weight(l: u32, beta_l: f64, beta_k: f64, linear: bool) -> f64 {
    let lf = l as f64;
    let el = (-(beta_l * lf * (lf + 1.0))).exp();
    if linear {
        return (2.0 * lf + 1.0) * el;
    }
    let mut ksum = 1.0;
    for k in 1..=l {
        let kf = k as f64;
        let w = (-(beta_k * kf * kf)).exp();
        if w < 1e-18 {
            break;
        }
        ksum += 2.0 * w;
    }
    (2.0 * lf + 1.0) * el * ksum
}
