//! Brute-force order-space simulation of the three-grating KDTLI.
//!
//! Independent cross-check of the closed-form visibility: no Bessel-function
//! identities, no Talbot-Lau coefficients — just incoherent source points
//! behind grating 1, paraxial propagation of diffraction orders with
//! quadratic Talbot phases, the per-state phase-grating convolution at
//! grating 2, and a shift scan of grating 3.
//!
//! Incoherence model: grating 1 is illuminated by a spatially incoherent,
//! uncollimated beam. Source positions x0 are sampled across one grating-1
//! opening (periodicity folds the rest); the beam divergence is sampled as a
//! continuous transverse momentum offset nu in grating units (a Bloch
//! offset n -> n + nu). Averaging over nu removes the spurious inter-period
//! coherences a finite periodic lattice would otherwise introduce — exactly
//! the resonances that a monochromatic point-source comb would add at
//! rational L/L_T but that an uncollimated beam cannot sustain.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::sinc;
use crate::error::{Error, Result};
use crate::grating::{diffraction_orders, DiffractionOrders, PhaseMask};
use crate::params::{
    de_broglie_wavelength, eikonal_phase, talbot_length, InterferometerSpec, LaserGratingSpec,
    MoleculeSpec,
};
use crate::quantum::{q_lmk, RotQuantumNumbers};

/// Transverse state in the diffraction-order representation: amplitudes of
/// the plane-wave components exp(2 pi i (n + nu) x / d).
#[derive(Debug, Clone)]
pub struct OrderSpaceState {
    /// a_{-n_max} .. a_{n_max}.
    pub amplitudes: Vec<Complex64>,
    /// Grating period d (m).
    pub period: f64,
    /// Bloch offset nu in grating units.
    pub bloch_offset: f64,
}

impl OrderSpaceState {
    /// Periodized point source at fractional position `x0` (units of d) with
    /// transverse momentum offset `nu` (grating units): all orders populated
    /// with unit amplitude.
    pub fn point_source(n_max: usize, x0: f64, nu: f64, period: f64) -> Self {
        let mut amplitudes = Vec::with_capacity(2 * n_max + 1);
        for i in 0..=2 * n_max {
            let n = i as f64 - n_max as f64;
            amplitudes.push(Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * n * x0));
        }
        OrderSpaceState {
            amplitudes,
            period,
            bloch_offset: nu,
        }
    }

    pub fn n_max(&self) -> usize {
        (self.amplitudes.len() - 1) / 2
    }

    /// Total order-space norm, sum of |a_n|^2.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Free flight over `sep_ratio` Talbot lengths: each order picks up the
    /// quadratic phase exp(-i pi (n + nu)^2 L / L_T). Norm preserving.
    pub fn propagate(&mut self, sep_ratio: f64) {
        let n_max = self.n_max() as f64;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            let n = i as f64 - n_max + self.bloch_offset;
            *a *= Complex64::from_polar(1.0, -std::f64::consts::PI * n * n * sep_ratio);
        }
    }

    /// Apply a phase grating: convolution with its diffraction orders.
    /// Orders pushed beyond +/- n_max are dropped; the caller keeps an
    /// interior window wide enough that the observables never touch them.
    pub fn apply_mask(&self, orders: &DiffractionOrders) -> OrderSpaceState {
        let n = self.amplitudes.len() as i64;
        let n_max = self.n_max() as i64;
        let jc = orders.n_max() as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); n as usize];
        for (idx, o) in out.iter_mut().enumerate() {
            let target = idx as i64 - n_max;
            let mut acc = Complex64::new(0.0, 0.0);
            let j_lo = (-jc).max(target - n_max);
            let j_hi = jc.min(target + n_max);
            for j in j_lo..=j_hi {
                let src = (target - j + n_max) as usize;
                acc += orders.order(j) * self.amplitudes[src];
            }
            *o = acc;
        }
        OrderSpaceState {
            amplitudes: out,
            period: self.period,
            bloch_offset: self.bloch_offset,
        }
    }
}

/// Resolution knobs of the brute-force simulation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TalbotOptions {
    /// Order cutoff; amplitudes live on [-n_max, n_max].
    pub n_max: usize,
    /// Incoherent source points across one grating-1 opening.
    pub n_sources: usize,
    /// Incoherent Bloch offsets across nu in [0, 2).
    pub n_bloch: usize,
    /// Points of the one-period fringe scan.
    pub n_pattern: usize,
    /// Intensity harmonics kept when assembling the scan signal.
    pub k_harmonics: usize,
    /// Lateral offset of grating 1's opening center, in units of d.
    pub g1_offset: f64,
    /// Lateral offset of grating 3's opening center, in units of d.
    pub g3_offset: f64,
}

impl Default for TalbotOptions {
    fn default() -> Self {
        TalbotOptions {
            n_max: 64,
            n_sources: 32,
            n_bloch: 16,
            n_pattern: 256,
            k_harmonics: 8,
            g1_offset: 0.0,
            g3_offset: 0.0,
        }
    }
}

/// Period-resolved fringe signal from scanning grating 3, plus its
/// sinusoidal visibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FringePattern {
    /// Scan positions over one period (m).
    pub positions: Vec<f64>,
    /// Detected flux at each scan position (arbitrary units, nonnegative).
    pub intensity: Vec<f64>,
    /// First-harmonic contrast 2 |S_1| / S_0.
    pub sinusoidal_visibility: f64,
    /// Signed first-harmonic contrast 2 Re(S_1) / S_0; meaningful in the
    /// centered-mask convention where S_1 is real.
    pub signed_visibility: f64,
}

/// Simulate the KDTLI fringe signal for a weighted incoherent mixture of
/// rotational states.
///
/// Per state (l, m, k) the central grating is the pure phase mask with
/// amplitude `phi_0 (1 - (Delta alpha/alpha_par) Q_lmk)`; the state's
/// pattern is computed independently and the final signal is the
/// weight-averaged sum (the grating operator is diagonal per state, so no
/// cross-state coherences arise).
pub fn simulate_kdtli(
    mol: &MoleculeSpec,
    las: &LaserGratingSpec,
    ifm: &InterferometerSpec,
    rot_ensemble: &[(RotQuantumNumbers, f64)],
    opts: &TalbotOptions,
) -> Result<FringePattern> {
    if rot_ensemble.is_empty() {
        return Err(Error::input("simulate_kdtli", "empty rotational ensemble"));
    }
    let wsum: f64 = rot_ensemble.iter().map(|(_, w)| w).sum();
    if rot_ensemble.iter().any(|(_, w)| *w < 0.0) || (wsum - 1.0).abs() > 1e-6 {
        return Err(Error::input(
            "simulate_kdtli",
            format!("weights must be nonnegative and normalized; sum = {wsum}"),
        ));
    }
    let d = ifm.period;
    if ((las.period() - d) / d).abs() > 1e-9 {
        return Err(Error::spec(
            "period",
            "laser grating period must equal the interferometer period".to_string(),
        ));
    }
    if opts.n_sources < 4 || opts.n_bloch < 2 || opts.n_pattern < 4 * (opts.k_harmonics + 1) {
        return Err(Error::input(
            "simulate_kdtli",
            "resolution options too coarse (n_sources >= 4, n_bloch >= 2, n_pattern >= 4 (k+1))",
        ));
    }

    let sep_ratio = ifm.separation / talbot_length(d, de_broglie_wavelength(mol));
    let phi0 = eikonal_phase(mol, las);
    let eta = mol.anisotropy();
    let f = ifm.opening_fraction;

    // Per-state diffraction orders; shared cutoff so every state uses the
    // same interior window. Grown until the mask's order content fits.
    let amplitudes: Vec<f64> = rot_ensemble
        .iter()
        .map(|(q, _)| phi0 * (1.0 - eta * q_lmk(q.l, q.m, q.k)))
        .collect();
    let a_max = amplitudes.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut j_cut = (0.5 * a_max).ceil() as usize + 10;
    let budget = 1e-8;
    loop {
        let probe = diffraction_orders(
            &PhaseMask {
                phase_amplitude: a_max,
                period: d,
            },
            j_cut,
        );
        if probe.captured_mass >= 1.0 - budget {
            break;
        }
        j_cut += 8;
        if j_cut + opts.k_harmonics + 4 > opts.n_max {
            return Err(Error::TruncationMass {
                mass: 1.0 - probe.captured_mass,
                budget,
            });
        }
    }
    if opts.n_max < j_cut + opts.k_harmonics + 4 {
        return Err(Error::TruncationMass {
            mass: f64::NAN,
            budget,
        });
    }
    let window = opts.n_max - j_cut - opts.k_harmonics;

    // Weighted incoherent average of the per-state intensity harmonics.
    let per_state: Vec<Vec<Complex64>> = rot_ensemble
        .par_iter()
        .zip(amplitudes.par_iter())
        .map(|((_, _), &a)| {
            let orders = diffraction_orders(
                &PhaseMask {
                    phase_amplitude: a,
                    period: d,
                },
                j_cut,
            );
            state_harmonics(&orders, sep_ratio, f, d, opts, window)
        })
        .collect();

    let mut b = vec![Complex64::new(0.0, 0.0); opts.k_harmonics + 1];
    for ((_, w), hs) in rot_ensemble.iter().zip(per_state.iter()) {
        for (acc, h) in b.iter_mut().zip(hs.iter()) {
            *acc += Complex64::new(*w, 0.0) * h;
        }
    }

    // Normalization sanity: a pure phase grating conserves the windowed
    // mean intensity; drift signals a unitarity bug or fatal truncation.
    if (b[0].re - 1.0).abs() > 1e-2 || b[0].im.abs() > 1e-6 {
        return Err(Error::input(
            "simulate_kdtli",
            format!("normalization drift: windowed mean intensity = {}", b[0]),
        ));
    }

    // Scan grating 3: S(s) = sum_K B_K tau_K exp(2 pi i K s / d) with
    // tau_K = f sinc(pi K f) exp(-2 pi i K g3_offset).
    let tau: Vec<Complex64> = (0..=opts.k_harmonics)
        .map(|k| {
            let kf = k as f64;
            Complex64::from_polar(
                f * sinc(std::f64::consts::PI * kf * f),
                -2.0 * std::f64::consts::PI * kf * opts.g3_offset,
            )
        })
        .collect();

    let mut positions = Vec::with_capacity(opts.n_pattern);
    let mut intensity = Vec::with_capacity(opts.n_pattern);
    for i in 0..opts.n_pattern {
        let s_frac = i as f64 / opts.n_pattern as f64;
        let mut val = (b[0] * tau[0]).re;
        for k in 1..=opts.k_harmonics {
            let ph = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * s_frac);
            val += 2.0 * (b[k] * tau[k] * ph).re;
        }
        positions.push(s_frac * d);
        intensity.push(val);
    }

    // A physical flux: tolerate only rounding-level negativity.
    let s0 = intensity.iter().sum::<f64>() / intensity.len() as f64;
    if intensity.iter().any(|&v| v < -1e-6 * s0.abs()) {
        return Err(Error::domain(
            "simulate_kdtli",
            "fringe intensity went negative beyond rounding tolerance",
        ));
    }
    for v in &mut intensity {
        if *v < 0.0 {
            *v = 0.0;
        }
    }

    let (s1_re, s1_im, s0) = first_harmonic(&intensity);
    if s0 <= 0.0 {
        return Err(Error::ZeroMeanPattern { s0 });
    }
    let s1_mag = (s1_re * s1_re + s1_im * s1_im).sqrt();
    Ok(FringePattern {
        positions,
        intensity,
        sinusoidal_visibility: 2.0 * s1_mag / s0,
        signed_visibility: 2.0 * s1_re / s0,
    })
}

/// Intensity harmonics B_0..B_K of one rotational state, averaged over
/// incoherent sources and Bloch offsets, normalized per interior order.
fn state_harmonics(
    orders: &DiffractionOrders,
    sep_ratio: f64,
    opening: f64,
    period: f64,
    opts: &TalbotOptions,
    window: usize,
) -> Vec<Complex64> {
    let n_max = opts.n_max;
    let dim = 2 * n_max + 1;
    let m = window as i64;
    let mut b = vec![Complex64::new(0.0, 0.0); opts.k_harmonics + 1];
    let mut phase1 = vec![Complex64::new(0.0, 0.0); dim];

    for i_nu in 0..opts.n_bloch {
        let nu = (i_nu as f64 + 0.5) * 2.0 / opts.n_bloch as f64;
        for (i, p) in phase1.iter_mut().enumerate() {
            let n = i as f64 - n_max as f64 + nu;
            *p = Complex64::from_polar(1.0, -std::f64::consts::PI * n * n * sep_ratio);
        }
        for i_src in 0..opts.n_sources {
            let x0 = opts.g1_offset + ((i_src as f64 + 0.5) / opts.n_sources as f64 - 0.5) * opening;
            let mut state = OrderSpaceState::point_source(n_max, x0, nu, period);
            for (a, p) in state.amplitudes.iter_mut().zip(phase1.iter()) {
                *a *= p;
            }
            let mut state = state.apply_mask(orders);
            for (a, p) in state.amplitudes.iter_mut().zip(phase1.iter()) {
                *a *= p;
            }
            let amps = &state.amplitudes;
            for (k, acc) in b.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for n in -m..=m {
                    let lo = (n + n_max as i64) as usize;
                    let hi = (n + k as i64 + n_max as i64) as usize;
                    s += amps[hi] * amps[lo].conj();
                }
                *acc += s;
            }
        }
    }
    let norm = (opts.n_bloch * opts.n_sources) as f64 * (2.0 * window as f64 + 1.0);
    for acc in &mut b {
        *acc /= norm;
    }
    b
}

/// Mean and first Fourier harmonic of a sampled one-period pattern.
fn first_harmonic(intensity: &[f64]) -> (f64, f64, f64) {
    let n = intensity.len() as f64;
    let mut s0 = 0.0;
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, &v) in intensity.iter().enumerate() {
        let ph = 2.0 * std::f64::consts::PI * i as f64 / n;
        s0 += v;
        re += v * ph.cos();
        im -= v * ph.sin();
    }
    (re / n, im / n, s0 / n)
}

/// Sinusoidal visibility 2 |S_1| / S_0 of a one-period fringe pattern.
pub fn extract_sinusoidal_visibility(pattern: &FringePattern) -> Result<f64> {
    if pattern.intensity.is_empty() {
        return Err(Error::input("extract_sinusoidal_visibility", "empty pattern"));
    }
    let (re, im, s0) = first_harmonic(&pattern.intensity);
    if !(s0.abs() > 1e-300) {
        return Err(Error::ZeroMeanPattern { s0 });
    }
    Ok(2.0 * (re * re + im * im).sqrt() / s0)
}
