//! Thermal statistics of the rotor's temporal averages.
//!
//! The temporal average r of cos^2(theta(t)) depends on a thermal phase
//! point only through the relative frequencies (u1, u2), whose joint thermal
//! density is
//!
//! `q_th(u1, u2) = (1/4) sqrt(I/I3) [1 - (1 - I/I3) u2^2]^(-3/2)`
//!
//! on [-1,1]^2 — uniform in u1, temperature independent, and a function of
//! the shape ratio I/I3 alone. Everything here is built on that
//! representation: the closed-form density f_th(r) (a 1D integral with
//! inverse-square-root endpoint singularities, removed by substitution),
//! u-space expectations that avoid the density's singular points entirely,
//! a semi-analytic CDF, and an independent Monte Carlo sampler drawing raw
//! phase points from the Boltzmann distribution.

use rayon::prelude::*;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::K_BOLTZMANN;
use crate::error::{Error, Result};
use crate::params::{MoleculeSpec, ShapeRatio};
use crate::quadrature;
use crate::rotor::{hamiltonian, r_tilde, temporal_average_r, RotorPhasePoint};

/// Joint density q_th(u1, u2) of the relative frequencies, for finite shape
/// ratios. The linear-rotor limit concentrates all mass on u2 = 0 and has no
/// density representation; use [`expectation_over_pth`] there instead.
pub fn q_density_u(u1: f64, u2: f64, shape: ShapeRatio) -> Result<f64> {
    if u1.abs() > 1.0 || u2.abs() > 1.0 {
        return Err(Error::domain(
            "q_density_u",
            format!("(u1, u2) must lie in [-1,1]^2, got ({u1}, {u2})"),
        ));
    }
    match shape {
        ShapeRatio::Finite(ratio) => {
            Ok(0.25 * ratio.sqrt() * (1.0 - (1.0 - ratio) * u2 * u2).powf(-1.5))
        }
        ShapeRatio::Linear => Err(Error::domain(
            "q_density_u",
            "the linear-rotor u2-marginal is a point mass at 0; no density exists",
        )),
    }
}

/// Integral of `m(b) h(b)` over b in [0, 1], where
/// `m(b) = sqrt(ratio) [1 + (ratio - 1) b^2]^(-3/2)` is the marginal density
/// of |u2| (it integrates to exactly 1). A trigonometric/hyperbolic
/// substitution flattens m to a bounded smooth weight for any ratio, so this
/// stays accurate for ratios from 1/2 up to 1e9 and beyond.
fn integrate_marginal<H: Fn(f64) -> f64>(
    shape: ShapeRatio,
    h: H,
    breakpoints_b: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let ratio = match shape {
        ShapeRatio::Finite(r) => r,
        ShapeRatio::Linear => return Ok(h(0.0)),
    };
    if (ratio - 1.0).abs() < 1e-12 {
        // Spherical: m(b) = 1.
        let q = quadrature::integrate_with_breakpoints(h, 0.0, 1.0, breakpoints_b, abs_tol, rel_tol)?;
        return Ok(q.value);
    }
    if ratio > 1.0 {
        // b = sinh(w)/sqrt(ratio-1);  m(b) db = sqrt(ratio/(ratio-1)) sech^2(w) dw
        let s = (ratio - 1.0).sqrt();
        let w_max = s.asinh();
        let coeff = (ratio / (ratio - 1.0)).sqrt();
        let breaks: Vec<f64> = breakpoints_b.iter().map(|b| (b * s).asinh()).collect();
        let q = quadrature::integrate_with_breakpoints(
            |w| {
                let sech = 1.0 / w.cosh();
                coeff * sech * sech * h(w.sinh() / s)
            },
            0.0,
            w_max,
            &breaks,
            abs_tol,
            rel_tol,
        )?;
        Ok(q.value)
    } else {
        // b = sin(w)/sqrt(1-ratio);  m(b) db = sqrt(ratio/(1-ratio)) sec^2(w) dw
        let s = (1.0 - ratio).sqrt();
        let w_max = s.asin();
        let coeff = (ratio / (1.0 - ratio)).sqrt();
        let breaks: Vec<f64> = breakpoints_b.iter().map(|b| (b * s).asin()).collect();
        let q = quadrature::integrate_with_breakpoints(
            |w| {
                let sec = 1.0 / w.cos();
                coeff * sec * sec * h(w.sin() / s)
            },
            0.0,
            w_max,
            &breaks,
            abs_tol,
            rel_tol,
        )?;
        Ok(q.value)
    }
}

/// Expectation of `g(q)` under the thermal distribution p_th of
/// q = 1 - R~(u1, u2), computed entirely in u-space where the integrand is
/// smooth; the density's discontinuity and divergence never appear.
pub fn expectation_over_pth<G: Fn(f64) -> f64>(g: G, shape: ShapeRatio) -> Result<f64> {
    let inner = |b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        quadrature::integrate(|u| f(1.0 - r_tilde(u, b)), 0.0, 1.0, 1e-12, 5e-13)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    };
    let num = integrate_marginal(shape, |b| inner(b, &g), &[], 1e-11, 5e-12)?;
    let den = integrate_marginal(shape, |b| inner(b, &|_| 1.0), &[], 1e-11, 5e-12)?;
    if !num.is_finite() || !den.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            estimate: f64::NAN,
            tolerance: 1e-11,
        });
    }
    Ok(num / den)
}

/// Thermal density f_th(r) of the temporal average r of cos^2(theta):
///
/// `f_th(r) = sqrt(I/(3 I3)) Integral_{zeta(r)} du [1 + (I/I3 - 1) u^2]^(-3/2)
///            [(u^2 - 1/3)(u^2 + 2r - 1)]^(-1/2)`
///
/// over `zeta(r) = zeta1 ∪ zeta2` with `zeta1 = [0, sqrt(min A)]` (empty for
/// r >= 1/2), `zeta2 = [sqrt(max A), 1]`, `A = {1/3, 1-2r, r}`. The
/// inverse-square-root endpoint singularities are removed by the
/// substitution `u^2 = a + (b - a) s^2`; at r = 1/3 both interval endpoints
/// pinch and the density truly diverges, so +infinity is returned there.
pub fn f_th(r: f64, shape: ShapeRatio) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain("f_th", format!("r must lie in [0,1], got {r}")));
    }
    let ratio = match shape {
        ShapeRatio::Finite(x) => x,
        ShapeRatio::Linear => {
            return Ok(if r < 0.5 { 1.0 / (1.0 - 2.0 * r).sqrt() } else { 0.0 });
        }
    };
    if r == 0.0 || r == 1.0 {
        return Ok(0.0);
    }
    if (r - 1.0 / 3.0).abs() < 1e-14 {
        return Ok(f64::INFINITY);
    }

    let third = 1.0f64 / 3.0;
    let omr2 = 1.0 - 2.0 * r;
    let coeff = (ratio / 3.0).sqrt();
    // [1 - (1 - ratio) v]^(-3/2) as a function of v = u^2
    let envelope = |v: f64| (1.0 - (1.0 - ratio) * v).powf(-1.5);
    let mut total = 0.0;

    if r < 0.5 {
        // zeta1: v in [0, vb], both quadratic factors negative.
        let vb = third.min(omr2).min(r);
        // Regular low piece in u-space, then the possibly singular upper
        // piece with the s-substitution (exact cancellation-free factors).
        let v_mid = 0.5 * vb;
        let low = quadrature::integrate(
            |u| {
                let v = u * u;
                envelope(v) / ((third - v) * (omr2 - v)).sqrt()
            },
            0.0,
            v_mid.sqrt(),
            1e-12,
            1e-9,
        )?;
        total += low.value;
        // v(s) = vb - (vb - v_mid) s^2, s in [0, 1]; du = |dv| / (2 sqrt(v))
        let delta = vb - v_mid;
        let d1 = third - vb; // >= 0, exactly 0 when the min is 1/3
        let d2 = omr2 - vb; // >= 0, exactly 0 when the min is 1-2r
        let high = quadrature::integrate(
            |s| {
                let v = vb - delta * s * s;
                let f1 = d1 + delta * s * s;
                let f2 = d2 + delta * s * s;
                envelope(v) / (f1 * f2).sqrt() * delta * s / v.sqrt()
            },
            0.0,
            1.0,
            1e-12,
            1e-9,
        )?;
        total += high.value;
    }

    // zeta2: v in [va, 1], both factors positive.
    let va = third.max(omr2).max(r);
    if va < 1.0 {
        let delta = 1.0 - va;
        let d1 = va - third;
        let d2 = va - omr2;
        let q = quadrature::integrate(
            |s| {
                let v = va + delta * s * s;
                let f1 = d1 + delta * s * s;
                let f2 = d2 + delta * s * s;
                envelope(v) / (f1 * f2).sqrt() * delta * s / v.sqrt()
            },
            0.0,
            1.0,
            1e-12,
            1e-9,
        )?;
        total += q.value;
    }

    Ok(coeff * total)
}

/// Thermal density p_th(q) of the temporal average q of sin^2(theta),
/// obtained from f_th by the substitution q = 1 - r. Discontinuous at
/// q = 1/2 and divergent at q = 2/3 for finite shape ratios.
pub fn p_th(q: f64, shape: ShapeRatio) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain("p_th", format!("q must lie in [0,1], got {q}")));
    }
    f_th(1.0 - q, shape)
}

/// CDF of r = R~(u1, u2) under the thermal distribution, computed
/// semi-analytically: for fixed |u2| = b the set {u1 : R~ <= t} is an
/// interval whose length is known in closed form, leaving one smooth
/// b-integral. Independent of the f_th quadrature route.
pub fn r_cdf_uspace(t: f64, shape: ShapeRatio) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    if t >= 1.0 {
        return Ok(1.0);
    }
    let measure = |b: f64| -> f64 {
        let c0 = 0.5 * (1.0 - b * b);
        let slope = 0.5 * (3.0 * b * b - 1.0);
        if slope.abs() < 1e-300 {
            return if t >= c0 { 1.0 } else { 0.0 };
        }
        let x = (t - c0) / slope;
        if slope > 0.0 {
            x.clamp(0.0, 1.0).sqrt()
        } else {
            1.0 - x.clamp(0.0, 1.0).sqrt()
        }
    };
    // Kinks of the b-integrand: slope sign change and the u* in {0,1} crossings.
    let mut breaks = vec![1.0 / 3f64.sqrt()];
    if t < 0.5 {
        breaks.push((1.0 - 2.0 * t).sqrt());
    }
    breaks.push(t.sqrt());
    let v = integrate_marginal(shape, measure, &breaks, 1e-10, 1e-9)?;
    Ok(v.clamp(0.0, 1.0))
}

/// CDF of q = 1 - r under the thermal distribution.
pub fn q_cdf_uspace(t: f64, shape: ShapeRatio) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    if t >= 1.0 {
        return Ok(1.0);
    }
    Ok((1.0 - r_cdf_uspace(1.0 - t, shape)?).clamp(0.0, 1.0))
}

/// Tabulated CDF on a graded grid with linear interpolation. The grid is
/// clustered geometrically around the structural points r = 1/3 (divergence)
/// and r = 1/2 (discontinuity) so interpolation error stays far below the
/// Monte Carlo KS tolerances.
#[derive(Debug, Clone)]
pub struct CdfTable {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

/// Graded grid on [0, 1] refined toward 1/3 and 1/2.
fn graded_grid(n_base: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=n_base).map(|i| i as f64 / n_base as f64).collect();
    // Refinement stops at 2^-30: the log-divergent density carries ~1e-8 of
    // mass in that last window, negligible against the KS tolerances, and
    // quadrature nodes stay clear of the exact divergence point.
    for center in [1.0 / 3.0, 0.5] {
        for k in 3..=30 {
            let d = 2f64.powi(-k);
            for x in [center - d, center + d] {
                if x > 0.0 && x < 1.0 {
                    xs.push(x);
                }
            }
        }
        xs.push(center);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

impl CdfTable {
    /// Build the CDF of r by integrating the closed-form density f_th panel
    /// by panel (quadrature route (a): Eq.-level density integration).
    pub fn from_density(shape: ShapeRatio, n_base: usize) -> Result<Self> {
        let xs = graded_grid(n_base);
        let mut fs = Vec::with_capacity(xs.len());
        fs.push(0.0);
        let mut acc = 0.0;
        for w in xs.windows(2) {
            let q = quadrature::integrate(
                |r| f_th(r, shape).unwrap_or(f64::NAN),
                w[0],
                w[1],
                1e-10,
                1e-8,
            )?;
            acc += q.value;
            fs.push(acc);
        }
        if !(acc.is_finite() && acc > 0.0) {
            return Err(Error::QuadratureNonConvergence {
                estimate: f64::NAN,
                tolerance: 1e-8,
            });
        }
        for f in &mut fs {
            *f /= acc;
        }
        Ok(CdfTable { xs, fs })
    }

    /// Build the CDF of r from the u-space measure (quadrature route (b)).
    pub fn from_uspace(shape: ShapeRatio, n_base: usize) -> Result<Self> {
        let xs = graded_grid(n_base);
        let mut fs = Vec::with_capacity(xs.len());
        for &x in &xs {
            fs.push(r_cdf_uspace(x, shape)?);
        }
        // Enforce monotonicity against quadrature jitter.
        for i in 1..fs.len() {
            if fs[i] < fs[i - 1] {
                fs[i] = fs[i - 1];
            }
        }
        let last = *fs.last().unwrap();
        if last > 0.0 {
            for f in &mut fs {
                *f = (*f / last).min(1.0);
            }
        }
        Ok(CdfTable { xs, fs })
    }

    /// Interpolated CDF value.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.fs[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.fs.last().unwrap();
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.fs[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (f0, f1) = (self.fs[i - 1], self.fs[i]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Total variation distance between two tables on the union grid; a
    /// cheap sup-norm comparison helper for tests.
    pub fn sup_distance(&self, other: &CdfTable) -> f64 {
        let mut d = 0.0f64;
        for &x in self.xs.iter().chain(other.xs.iter()) {
            d = d.max((self.eval(x) - other.eval(x)).abs());
        }
        d
    }
}

/// A reproducible set of r-realizations drawn from the thermal ensemble.
#[derive(Debug, Clone)]
pub struct SampleSet {
    /// Temporal-average realizations, each in [0, 1].
    pub values: Vec<f64>,
    pub seed: u64,
    pub count: usize,
}

const CHUNK: usize = 1 << 14;

/// Draw `n` phase points from the Boltzmann distribution of the free
/// symmetric top and map each to its temporal average r.
///
/// Angles: phi, psi uniform on [0, 2 pi), cos(theta) uniform on (-1, 1).
/// Momenta, via dimensionless Gaussians (omega_chi, omega_theta standard
/// normal, omega_psi normal with variance I3/I):
/// `p_theta = omega_theta sqrt(I kB T)`, `p_psi = omega_psi sqrt(I kB T)`,
/// `p_phi = omega_chi sin(theta) sqrt(I kB T) + p_psi cos(theta)`.
///
/// Sampling is chunked over independent ChaCha substreams, so results are
/// deterministic in `seed` regardless of thread count.
pub fn sample_thermal(n: usize, temperature: f64, mol: &MoleculeSpec, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::input("sample_thermal", "need at least one sample"));
    }
    if !(temperature > 0.0) {
        return Err(Error::spec(
            "temperature",
            format!("must be > 0, got {temperature}"),
        ));
    }
    let ratio = match mol.shape() {
        ShapeRatio::Finite(r) => r,
        ShapeRatio::Linear => f64::INFINITY,
    };
    let sigma_psi = if ratio.is_finite() {
        (1.0 / ratio).sqrt()
    } else {
        0.0
    };
    let scale = (mol.inertia * K_BOLTZMANN * temperature).sqrt();

    let n_chunks = n.div_ceil(CHUNK);
    let values: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64 + 1);
            let count = CHUNK.min(n - chunk * CHUNK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(draw_r(&mut rng, mol, sigma_psi, scale));
            }
            out
        })
        .collect();

    Ok(SampleSet {
        values,
        seed,
        count: n,
    })
}

fn draw_r(rng: &mut ChaCha8Rng, mol: &MoleculeSpec, sigma_psi: f64, scale: f64) -> f64 {
    let ct = loop {
        let c: f64 = rng.gen_range(-1.0f64..1.0);
        if c > -1.0 {
            break c;
        }
    };
    let theta = ct.acos();
    let st = theta.sin();
    let w_chi: f64 = StandardNormal.sample(rng);
    let w_theta: f64 = StandardNormal.sample(rng);
    let w_psi: f64 = {
        let g: f64 = StandardNormal.sample(rng);
        g * sigma_psi
    };
    let p_theta = w_theta * scale;
    let p_psi = w_psi * scale;
    let p_phi = w_chi * st * scale + p_psi * ct;
    let point = RotorPhasePoint {
        phi: 0.0,
        theta,
        psi: 0.0,
        p_phi,
        p_theta,
        p_psi,
    };
    let e = hamiltonian(&point, mol).expect("interior theta cannot be singular");
    temporal_average_r(e, p_phi, p_psi, mol)
        .expect("thermal draws are reachable by construction")
        .clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and a reference CDF.
pub fn ks_distance<C: Fn(f64) -> f64>(samples: &SampleSet, cdf: C) -> f64 {
    ks_distance_slice(&samples.values, cdf)
}

pub(crate) fn ks_distance_slice<C: Fn(f64) -> f64>(values: &[f64], cdf: C) -> f64 {
    assert!(!values.is_empty(), "KS distance of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        if xa[i] <= xb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
