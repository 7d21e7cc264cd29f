//! Wigner small-d matrices and the quadrature oracle for Q_lmk.
//!
//! The oracle evaluates <lmk| sin^2(theta) |lmk> directly from the
//! configuration-space wavefunction, which for the symmetric top is
//! proportional to d^l_{mk}(theta) with the normalization
//! `(2l+1)/2 * Integral_0^pi d(theta) sin(theta) [d^l_mk(theta)]^2 = 1`.
//! It is an independent check on the algebraic `q_lmk` closed form and is
//! only meant for small l, where the explicit factorial sum is
//! well-conditioned.

use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::quantum::RotQuantumNumbers;

static FACTORIALS: LazyLock<[f64; 35]> = LazyLock::new(|| {
    let mut f = [1.0f64; 35];
    for n in 1..35 {
        f[n] = f[n - 1] * n as f64;
    }
    f
});

fn fact(n: i32) -> f64 {
    FACTORIALS[n as usize]
}

/// Wigner small-d matrix element d^l_{mk}(theta) by the explicit factorial
/// sum (z-y'-z'' Euler convention; real-valued).
pub fn wigner_small_d(l: u32, m: i32, k: i32, theta: f64) -> f64 {
    let li = l as i32;
    assert!(m.abs() <= li && k.abs() <= li, "invalid (l, m, k)");
    assert!(li <= 16, "explicit factorial sum limited to l <= 16");
    let prefactor =
        (fact(li + m) * fact(li - m) * fact(li + k) * fact(li - k)).sqrt();
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let s_lo = 0.max(k - m);
    let s_hi = (li + k).min(li - m);
    let mut sum = 0.0;
    for j in s_lo..=s_hi {
        let sign = if (m - k + j) % 2 == 0 { 1.0 } else { -1.0 };
        let denom = fact(li + k - j) * fact(j) * fact(m - k + j) * fact(li - m - j);
        let cpow = 2 * li - 2 * j + k - m;
        let spow = m - k + 2 * j;
        sum += sign / denom * c.powi(cpow) * s.powi(spow);
    }
    prefactor * sum
}

/// Quadrature oracle for Q_lmk: integrates sin^2(theta) against the
/// normalized orientational density of |lmk>. Restricted to l <= 8.
pub fn q_lmk_oracle(q: &RotQuantumNumbers) -> Result<f64> {
    if q.l > 8 {
        return Err(Error::input(
            "q_lmk_oracle",
            format!("explicit Wigner-d sum limited to l <= 8, got l = {}", q.l),
        ));
    }
    let norm = (2.0 * q.l as f64 + 1.0) / 2.0;
    let integrand = |theta: f64| {
        let d = wigner_small_d(q.l, q.m, q.k, theta);
        let s = theta.sin();
        norm * s * s * s * d * d
    };
    let res = quadrature::integrate(integrand, 0.0, std::f64::consts::PI, 1e-12, 1e-12)?;
    if res.abs_error > 1e-11 {
        return Err(Error::QuadratureNonConvergence {
            estimate: res.abs_error,
            tolerance: 1e-12,
        });
    }
    Ok(res.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::q_lmk;

    #[test]
    fn d1_matrix_reference() {
        let th = 0.7;
        assert!((wigner_small_d(1, 0, 0, th) - th.cos()).abs() < 1e-14);
        assert!((wigner_small_d(1, 1, 0, th) + th.sin() / 2f64.sqrt()).abs() < 1e-14);
        assert!((wigner_small_d(1, 1, 1, th) - 0.5 * (1.0 + th.cos())).abs() < 1e-14);
        assert!((wigner_small_d(1, 1, -1, th) - 0.5 * (1.0 - th.cos())).abs() < 1e-14);
    }

    #[test]
    fn d_matrix_symmetry() {
        // d^l_{mk} = (-1)^{m-k} d^l_{km}
        for l in 0..=5u32 {
            for m in -(l as i32)..=(l as i32) {
                for k in -(l as i32)..=(l as i32) {
                    let th = 1.234;
                    let a = wigner_small_d(l, m, k, th);
                    let b = wigner_small_d(l, k, m, th);
                    let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((a - sign * b).abs() < 1e-12, "(l,m,k)=({l},{m},{k})");
                }
            }
        }
    }

    #[test]
    fn d_matrix_orthonormality() {
        for l in 0..=6u32 {
            for m in 0..=(l as i32) {
                for k in 0..=(l as i32) {
                    let norm = (2.0 * l as f64 + 1.0) / 2.0;
                    let q = quadrature::integrate(
                        |th| {
                            let d = wigner_small_d(l, m, k, th);
                            norm * th.sin() * d * d
                        },
                        0.0,
                        std::f64::consts::PI,
                        1e-12,
                        1e-12,
                    )
                    .unwrap();
                    assert!((q.value - 1.0).abs() < 1e-11, "(l,m,k)=({l},{m},{k})");
                }
            }
        }
    }

    #[test]
    fn oracle_reference_values() {
        let q000 = q_lmk_oracle(&RotQuantumNumbers::new(0, 0, 0).unwrap()).unwrap();
        assert!((q000 - 2.0 / 3.0).abs() < 1e-12);
        let q100 = q_lmk_oracle(&RotQuantumNumbers::new(1, 0, 0).unwrap()).unwrap();
        assert!((q100 - 0.4).abs() < 1e-12);
        let q111 = q_lmk_oracle(&RotQuantumNumbers::new(1, 1, 1).unwrap()).unwrap();
        assert!((q111 - 0.6).abs() < 1e-12);
        // linear-rotor state (k = 0): |Y_11|^2 against sin^2 gives 4/5
        let q110 = q_lmk_oracle(&RotQuantumNumbers::new(1, 1, 0).unwrap()).unwrap();
        assert!((q110 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form_to_l5() {
        for l in 0..=5u32 {
            for m in 0..=(l as i32) {
                for k in 0..=(l as i32) {
                    let qn = RotQuantumNumbers::new(l, m, k).unwrap();
                    let oracle = q_lmk_oracle(&qn).unwrap();
                    let closed = q_lmk(l, m, k);
                    assert!(
                        (oracle - closed).abs() < 1e-10,
                        "(l,m,k)=({l},{m},{k}): {oracle} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_rejects_large_l() {
        let q = RotQuantumNumbers::new(9, 0, 0).unwrap();
        assert!(q_lmk_oracle(&q).is_err());
    }
}
