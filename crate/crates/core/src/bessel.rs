//! Bessel functions of the first kind and the sinc helper.
//!
//! `J_2` is needed for the fringe visibility; full order arrays `J_0..J_n`
//! feed the diffraction-order decomposition of the phase grating. Small
//! arguments use the ascending power series, everything else Miller's
//! downward recurrence with the sum-rule normalization
//! `J_0 + 2 (J_2 + J_4 + ...) = 1`.

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// J_2(x), absolute error below 1e-12 for |x| <= 50 (and well beyond).
pub fn bessel_j2(x: f64) -> f64 {
    let x = x.abs(); // J_2 is even
    if x < 9.0 {
        j2_series(x)
    } else {
        bessel_j_array(x, 2)[2]
    }
}

/// Ascending series for J_2; converges rapidly for moderate arguments.
fn j2_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * q; // (x/2)^2 / (0! 2!)
    let mut sum = term;
    for j in 1..60 {
        term *= -q / (j as f64 * (j + 2) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// J_0(x) .. J_n(x) for x >= 0 by Miller's downward recurrence.
///
/// For x < 0 use J_n(-x) = (-1)^n J_n(x).
pub fn bessel_j_array(x: f64, n: usize) -> Vec<f64> {
    assert!(x >= 0.0, "bessel_j_array takes x >= 0");
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-8 {
        // Leading-order terms avoid underflow churn in the recurrence.
        out[0] = 1.0 - 0.25 * x * x;
        if n >= 1 {
            out[1] = 0.5 * x;
        }
        if n >= 2 {
            out[2] = 0.125 * x * x;
        }
        return out;
    }

    // Start high enough that the downward recurrence has converged to the
    // minimal solution by order n.
    let start = n.max(x.ceil() as usize) + 16 + (12.0 * (x + 1.0).cbrt()) as usize;
    let start = if start % 2 == 0 { start } else { start + 1 };

    let mut jp = 0.0f64; // J_{m+1}
    let mut j = 1e-300f64; // J_m (arbitrary scale)
    let mut norm = 0.0f64; // J_0 + 2 sum_{even m > 0} J_m
    for m in (0..=start).rev() {
        let jm = (2.0 * (m as f64 + 1.0) / x) * j - jp;
        jp = j;
        j = jm;
        if m % 2 == 0 {
            norm += if m == 0 { j } else { 2.0 * j };
        }
        if m <= n {
            out[m] = j;
        }
        if j.abs() > 1e250 {
            // Rescale to avoid overflow; relative values are all that matter.
            let s = 1e-250;
            j *= s;
            jp *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 30-term power series for J_n, the independent check required for J_2.
    fn jn_series(n: usize, x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut fact_n = 1.0;
        for i in 1..=n {
            fact_n *= i as f64;
        }
        let mut term = (0.5 * x).powi(n as i32) / fact_n;
        let mut sum = term;
        for j in 1..30 {
            term *= -q / (j as f64 * (j + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn j2_at_zero_and_one() {
        assert_eq!(bessel_j2(0.0), 0.0);
        // Reference value of J_2(1).
        assert!((bessel_j2(1.0) - 0.114_903_484_931_900_5).abs() < 1e-14);
    }

    #[test]
    fn j2_is_even() {
        for &x in &[0.3, 1.7, 5.5, 20.0] {
            assert_eq!(bessel_j2(x), bessel_j2(-x));
        }
    }

    #[test]
    fn j2_matches_series_oracle() {
        for i in 0..=80 {
            let x = 0.15 * i as f64; // up to 12, where 30 terms still converge
            let want = jn_series(2, x);
            assert!(
                (bessel_j2(x) - want).abs() < 1e-12,
                "x = {x}: {} vs {want}",
                bessel_j2(x)
            );
        }
    }

    #[test]
    fn array_matches_series_for_moderate_orders() {
        for &x in &[0.5, 2.0, 7.3, 11.0] {
            let js = bessel_j_array(x, 12);
            for n in 0..=12 {
                let want = jn_series(n, x);
                assert!(
                    (js[n] - want).abs() < 1e-12,
                    "J_{n}({x}) = {} vs {want}",
                    js[n]
                );
            }
        }
    }

    #[test]
    fn array_satisfies_sum_rule() {
        for &x in &[1.0, 10.0, 30.0, 50.0] {
            let js = bessel_j_array(x, (x as usize) + 40);
            let mut s = js[0] * js[0];
            for j in js.iter().skip(1) {
                s += 2.0 * j * j;
            }
            assert!((s - 1.0).abs() < 1e-12, "x = {x}: sum rule {s}");
        }
    }

    #[test]
    fn recurrence_identity_holds() {
        // J_{n-1}(x) + J_{n+1}(x) = (2n/x) J_n(x)
        for &x in &[3.0, 17.0, 42.0] {
            let js = bessel_j_array(x, 20);
            for n in 1..19 {
                let lhs = js[n - 1] + js[n + 1];
                let rhs = 2.0 * n as f64 / x * js[n];
                assert!((lhs - rhs).abs() < 1e-10, "x={x} n={n}");
            }
        }
    }

    #[test]
    fn large_argument_j2() {
        // Reference values for the recurrence branch.
        assert!((bessel_j2(50.0) - (-0.059_712_800_794_258_82)).abs() < 1e-13);
        assert!((bessel_j2(9.0) - 0.144_847_341_532_504_2).abs() < 1e-13);
    }

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-15);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-15);
        assert!((sinc(1.0) - 1.0f64.sin()).abs() < 1e-15);
    }
}
