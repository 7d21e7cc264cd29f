//! Adaptive Dormand-Prince 5(4) integrator.
//!
//! Used as the independent mechanics oracle: closed-form rotor averages are
//! validated against direct time integration of Hamilton's equations. Kept
//! deliberately small; no dense output, no events.

use crate::error::{Error, Result};

// Dormand-Prince coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Embedded 4th-order weights.
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` (t1 > t0), returning y(t1).
pub fn dopri5<const N: usize, F>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: &[f64; N],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    if !(t1 > t0) {
        return Err(Error::domain("dopri5", format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let mut t = t0;
    let mut y = *y0;
    let mut h = (t1 - t0) / 100.0;
    let mut k1 = [0.0; N];
    f(t, &y, &mut k1);

    let mut steps = 0usize;
    const MAX_STEPS: usize = 50_000_000;

    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k2 = [0.0; N];
        let mut k3 = [0.0; N];
        let mut k4 = [0.0; N];
        let mut k5 = [0.0; N];
        let mut k6 = [0.0; N];
        let mut k7 = [0.0; N];
        let mut yt = [0.0; N];

        for i in 0..N {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        f(t + h / 5.0, &yt, &mut k2);
        for i in 0..N {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + 3.0 * h / 10.0, &yt, &mut k3);
        for i in 0..N {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + 4.0 * h / 5.0, &yt, &mut k4);
        for i in 0..N {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + 8.0 * h / 9.0, &yt, &mut k5);
        for i in 0..N {
            yt[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &yt, &mut k6);
        let mut y5 = [0.0; N];
        for i in 0..N {
            y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &y5, &mut k7);

        // Error estimate: difference between 5th- and 4th-order solutions.
        let mut err = 0.0f64;
        for i in 0..N {
            let y4 = y[i]
                + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4) / scale;
            err += e * e;
        }
        err = (err / N as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain("dopri5", "step size underflow"));
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::domain("dopri5", "step budget exhausted"));
        }
    }
    Ok(y)
}
