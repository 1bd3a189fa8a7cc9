//! Adaptive Dormand–Prince 5(4) integration for small real systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(x, y)` from `x0` to `x1`, returning the accepted
/// step endpoints including both ends.
pub fn dopri5<F>(f: F, x0: f64, y0: &[f64], x1: f64, tol: f64) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let dir = (x1 - x0).signum();
    let mut x = x0;
    let mut y = y0.to_vec();
    let mut h = dir * ((x1 - x0).abs() * 1e-3).max(1e-6);
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut out = vec![(x, y.clone())];
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::ResourceLimit("ODE step budget exhausted".into()));
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        f(x, &y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                tmp[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            f(x + C[s] * h, &tmp, &mut k[s]);
        }
        let mut err = 0f64;
        let mut y5 = vec![0.0; n];
        for i in 0..n {
            let hi: f64 = (0..7).map(|s| B5[s] * k[s][i]).sum();
            let lo: f64 = (0..7).map(|s| B4[s] * k[s][i]).sum();
            y5[i] = y[i] + h * hi;
            let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
            err = err.max((h * (hi - lo)).abs() / sc);
        }
        if err <= 1.0 || h.abs() < 1e-14 {
            x += h;
            y = y5;
            out.push((x, y.clone()));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(out)
}

/// First sign change of component `idx` on `(x0, x1]`, refined by bisection
/// on re-integrations from the bracketing step.
pub fn first_zero<F>(f: F, x0: f64, y0: &[f64], x1: f64, idx: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64, &[f64], &mut [f64]) + Copy,
{
    let path = dopri5(f, x0, y0, x1, tol)?;
    let pos = path
        .windows(2)
        .position(|w| w[0].1[idx].signum() != w[1].1[idx].signum() && w[1].1[idx] != 0.0);
    let Some(p) = pos else {
        let trace: Vec<String> = path
            .iter()
            .step_by((path.len() / 8).max(1))
            .map(|(x, y)| format!("{x:.3}:{:.3e}", y[idx]))
            .collect();
        return Err(Error::Bracketing(format!(
            "no sign change on [{x0}, {x1}]; scan {}",
            trace.join(" ")
        )));
    };
    let (xa, ya) = path[p].clone();
    let (mut lo, mut hi) = (xa, path[p + 1].0);
    let sign_a = ya[idx].signum();
    while hi - lo > 1e-15 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let seg = dopri5(f, xa, &ya, mid, tol)?;
        let v = seg.last().expect("nonempty").1[idx];
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == sign_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let path = dopri5(|_, y, d| {
            d[0] = y[1];
            d[1] = -y[0];
        }, 0.0, &[0.0, 1.0], 10.0, 1e-12)
        .unwrap();
        let (x, y) = path.last().unwrap();
        assert_eq!(*x, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn cosine_zero() {
        let z = first_zero(|_, y, d| {
            d[0] = y[1];
            d[1] = -y[0];
        }, 0.0, &[1.0, 0.0], 3.0, 0, 1e-14)
        .unwrap();
        assert!((z - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn missing_bracket_reports_scan() {
        let err = first_zero(|_, _, d| d[0] = 1.0, 0.0, &[1.0], 1.0, 0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Bracketing(_)));
    }
}
