use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest Laguerre degree we evaluate. Past this the values at moderate
/// arguments span enough orders of magnitude that the kernel loses all
/// relative accuracy in double precision.
pub const MAX_LAGUERRE_DEGREE: u32 = 60;

/// Below this |√μ z| the sine kernel is evaluated by its Taylor series.
const SINC_SERIES_CUTOFF: f64 = 1e-6;

/// Laguerre polynomial `L_ℓ(t)` by the three-term recurrence
/// `(n+1) L_{n+1} = (2n+1-t) L_n - n L_{n-1}`.
pub fn laguerre_eval(degree: u32, t: f64) -> Result<f64> {
    if degree > MAX_LAGUERRE_DEGREE {
        return Err(Error::domain(format!(
            "Laguerre degree {degree} exceeds supported maximum {MAX_LAGUERRE_DEGREE}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("Laguerre argument must be >= 0, got {t}")));
    }
    let mut prev = 1.0;
    if degree == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 - t;
    for n in 1..degree {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - t) * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// The sine kernel `k_μ(z) = sin(√μ z)/(π z)`, with value `√μ/π` at zero.
pub fn sine_kernel_eval(mu: f64, z: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("sine kernel needs mu > 0, got {mu}")));
    }
    Ok(sine_kernel(mu.sqrt(), z))
}

/// Sine kernel for a known `√μ`; no validation.
#[inline]
pub(crate) fn sine_kernel(sqrt_mu: f64, z: f64) -> f64 {
    let x = sqrt_mu * z;
    if x.abs() < SINC_SERIES_CUTOFF {
        let x2 = x * x;
        sqrt_mu / PI * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        x.sin() / (PI * z)
    }
}

/// Integral kernel of the ℓ-th Landau level projection in the plane.
pub fn landau_kernel_eval(b: f64, level: u32, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
    if !(b > 0.0) {
        return Err(Error::domain(format!("magnetic field must be > 0, got {b}")));
    }
    let dx = x[0] - y[0];
    let dy = x[1] - y[1];
    let r2 = dx * dx + dy * dy;
    let lag = laguerre_eval(level, b * r2 / 2.0)?;
    let wedge = x[0] * y[1] - x[1] * y[0];
    let modulus = b / (2.0 * PI) * lag * (-b * r2 / 4.0).exp();
    Ok(Complex64::from_polar(1.0, b / 2.0 * wedge) * modulus)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Double-double arithmetic for an oracle that survives the cancellation
    // in the alternating binomial series.
    #[derive(Clone, Copy)]
    struct Dd(f64, f64);

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn dd_add(x: Dd, y: Dd) -> Dd {
        let s = two_sum(x.0, y.0);
        let e = s.1 + x.1 + y.1;
        two_sum(s.0, e)
    }

    fn dd_mul_f(x: Dd, y: f64) -> Dd {
        let p = x.0 * y;
        let e = x.0.mul_add(y, -p);
        two_sum(p, e + x.1 * y)
    }

    fn dd_div_f(x: Dd, y: f64) -> Dd {
        let q = x.0 / y;
        let r = dd_add(x, dd_mul_f(Dd(q, 0.0), -y));
        two_sum(q, r.0 / y)
    }

    fn laguerre_direct(l: u32, t: f64) -> f64 {
        // coefficients (-1)^j C(l, l-j) / j!, evaluated by Horner in dd
        let mut coeffs = Vec::new();
        let mut c = Dd(1.0, 0.0);
        for j in 0..=l {
            if j > 0 {
                c = dd_div_f(dd_mul_f(c, -((l - j + 1) as f64)), (j * j) as f64);
            }
            coeffs.push(c);
        }
        let mut acc = Dd(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = dd_add(dd_mul_f(acc, t), *c);
        }
        acc.0 + acc.1
    }

    #[test]
    fn laguerre_low_degrees() {
        assert_eq!(laguerre_eval(0, 7.3).unwrap(), 1.0);
        assert_eq!(laguerre_eval(1, 2.0).unwrap(), -1.0);
        let direct = laguerre_direct(5, 1.5);
        assert!((laguerre_eval(5, 1.5).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn laguerre_matches_binomial_sum() {
        for l in 0..=20 {
            for k in 1..=100 {
                let t = 0.1 * k as f64;
                let rec = laguerre_eval(l, t).unwrap();
                let dir = laguerre_direct(l, t);
                let scale = dir.abs().max(1.0);
                assert!((rec - dir).abs() <= 1e-9 * scale, "l={l} t={t}: {rec} vs {dir}");
            }
        }
    }

    #[test]
    fn laguerre_degree_cap() {
        assert!(laguerre_eval(60, 1.0).is_ok());
        assert!(matches!(laguerre_eval(61, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sine_kernel_values() {
        assert!((sine_kernel_eval(4.0, 0.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!(sine_kernel_eval(1.0, PI).unwrap().abs() < 1e-16);
        let v = sine_kernel_eval(1.0, PI / 2.0).unwrap();
        assert!((v - 2.0 / (PI * PI)).abs() < 1e-15);
        assert!(sine_kernel_eval(0.0, 1.0).is_err());
        assert!(sine_kernel_eval(-1.0, 1.0).is_err());
    }

    #[test]
    fn sine_kernel_continuous_at_series_cutoff() {
        let mu: f64 = 2.0;
        let z = SINC_SERIES_CUTOFF / mu.sqrt();
        let below = sine_kernel(mu.sqrt(), z * (1.0 - 1e-9));
        let above = sine_kernel(mu.sqrt(), z * (1.0 + 1e-9));
        assert!((below - above).abs() < 1e-14);
    }

    #[test]
    fn landau_kernel_diagonal_and_modulus() {
        let v = landau_kernel_eval(3.0, 2, [0.3, -1.2], [0.3, -1.2]).unwrap();
        assert!((v.re - 3.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);

        let b = 1.7;
        let r: f64 = 0.8;
        let v = landau_kernel_eval(b, 0, [1.0, 2.0], [1.0 + r, 2.0]).unwrap();
        let expected = b / (2.0 * PI) * (-b * r * r / 4.0).exp();
        assert!((v.norm() - expected).abs() < 1e-14);
    }

    #[test]
    fn landau_kernel_hermitian() {
        let pts = [([0.1, 0.4], [-1.0, 0.7]), ([2.0, -3.0], [0.5, 0.5])];
        for (x, y) in pts {
            for level in 0..4 {
                let a = landau_kernel_eval(2.3, level, x, y).unwrap();
                let b = landau_kernel_eval(2.3, level, y, x).unwrap();
                assert!((a - b.conj()).norm() < 1e-15);
            }
        }
    }
}
