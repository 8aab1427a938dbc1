//! Complex error function.
//!
//! Small arguments go through the Maclaurin series. Everywhere else the
//! function is assembled from the Faddeeva function,
//! `erf(z) = 1 - exp(-z²) w(iz)` for `Re z ≥ 0`, which stays well scaled on
//! the rays `arg z = ±π/4` where `exp(-z²)` is a pure phase. The Faddeeva
//! function uses the Poppe–Wijers algorithm (power series near the origin,
//! Laplace continued fraction far away, Gautschi's shifted continued fraction
//! in between).

use num_complex::Complex64;

use crate::error::{DitError, Result};

/// 2/√π
const TWO_OVER_SQRT_PI: f64 = 1.128_379_167_095_512_573_9;

/// |z|² below which the Maclaurin series is used.
const SERIES_RADIUS_SQ: f64 = 2.25;

/// Error function of a complex argument.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(DitError::Domain(format!("erf of non-finite argument {z}")));
    }
    Ok(erf(z))
}

/// Unchecked error function; non-finite input yields non-finite output.
pub(crate) fn erf(z: Complex64) -> Complex64 {
    // Reduce to the first quadrant with erf(-z) = -erf(z), erf(z̄) = conj(erf(z)).
    let flip_sign = z.re < 0.0 || (z.re == 0.0 && z.im < 0.0);
    let z1 = if flip_sign { -z } else { z };
    let conj = z1.im < 0.0;
    let zq = if conj { z1.conj() } else { z1 };

    let value = if zq.norm_sqr() < SERIES_RADIUS_SQ {
        erf_series(zq)
    } else {
        // w(iz) with iz = -y + ix in the second quadrant; reflect into the first.
        let w = faddeeva_first_quadrant(zq.im, zq.re).conj();
        let x = zq.re;
        let y = zq.im;
        // exp(-z²) = exp(y² - x²) · exp(-2ixy)
        let e = Complex64::from_polar(((y - x) * (y + x)).exp(), -2.0 * x * y);
        Complex64::new(1.0, 0.0) - e * w
    };

    let value = if conj { value.conj() } else { value };
    if flip_sign {
        -value
    } else {
        value
    }
}

fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..200 {
        let nf = n as f64;
        term *= -z2 / nf;
        let t = term / (2.0 * nf + 1.0);
        sum += t;
        if t.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * TWO_OVER_SQRT_PI
}

/// Faddeeva function `w(x + iy)` for `x ≥ 0`, `y ≥ 0`.
pub(crate) fn faddeeva_first_quadrant(xabs: f64, yabs: f64) -> Complex64 {
    let xs = xabs / 6.3;
    let ys = yabs / 4.4;
    let mut qrho = xs * xs + ys * ys;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    if qrho < 0.085_264 {
        // Power series of w around the origin.
        qrho = (1.0 - 0.85 * ys) * qrho.sqrt();
        let n = (6.0 + 72.0 * qrho).round() as i32;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let fi = i as f64;
            let xaux = (xsum * xquad - ysum * yquad) / fi;
            ysum = (xsum * yquad + ysum * xquad) / fi;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = -TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs) + 1.0;
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        let u2 = daux * yquad.cos();
        let v2 = -daux * yquad.sin();
        return Complex64::new(u1 * u2 - v1 * v2, u1 * v2 + v1 * u2);
    }

    let (h, kapn, nu) = if qrho > 1.0 {
        let rho = qrho.sqrt();
        (0.0, 0, (3.0 + 1442.0 / (26.0 * rho + 77.0)) as i32)
    } else {
        let q = (1.0 - ys) * (1.0 - qrho).sqrt();
        (
            1.88 * q,
            (7.0 + 34.0 * q).round() as i32,
            (16.0 + 26.0 * q).round() as i32,
        )
    };
    let shifted = h > 0.0;
    let h2 = 2.0 * h;
    let mut qlambda = if shifted { h2.powi(kapn) } else { 0.0 };
    let (mut rx, mut ry, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for n in (0..=nu).rev() {
        let np1 = (n + 1) as f64;
        let tx = yabs + h + np1 * rx;
        let ty = xabs - np1 * ry;
        let c = 0.5 / (tx * tx + ty * ty);
        rx = c * tx;
        ry = c * ty;
        if shifted && n <= kapn {
            let tx = qlambda + sx;
            sx = rx * tx - ry * sy;
            sy = ry * tx + rx * sy;
            qlambda /= h2;
        }
    }
    let (mut u, v) = if shifted {
        (TWO_OVER_SQRT_PI * sx, TWO_OVER_SQRT_PI * sy)
    } else {
        (TWO_OVER_SQRT_PI * rx, TWO_OVER_SQRT_PI * ry)
    };
    if yabs == 0.0 {
        u = (-xabs * xabs).exp();
    }
    Complex64::new(u, v)
}
