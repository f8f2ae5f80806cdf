//! Entire helper functions evaluated without removable singularities.

use num_complex::Complex64;

const SERIES_CUTOFF: f64 = 1e-3;

/// `sin z / z`, equal to 1 at the origin.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        let z2 = z * z;
        // 1 - z²/6 + z⁴/120 - z⁶/5040
        Complex64::new(1.0, 0.0) - z2 / 6.0 * (Complex64::new(1.0, 0.0) - z2 / 20.0 * (Complex64::new(1.0, 0.0) - z2 / 42.0))
    } else {
        z.sin() / z
    }
}

/// `sin(ρx) / ρ`, equal to `x` at `ρ = 0`; even in `ρ`.
pub fn sin_over(rho: Complex64, x: f64) -> Complex64 {
    x * sinc(rho * x)
}

/// `n!` as a float; exact for the sizes used in truncated series.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `ρ∫₀^L w(u) sin ρu du` for the piecewise-linear interpolant of `values`
/// sampled with spacing `step`, `L = step · (len - 1)`.
///
/// Each linear piece is integrated against `sin ρu` exactly, so the error does not
/// grow with `|ρ|` the way the plain trapezoid rule does.
pub fn filon_rho_sine(values: &[Complex64], step: f64, rho: Complex64) -> Complex64 {
    let n = values.len().saturating_sub(1);
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let len = step * n as f64;
    let half = sinc(rho * (0.5 * step));
    let end_left = values[0] * (1.0 - sinc(rho * step));
    let end_right = values[n] * ((rho * (len - 0.5 * step)).cos() * half - (rho * len).cos());
    let mut interior = Complex64::new(0.0, 0.0);
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        interior += v * (rho * (step * i as f64)).sin();
    }
    end_left + end_right + rho * step * half * half * interior
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_continuous_at_cutoff() {
        for &r in &[0.999e-3, 1.001e-3] {
            for &(a, b) in &[(1.0, 0.0), (0.0, 1.0), (0.6, 0.8)] {
                let z = Complex64::new(a * r, b * r);
                let direct = z.sin() / z;
                assert!((sinc(z) - direct).norm() < 1e-15);
            }
        }
        assert_eq!(sinc(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn sin_over_is_even_and_has_limit() {
        let rho = Complex64::new(1.3, -0.4);
        assert!((sin_over(rho, 2.0) - sin_over(-rho, 2.0)).norm() < 1e-15);
        assert!((sin_over(Complex64::new(0.0, 0.0), 2.5) - Complex64::new(2.5, 0.0)).norm() < 1e-15);
    }
}
