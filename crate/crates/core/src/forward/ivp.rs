//! Marching solution of `-y'' + ∫₀ˣ M(x-t) y'(t) dt = λy` as an initial-value problem.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::spectrum::SpectralPoint;

#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub grid: Grid,
    pub y: SampledFunction,
    pub yprime: SampledFunction,
    pub point: SpectralPoint,
}

impl IvpSolution {
    pub fn end(&self) -> (Complex64, Complex64) {
        let n = self.grid.n();
        (self.y.at(n), self.yprime.at(n))
    }
}

/// Implicit trapezoid marching for the first-order system `y' = z`,
/// `z' = ∫₀ˣ M(x-t) z(t) dt - λy`.
///
/// The memory integral uses the trapezoid product rule; its history part is
/// accumulated once per node, the new-node term enters the step equations
/// linearly. Second order in the step for smooth `M`.
pub fn solve_ivp(
    m: &SampledFunction,
    y0: Complex64,
    y0prime: Complex64,
    sp: SpectralPoint,
) -> Result<IvpSolution> {
    let grid = m.grid();
    let (y, z) = march(m.values(), grid.step(), y0, y0prime, sp.lambda)?;
    Ok(IvpSolution {
        grid,
        y: SampledFunction::from_values_unchecked(grid, y),
        yprime: SampledFunction::from_values_unchecked(grid, z),
        point: sp,
    })
}

pub(crate) fn march(
    m: &[Complex64],
    step: f64,
    y0: Complex64,
    z0: Complex64,
    lambda: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let len = m.len();
    let mut y = Vec::with_capacity(len);
    let mut z = Vec::with_capacity(len);
    y.push(y0);
    z.push(z0);
    let half = 0.5 * step;
    let denom = 1.0 + (lambda - m[0]) * step * step / 4.0;
    if denom.norm() < 1e-14 {
        return Err(Error::SingularStep { index: 1 });
    }
    // F_i = -λ y_i + memory_i, memory_0 = 0
    let mut force = -lambda * y0;
    for i in 0..len - 1 {
        let next = i + 1;
        let mut history = 0.5 * m[next] * z[0];
        for j in 1..next {
            history += m[next - j] * z[j];
        }
        history *= step;
        let rhs = z[i] + half * force + half * (-lambda * (y[i] + half * z[i]) + history);
        let z_next = rhs / denom;
        let y_next = y[i] + half * (z[i] + z_next);
        force = -lambda * y_next + history + half * m[0] * z_next;
        if !(z_next.is_finite() && y_next.is_finite()) {
            return Err(Error::SingularStep { index: next });
        }
        y.push(y_next);
        z.push(z_next);
    }
    Ok((y, z))
}
