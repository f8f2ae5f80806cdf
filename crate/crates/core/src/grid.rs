//! Uniform grids on `[0, π]`, sampled complex functions and trapezoid quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID_N: usize = 512;

/// Uniform grid `x_i = iπ/n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { n })
    }

    /// Number of intervals.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.n {
            PI
        } else {
            i as f64 * PI / self.n as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.point(i))
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Grid with `n / factor` intervals whose nodes are every `factor`-th node of this one.
    pub fn coarsen(&self, factor: usize) -> Result<Grid> {
        if factor == 0 || !self.n.is_multiple_of(factor) {
            return Err(Error::InvalidArgument(format!(
                "cannot coarsen grid n = {} by factor {}",
                self.n, factor
            )));
        }
        Grid::new(self.n / factor)
    }
}

/// Complex samples of a function at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "sampled function",
                index,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Internal constructor for values produced by our own finite arithmetic.
    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .grid
            .points()
            .zip(&self.values)
            .map(|(x, &v)| f(x, v))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// `g(x) = f(π - x)`; index reversal on the symmetric grid.
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Every `factor`-th sample, living on the coarsened grid.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Self { grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self - other` over nodes `0..=upto`.
    pub fn max_diff_upto(&self, other: &SampledFunction, upto: usize) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        check_index(upto, self.grid)?;
        Ok(self.values[..=upto]
            .iter()
            .zip(&other.values[..=upto])
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_diff(&self, other: &SampledFunction) -> Result<f64> {
        self.max_diff_upto(other, self.grid.n)
    }

    /// Trapezoid `L₂` norm over `[0, x_upto]`.
    pub fn l2_norm_upto(&self, upto: usize) -> Result<f64> {
        let sq = self.map(|_, v| Complex64::new(v.norm_sqr(), 0.0));
        Ok(quad_trapezoid(&sq, upto)?.re.max(0.0).sqrt())
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_upto(self.grid.n).unwrap_or(f64::NAN)
    }

    /// Trapezoid `L₂` distance over `[0, x_upto]`.
    pub fn l2_diff_upto(&self, other: &SampledFunction, upto: usize) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let diff = SampledFunction::from_values_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        );
        diff.l2_norm_upto(upto)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| c * v)
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_values_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }
}

fn check_index(upto: usize, grid: Grid) -> Result<()> {
    if upto > grid.n {
        return Err(Error::IndexOutOfRange {
            index: upto,
            n: grid.n,
        });
    }
    Ok(())
}

/// Composite trapezoid approximation of `∫₀^{x_upto} f`.
pub fn quad_trapezoid(f: &SampledFunction, upto: usize) -> Result<Complex64> {
    check_index(upto, f.grid)?;
    Ok(trapezoid_slice(f.values(), f.grid.step(), upto))
}

pub(crate) fn trapezoid_slice(values: &[Complex64], step: f64, upto: usize) -> Complex64 {
    if upto == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let inner: Complex64 = values[1..upto].iter().sum();
    (inner + 0.5 * (values[0] + values[upto])) * step
}

/// Running trapezoid integrals `∫₀^{x_i} f` for every node.
pub fn cumulative_trapezoid(values: &[Complex64], step: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = Complex64::new(0.0, 0.0);
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * step * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_endpoints_and_step() {
        let g = Grid::new(8).unwrap();
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(8), PI);
        assert!((g.step() * 8.0 - PI).abs() < 1e-15);
        let pts: Vec<f64> = g.points().collect();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(Grid::new(0), Err(Error::EmptyGrid)));
    }

    #[test]
    fn quad_of_simple_functions() {
        let g = Grid::new(16).unwrap();
        let zero = SampledFunction::zeros(g);
        assert_eq!(quad_trapezoid(&zero, 7).unwrap(), c(0.0));
        let one = SampledFunction::constant(g, c(1.0));
        assert!((quad_trapezoid(&one, 16).unwrap() - c(PI)).norm() < 1e-14);
        let x = SampledFunction::from_real_fn(g, |x| x);
        assert!((quad_trapezoid(&x, 16).unwrap() - c(PI * PI / 2.0)).norm() < 1e-13);
    }

    #[test]
    fn quad_rejects_out_of_range() {
        let g = Grid::new(4).unwrap();
        let f = SampledFunction::zeros(g);
        assert!(matches!(
            quad_trapezoid(&f, 5),
            Err(Error::IndexOutOfRange { index: 5, n: 4 })
        ));
    }

    #[test]
    fn quad_error_is_second_order() {
        let exact = PI.powi(3) / 3.0;
        let err = |n: usize| {
            let g = Grid::new(n).unwrap();
            let f = SampledFunction::from_real_fn(g, |x| x * x);
            (quad_trapezoid(&f, n).unwrap().re - exact).abs()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn sampled_function_rejects_nan_and_bad_length() {
        let g = Grid::new(2).unwrap();
        assert!(matches!(
            SampledFunction::new(g, vec![c(0.0), c(f64::NAN), c(1.0)]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            SampledFunction::new(g, vec![c(0.0)]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn cumulative_matches_quad() {
        let g = Grid::new(10).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| x.sin());
        let cum = cumulative_trapezoid(f.values(), g.step());
        for (i, c) in cum.iter().enumerate() {
            assert!((c - quad_trapezoid(&f, i).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn subsample_and_reflect() {
        let g = Grid::new(8).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| x);
        let coarse = f.subsample(2).unwrap();
        assert_eq!(coarse.grid().n(), 4);
        assert_eq!(coarse.at(4), c(PI));
        let r = f.reflect();
        assert!((r.at(0) - c(PI)).norm() < 1e-15);
        assert!(f.subsample(3).is_err());
    }
}
