//! Convolution algebra on `[0, π]`.
//!
//! `(a * b)(x) = ∫₀ˣ a(x - t) b(t) dt` is discretised by the trapezoid product rule,
//! which is symmetric in its arguments and vanishes at `x = 0`. Everything in the
//! transformation-operator machinery is built from convolution powers of one
//! function `N`, which is tied to the memory kernel `M` by
//! `M(x) = 2N(x) - ∫₀ˣ (N * N)(t) dt`.

mod kernels;

pub use kernels::{
    kernels_at_pi, transformation_kernel, PiSlices, RepresentationKernels, RepresentationValues,
    TriangularKernel,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, SampledFunction};

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
pub const DEFAULT_NU_CAP: usize = 200;

/// Truncation rule for the `Σ_ν … N^{*ν}` series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Stop once `π^ν/ν! · max|N^{*ν}|` drops below this.
    pub tol: f64,
    /// Hard cap on the number of powers.
    pub nu_cap: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SERIES_TOL,
            nu_cap: DEFAULT_NU_CAP,
        }
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Value of `a * b` at node `i` by the trapezoid product rule.
fn conv_at(a: &[Complex64], b: &[Complex64], i: usize, step: f64) -> Complex64 {
    if i == 0 {
        return zero();
    }
    let mut acc = 0.5 * (a[i] * b[0] + a[0] * b[i]);
    for j in 1..i {
        acc += a[i - j] * b[j];
    }
    acc * step
}

pub fn conv(a: &SampledFunction, b: &SampledFunction) -> Result<SampledFunction> {
    a.grid().check_same(&b.grid())?;
    let step = a.grid().step();
    let (av, bv) = (a.values(), b.values());
    let values = (0..av.len()).map(|i| conv_at(av, bv, i, step)).collect();
    Ok(SampledFunction::from_values_unchecked(a.grid(), values))
}

/// `N^{*1} = N`, `N^{*(ν+1)} = N * N^{*ν}`.
#[derive(Debug, Clone)]
pub struct ConvPowerStack {
    powers: Vec<SampledFunction>,
}

impl ConvPowerStack {
    /// Powers `1..=nu_max`.
    pub fn new(base: &SampledFunction, nu_max: usize) -> Result<Self> {
        if nu_max < 1 {
            return Err(Error::InvalidArgument("nu_max must be >= 1".into()));
        }
        let mut powers = vec![base.clone()];
        while powers.len() < nu_max {
            let next = conv(base, powers.last().unwrap())?;
            powers.push(next);
        }
        Ok(Self { powers })
    }

    /// Powers up to the first `ν` whose term bound `π^ν/ν! · max|N^{*ν}|` is below
    /// `control.tol`, or `control.nu_cap`.
    pub fn adaptive(base: &SampledFunction, control: SeriesControl) -> Result<Self> {
        if control.nu_cap < 1 {
            return Err(Error::InvalidArgument("nu_cap must be >= 1".into()));
        }
        let mut powers = vec![base.clone()];
        let mut weight = PI;
        loop {
            let nu = powers.len();
            let bound = weight * powers[nu - 1].max_abs();
            if bound < control.tol || nu >= control.nu_cap {
                break;
            }
            let next = conv(base, &powers[nu - 1])?;
            powers.push(next);
            weight *= PI / (nu + 1) as f64;
        }
        Ok(Self { powers })
    }

    pub fn base(&self) -> &SampledFunction {
        &self.powers[0]
    }

    pub fn nu_max(&self) -> usize {
        self.powers.len()
    }

    /// `N^{*ν}` for `ν ≥ 1`.
    pub fn power(&self, nu: usize) -> &SampledFunction {
        &self.powers[nu - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &SampledFunction)> {
        self.powers.iter().enumerate().map(|(i, p)| (i + 1, p))
    }

    /// Bound on the first omitted term, `π^{ν+1}/(ν+1)! · max|N|·max|N^{*ν}|·π`.
    pub fn tail_bound(&self) -> f64 {
        let nu = self.nu_max();
        let next_max = self.base().max_abs() * self.power(nu).max_abs() * PI;
        let mut weight = 1.0;
        for k in 1..=nu + 1 {
            weight *= PI / k as f64;
        }
        weight * next_max
    }
}

pub fn conv_powers(base: &SampledFunction, nu_max: usize) -> Result<ConvPowerStack> {
    ConvPowerStack::new(base, nu_max)
}

/// `M(x) = 2N(x) - ∫₀ˣ (N * N)(t) dt`.
pub fn n_to_m(n: &SampledFunction) -> SampledFunction {
    let step = n.grid().step();
    let sq = conv(n, n).expect("same grid");
    let integral = cumulative_trapezoid(sq.values(), step);
    let values = n
        .values()
        .iter()
        .zip(&integral)
        .map(|(v, i)| 2.0 * v - i)
        .collect();
    SampledFunction::from_values_unchecked(n.grid(), values)
}

/// Inverse of [`n_to_m`], marching in `x`.
///
/// The discrete relation at node `i` is affine in `N(x_i)` (it enters the double
/// integral only through the end weights, with coefficient `step²·N(0)/2`), so
/// each node is solved exactly and `n_to_m(m_to_n(M))` reproduces `M` to rounding.
pub fn m_to_n(m: &SampledFunction) -> Result<SampledFunction> {
    let grid = m.grid();
    let step = grid.step();
    let mv = m.values();
    let len = mv.len();
    let mut nv = vec![zero(); len];
    nv[0] = mv[0] / 2.0;
    let mut sq_prev = zero();
    let mut integral_prev = zero();
    for i in 1..len {
        let mut s = zero();
        for j in 1..i {
            s += nv[i - j] * nv[j];
        }
        let denom = 2.0 - 0.5 * step * step * nv[0];
        if denom.norm() < 1e-300 {
            return Err(Error::SingularStep { index: i });
        }
        let rhs = mv[i] + integral_prev + 0.5 * step * sq_prev + 0.5 * step * step * s;
        nv[i] = rhs / denom;
        let sq = step * (nv[0] * nv[i] + s);
        integral_prev += 0.5 * step * (sq_prev + sq);
        sq_prev = sq;
    }
    if let Some(index) = nv.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "N recovered from M",
            index,
        });
    }
    Ok(SampledFunction::from_values_unchecked(grid, nv))
}
