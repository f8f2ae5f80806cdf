//! Characteristic function `Δ(λ)` along two independent routes.
//!
//! The direct route marches the equation with `φ(0) = 1`, `φ'(0) = h` and reads
//! `Δ = φ'(π) + Hφ(π)`. The model route builds `α` and `w` from the kernel slices
//! at `x = π` and evaluates `Δ = -ρ sin ρπ + α + ρ∫₀^π w(x) sin ρx dx`.

use num_complex::Complex64;

use super::ivp::{march, solve_ivp};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::special::filon_rho_sine;
use crate::spectrum::{BoundaryCoefficients, SpectralPoint};
use crate::volterra::{m_to_n, ConvPowerStack, PiSlices, SeriesControl};

/// A way of evaluating `Δ(λ)`.
pub trait CharacteristicFunction: Send + Sync {
    fn name(&self) -> &'static str;

    fn eval(&self, sp: SpectralPoint) -> Result<Complex64>;

    fn eval_lambda(&self, lambda: Complex64) -> Result<Complex64> {
        self.eval(SpectralPoint::new(lambda))
    }
}

/// `-ρ sin ρπ`, the characteristic function of the unperturbed problem.
pub fn unperturbed_char_fn(sp: SpectralPoint) -> Complex64 {
    -sp.rho * (sp.rho * std::f64::consts::PI).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvpScheme {
    /// Plain implicit trapezoid marching, second order.
    Trapezoid,
    /// Trapezoid on the grid and on every second node, combined as `(4Δ_h - Δ_2h)/3`.
    Richardson,
}

/// `Δ(λ) = V(φ)` from the marching solver.
#[derive(Debug, Clone)]
pub struct DirectCharFn {
    m: SampledFunction,
    coarse_m: Option<SampledFunction>,
    bc: BoundaryCoefficients,
    scheme: IvpScheme,
}

impl DirectCharFn {
    pub fn new(m: SampledFunction, bc: BoundaryCoefficients, scheme: IvpScheme) -> Self {
        let coarse_m = match scheme {
            IvpScheme::Richardson => m.subsample(2).ok(),
            IvpScheme::Trapezoid => None,
        };
        Self {
            m,
            coarse_m,
            bc,
            scheme,
        }
    }

    pub fn scheme(&self) -> IvpScheme {
        self.scheme
    }

    fn v_form(&self, m: &SampledFunction, sp: SpectralPoint) -> Result<Complex64> {
        let (y, z) = march(m.values(), m.grid().step(), Complex64::new(1.0, 0.0), self.bc.h, sp.lambda)?;
        let n = y.len() - 1;
        Ok(z[n] + self.bc.big_h * y[n])
    }

    /// `Δ = C'(π) + hS'(π) + HC(π) + hHS(π)` from separate `C` and `S` solves.
    pub fn decomposed(&self, sp: SpectralPoint) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (c, c_prime) = solve_ivp(&self.m, one, zero, sp)?.end();
        let (s, s_prime) = solve_ivp(&self.m, zero, one, sp)?.end();
        let BoundaryCoefficients { h, big_h } = self.bc;
        Ok(c_prime + h * s_prime + big_h * c + h * big_h * s)
    }
}

impl CharacteristicFunction for DirectCharFn {
    fn name(&self) -> &'static str {
        match self.scheme {
            IvpScheme::Trapezoid => "direct",
            IvpScheme::Richardson => "direct-richardson",
        }
    }

    fn eval(&self, sp: SpectralPoint) -> Result<Complex64> {
        let fine = self.v_form(&self.m, sp)?;
        match (&self.scheme, &self.coarse_m) {
            (IvpScheme::Richardson, Some(coarse)) => {
                let coarse = self.v_form(coarse, sp)?;
                Ok((4.0 * fine - coarse) / 3.0)
            }
            _ => Ok(fine),
        }
    }
}

/// `Δ(λ)` for `L(M, h, H)` by the trapezoid marching solver.
pub fn char_fn_direct(m: &SampledFunction, bc: BoundaryCoefficients, sp: SpectralPoint) -> Result<Complex64> {
    DirectCharFn::new(m.clone(), bc, IvpScheme::Trapezoid).eval(sp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelProvenance {
    FromKernel,
    FromSpectrum,
}

/// The pair `(α, w)` with `Δ(λ) = -ρ sin ρπ + α + ρ∫₀^π w(x) sin ρx dx`.
#[derive(Debug, Clone)]
pub struct CharFnModel {
    pub alpha: Complex64,
    pub w: SampledFunction,
    pub provenance: ModelProvenance,
}

impl CharFnModel {
    pub fn new(alpha: Complex64, w: SampledFunction, provenance: ModelProvenance) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite { what: "alpha", index: 0 });
        }
        Ok(Self { alpha, w, provenance })
    }

    /// Model for `L(M, h, H)` given the memory kernel `M`.
    pub fn from_memory_kernel(m: &SampledFunction, bc: BoundaryCoefficients, control: SeriesControl) -> Result<Self> {
        char_fn_model_from_kernel(&m_to_n(m)?, bc, control)
    }
}

impl CharacteristicFunction for CharFnModel {
    fn name(&self) -> &'static str {
        "model"
    }

    fn eval(&self, sp: SpectralPoint) -> Result<Complex64> {
        Ok(char_fn_from_model(self, sp))
    }
}

/// `α = hR(π,π) + H + hHK(π,π)` and `-w(π-x) = P(π,x) + hR(π,x) + HQ(π,x) + hHK(π,x)`.
pub fn char_fn_model_from_kernel(
    n: &SampledFunction,
    bc: BoundaryCoefficients,
    control: SeriesControl,
) -> Result<CharFnModel> {
    let stack = ConvPowerStack::adaptive(n, control)?;
    Ok(model_from_slices(&PiSlices::from_stack(&stack), bc))
}

pub(crate) fn model_from_slices(slices: &PiSlices, bc: BoundaryCoefficients) -> CharFnModel {
    let BoundaryCoefficients { h, big_h } = bc;
    let last = slices.p.grid().n();
    let alpha = h * slices.r.at(last) + big_h + h * big_h * slices.k.at(last);
    let grid = slices.p.grid();
    let reflected: Vec<Complex64> = (0..=last)
        .map(|j| {
            let x = last - j;
            -(slices.p.at(x) + h * slices.r.at(x) + big_h * slices.q.at(x) + h * big_h * slices.k.at(x))
        })
        .collect();
    CharFnModel {
        alpha,
        w: SampledFunction::from_values_unchecked(grid, reflected),
        provenance: ModelProvenance::FromKernel,
    }
}

/// `-ρ sin ρπ + α + ρ∫₀^π w(x) sin ρx dx`, even in `ρ`.
pub fn char_fn_from_model(model: &CharFnModel, sp: SpectralPoint) -> Complex64 {
    unperturbed_char_fn(sp) + model.alpha + rho_sine_transform(&model.w, sp.rho)
}

/// `ρ∫₀^π w(x) sin ρx dx` by the piecewise-linear product rule.
pub fn rho_sine_transform(w: &SampledFunction, rho: Complex64) -> Complex64 {
    filon_rho_sine(w.values(), w.grid().step(), rho)
}
