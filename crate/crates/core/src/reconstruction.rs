//! Characteristic function and `(α, w)` rebuilt from a finite list of eigenvalues.
//!
//! The product is evaluated in ratio form against a reference spectrum
//! `k² + ω` that continues the list past its last index. With `ω = 0` every tail
//! factor is exactly 1. Fitting `ω` to the last supplied eigenvalues removes the
//! `O(1/K)` bias that a nonzero asymptotic shift `λ_k - k² → ω` otherwise leaves in
//! `α` and in `β_k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{unperturbed_char_fn, CharFnModel, CharacteristicFunction, ModelProvenance};
use crate::grid::{Grid, SampledFunction};
use crate::special::sinc;
use crate::spectrum::{canonical_root, SpectralPoint, Spectrum};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// How eigenvalues beyond the last supplied index are continued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPolicy {
    /// `λ_k = k²` for `k > K`.
    Squares,
    /// `λ_k = k² + ω` with `ω` the mean of `λ_k - k²` over the last two entries.
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductTail {
    pub last: usize,
    pub shift: Complex64,
}

impl ProductTail {
    pub fn squares(s: &Spectrum) -> Self {
        Self {
            last: s.last_index(),
            shift: c(0.0),
        }
    }

    pub fn fitted(s: &Spectrum) -> Self {
        let last = s.last_index();
        let from = last.saturating_sub(1).max(1);
        let count = (last - from + 1) as f64;
        let shift = (from..=last)
            .map(|k| s.lambda(k) - c((k * k) as f64))
            .sum::<Complex64>()
            / count;
        Self { last, shift }
    }

    pub fn with_policy(s: &Spectrum, policy: TailPolicy) -> Self {
        match policy {
            TailPolicy::Squares => Self::squares(s),
            TailPolicy::Fitted => Self::fitted(s),
        }
    }
}

/// `Π_{k≥1} (1 - μ/k²) = sin(π√μ)/(π√μ)`.
fn sine_product(sigma: Complex64) -> Complex64 {
    sinc(PI * sigma)
}

/// `Δ(λ) = π(λ₀ - λ) · S(λ - ω) · Π_{k=1}^{K} (λ_k - λ)/(k² + ω - λ)` with `S(μ) = sinc(π√μ)`.
///
/// The reference factor nearest to a zero of `S` is paired with it analytically,
/// so `λ = k² + ω` is evaluated without cancellation.
pub fn product_char_fn(s: &Spectrum, tail: &ProductTail, sp: SpectralPoint) -> Complex64 {
    let lambda = sp.lambda;
    let mu = lambda - tail.shift;
    let sigma = canonical_root(mu);
    let nearest = sigma.re.round();
    let paired = if nearest >= 1.0 && (nearest as usize) <= tail.last && (sigma - nearest).norm() < 0.5 {
        Some(nearest as usize)
    } else {
        None
    };

    let mut acc = PI * (s.lambda(0) - lambda);
    for k in 1..=tail.last {
        let num = s.lambda(k) - lambda;
        if Some(k) == paired {
            acc *= num;
        } else {
            acc *= num / (c((k * k) as f64) - mu);
        }
    }
    match paired {
        None => acc * sine_product(sigma),
        Some(j) => {
            // S(μ)/(j² - μ) = -(-1)^j sinc(π(σ - j)) / (σ(j + σ))
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            acc * sign * sinc(PI * (sigma - j as f64)) / (sigma * (j as f64 + sigma))
        }
    }
}

/// Truncated raw product `π(λ₀ - λ) Π_{k=1}^{T} (λ_k - λ)/k²`, continued by `k² + ω` up to `terms`.
///
/// Converges like `O(|λ|/T)`; meant for cross-checks at small `|λ|`.
pub fn raw_product_char_fn(s: &Spectrum, tail: &ProductTail, lambda: Complex64, terms: usize) -> Complex64 {
    let mut acc = PI * (s.lambda(0) - lambda);
    for k in 1..=terms.max(tail.last) {
        let kk = (k * k) as f64;
        let lk = if k <= tail.last { s.lambda(k) } else { kk + tail.shift };
        acc *= (lk - lambda) / kk;
    }
    acc
}

/// `F(λ) = Δ(λ)/Δ₀(λ)`, tending to 1 as `λ → -∞`.
pub fn product_ratio(s: &Spectrum, tail: &ProductTail, sp: SpectralPoint) -> Complex64 {
    product_char_fn(s, tail, sp) / unperturbed_char_fn(sp)
}

/// `Δ(λ)` from the product over a given spectrum.
#[derive(Debug, Clone)]
pub struct ProductCharFn {
    spectrum: Spectrum,
    tail: ProductTail,
}

impl ProductCharFn {
    pub fn new(spectrum: Spectrum, policy: TailPolicy) -> Self {
        let tail = ProductTail::with_policy(&spectrum, policy);
        Self { spectrum, tail }
    }

    pub fn tail(&self) -> &ProductTail {
        &self.tail
    }
}

impl CharacteristicFunction for ProductCharFn {
    fn name(&self) -> &'static str {
        "product"
    }

    fn eval(&self, sp: SpectralPoint) -> Result<Complex64> {
        Ok(product_char_fn(&self.spectrum, &self.tail, sp))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub alpha: Complex64,
    /// Some `λ_k` with `k ≥ 1` is zero, so `α = Δ(0)` vanishes through that factor.
    pub zero_eigenvalue: bool,
}

/// `α = Δ(0) = πλ₀ S(-ω) Π_{k=1}^{K} λ_k/(k² + ω)`.
pub fn alpha_from_spectrum(s: &Spectrum, tail: &ProductTail) -> AlphaEstimate {
    let zero_eigenvalue = s.values()[1..].iter().any(|l| *l == c(0.0));
    AlphaEstimate {
        alpha: product_char_fn(s, tail, SpectralPoint::real(0.0)),
        zero_eigenvalue,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierData {
    /// `β_k = Δ(k²)` for `k = 1..=K`; index 0 unused.
    pub beta: Vec<Complex64>,
    /// `θ_k = (β_k - α)/k`; index 0 unused.
    pub theta: Vec<Complex64>,
    pub alpha: Complex64,
    /// Estimate of `w(π)` from `β_k ≈ -(-1)^k w(π)` at the largest `k`.
    pub w_end: Complex64,
}

impl FourierData {
    pub fn last(&self) -> usize {
        self.beta.len() - 1
    }

    /// `Σ_{k≤j} |θ_k|²` for `j = 1..=K`.
    pub fn theta_partial_sums(&self) -> Vec<f64> {
        self.theta[1..]
            .iter()
            .scan(0.0, |acc, t| {
                *acc += t.norm_sqr();
                Some(*acc)
            })
            .collect()
    }
}

pub fn fourier_data(s: &Spectrum, tail: &ProductTail, alpha: Complex64) -> FourierData {
    let last = tail.last;
    let mut beta: Vec<Complex64> = (0..=last)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                c(0.0)
            } else {
                product_char_fn(s, tail, SpectralPoint::real((k * k) as f64))
            }
        })
        .collect();
    beta[0] = c(0.0);
    let theta = beta
        .iter()
        .enumerate()
        .map(|(k, b)| if k == 0 { c(0.0) } else { (b - alpha) / k as f64 })
        .collect();
    let from = last.saturating_sub(1).max(1);
    let w_end = (from..=last)
        .map(|k| if k % 2 == 0 { -beta[k] } else { beta[k] })
        .sum::<Complex64>()
        / (last - from + 1) as f64;
    FourierData {
        beta,
        theta,
        alpha,
        w_end,
    }
}

/// `β_k = (-1)^{k+1} (π/2k²)(λ₀ - k²)(λ_k - k²) d_k` with `d_k` truncated at `K`.
///
/// Agrees with the ratio form under the `λ_k = k²` tail.
pub fn beta_cross_product(s: &Spectrum, k: usize) -> Complex64 {
    let kk = (k * k) as f64;
    let mut d = c(1.0);
    for nu in 1..=s.last_index() {
        if nu != k {
            d *= (s.lambda(nu) - kk) / ((nu * nu) as f64 - kk);
        }
    }
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    sign * PI / (2.0 * kk) * (s.lambda(0) - kk) * (s.lambda(k) - kk) * d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WSynthesis {
    /// `w = (2/π) Σ θ_k sin kx`.
    SineSeries,
    /// The linear function through `w(0) = -α` and `w(π)` plus the sine series of the remainder.
    EndpointCorrected,
}

/// `w` on `grid` from its sine coefficients `θ_k`.
pub fn w_from_spectrum(d: &FourierData, grid: Grid, synthesis: WSynthesis) -> SampledFunction {
    let last = d.last();
    let (a, end) = match synthesis {
        WSynthesis::SineSeries => (c(0.0), c(0.0)),
        WSynthesis::EndpointCorrected => (-d.alpha, d.w_end),
    };
    // θ_k of a + bx, a + bπ = end.
    let coeff: Vec<Complex64> = (1..=last)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let linear = (a - sign * end) / k as f64;
            2.0 / PI * (d.theta[k] - linear)
        })
        .collect();
    let values = (0..=grid.n())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let mut acc = a + (end - a) * (x / PI);
            for (j, ck) in coeff.iter().enumerate() {
                acc += ck * ((j + 1) as f64 * x).sin();
            }
            acc
        })
        .collect();
    SampledFunction::from_values_unchecked(grid, values)
}

/// Options for rebuilding `(α, w)` from a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub tail: TailPolicy,
    pub synthesis: WSynthesis,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            tail: TailPolicy::Fitted,
            synthesis: WSynthesis::EndpointCorrected,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub model: CharFnModel,
    pub alpha: AlphaEstimate,
    pub tail: ProductTail,
    pub fourier: FourierData,
}

/// `(α, w)` for the characteristic function whose zeros are `s`.
pub fn model_from_spectrum(s: &Spectrum, grid: Grid, opts: SynthesisOptions) -> Result<SpectralModel> {
    let tail = ProductTail::with_policy(s, opts.tail);
    if !tail.shift.is_finite() {
        return Err(Error::NonFinite { what: "tail shift", index: s.last_index() });
    }
    let alpha = alpha_from_spectrum(s, &tail);
    let fourier = fourier_data(s, &tail, alpha.alpha);
    let w = w_from_spectrum(&fourier, grid, opts.synthesis);
    let model = CharFnModel::new(alpha.alpha, w, ModelProvenance::FromSpectrum)?;
    Ok(SpectralModel {
        model,
        alpha,
        tail,
        fourier,
    })
}
