//! Eigenvalues as zeros of `Δ`, labelled by their asymptotic index `k`.
//!
//! Zero number `k ≥ 1` is searched in the variable `ρ` starting from `ρ = k`;
//! zero number 0 is searched in `λ` starting from `λ = 0`, because `Δ(ρ²)` is even
//! in `ρ` and a root near `ρ = 0` would be double there. When plain Newton fails to
//! settle inside its localization disc, the root is tracked by continuation from
//! the unperturbed function `-ρ sin ρπ` along `Δ_s = Δ₀ + s(Δ - Δ₀)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::charfn::{unperturbed_char_fn, CharacteristicFunction};
use crate::error::{Error, Result};
use crate::spectrum::{canonical_root, SpectralPoint, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootMethod {
    Newton,
    Continuation,
}

/// How zeros are localized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootLocator {
    /// Newton from the unperturbed guess; fails outside the localization disc.
    Newton,
    /// Homotopy from the unperturbed problem for every index.
    Continuation,
    /// Newton, falling back to continuation for indices where Newton fails.
    Auto,
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Residual tolerance `|Δ(λ_k)| ≤ tol · (1 + |λ_k|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub locator: RootLocator,
    /// Relative threshold below which `|dΔ|` signals a multiple zero.
    pub derivative_floor: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50,
            locator: RootLocator::Auto,
            derivative_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootReport {
    pub k: usize,
    pub lambda: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub in_disc: bool,
    pub method: RootMethod,
}

#[derive(Debug, Clone)]
pub struct SpectrumSearch {
    pub spectrum: Spectrum,
    pub roots: Vec<RootReport>,
}

impl SpectrumSearch {
    pub fn outside_disc(&self) -> Vec<usize> {
        self.roots.iter().filter(|r| !r.in_disc).map(|r| r.k).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Root {
    lambda: Complex64,
    residual: f64,
    iterations: usize,
    method: RootMethod,
}

/// `Δ_s = Δ₀ + s(Δ - Δ₀)`; `s = 1` is `Δ` itself.
fn homotopy(f: &dyn CharacteristicFunction, sp: SpectralPoint, s: f64) -> Result<Complex64> {
    let full = f.eval(sp)?;
    if s == 1.0 {
        return Ok(full);
    }
    let base = unperturbed_char_fn(sp);
    Ok(base + s * (full - base))
}

fn residual_scale(lambda: Complex64, tol: f64) -> f64 {
    tol * (1.0 + lambda.norm())
}

fn in_disc(k: usize, lambda: Complex64) -> bool {
    let rho = canonical_root(lambda);
    (rho - k as f64).norm() <= 0.5 + 1e-12
}

/// Newton on `g(ρ) = Δ_s(ρ²)` (k ≥ 1) or `g(λ) = Δ_s(λ)` (k = 0).
fn newton(
    f: &dyn CharacteristicFunction,
    k: usize,
    start: Complex64,
    s: f64,
    opts: &RootOptions,
) -> Result<Root> {
    let in_lambda = k == 0;
    let point = |v: Complex64| {
        if in_lambda {
            SpectralPoint::new(v)
        } else {
            SpectralPoint::with_root(v)
        }
    };
    let mut v = start;
    let mut g = homotopy(f, point(v), s)?;
    for iter in 1..=opts.max_iter {
        let lambda = point(v).lambda;
        if g.norm() <= residual_scale(lambda, opts.tol) {
            // One polishing step; keep it only if it does not worsen the residual.
            let eps = 1e-6 * (1.0 + v.norm());
            let d = (homotopy(f, point(v + eps), s)? - homotopy(f, point(v - eps), s)?) / (2.0 * eps);
            if d.norm() > 0.0 {
                let polished = v - g / d;
                let gp = homotopy(f, point(polished), s)?;
                if gp.norm() <= g.norm() {
                    v = polished;
                    g = gp;
                }
            }
            return Ok(Root {
                lambda: point(v).lambda,
                residual: g.norm(),
                iterations: iter,
                method: RootMethod::Newton,
            });
        }
        let eps = 1e-6 * (1.0 + v.norm());
        let d = (homotopy(f, point(v + eps), s)? - homotopy(f, point(v - eps), s)?) / (2.0 * eps);
        let scale = if in_lambda { 1.0 } else { 1.0 + v.norm_sqr() };
        if d.norm() < opts.derivative_floor * scale {
            return Err(Error::MultipleRoot {
                k,
                lambda,
                derivative: d.norm(),
            });
        }
        let mut step = g / d;
        // Keep iterates from jumping across neighbouring zeros.
        let cap = if in_lambda { 1.0 } else { 0.5 };
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        v -= step;
        g = homotopy(f, point(v), s)?;
        if !g.is_finite() {
            break;
        }
    }
    let lambda = point(v).lambda;
    Err(Error::NoConvergence {
        k,
        last: lambda,
        residual: g.norm(),
    })
}

fn start_value(k: usize) -> Complex64 {
    Complex64::new(if k == 0 { 0.0 } else { k as f64 }, 0.0)
}

fn as_search_value(k: usize, lambda: Complex64) -> Complex64 {
    if k == 0 {
        lambda
    } else {
        canonical_root(lambda)
    }
}

fn continuation(f: &dyn CharacteristicFunction, k: usize, opts: &RootOptions) -> Result<Root> {
    let mut s: f64 = 0.0;
    let mut ds: f64 = 0.125;
    let mut current = start_value(k);
    let mut iterations = 0;
    let mut last_residual = 0.0;
    while s < 1.0 {
        let target = (s + ds).min(1.0);
        match newton(f, k, current, target, opts) {
            Ok(root) => {
                let next = as_search_value(k, root.lambda);
                let jump = (next - current).norm();
                if jump > 0.25 && ds > 1e-4 {
                    ds /= 2.0;
                    continue;
                }
                iterations += root.iterations;
                last_residual = root.residual;
                current = next;
                s = target;
                ds = (ds * 1.5).min(0.25);
            }
            Err(err) => {
                if ds <= 1e-4 {
                    return Err(err);
                }
                ds /= 2.0;
            }
        }
    }
    let lambda = if k == 0 {
        current
    } else {
        current * current
    };
    Ok(Root {
        lambda,
        residual: last_residual,
        iterations,
        method: RootMethod::Continuation,
    })
}

fn locate(f: &dyn CharacteristicFunction, k: usize, opts: &RootOptions) -> Result<Root> {
    match opts.locator {
        RootLocator::Continuation => continuation(f, k, opts),
        RootLocator::Newton => {
            let root = newton(f, k, start_value(k), 1.0, opts)?;
            if !in_disc(k, root.lambda) {
                return Err(Error::NoConvergence {
                    k,
                    last: root.lambda,
                    residual: root.residual,
                });
            }
            Ok(root)
        }
        RootLocator::Auto => match newton(f, k, start_value(k), 1.0, opts) {
            Ok(root) if in_disc(k, root.lambda) => Ok(root),
            _ => continuation(f, k, opts),
        },
    }
}

/// Zeros `λ_0..=λ_K` of `f`, ordered by localization index.
pub fn find_spectrum_with(
    f: &dyn CharacteristicFunction,
    last: usize,
    opts: &RootOptions,
) -> Result<SpectrumSearch> {
    if last < 1 {
        return Err(Error::InvalidArgument("need K >= 1 eigenvalues".into()));
    }
    let mut roots: Vec<Root> = (0..=last)
        .into_par_iter()
        .map(|k| locate(f, k, opts))
        .collect::<Result<Vec<_>>>()?;

    // Two indices landing on the same zero means Newton hopped; redo those by
    // continuation until no Newton result is involved in a clash.
    if opts.locator == RootLocator::Auto {
        loop {
            let redo: Vec<usize> = duplicated_indices(&roots)
                .into_iter()
                .filter(|&k| roots[k].method == RootMethod::Newton)
                .collect();
            if redo.is_empty() {
                break;
            }
            for k in redo {
                roots[k] = continuation(f, k, opts)?;
            }
        }
    }
    if let Some(&k) = duplicated_indices(&roots).first() {
        return Err(Error::MultipleRoot {
            k,
            lambda: roots[k].lambda,
            derivative: 0.0,
        });
    }

    let reports = roots
        .iter()
        .enumerate()
        .map(|(k, r)| RootReport {
            k,
            lambda: [r.lambda.re, r.lambda.im],
            residual: r.residual,
            iterations: r.iterations,
            in_disc: in_disc(k, r.lambda),
            method: r.method,
        })
        .collect();
    let spectrum = Spectrum::new(roots.iter().map(|r| r.lambda).collect())?;
    Ok(SpectrumSearch {
        spectrum,
        roots: reports,
    })
}

fn duplicated_indices(roots: &[Root]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, a) in roots.iter().enumerate() {
        let ra = canonical_root(a.lambda);
        let clash = roots.iter().enumerate().any(|(j, b)| {
            j != i && (canonical_root(b.lambda) - ra).norm() < 1e-6 * (1.0 + ra.norm())
        });
        if clash {
            out.push(i);
        }
    }
    out
}
