//! The main nonlinear equation for `N` and the two reconstruction algorithms.
//!
//! The equation reads
//! `f(x) = Σ_ν [ψ_ν(x) N^{*ν}(x) + ∫₀ˣ Ψ_ν(x,t) N^{*ν}(t) dt]` with
//! `ψ_ν(x) = (π-x)^ν/ν!` and
//! `Ψ_ν(x,t) = [H(π-x)^ν + h(π-t)^{ν-1}(π-t + (x-t)(ν + H(π-t)))]/ν!`.
//! Every `Ψ_ν` splits into products of a function of `x` and a function of `t`,
//! so the integrals are running sums along the march.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{char_fn_model_from_kernel, find_spectrum_with, RootOptions};
use crate::grid::{Grid, SampledFunction};
use crate::reconstruction::{model_from_spectrum, SynthesisOptions};
use crate::spectrum::{BoundaryCoefficients, Spectrum};
use crate::volterra::{n_to_m, ConvPowerStack, SeriesControl};

pub const DEFAULT_NU_MAX: usize = 60;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Debug, Clone)]
pub struct MainEquationData {
    pub f: SampledFunction,
    pub bc: BoundaryCoefficients,
    pub nu_max: usize,
}

impl MainEquationData {
    pub fn new(f: SampledFunction, bc: BoundaryCoefficients, nu_max: usize) -> Result<Self> {
        if nu_max < 1 {
            return Err(Error::InvalidArgument("nu_max must be >= 1".into()));
        }
        Ok(Self { f, bc, nu_max })
    }

    /// `f(x) = -w(π-x) - h - H - hHx`.
    pub fn from_w(w: &SampledFunction, bc: BoundaryCoefficients, nu_max: usize) -> Result<Self> {
        let BoundaryCoefficients { h, big_h } = bc;
        let f = w.reflect().map(|x, v| -v - h - big_h - h * big_h * x);
        Self::new(f, bc, nu_max)
    }
}

/// Running integrals `∫₀^{x} g(t) N^{*ν}(t) dt` for the five `t`-factors of `Ψ_ν`.
#[derive(Clone, Copy, Default)]
struct Moments {
    /// `1`
    plain: Complex64,
    /// `(π-t)^ν`
    pw: Complex64,
    /// `(π-t)^{ν-1}`
    pw_lower: Complex64,
    /// `t(π-t)^{ν-1}`
    t_pw_lower: Complex64,
    /// `t(π-t)^ν`
    t_pw: Complex64,
}

impl Moments {
    fn weighted(t: f64, nu: usize, v: Complex64) -> Self {
        let lower = (PI - t).powi(nu as i32 - 1);
        let pw = lower * (PI - t);
        Self {
            plain: v,
            pw: pw * v,
            pw_lower: lower * v,
            t_pw_lower: t * lower * v,
            t_pw: t * pw * v,
        }
    }

    fn add_scaled(&mut self, other: &Self, s: f64) {
        self.plain += s * other.plain;
        self.pw += s * other.pw;
        self.pw_lower += s * other.pw_lower;
        self.t_pw_lower += s * other.t_pw_lower;
        self.t_pw += s * other.t_pw;
    }

    /// `∫₀ˣ Ψ_ν(x,t) N^{*ν}(t) dt` from the moments, with `1/ν!` folded into `inv_fact`.
    fn combine(&self, x: f64, nu: usize, inv_fact: f64, bc: BoundaryCoefficients) -> Complex64 {
        let BoundaryCoefficients { h, big_h } = bc;
        let px = (PI - x).powi(nu as i32);
        inv_fact
            * (big_h * px * self.plain
                + h * self.pw
                + h * nu as f64 * (x * self.pw_lower - self.t_pw_lower)
                + h * big_h * (x * self.pw - self.t_pw))
    }
}

fn inverse_factorials(nu_max: usize) -> Vec<f64> {
    let mut out = vec![1.0; nu_max + 1];
    for nu in 1..=nu_max {
        out[nu] = out[nu - 1] / nu as f64;
    }
    out
}

/// Right-hand side of the main equation for a given `N`.
pub fn evaluate_main_rhs(n: &SampledFunction, bc: BoundaryCoefficients, nu_max: usize) -> Result<SampledFunction> {
    let stack = ConvPowerStack::new(n, nu_max)?;
    let grid = n.grid();
    let step = grid.step();
    let inv_fact = inverse_factorials(nu_max);
    let mut out = vec![zero(); grid.len()];
    for (nu, power) in stack.iter() {
        let mut running = Moments::default();
        let mut prev = Moments::default();
        for (i, slot) in out.iter_mut().enumerate() {
            let x = grid.point(i);
            let here = Moments::weighted(x, nu, power.at(i));
            if i > 0 {
                running.add_scaled(&prev, 0.5 * step);
                running.add_scaled(&here, 0.5 * step);
            }
            *slot += inv_fact[nu] * (PI - x).powi(nu as i32) * power.at(i)
                + running.combine(x, nu, inv_fact[nu], bc);
            prev = here;
        }
    }
    SampledFunction::new(grid, out)
}

/// The same right-hand side assembled from the kernel slices at `x = π`:
/// `P(π,x) + h(R(π,x) - 1) + H(Q(π,x) - 1) + hH(K(π,x) - x)`.
pub fn evaluate_main_rhs_from_slices(
    n: &SampledFunction,
    bc: BoundaryCoefficients,
    nu_max: usize,
) -> Result<SampledFunction> {
    let slices = crate::volterra::kernels_at_pi(n, nu_max)?;
    let BoundaryCoefficients { h, big_h } = bc;
    let grid = n.grid();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            slices.p.at(i) + h * (slices.r.at(i) - 1.0) + big_h * (slices.q.at(i) - 1.0) + h * big_h * (slices.k.at(i) - x)
        })
        .collect();
    SampledFunction::new(grid, values)
}

/// Solution of the main equation.
#[derive(Debug, Clone)]
pub struct MainSolution {
    /// `N` on the grid; the value at `x = π` is extrapolated.
    pub n: SampledFunction,
    /// `Ñ(x) = (π-x)N(x)`, zero at `x = π`.
    pub weighted: SampledFunction,
    /// Largest per-node residual of the affine node equation.
    pub node_residual: f64,
}

pub trait MainEquationSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, d: &MainEquationData) -> Result<MainSolution>;
}

/// The march state shared by both node solvers.
///
/// At node `i` each power is affine in the new value, `N^{*ν}_i = A_ν + B_ν N_i`,
/// because `N_i` enters the product rule only through its end weights.
struct March<'a> {
    d: &'a MainEquationData,
    grid: Grid,
    inv_fact: Vec<f64>,
    /// `powers[ν-1][j] = N^{*ν}(x_j)` for the nodes fixed so far.
    powers: Vec<Vec<Complex64>>,
    /// Trapezoid moments over `[0, x_{i-1}]` per power.
    closed: Vec<Moments>,
    /// Integrand of each moment at `x_{i-1}`.
    last: Vec<Moments>,
}

impl<'a> March<'a> {
    fn new(d: &'a MainEquationData) -> Self {
        let grid = d.f.grid();
        let nu_max = d.nu_max;
        Self {
            d,
            grid,
            inv_fact: inverse_factorials(nu_max),
            powers: vec![Vec::with_capacity(grid.len()); nu_max],
            closed: vec![Moments::default(); nu_max],
            last: vec![Moments::default(); nu_max],
        }
    }

    /// `(A_ν, B_ν)` at node `i` given nodes `< i`.
    fn affine_powers(&self, i: usize) -> Vec<(Complex64, Complex64)> {
        let step = self.grid.step();
        let base = &self.powers[0];
        let mut out = Vec::with_capacity(self.d.nu_max);
        out.push((zero(), Complex64::new(1.0, 0.0)));
        if i == 0 {
            out.resize(self.d.nu_max, (zero(), zero()));
            return out;
        }
        let n0 = base[0];
        for nu in 2..=self.d.nu_max {
            let prev_power = &self.powers[nu - 2];
            let mut s = zero();
            for j in 1..i {
                s += base[i - j] * prev_power[j];
            }
            let (a_prev, b_prev) = out[nu - 2];
            let (a, b) = if nu == 2 {
                // ½N_i N_0 + ½N_0 N_i
                (step * s, step * n0)
            } else {
                (step * (s + 0.5 * n0 * a_prev), 0.5 * step * n0 * b_prev)
            };
            out.push((a, b));
        }
        out
    }

    /// Right side at node `i` as `a + b N_i`.
    fn node_affine(&self, i: usize, coeffs: &[(Complex64, Complex64)]) -> (Complex64, Complex64) {
        let x = self.grid.point(i);
        let step = self.grid.step();
        let bc = self.d.bc;
        let mut a = zero();
        let mut b = zero();
        for (idx, &(ap, bp)) in coeffs.iter().enumerate() {
            let nu = idx + 1;
            let psi = self.inv_fact[nu] * (PI - x).powi(nu as i32);
            // Trapezoid over [0, x_i] minus the new node's half weight.
            let mut history = self.closed[idx];
            if i > 0 {
                history.add_scaled(&self.last[idx], 0.5 * step);
            }
            a += history.combine(x, nu, self.inv_fact[nu], bc);
            // Ψ_ν(x,x) = (h + H)(π-x)^ν/ν!; the new node carries weight step/2.
            let diag = if i > 0 { 0.5 * step * (bc.h + bc.big_h) * psi } else { zero() };
            a += (psi + diag) * ap;
            b += (psi + diag) * bp;
        }
        (a, b)
    }

    fn commit(&mut self, i: usize, value: Complex64, coeffs: &[(Complex64, Complex64)]) {
        let step = self.grid.step();
        let x = self.grid.point(i);
        for (idx, &(ap, bp)) in coeffs.iter().enumerate() {
            let v = if idx == 0 { value } else { ap + bp * value };
            self.powers[idx].push(v);
            let here = Moments::weighted(x, idx + 1, v);
            if i > 0 {
                let prev = self.last[idx];
                self.closed[idx].add_scaled(&prev, 0.5 * step);
                self.closed[idx].add_scaled(&here, 0.5 * step);
            }
            self.last[idx] = here;
        }
    }
}

/// Solves each node equation `f_i = a + bN_i`, marching in `x`.
fn march_with(
    d: &MainEquationData,
    mut node: impl FnMut(usize, Complex64, &dyn Fn(Complex64) -> Complex64, Complex64) -> Result<Complex64>,
) -> Result<MainSolution> {
    let grid = d.f.grid();
    let n = grid.n();
    let mut march = March::new(d);
    let mut values = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let coeffs = march.affine_powers(i);
        let (a, b) = march.node_affine(i, &coeffs);
        let target = d.f.at(i);
        let rhs = |v: Complex64| a + b * v;
        let value = node(i, target, &rhs, b)?;
        worst = worst.max((rhs(value) - target).norm());
        if !value.is_finite() {
            return Err(Error::MainEquation { node: i, residual: f64::INFINITY });
        }
        march.commit(i, value, &coeffs);
        values.push(value);
    }
    // The node equation degenerates at x = π; only Ñ(π) = 0 is determined.
    let end = if n >= 2 {
        2.0 * values[n - 1] - values[n - 2]
    } else {
        values[n - 1]
    };
    values.push(end);
    let weighted: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| if i == n { zero() } else { (PI - grid.point(i)) * v })
        .collect();
    Ok(MainSolution {
        n: SampledFunction::new(grid, values)?,
        weighted: SampledFunction::new(grid, weighted)?,
        node_residual: worst,
    })
}

/// Exact solve of the affine node equation.
#[derive(Debug, Clone, Copy, Default)]
pub struct AffineMarching;

impl MainEquationSolver for AffineMarching {
    fn name(&self) -> &'static str {
        "marching-affine"
    }

    fn solve(&self, d: &MainEquationData) -> Result<MainSolution> {
        march_with(d, |i, target, rhs, b| {
            if b.norm() < 1e-300 {
                return Err(Error::MainEquation {
                    node: i,
                    residual: (rhs(zero()) - target).norm(),
                });
            }
            Ok((target - rhs(zero())) / b)
        })
    }
}

/// Damped fixed-point iteration on `N_i ← N_i + (f_i - rhs(N_i))/((π-x_i)(1 + step(h+H)/2))`,
/// falling back to Newton with a numerical derivative.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointMarching {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FixedPointMarching {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 100,
            tol: 1e-12,
        }
    }
}

impl MainEquationSolver for FixedPointMarching {
    fn name(&self) -> &'static str {
        "marching-fixed-point"
    }

    fn solve(&self, d: &MainEquationData) -> Result<MainSolution> {
        let grid = d.f.grid();
        let step = grid.step();
        let lead = 1.0 + 0.5 * step * (d.bc.h + d.bc.big_h);
        let mut guess = zero();
        march_with(d, |i, target, rhs, _| {
            let tol = self.tol * (1.0 + target.norm());
            let scale = (PI - grid.point(i)) * if i > 0 { lead } else { Complex64::new(1.0, 0.0) };
            let mut v = guess;
            let mut r = target - rhs(v);
            let mut factor = 1.0;
            for _ in 0..self.max_iter {
                if r.norm() <= tol {
                    guess = v;
                    return Ok(v);
                }
                let next = v + factor * r / scale;
                let rn = target - rhs(next);
                if rn.norm() >= r.norm() {
                    factor *= self.damping;
                }
                v = next;
                r = rn;
            }
            // Newton with a central-difference derivative.
            for _ in 0..self.max_iter {
                if r.norm() <= tol {
                    guess = v;
                    return Ok(v);
                }
                let eps = 1e-6 * (1.0 + v.norm());
                let deriv = (rhs(v + eps) - rhs(v - eps)) / (2.0 * eps);
                if deriv.norm() < 1e-300 {
                    break;
                }
                v += r / deriv;
                r = target - rhs(v);
            }
            Err(Error::MainEquation { node: i, residual: r.norm() })
        })
    }
}

pub fn solve_main_equation(d: &MainEquationData) -> Result<MainSolution> {
    AffineMarching.solve(d)
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseDiagnostics {
    pub alpha: [f64; 2],
    pub zero_eigenvalue: bool,
    pub tail_shift: [f64; 2],
    pub w_end: [f64; 2],
    /// `max |evaluate_main_rhs(N) - f|` on `[0, x_{n-1}]`.
    pub main_residual: f64,
    pub node_residual: f64,
    pub weighted_max: f64,
    /// `max_k |λ_k(L(M,h,H)) - λ_k| / (1 + |λ_k|)` when the check ran.
    pub spectrum_deviation: Option<f64>,
    pub kappa_tail_increase: f64,
}

#[derive(Debug, Clone)]
pub struct InverseSolution {
    pub n: SampledFunction,
    pub m: SampledFunction,
    pub weighted_n: SampledFunction,
    pub bc: BoundaryCoefficients,
    pub h_recovered: Option<Complex64>,
    pub w: SampledFunction,
    pub diagnostics: InverseDiagnostics,
    pub warnings: Vec<String>,
}

#[derive(Clone)]
pub struct InverseOptions {
    pub grid: Grid,
    pub nu_max: usize,
    pub synthesis: SynthesisOptions,
    /// Relative tolerance for the forward spectrum check; `None` skips it.
    pub consistency_tol: Option<f64>,
    pub root: RootOptions,
}

impl InverseOptions {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            nu_max: DEFAULT_NU_MAX,
            synthesis: SynthesisOptions::default(),
            consistency_tol: Some(1e-3),
            root: RootOptions::default(),
        }
    }
}

fn pair(v: Complex64) -> [f64; 2] {
    [v.re, v.im]
}

fn reconstruct(
    s: &Spectrum,
    bc: Option<BoundaryCoefficients>,
    opts: &InverseOptions,
    solver: &dyn MainEquationSolver,
) -> Result<InverseSolution> {
    let spectral = model_from_spectrum(s, opts.grid, opts.synthesis)?;
    let mut warnings = Vec::new();
    if spectral.alpha.zero_eigenvalue {
        warnings.push("a nonzero-index eigenvalue is zero; alpha = Delta(0) vanishes through that factor".to_string());
    }
    let (bc, h_recovered) = match bc {
        Some(bc) => (bc, None),
        None => {
            let alpha = spectral.alpha.alpha;
            (BoundaryCoefficients::new(zero(), alpha)?, Some(alpha))
        }
    };
    let w = spectral.model.w.clone();
    let data = MainEquationData::from_w(&w, bc, opts.nu_max)?;
    let solution = solver.solve(&data)?;
    let m = n_to_m(&solution.n);

    let check = evaluate_main_rhs(&solution.n, bc, opts.nu_max)?;
    let main_residual = check.max_diff_upto(&data.f, opts.grid.n() - 1)?;

    let kappa_tail_increase = s.kappa_tail_increase(20.min(s.last_index()));
    let spectrum_deviation = match opts.consistency_tol {
        None => None,
        Some(tol) => {
            let model = char_fn_model_from_kernel(&solution.n, bc, SeriesControl::default())?;
            let fwd = find_spectrum_with(&model, s.last_index(), &opts.root)?;
            let dev = s
                .values()
                .iter()
                .zip(fwd.spectrum.values())
                .map(|(a, b)| (a - b).norm() / (1.0 + a.norm()))
                .fold(0.0, f64::max);
            if dev > tol {
                warnings.push(format!(
                    "forward spectrum of the recovered operator deviates from the input by {dev:.3e} (relative), above {tol:.1e}"
                ));
            }
            Some(dev)
        }
    };

    Ok(InverseSolution {
        diagnostics: InverseDiagnostics {
            alpha: pair(spectral.alpha.alpha),
            zero_eigenvalue: spectral.alpha.zero_eigenvalue,
            tail_shift: pair(spectral.tail.shift),
            w_end: pair(spectral.fourier.w_end),
            main_residual,
            node_residual: solution.node_residual,
            weighted_max: solution.weighted.max_abs(),
            spectrum_deviation,
            kappa_tail_increase,
        },
        n: solution.n,
        m,
        weighted_n: solution.weighted,
        bc,
        h_recovered,
        w,
        warnings,
    })
}

/// A reconstruction of `M` from spectral data.
pub trait InverseAlgorithm: Send + Sync {
    fn name(&self) -> &'static str;

    /// `bc` is required by algorithms that take the boundary data as given.
    fn run(
        &self,
        s: &Spectrum,
        bc: Option<BoundaryCoefficients>,
        opts: &InverseOptions,
        solver: &dyn MainEquationSolver,
    ) -> Result<InverseSolution>;
}

/// Known `(h, H)`: `w` from the spectrum, `N` from the main equation, `M` from `N`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlgorithmOne;

impl InverseAlgorithm for AlgorithmOne {
    fn name(&self) -> &'static str {
        "algorithm-1"
    }

    fn run(
        &self,
        s: &Spectrum,
        bc: Option<BoundaryCoefficients>,
        opts: &InverseOptions,
        solver: &dyn MainEquationSolver,
    ) -> Result<InverseSolution> {
        let bc = bc.ok_or_else(|| Error::InvalidArgument("algorithm-1 needs h and H".into()))?;
        reconstruct(s, Some(bc), opts, solver)
    }
}

/// `h = 0` and `H = α`, then as [`AlgorithmOne`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AlgorithmTwo;

impl InverseAlgorithm for AlgorithmTwo {
    fn name(&self) -> &'static str {
        "algorithm-2"
    }

    fn run(
        &self,
        s: &Spectrum,
        _bc: Option<BoundaryCoefficients>,
        opts: &InverseOptions,
        solver: &dyn MainEquationSolver,
    ) -> Result<InverseSolution> {
        reconstruct(s, None, opts, solver)
    }
}

pub fn algorithm_1(s: &Spectrum, bc: BoundaryCoefficients, opts: &InverseOptions) -> Result<InverseSolution> {
    AlgorithmOne.run(s, Some(bc), opts, &AffineMarching)
}

pub fn algorithm_2(s: &Spectrum, opts: &InverseOptions) -> Result<InverseSolution> {
    AlgorithmTwo.run(s, None, opts, &AffineMarching)
}
