//! Transformation-operator kernel `P(x,t)` and the derived kernels `K`, `R`, `Q`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ConvPowerStack, SeriesControl};
use crate::error::Result;
use crate::grid::{cumulative_trapezoid, trapezoid_slice, Grid, SampledFunction};
use crate::special::{filon_rho_sine, sin_over};
use crate::spectrum::SpectralPoint;

/// Samples `v[i][j] ≈ P(x_i, t_j)` on the triangle `0 ≤ j ≤ i ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularKernel {
    grid: Grid,
    values: Vec<Complex64>,
}

fn row_offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl TriangularKernel {
    fn from_rows(grid: Grid, rows: Vec<Vec<Complex64>>) -> Self {
        debug_assert_eq!(rows.len(), grid.len());
        let values = rows.into_iter().flatten().collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(j <= i && i <= self.grid.n(), "({i}, {j}) outside the triangle");
        self.values[row_offset(i) + j]
    }

    /// `t ↦ P(x_i, t)` for `t_0..=t_i`.
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.values[row_offset(i)..row_offset(i + 1)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Per-row series values: `P(x_i, t_j)` and `P_x(x_i, t_j)`.
fn series_row(stack: &ConvPowerStack, grid: Grid, i: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let x = grid.point(i);
    let mut p = Vec::with_capacity(i + 1);
    let mut px = Vec::with_capacity(i + 1);
    for j in 0..=i {
        let d = x - grid.point(j);
        let mut coeff = 1.0; // d^{ν-1}/(ν-1)!
        let mut p_acc = Complex64::new(0.0, 0.0);
        let mut px_acc = Complex64::new(0.0, 0.0);
        for (nu, power) in stack.iter() {
            let v = power.at(j);
            px_acc += coeff * v;
            coeff *= d / nu as f64;
            p_acc += coeff * v;
        }
        p.push(p_acc);
        px.push(px_acc);
    }
    (p, px)
}

/// `P(x,t) = Σ_ν (x-t)^ν/ν! · N^{*ν}(t)` with powers `1..=nu_max`.
pub fn transformation_kernel(n: &SampledFunction, nu_max: usize) -> Result<TriangularKernel> {
    let stack = ConvPowerStack::new(n, nu_max)?;
    Ok(transformation_kernel_from(&stack))
}

pub fn transformation_kernel_from(stack: &ConvPowerStack) -> TriangularKernel {
    let grid = stack.base().grid();
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|i| series_row(stack, grid, i).0)
        .collect();
    TriangularKernel::from_rows(grid, rows)
}

/// One row of every representation kernel.
struct KernelRow {
    p: Vec<Complex64>,
    k: Vec<Complex64>,
    r: Vec<Complex64>,
    q: Vec<Complex64>,
}

/// Running integrals `∫₀^{t_j} N^{*ν}` for each power.
fn power_integrals(stack: &ConvPowerStack) -> Vec<Vec<Complex64>> {
    let step = stack.base().grid().step();
    stack
        .iter()
        .map(|(_, p)| cumulative_trapezoid(p.values(), step))
        .collect()
}

fn kernel_row(
    stack: &ConvPowerStack,
    integrals: &[Vec<Complex64>],
    grid: Grid,
    i: usize,
) -> KernelRow {
    let step = grid.step();
    let (p, px) = series_row(stack, grid, i);
    let t: Vec<f64> = (0..=i).map(|j| grid.point(j)).collect();
    let tp: Vec<Complex64> = p.iter().zip(&t).map(|(v, &tj)| v * tj).collect();
    let tpx: Vec<Complex64> = px.iter().zip(&t).map(|(v, &tj)| v * tj).collect();
    let cum_p = cumulative_trapezoid(&p, step);
    let cum_tp = cumulative_trapezoid(&tp, step);
    let cum_px = cumulative_trapezoid(&px, step);
    let cum_tpx = cumulative_trapezoid(&tpx, step);

    let x = grid.point(i);
    let mut k = Vec::with_capacity(i + 1);
    let mut r = Vec::with_capacity(i + 1);
    let mut q = Vec::with_capacity(i + 1);
    for j in 0..=i {
        let tj = t[j];
        // K(x,t) = t + ∫₀ᵗ (t-τ) P(x,τ) dτ
        k.push(tj + tj * cum_p[j] - cum_tp[j]);
        // R(x,t) = 1 + ∫₀ᵗ P(x,τ) dτ + ∫₀ᵗ (t-τ) P_x(x,τ) dτ
        r.push(1.0 + cum_p[j] + tj * cum_px[j] - cum_tpx[j]);
        // Q(x,t) = 1 + Σ_ν (x-t)^ν/ν! ∫₀ᵗ N^{*ν}
        let d = x - tj;
        let mut coeff = 1.0;
        let mut acc = Complex64::new(1.0, 0.0);
        for (idx, integral) in integrals.iter().enumerate() {
            coeff *= d / (idx + 1) as f64;
            acc += coeff * integral[j];
        }
        q.push(acc);
    }
    KernelRow { p, k, r, q }
}

/// `P(π,·)`, `R(π,·)`, `Q(π,·)`, `K(π,·)` as functions of the second argument.
#[derive(Debug, Clone, PartialEq)]
pub struct PiSlices {
    pub p: SampledFunction,
    pub r: SampledFunction,
    pub q: SampledFunction,
    pub k: SampledFunction,
}

impl PiSlices {
    pub fn from_stack(stack: &ConvPowerStack) -> Self {
        let grid = stack.base().grid();
        let integrals = power_integrals(stack);
        let row = kernel_row(stack, &integrals, grid, grid.n());
        let wrap = |v| SampledFunction::from_values_unchecked(grid, v);
        Self {
            p: wrap(row.p),
            r: wrap(row.r),
            q: wrap(row.q),
            k: wrap(row.k),
        }
    }
}

/// The four kernel slices at `x = π` with powers `1..=nu_max`.
pub fn kernels_at_pi(n: &SampledFunction, nu_max: usize) -> Result<PiSlices> {
    Ok(PiSlices::from_stack(&ConvPowerStack::new(n, nu_max)?))
}

/// `S, S', C, C'` at one node from the kernel representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationValues {
    pub s: Complex64,
    pub s_prime: Complex64,
    pub c: Complex64,
    pub c_prime: Complex64,
}

/// Full triangular kernels `P, K, R, Q` built from one `N`.
///
/// These give `S(x,λ)`, `S'(x,λ)`, `C(x,λ)`, `C'(x,λ)` as sine transforms of
/// kernels, independently of the marching solver, and serve as its cross-check.
#[derive(Debug, Clone)]
pub struct RepresentationKernels {
    pub p: TriangularKernel,
    pub k: TriangularKernel,
    pub r: TriangularKernel,
    pub q: TriangularKernel,
}

impl RepresentationKernels {
    pub fn new(n: &SampledFunction, control: SeriesControl) -> Result<Self> {
        Ok(Self::from_stack(&ConvPowerStack::adaptive(n, control)?))
    }

    pub fn from_stack(stack: &ConvPowerStack) -> Self {
        let grid = stack.base().grid();
        let integrals = power_integrals(stack);
        let rows: Vec<KernelRow> = (0..grid.len())
            .into_par_iter()
            .map(|i| kernel_row(stack, &integrals, grid, i))
            .collect();
        let mut p = Vec::with_capacity(rows.len());
        let mut k = Vec::with_capacity(rows.len());
        let mut r = Vec::with_capacity(rows.len());
        let mut q = Vec::with_capacity(rows.len());
        for row in rows {
            p.push(row.p);
            k.push(row.k);
            r.push(row.r);
            q.push(row.q);
        }
        Self {
            p: TriangularKernel::from_rows(grid, p),
            k: TriangularKernel::from_rows(grid, k),
            r: TriangularKernel::from_rows(grid, r),
            q: TriangularKernel::from_rows(grid, q),
        }
    }

    pub fn grid(&self) -> Grid {
        self.p.grid()
    }

    /// `ρ ∫₀^{x_i} kernel(x_i, t) sin ρ(x_i - t) dt`.
    fn sine_transform(&self, kernel: &TriangularKernel, i: usize, sp: SpectralPoint) -> Complex64 {
        let reversed: Vec<Complex64> = kernel.row(i).iter().rev().copied().collect();
        filon_rho_sine(&reversed, self.grid().step(), sp.rho)
    }

    /// `S(x,λ) = K(x,x) - ρ∫₀ˣ K(x,t) sin ρ(x-t) dt`.
    pub fn eval_s(&self, i: usize, sp: SpectralPoint) -> Complex64 {
        self.k.get(i, i) - self.sine_transform(&self.k, i, sp)
    }

    /// `S'(x,λ) = R(x,x) - ρ∫₀ˣ R(x,t) sin ρ(x-t) dt`.
    pub fn eval_s_prime(&self, i: usize, sp: SpectralPoint) -> Complex64 {
        self.r.get(i, i) - self.sine_transform(&self.r, i, sp)
    }

    /// `C(x,λ) = 1 - ρ∫₀ˣ Q(x,t) sin ρ(x-t) dt`.
    pub fn eval_c(&self, i: usize, sp: SpectralPoint) -> Complex64 {
        1.0 - self.sine_transform(&self.q, i, sp)
    }

    /// `C'(x,λ) = -ρ sin ρx - ρ∫₀ˣ P(x,t) sin ρ(x-t) dt`.
    pub fn eval_c_prime(&self, i: usize, sp: SpectralPoint) -> Complex64 {
        let x = self.grid().point(i);
        -sp.rho * (sp.rho * x).sin() - self.sine_transform(&self.p, i, sp)
    }

    /// `S(x,λ) = sin ρx/ρ + ∫₀ˣ P(x,t) sin ρ(x-t)/ρ dt`, the direct transformation-operator form.
    pub fn eval_s_sine_form(&self, i: usize, sp: SpectralPoint) -> Complex64 {
        let grid = self.grid();
        let x = grid.point(i);
        let integrand: Vec<Complex64> = self
            .p
            .row(i)
            .iter()
            .enumerate()
            .map(|(j, v)| v * sin_over(sp.rho, x - grid.point(j)))
            .collect();
        sin_over(sp.rho, x) + trapezoid_slice(&integrand, grid.step(), i)
    }

    pub fn values_at(&self, i: usize, sp: SpectralPoint) -> RepresentationValues {
        RepresentationValues {
            s: self.eval_s(i, sp),
            s_prime: self.eval_s_prime(i, sp),
            c: self.eval_c(i, sp),
            c_prime: self.eval_c_prime(i, sp),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::factorial;
    use std::f64::consts::PI;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    /// Σ a^ν b^{ν-1}/(ν!(ν-1)!), the modified-Bessel-type series for N ≡ 1.
    fn bessel_series(a: f64, b: f64) -> f64 {
        (1..60)
            .map(|nu| a.powi(nu) * b.powi(nu - 1) / (factorial(nu as usize) * factorial(nu as usize - 1)))
            .sum()
    }

    #[test]
    fn kernel_of_zero_is_zero_and_diagonal_vanishes() {
        let g = Grid::new(32).unwrap();
        let zero = SampledFunction::zeros(g);
        assert_eq!(transformation_kernel(&zero, 5).unwrap().max_abs(), 0.0);
        let n = SampledFunction::from_real_fn(g, |x| 1.0 + x.sin());
        let p = transformation_kernel(&n, 20).unwrap();
        for i in 0..=32 {
            assert_eq!(p.get(i, i), re(0.0));
        }
    }

    #[test]
    fn kernel_of_one_matches_bessel_series() {
        let g = Grid::new(256).unwrap();
        let one = SampledFunction::constant(g, re(1.0));
        let p = transformation_kernel(&one, 30).unwrap();
        let mut worst: f64 = 0.0;
        for i in (0..=256).step_by(16) {
            for j in (0..=i).step_by(8) {
                let (x, t) = (g.point(i), g.point(j));
                worst = worst.max((p.get(i, j) - re(bessel_series(x - t, t))).norm());
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn pi_slices_of_zero() {
        let g = Grid::new(16).unwrap();
        let s = kernels_at_pi(&SampledFunction::zeros(g), 4).unwrap();
        assert_eq!(s.p.max_abs(), 0.0);
        for i in 0..=16 {
            assert_eq!(s.r.at(i), re(1.0));
            assert_eq!(s.q.at(i), re(1.0));
            assert!((s.k.at(i) - re(g.point(i))).norm() < 1e-15);
        }
        assert!((s.k.at(16) - re(PI)).norm() < 1e-15);
    }

    #[test]
    fn q_slice_of_one_matches_series() {
        let g = Grid::new(256).unwrap();
        let one = SampledFunction::constant(g, re(1.0));
        let s = kernels_at_pi(&one, 40).unwrap();
        // ∫₀ˣ N^{*ν} = x^ν/ν! for N ≡ 1.
        let oracle = |x: f64| -> f64 {
            1.0 + (1..40)
                .map(|nu| (PI - x).powi(nu) * x.powi(nu) / factorial(nu as usize).powi(2))
                .sum::<f64>()
        };
        let expect = SampledFunction::from_real_fn(g, oracle);
        assert!(s.q.max_diff(&expect).unwrap() < 1e-3);
    }

    #[test]
    fn pi_slice_p_equals_last_kernel_row() {
        let g = Grid::new(64).unwrap();
        let n = SampledFunction::from_fn(g, |x| Complex64::new(x.cos(), 0.5 * x));
        let stack = ConvPowerStack::new(&n, 25).unwrap();
        let p = transformation_kernel_from(&stack);
        let slices = PiSlices::from_stack(&stack);
        for j in 0..=64 {
            assert!((p.get(64, j) - slices.p.at(j)).norm() < 1e-14);
        }
        let full = RepresentationKernels::from_stack(&stack);
        for j in 0..=64 {
            assert!((full.k.get(64, j) - slices.k.at(j)).norm() < 1e-14);
            assert!((full.r.get(64, j) - slices.r.at(j)).norm() < 1e-14);
            assert!((full.q.get(64, j) - slices.q.at(j)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_kernel_gives_classical_solutions() {
        let g = Grid::new(128).unwrap();
        let reps = RepresentationKernels::new(&SampledFunction::zeros(g), SeriesControl::default()).unwrap();
        for &lambda in &[re(4.0), re(-2.0), Complex64::new(1.0, 2.0), re(0.0)] {
            let sp = SpectralPoint::new(lambda);
            for i in [0, 17, 64, 128] {
                let x = g.point(i);
                let v = reps.values_at(i, sp);
                let s_exact = sin_over(sp.rho, x);
                let c_exact = (sp.rho * x).cos();
                assert!((v.s - s_exact).norm() < 1e-12 * (1.0 + s_exact.norm()), "S {lambda} {i}");
                assert!((v.c - c_exact).norm() < 1e-12, "C {lambda} {i}");
                assert!((reps.eval_s_sine_form(i, sp) - s_exact).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn representation_identity_c_equals_one_minus_lambda_integral_s() {
        let g = Grid::new(256).unwrap();
        let n = SampledFunction::from_real_fn(g, |x| 0.5 + 0.3 * x.sin());
        let reps = RepresentationKernels::new(&n, SeriesControl::default()).unwrap();
        for &lambda in &[0.0, 4.0, -9.0] {
            let sp = SpectralPoint::real(lambda);
            let s: Vec<Complex64> = (0..=256).map(|i| reps.eval_s(i, sp)).collect();
            let int_s = cumulative_trapezoid(&s, g.step());
            let worst = (0..=256)
                .map(|i| {
                    let c = reps.eval_c(i, sp);
                    (c - (1.0 - sp.lambda * int_s[i])).norm() / (1.0 + c.norm())
                })
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "lambda {lambda}: {worst}");
        }
    }

    #[test]
    fn sine_form_and_k_form_agree() {
        let g = Grid::new(256).unwrap();
        let n = SampledFunction::from_real_fn(g, |x| x.sin());
        let reps = RepresentationKernels::new(&n, SeriesControl::default()).unwrap();
        for &lambda in &[Complex64::new(9.0, 0.0), Complex64::new(-16.0, 3.0), Complex64::new(25.0, 0.0)] {
            let sp = SpectralPoint::new(lambda);
            for i in [32, 128, 256] {
                let a = reps.eval_s(i, sp);
                let b = reps.eval_s_sine_form(i, sp);
                assert!((a - b).norm() < 2e-3 * (1.0 + b.norm()), "{lambda} {i}: {a} {b}");
            }
        }
    }
}
