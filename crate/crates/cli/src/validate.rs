use std::path::Path;

use clap::Args;
use convspec_core::forward::{solve_ivp, CharFnModel, CharacteristicFunction, DirectCharFn, IvpScheme};
use convspec_core::grid::cumulative_trapezoid;
use convspec_core::reconstruction::{ProductCharFn, TailPolicy};
use convspec_core::{BoundaryCoefficients, Error, Result, SampledFunction, SpectralPoint};
use num_complex::Complex64;

use crate::commands::{spectrum_of, Setup};
use crate::report::{Check, RunReport};
use crate::GridArgs;

#[derive(Args, Clone)]
pub struct Limits {
    /// V-form marching against the C/S decomposition, relative to 1 + |Delta|.
    #[arg(long, default_value_t = 1e-8)]
    pub decomposition_tol: f64,
    /// max |C - (1 - lambda int S)| relative to 1 + max|C|.
    #[arg(long, default_value_t = 1e-4)]
    pub identity_tol: f64,
    /// Richardson-extrapolated marching against the kernel model, relative to 1 + |Delta|.
    #[arg(long, default_value_t = 1e-3)]
    pub model_tol: f64,
    /// Product formula against the kernel model, relative to 1 + |lambda|.
    #[arg(long, default_value_t = 1e-2)]
    pub product_tol: f64,
    /// Smallest accepted ratio of the trapezoid-marching discrepancy at n/2 and at n.
    #[arg(long, default_value_t = 3.0)]
    pub min_order_ratio: f64,
    /// Discrepancies below this count as resolved for the order check.
    #[arg(long, default_value_t = 1e-9)]
    pub resolved_floor: f64,
}

/// Points `λ = σ²` with `|λ| ≤ 25` and `|Im σ| ≤ 1`.
fn samples() -> Vec<SpectralPoint> {
    (0..12)
        .map(|j| {
            let b = (1.7 * j as f64).sin();
            let a = (25.0 - b * b).sqrt() * (j as f64 + 0.5) / 12.0;
            let sigma = Complex64::new(a, b);
            SpectralPoint::new(sigma * sigma)
        })
        .collect()
}

fn model_discrepancy(m: &SampledFunction, bc: BoundaryCoefficients, setup: &Setup, scheme: IvpScheme) -> Result<f64> {
    let model = CharFnModel::from_memory_kernel(m, bc, setup.control())?;
    let direct = DirectCharFn::new(m.clone(), bc, scheme);
    let mut worst: f64 = 0.0;
    for sp in samples() {
        let d = direct.eval(sp)?;
        worst = worst.max((d - model.eval(sp)?).norm() / (1.0 + d.norm()));
    }
    Ok(worst)
}

pub fn run(grid: &GridArgs, kernel: &Path, limits: &Limits) -> Result<RunReport> {
    let mut report = RunReport::new("validate");
    let setup = Setup::load(grid, &mut report)?;
    let m = setup.kernel(kernel, &mut report)?;
    if setup.manifest.n % 2 != 0 {
        return Err(Error::InvalidArgument("validate needs an even n for the order check".into()));
    }
    let bc = setup.manifest.boundary()?;

    let plain = DirectCharFn::new(m.clone(), bc, IvpScheme::Trapezoid);
    let mut worst: f64 = 0.0;
    for sp in samples() {
        let v = plain.eval(sp)?;
        worst = worst.max((v - plain.decomposed(sp)?).norm() / (1.0 + v.norm()));
    }
    report.checks.push(Check::at_most("v_form_vs_decomposition", worst, limits.decomposition_tol));

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 4.0, -9.0] {
        let sp = SpectralPoint::real(lambda);
        let c = solve_ivp(&m, one, zero, sp)?.y;
        let s = solve_ivp(&m, zero, one, sp)?.y;
        let int_s = cumulative_trapezoid(s.values(), m.grid().step());
        let diff = c
            .values()
            .iter()
            .zip(&int_s)
            .map(|(c, i)| (c - (1.0 - sp.lambda * i)).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff / (1.0 + c.max_abs()));
    }
    report.checks.push(Check::at_most("c_identity", worst, limits.identity_tol));

    let extrapolated = model_discrepancy(&m, bc, &setup, IvpScheme::Richardson)?;
    report.checks.push(Check::at_most("direct_vs_model", extrapolated, limits.model_tol));
    let fine = model_discrepancy(&m, bc, &setup, IvpScheme::Trapezoid)?;
    let coarse = model_discrepancy(&m.subsample(2)?, bc, &setup, IvpScheme::Trapezoid)?;
    report.result("trapezoid_discrepancy", fine);
    let ratio = coarse / fine;
    report.result("trapezoid_discrepancy_half_grid", coarse);
    let mut order = Check {
        name: "order_ratio".into(),
        measured: ratio,
        limit: limits.min_order_ratio,
        pass: ratio >= limits.min_order_ratio || fine <= limits.resolved_floor,
        note: Some("trapezoid marching against the model, discrepancy at n/2 over discrepancy at n".into()),
    };
    if fine <= limits.resolved_floor {
        order.note = Some("discrepancy at n is below the resolved floor".into());
    }
    report.checks.push(order);

    let search = spectrum_of(&m, &setup, "model", "auto", setup.manifest.num_eigs)?;
    let product = ProductCharFn::new(search.spectrum, TailPolicy::Fitted);
    let model = CharFnModel::from_memory_kernel(&m, bc, setup.control())?;
    let mut worst: f64 = 0.0;
    for lambda in [-10.0, -1.0, 2.5, 6.3] {
        let sp = SpectralPoint::real(lambda);
        worst = worst.max((product.eval(sp)? - model.eval(sp)?).norm() / (1.0 + lambda.abs()));
    }
    report.checks.push(Check::at_most("product_vs_model", worst, limits.product_tol));
    Ok(report)
}
