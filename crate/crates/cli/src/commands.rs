use std::path::Path;

use convspec_core::forward::{find_spectrum_with, RootOptions, SpectrumSearch};
use convspec_core::inverse::{InverseOptions, InverseSolution};
use convspec_core::io::{read_function, read_spectrum, write_function, write_spectrum, Manifest};
use convspec_core::registry::{algorithm_registry, char_fn_registry, main_solver_registry, root_locator_registry, ForwardInputs};
use convspec_core::volterra::SeriesControl;
use convspec_core::{Error, Grid, Result, SampledFunction, Spectrum};

use crate::report::{digest, eigen_table, Check, RunReport};
use crate::{ForwardArgs, GridArgs, InverseArgs};

/// Manifest with command-line overrides applied.
pub struct Setup {
    pub manifest: Manifest,
}

impl Setup {
    pub fn load(args: &GridArgs, report: &mut RunReport) -> Result<Self> {
        let mut manifest = match &args.manifest {
            Some(path) => {
                report.inputs.insert("manifest", digest(path)?);
                Manifest::read(path)?
            }
            None => Manifest::default(),
        };
        if let Some(n) = args.grid_n {
            manifest.n = n;
        }
        manifest.validate()?;
        report.setting("manifest", &manifest);
        Ok(Self { manifest })
    }

    pub fn grid(&self) -> Result<Grid> {
        self.manifest.grid()
    }

    pub fn control(&self) -> SeriesControl {
        SeriesControl {
            tol: self.manifest.tol,
            nu_cap: self.manifest.nu_max,
        }
    }

    pub fn kernel(&self, path: &Path, report: &mut RunReport) -> Result<SampledFunction> {
        report.inputs.insert("kernel", digest(path)?);
        let m = read_function(path)?;
        self.grid()?.check_same(&m.grid())?;
        Ok(m)
    }
}

fn root_options(locator: &str) -> Result<RootOptions> {
    Ok(RootOptions {
        locator: (root_locator_registry().get(locator)?.make)(),
        ..RootOptions::default()
    })
}

pub fn spectrum_of(
    m: &SampledFunction,
    setup: &Setup,
    char_fn: &str,
    locator: &str,
    last: usize,
) -> Result<SpectrumSearch> {
    let inputs = ForwardInputs {
        m,
        bc: setup.manifest.boundary()?,
        control: setup.control(),
    };
    let f = (char_fn_registry().get(char_fn)?.make)(&inputs)?;
    find_spectrum_with(f.as_ref(), last, &root_options(locator)?)
}

fn disc_warning(search: &SpectrumSearch) -> Option<String> {
    let outside = search.outside_disc();
    (!outside.is_empty()).then(|| format!("eigenvalues outside their localization disc |rho - k| <= 1/2: k = {outside:?}"))
}

pub fn forward(args: &ForwardArgs, out: &Path) -> Result<RunReport> {
    let mut report = RunReport::new("forward");
    let setup = Setup::load(&args.grid, &mut report)?;
    let m = setup.kernel(&args.kernel, &mut report)?;
    let last = args.num_eigs.unwrap_or(setup.manifest.num_eigs);
    report.setting("num_eigs", last);
    report.setting("char_fn", &args.char_fn);
    report.setting("locator", &args.locator);
    let search = spectrum_of(&m, &setup, &args.char_fn, &args.locator, last)?;
    report.warnings.extend(disc_warning(&search));
    let max_residual = search.roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    report.result("max_residual", max_residual);
    report.result("kappa_tail_increase", search.spectrum.kappa_tail_increase(20));
    write_spectrum(&search.spectrum, out)?;
    report.outputs.insert("spectrum", digest(out)?);
    report.eigenvalues = eigen_table(&search.spectrum, Some(&search.roots));
    Ok(report)
}

fn inverse_options(setup: &Setup, locator: &str, consistency_tol: f64) -> Result<InverseOptions> {
    let mut opts = InverseOptions::new(setup.grid()?);
    opts.nu_max = setup.manifest.nu_max;
    opts.root = root_options(locator)?;
    opts.consistency_tol = (consistency_tol > 0.0).then_some(consistency_tol);
    Ok(opts)
}

fn run_inverse(
    algorithm: &str,
    solver: &str,
    s: &Spectrum,
    setup: &Setup,
    opts: &InverseOptions,
) -> Result<InverseSolution> {
    let algo = (algorithm_registry().get(algorithm)?.make)();
    let solver = (main_solver_registry().get(solver)?.make)();
    algo.run(s, Some(setup.manifest.boundary()?), opts, solver.as_ref())
}

fn record_solution(report: &mut RunReport, sol: &InverseSolution) {
    report.result("h", [sol.bc.h.re, sol.bc.h.im]);
    report.result("H", [sol.bc.big_h.re, sol.bc.big_h.im]);
    if let Some(h) = sol.h_recovered {
        report.result("H_recovered", [h.re, h.im]);
    }
    report.result("diagnostics", &sol.diagnostics);
    report.warnings.extend(sol.warnings.iter().cloned());
}

pub fn inverse(args: &InverseArgs, recover_h: bool) -> Result<RunReport> {
    let command = if recover_h { "inverse2" } else { "inverse1" };
    let mut report = RunReport::new(command);
    let setup = Setup::load(&args.grid, &mut report)?;
    if !recover_h && args.grid.manifest.is_none() {
        return Err(Error::InvalidArgument("inverse1 needs --manifest with h and H".into()));
    }
    report.inputs.insert("spectrum", digest(&args.spectrum)?);
    let s = read_spectrum(&args.spectrum)?;
    let algorithm = if recover_h { "algorithm-2" } else { "algorithm-1" };
    report.setting("algorithm", algorithm);
    report.setting("solver", &args.solver);
    let opts = inverse_options(&setup, &args.locator, args.consistency_tol)?;
    let sol = run_inverse(algorithm, &args.solver, &s, &setup, &opts)?;
    record_solution(&mut report, &sol);
    write_function(&sol.m, &args.out)?;
    report.outputs.insert("kernel", digest(&args.out)?);
    report.eigenvalues = eigen_table(&s, None);
    Ok(report)
}

/// L2 norm of `f` on `[0, x_upto]`.
fn l2(f: &SampledFunction, upto: usize) -> Result<f64> {
    f.l2_norm_upto(upto)
}

pub fn roundtrip(
    args: &ForwardArgs,
    algorithm: &str,
    solver: &str,
    kernel_tol: f64,
    spectrum_tol: f64,
    out: Option<&Path>,
) -> Result<RunReport> {
    let mut report = RunReport::new("roundtrip");
    let setup = Setup::load(&args.grid, &mut report)?;
    let m = setup.kernel(&args.kernel, &mut report)?;
    let last = args.num_eigs.unwrap_or(setup.manifest.num_eigs);
    for (k, v) in [("num_eigs", last.to_string()), ("char_fn", args.char_fn.clone()), ("locator", args.locator.clone())] {
        report.setting(k, v);
    }
    report.setting("algorithm", algorithm);
    report.setting("solver", solver);

    let first = spectrum_of(&m, &setup, &args.char_fn, &args.locator, last)?;
    report.warnings.extend(disc_warning(&first));
    let opts = inverse_options(&setup, &args.locator, 0.0)?;
    let sol = run_inverse(algorithm, solver, &first.spectrum, &setup, &opts)?;
    record_solution(&mut report, &sol);

    let upto = (0.9 * setup.manifest.n as f64).floor() as usize;
    let diff = sol.m.add(&m.scale((-1.0).into()))?;
    let kernel_err = l2(&diff, upto)? / l2(&m, upto)?.max(1.0);
    report.checks.push(Check::at_most("kernel_l2_error", kernel_err, kernel_tol).with_note("on [0, 0.9pi], relative to max(1, |M|)"));

    let mut recovered = Setup {
        manifest: setup.manifest.clone(),
    };
    recovered.manifest.h = [sol.bc.h.re, sol.bc.h.im];
    recovered.manifest.big_h = [sol.bc.big_h.re, sol.bc.big_h.im];
    let second = spectrum_of(&sol.m, &recovered, &args.char_fn, &args.locator, last)?;
    let deviation = first
        .spectrum
        .values()
        .iter()
        .zip(second.spectrum.values())
        .map(|(a, b)| (a - b).norm() / (1.0 + a.norm()))
        .fold(0.0, f64::max);
    report.checks.push(Check::at_most("spectrum_max_deviation", deviation, spectrum_tol).with_note("max_k |lambda_k - lambda_k'| / (1 + |lambda_k|)"));

    if let Some(path) = out {
        write_function(&sol.m, path)?;
        report.outputs.insert("kernel", digest(path)?);
    }
    report.eigenvalues = eigen_table(&first.spectrum, Some(&first.roots));
    Ok(report)
}
