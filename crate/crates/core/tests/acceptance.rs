//! End-to-end acceptance checks at desk scale (n = 512, K = 100 unless stated).
//!
//! Runs as a plain binary so the table is printed on every `cargo test`. The process
//! fails when a check fails that is not listed in `KNOWN_UNATTAINABLE`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use convspec_core::forward::{
    find_spectrum_with, solve_ivp, CharFnModel, CharacteristicFunction, DirectCharFn,
    IvpScheme, RootOptions,
};
use convspec_core::grid::cumulative_trapezoid;
use convspec_core::inverse::{algorithm_1, algorithm_2, evaluate_main_rhs, solve_main_equation, InverseOptions, MainEquationData};
use convspec_core::reconstruction::{alpha_from_spectrum, product_char_fn, product_ratio, ProductTail, TailPolicy};
use convspec_core::volterra::{m_to_n, SeriesControl};
use convspec_core::{BoundaryCoefficients, Grid, SampledFunction, SpectralPoint, Spectrum};
use num_complex::Complex64;

const N: usize = 512;
const K: usize = 100;

/// Checks that cannot pass as stated; the reason is printed with the result.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    4,
    "kappa_k ~ omega/(2k) whenever lambda_k - k^2 -> omega != 0, so the last 20 terms add about omega^2/1600",
)];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

/// Spectra computed along the way, for the asymptotics check.
struct Collected {
    spectra: Vec<(String, Spectrum)>,
}

fn forward_spectrum(m: &SampledFunction, bc: BoundaryCoefficients, last: usize) -> Spectrum {
    let model = CharFnModel::from_memory_kernel(m, bc, SeriesControl::default()).unwrap();
    find_spectrum_with(&model, last, &RootOptions::default()).unwrap().spectrum
}

fn robin_root(k: usize) -> f64 {
    let f = |r: f64| -r * (r * PI).sin() + (r * PI).cos();
    let (mut a, mut b) = (k as f64, k as f64 + 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(a) * f(mid) <= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

fn classical_limit(col: &mut Collected) -> Outcome {
    let s = forward_spectrum(&SampledFunction::zeros(grid(N)), BoundaryCoefficients::real(0.0, 0.0), K);
    let worst = s
        .values()
        .iter()
        .enumerate()
        .map(|(k, l)| (l - c((k * k) as f64)).norm() / (1.0 + (k * k) as f64))
        .fold(0.0, f64::max);
    col.spectra.push(("M=0 h=0 H=0".into(), s));
    Outcome {
        id: 1,
        title: "classical limit",
        pass: worst <= 1e-6,
        detail: format!("max |lambda_k - k^2|/(1+k^2) = {worst:.2e} (limit 1e-6)"),
    }
}

fn robin_case(col: &mut Collected) -> Outcome {
    let s = forward_spectrum(&SampledFunction::zeros(grid(N)), BoundaryCoefficients::real(0.0, 1.0), 200);
    let root_err = (0..=50)
        .map(|k| {
            let rho = convspec_core::spectrum::canonical_root(s.lambda(k));
            (rho - c(robin_root(k))).norm()
        })
        .fold(0.0, f64::max);
    let alpha = alpha_from_spectrum(&s, &ProductTail::fitted(&s)).alpha;
    let alpha_err = (alpha - 1.0).norm();
    col.spectra.push(("M=0 h=0 H=1".into(), s.truncated(K).unwrap()));
    Outcome {
        id: 2,
        title: "closed-form Robin case",
        pass: root_err <= 1e-8 && alpha_err <= 1e-3,
        detail: format!("max |d rho| (k <= 50) = {root_err:.2e} (limit 1e-8); |alpha - 1| (K = 200) = {alpha_err:.2e} (limit 1e-3)"),
    }
}

type Kernel = (&'static str, fn(f64) -> Complex64);

fn kernels() -> Vec<Kernel> {
    vec![("x/2", |x| c(x / 2.0)), ("1", |_| c(1.0)), ("sin x", |x| c(x.sin()))]
}

fn four_bcs() -> Vec<BoundaryCoefficients> {
    vec![
        BoundaryCoefficients::real(0.0, 0.0),
        BoundaryCoefficients::real(0.0, 1.0),
        BoundaryCoefficients::real(1.0, -0.5),
        BoundaryCoefficients::new(Complex64::new(0.0, 1.0), c(0.3)).unwrap(),
    ]
}

/// 20 points `λ = σ²` with `|λ| ≤ 25` and `|Im σ| ≤ 1`.
fn strip_samples() -> Vec<Complex64> {
    (0..20)
        .map(|j| {
            let b = (1.7 * j as f64).sin();
            let a = (25.0 - b * b).sqrt() * (j as f64 + 0.5) / 20.0;
            let sigma = Complex64::new(a, b);
            sigma * sigma
        })
        .collect()
}

/// 20 points spread over the whole disc `|λ| ≤ 25`.
fn disc_samples() -> Vec<Complex64> {
    (0..20)
        .map(|j| Complex64::from_polar(25.0 * ((j % 5) as f64 + 1.0) / 5.0, 2.0 * PI * j as f64 / 20.0 + 0.3))
        .collect()
}

fn two_path(n: usize, samples: &[Complex64], relative: bool) -> f64 {
    let g = grid(n);
    let mut worst: f64 = 0.0;
    for (_, mf) in kernels() {
        let m = SampledFunction::from_fn(g, mf);
        for bc in four_bcs() {
            let model = CharFnModel::from_memory_kernel(&m, bc, SeriesControl::default()).unwrap();
            let direct = DirectCharFn::new(m.clone(), bc, IvpScheme::Richardson);
            for &l in samples {
                let sp = SpectralPoint::new(l);
                let a = direct.eval(sp).unwrap();
                let b = model.eval(sp).unwrap();
                let scale = if relative { 1.0 + a.norm() } else { 1.0 };
                worst = worst.max((a - b).norm() / scale);
            }
        }
    }
    worst
}

fn two_path_consistency() -> Outcome {
    let samples = strip_samples();
    let coarse = two_path(N, &samples, false);
    let fine = two_path(2 * N, &samples, false);
    let disc = two_path(N, &disc_samples(), true);
    let disc_abs = two_path(N, &disc_samples(), false);
    Outcome {
        id: 3,
        title: "two-path characteristic function",
        pass: coarse <= 5e-4 && fine <= 1.3e-4,
        detail: format!(
            "max |D_direct - D_model| = {coarse:.2e} at n = 512 (limit 5e-4), {fine:.2e} at n = 1024 (limit 1.3e-4), ratio {:.2}; spread over the whole disc: {disc_abs:.2e} absolute, {disc:.2e} relative to 1+|D|",
            coarse / fine
        ),
    }
}

fn asymptotics(col: &Collected) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failing = Vec::new();
    for (name, s) in &col.spectra {
        let last = s.last_index().min(K);
        let inc = s.truncated(last).unwrap().kappa_tail_increase(20);
        worst = worst.max(inc);
        if inc >= 1e-6 {
            failing.push(format!("{name}: {inc:.1e}"));
        }
    }
    Outcome {
        id: 4,
        title: "asymptotics of kappa_k",
        pass: failing.is_empty(),
        detail: format!(
            "{} spectra, worst increase of sum |kappa_k|^2 over the last 20 terms = {worst:.2e} (limit 1e-6); above limit: [{}]",
            col.spectra.len(),
            failing.join("; ")
        ),
    }
}

fn main_equation() -> Outcome {
    let g = grid(N);
    let tests: Vec<(&str, SampledFunction)> = vec![
        ("0", SampledFunction::zeros(g)),
        ("1", SampledFunction::constant(g, c(1.0))),
        ("x", SampledFunction::from_real_fn(g, |x| x)),
        ("sin x", SampledFunction::from_real_fn(g, f64::sin)),
        ("0.5 e^{ix}", SampledFunction::from_fn(g, |x| 0.5 * Complex64::new(0.0, x).exp())),
    ];
    let nu_max = 60;
    let mut worst: f64 = 0.0;
    for (_, n) in &tests {
        for bc in four_bcs() {
            let f = evaluate_main_rhs(n, bc, nu_max).unwrap();
            let sol = solve_main_equation(&MainEquationData::new(f, bc, nu_max).unwrap()).unwrap();
            worst = worst.max(sol.n.max_diff_upto(n, g.n() - 1).unwrap());
        }
    }
    Outcome {
        id: 5,
        title: "main-equation invertibility",
        pass: worst <= 1e-4,
        detail: format!("max error over 5 kernels x 4 boundary pairs = {worst:.2e} (limit 1e-4)"),
    }
}

fn relative_l2(a: &SampledFunction, b: &SampledFunction, upto: usize) -> f64 {
    a.l2_diff_upto(b, upto).unwrap() / b.l2_norm_upto(upto).unwrap()
}

fn algorithm_one_round_trip(col: &mut Collected) -> Outcome {
    let g = grid(N);
    let upto = (0.9 * N as f64).floor() as usize;
    let cases = [
        ("x/2", BoundaryCoefficients::real(0.0, 0.3)),
        ("x/2", BoundaryCoefficients::real(1.0, 1.0)),
        ("1", BoundaryCoefficients::real(1.0, 1.0)),
        ("1", BoundaryCoefficients::new(Complex64::new(0.0, 1.0), c(0.3)).unwrap()),
    ];
    let mut pass = true;
    let mut rows = Vec::new();
    for (name, bc) in cases {
        let mf = kernels().into_iter().find(|(n, _)| *n == name).unwrap().1;
        let m = SampledFunction::from_fn(g, mf);
        let s = forward_spectrum(&m, bc, K);
        let mut opts = InverseOptions::new(g);
        opts.consistency_tol = None;
        let errs: Vec<f64> = [25, 50, 100]
            .iter()
            .map(|&k| relative_l2(&algorithm_1(&s.truncated(k).unwrap(), bc, &opts).unwrap().m, &m, upto))
            .collect();
        let monotone = errs.windows(2).all(|w| w[1] < w[0]);
        pass &= monotone && errs[2] <= 1e-2;
        rows.push(format!("M={name} (h,H)=({},{}): {:.1e}/{:.1e}/{:.1e}", bc.h, bc.big_h, errs[0], errs[1], errs[2]));
        col.spectra.push((format!("M={name} h={} H={}", bc.h, bc.big_h), s));
    }
    Outcome {
        id: 6,
        title: "Algorithm 1 round trip",
        pass,
        detail: format!("relative L2 error on [0, 0.9pi] for K = 25/50/100 (limit 1e-2, decreasing): {}", rows.join("; ")),
    }
}

fn algorithm_two_synthesis(col: &mut Collected) -> Outcome {
    let g = grid(N);
    let last = 50;
    let mut values: Vec<Complex64> = (0..=last).map(|k| c((k * k) as f64)).collect();
    for (k, d) in [(0, 0.08), (1, -0.05), (2, 0.1), (3, 0.06), (4, -0.09)] {
        values[k] += d;
    }
    let s = Spectrum::new(values).unwrap();
    let mut opts = InverseOptions::new(g);
    opts.consistency_tol = None;
    let sol = algorithm_2(&s, &opts).unwrap();
    let h_rec = sol.h_recovered.unwrap();
    let alpha = alpha_from_spectrum(&s, &ProductTail::fitted(&s)).alpha;
    let fwd = forward_spectrum(&sol.m, sol.bc, last);
    let dev = s
        .values()
        .iter()
        .zip(fwd.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    col.spectra.push(("Algorithm 2 synthesis".into(), fwd));
    Outcome {
        id: 7,
        title: "Algorithm 2 synthesis",
        pass: dev <= 1e-3 && h_rec == alpha,
        detail: format!("max_k |lambda_fwd - lambda| (k <= 50) = {dev:.2e} (limit 1e-3); H = {h_rec:.6}, identical to alpha: {}", h_rec == alpha),
    }
}

fn product_fidelity() -> Outcome {
    let g = grid(N);
    let bc = BoundaryCoefficients::real(0.0, 1.0);
    let m = SampledFunction::zeros(g);
    let full = forward_spectrum(&m, bc, 200);
    let direct = DirectCharFn::new(m, bc, IvpScheme::Richardson);
    let lambdas = [-1.0, -10.0, 2.5, 6.3];
    let closed = |l: f64| {
        let rho = SpectralPoint::real(l).rho;
        -rho * (rho * PI).sin() + (rho * PI).cos()
    };
    let mut pass = true;
    let mut rows = Vec::new();
    let mut against_closed = Vec::new();
    for k in [50, 100, 200] {
        let s = full.truncated(k).unwrap();
        let tail = ProductTail::with_policy(&s, TailPolicy::Fitted);
        let mut worst: f64 = 0.0;
        let mut worst_closed: f64 = 0.0;
        for &l in &lambdas {
            let sp = SpectralPoint::real(l);
            let p = product_char_fn(&s, &tail, sp);
            worst = worst.max((p - direct.eval(sp).unwrap()).norm() / (1.0 + l.abs()));
            worst_closed = worst_closed.max((p - closed(l)).norm() / (1.0 + l.abs()));
        }
        rows.push(format!("K={k}: {worst:.1e}"));
        against_closed.push(worst_closed);
        if k == 200 {
            pass &= worst <= 1e-2;
        }
    }
    let improving = against_closed.windows(2).all(|w| w[1] < w[0]);
    let s = full.truncated(200).unwrap();
    let ratio = (product_ratio(&s, &ProductTail::fitted(&s), SpectralPoint::real(-1e4)) - 1.0).norm();
    pass &= improving && ratio <= 5e-2;
    Outcome {
        id: 8,
        title: "product-formula fidelity",
        pass,
        detail: format!(
            "max |D_product - D_direct|/(1+|lambda|): {} (limit 1e-2 at K = 200); against the closed form {:.1e}/{:.1e}/{:.1e}, improving: {improving}; |F(-1e4) - 1| = {ratio:.2e} (limit 5e-2)",
            rows.join(", "),
            against_closed[0],
            against_closed[1],
            against_closed[2]
        ),
    }
}

fn c_identity() -> Outcome {
    let g = grid(N);
    let m = SampledFunction::constant(g, c(1.0));
    let mut worst: f64 = 0.0;
    for l in [0.0, 4.0, -9.0] {
        let sp = SpectralPoint::real(l);
        let cs = solve_ivp(&m, c(1.0), c(0.0), sp).unwrap();
        let ss = solve_ivp(&m, c(0.0), c(1.0), sp).unwrap();
        let int_s = cumulative_trapezoid(ss.y.values(), g.step());
        for (c, i) in cs.y.values().iter().zip(&int_s) {
            worst = worst.max((c - (1.0 - sp.lambda * i)).norm());
        }
    }
    // The kernel representation of the same identity, for reference.
    let n = m_to_n(&m).unwrap();
    let reps = convspec_core::volterra::RepresentationKernels::new(&n, SeriesControl::default()).unwrap();
    let sp = SpectralPoint::real(4.0);
    let s_vals: Vec<Complex64> = (0..=g.n()).map(|i| reps.eval_s(i, sp)).collect();
    let int_rep = cumulative_trapezoid(&s_vals, g.step());
    let rep = (0..=g.n())
        .map(|i| (reps.eval_c(i, sp) - (1.0 - sp.lambda * int_rep[i])).norm())
        .fold(0.0, f64::max);
    Outcome {
        id: 9,
        title: "C = 1 - lambda int S",
        pass: worst <= 1e-6,
        detail: format!("max over grid and lambda in {{0, 4, -9}} = {worst:.2e} (limit 1e-6); kernel representation at lambda = 4: {rep:.1e}"),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut col = Collected { spectra: Vec::new() };
    let mut outcomes = vec![
        classical_limit(&mut col),
        robin_case(&mut col),
        two_path_consistency(),
    ];
    let deferred_at = outcomes.len();
    outcomes.push(main_equation());
    outcomes.push(algorithm_one_round_trip(&mut col));
    outcomes.push(algorithm_two_synthesis(&mut col));
    outcomes.push(product_fidelity());
    outcomes.push(c_identity());
    outcomes.insert(deferred_at, asymptotics(&col));

    let mut unexpected = 0;
    println!();
    for o in &outcomes {
        let known = KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == o.id);
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("[{}] {status} {}: {}", o.id, o.title, o.detail);
        if !o.pass {
            match known {
                Some((_, why)) => println!("      known unattainable: {why}"),
                None => unexpected += 1,
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed ({} unexpected) in {:.1}s",
        outcomes.iter().filter(|o| o.pass).count(),
        outcomes.iter().filter(|o| !o.pass).count(),
        unexpected,
        start.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
