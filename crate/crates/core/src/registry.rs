//! Named strategies selectable at run time.

use crate::error::{Error, Result};
use crate::forward::{CharFnModel, CharacteristicFunction, DirectCharFn, IvpScheme, RootLocator};
use crate::grid::SampledFunction;
use crate::inverse::{AffineMarching, AlgorithmOne, AlgorithmTwo, FixedPointMarching, InverseAlgorithm, MainEquationSolver};
use crate::spectrum::BoundaryCoefficients;
use crate::volterra::SeriesControl;

pub struct Entry<T> {
    pub name: &'static str,
    pub summary: &'static str,
    pub make: T,
}

pub struct Registry<T> {
    kind: &'static str,
    default: &'static str,
    entries: Vec<Entry<T>>,
}

impl<T> Registry<T> {
    pub fn new(kind: &'static str, default: &'static str) -> Self {
        Self {
            kind,
            default,
            entries: Vec::new(),
        }
    }

    pub fn register(mut self, name: &'static str, summary: &'static str, make: T) -> Self {
        self.entries.retain(|e| e.name != name);
        self.entries.push(Entry { name, summary, make });
        self
    }

    pub fn get(&self, name: &str) -> Result<&Entry<T>> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn default_name(&self) -> &'static str {
        self.default
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }
}

/// What a characteristic-function evaluator is built from.
pub struct ForwardInputs<'a> {
    pub m: &'a SampledFunction,
    pub bc: BoundaryCoefficients,
    pub control: SeriesControl,
}

pub type CharFnFactory = fn(&ForwardInputs) -> Result<Box<dyn CharacteristicFunction>>;

fn model(inputs: &ForwardInputs) -> Result<Box<dyn CharacteristicFunction>> {
    Ok(Box::new(CharFnModel::from_memory_kernel(inputs.m, inputs.bc, inputs.control)?))
}

fn direct(inputs: &ForwardInputs) -> Result<Box<dyn CharacteristicFunction>> {
    Ok(Box::new(DirectCharFn::new(inputs.m.clone(), inputs.bc, IvpScheme::Trapezoid)))
}

fn direct_richardson(inputs: &ForwardInputs) -> Result<Box<dyn CharacteristicFunction>> {
    Ok(Box::new(DirectCharFn::new(inputs.m.clone(), inputs.bc, IvpScheme::Richardson)))
}

pub fn char_fn_registry() -> Registry<CharFnFactory> {
    Registry::new("characteristic function", "model")
        .register("model", "alpha and w from the kernel slices, piecewise-linear sine transform", model as CharFnFactory)
        .register("direct", "trapezoid marching of the initial-value problem", direct)
        .register("direct-richardson", "marching on n and n/2 nodes, Richardson-extrapolated", direct_richardson)
}

pub type LocatorFactory = fn() -> RootLocator;

pub fn root_locator_registry() -> Registry<LocatorFactory> {
    Registry::new("root locator", "auto")
        .register("auto", "Newton, continuation where Newton leaves its disc", (|| RootLocator::Auto) as LocatorFactory)
        .register("newton", "Newton from the unperturbed zero only", || RootLocator::Newton)
        .register("continuation", "homotopy from the unperturbed problem", || RootLocator::Continuation)
}

pub type SolverFactory = fn() -> Box<dyn MainEquationSolver>;

pub fn main_solver_registry() -> Registry<SolverFactory> {
    Registry::new("main-equation solver", "marching-affine")
        .register("marching-affine", "exact solve of the affine node equation", (|| Box::new(AffineMarching) as Box<dyn MainEquationSolver>) as SolverFactory)
        .register("marching-fixed-point", "damped fixed-point iteration with Newton fallback", || Box::new(FixedPointMarching::default()))
}

pub type AlgorithmFactory = fn() -> Box<dyn InverseAlgorithm>;

pub fn algorithm_registry() -> Registry<AlgorithmFactory> {
    Registry::new("inverse algorithm", "algorithm-1")
        .register("algorithm-1", "known h and H", (|| Box::new(AlgorithmOne) as Box<dyn InverseAlgorithm>) as AlgorithmFactory)
        .register("algorithm-2", "h = 0, H recovered as alpha", || Box::new(AlgorithmTwo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::spectrum::SpectralPoint;

    #[test]
    fn unknown_name_lists_alternatives() {
        let err = char_fn_registry().get("spline").err().unwrap();
        let text = err.to_string();
        assert!(text.contains("spline") && text.contains("direct-richardson"), "{text}");
        assert!(err.is_input_error());
    }

    #[test]
    fn every_char_fn_agrees_on_free_problem() {
        let g = Grid::new(256).unwrap();
        let m = SampledFunction::zeros(g);
        let inputs = ForwardInputs {
            m: &m,
            bc: BoundaryCoefficients::real(0.0, 1.0),
            control: SeriesControl::default(),
        };
        let reg = char_fn_registry();
        let sp = SpectralPoint::real(2.0);
        let values: Vec<_> = reg
            .entries()
            .iter()
            .map(|e| {
                let f = (e.make)(&inputs).unwrap();
                assert_eq!(f.name(), e.name);
                f.eval(sp).unwrap()
            })
            .collect();
        for v in &values {
            assert!((v - values[0]).norm() < 1e-3, "{values:?}");
        }
    }

    #[test]
    fn names_match_strategies() {
        for e in main_solver_registry().entries() {
            assert_eq!((e.make)().name(), e.name);
        }
        for e in algorithm_registry().entries() {
            assert_eq!((e.make)().name(), e.name);
        }
        let reg = root_locator_registry();
        assert_eq!((reg.get(reg.default_name()).unwrap().make)(), RootLocator::Auto);
    }

    #[test]
    fn later_registration_replaces() {
        let reg = Registry::new("demo", "a").register("a", "first", 1).register("a", "second", 2);
        assert_eq!(reg.names(), vec!["a"]);
        assert_eq!(reg.get("a").unwrap().make, 2);
    }
}
