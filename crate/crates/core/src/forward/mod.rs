//! Forward problem: from `(M, h, H)` to `Δ(λ)` and its zeros.

mod charfn;
mod ivp;
mod roots;

pub use charfn::{
    char_fn_direct, char_fn_from_model, char_fn_model_from_kernel, rho_sine_transform, unperturbed_char_fn,
    CharFnModel, CharacteristicFunction, DirectCharFn, IvpScheme, ModelProvenance,
};
pub use ivp::{solve_ivp, IvpSolution};
pub use roots::{find_spectrum_with, RootLocator, RootMethod, RootOptions, RootReport, SpectrumSearch};
