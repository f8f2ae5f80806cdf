//! Spectral parameter, boundary data and eigenvalue sequences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Robin coefficients `(h, H)` of `y'(0) - h y(0) = 0`, `y'(π) + H y(π) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoefficients {
    pub h: Complex64,
    #[serde(rename = "H")]
    pub big_h: Complex64,
}

impl BoundaryCoefficients {
    pub fn new(h: Complex64, big_h: Complex64) -> Result<Self> {
        if !h.is_finite() || !big_h.is_finite() {
            return Err(Error::InvalidArgument(
                "boundary coefficients must be finite".into(),
            ));
        }
        Ok(Self { h, big_h })
    }

    pub fn real(h: f64, big_h: f64) -> Self {
        Self {
            h: Complex64::new(h, 0.0),
            big_h: Complex64::new(big_h, 0.0),
        }
    }

    pub fn dirichlet_free() -> Self {
        Self::real(0.0, 0.0)
    }
}

/// `λ` together with the root `ρ`, `ρ² = λ`.
///
/// The canonical branch has `Re ρ ≥ 0`, and `Im ρ ≥ 0` when `Re ρ = 0`. Every
/// characteristic-function evaluation is even in `ρ`, so [`SpectralPoint::with_root`]
/// may carry the opposite root as well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub rho: Complex64,
}

impl SpectralPoint {
    pub fn new(lambda: Complex64) -> Self {
        Self {
            lambda,
            rho: canonical_root(lambda),
        }
    }

    pub fn real(lambda: f64) -> Self {
        Self::new(Complex64::new(lambda, 0.0))
    }

    /// Point from a root on the canonical branch.
    pub fn from_rho(rho: Complex64) -> Self {
        let rho = if rho.re < 0.0 || (rho.re == 0.0 && rho.im < 0.0) {
            -rho
        } else {
            rho
        };
        Self {
            lambda: rho * rho,
            rho,
        }
    }

    /// Point carrying exactly the given root, whichever branch it is on.
    pub fn with_root(rho: Complex64) -> Self {
        Self {
            lambda: rho * rho,
            rho,
        }
    }

    pub fn negated(&self) -> Self {
        Self::with_root(-self.rho)
    }
}

pub fn canonical_root(lambda: Complex64) -> Complex64 {
    let r = lambda.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

/// Eigenvalues `λ_0, …, λ_K`, indexed densely from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a spectrum needs K >= 1 (at least two eigenvalues), got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "spectrum",
                index,
            });
        }
        Ok(Self { values })
    }

    /// `λ_k = k²`, `k = 0..=last`.
    pub fn unperturbed(last: usize) -> Self {
        Self {
            values: (0..=last)
                .map(|k| Complex64::new((k * k) as f64, 0.0))
                .collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Index of the last stored eigenvalue.
    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn lambda(&self, k: usize) -> Complex64 {
        self.values[k]
    }

    /// First `last + 1` eigenvalues.
    pub fn truncated(&self, last: usize) -> Result<Self> {
        if last == 0 || last > self.last_index() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate spectrum with K = {} to K = {}",
                self.last_index(),
                last
            )));
        }
        Ok(Self {
            values: self.values[..=last].to_vec(),
        })
    }

    /// `κ_k = ρ_k - k` with `ρ_k` on the canonical branch.
    pub fn kappa(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &l)| canonical_root(l) - k as f64)
            .collect()
    }

    /// Partial sums `Σ_{j ≤ k} |κ_j|²`.
    pub fn kappa_partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.kappa()
            .iter()
            .map(|kappa| {
                acc += kappa.norm_sqr();
                acc
            })
            .collect()
    }

    /// Growth of `Σ|κ_k|²` over the final `window` indices.
    pub fn kappa_tail_increase(&self, window: usize) -> f64 {
        let sums = self.kappa_partial_sums();
        let last = sums.len() - 1;
        let start = last.saturating_sub(window);
        sums[last] - sums[start]
    }
}
