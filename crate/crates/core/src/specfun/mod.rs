//! Special functions: complex Gamma, Mittag-Leffler, Wright M, stable laws.

pub mod gamma;
pub mod mittag_leffler;
pub mod stable;
pub mod wright;

pub use gamma::{gamma_complex, ln_gamma_complex};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_with, MlMethod};
pub use stable::{levy_laplace_exponent, stable_density, stable_hamiltonian, stable_hamiltonian_theta, StableParams};
pub use wright::{ln_one_sided_stable_density, ln_wright_m, one_sided_stable_density, wright_m};

/// Accuracy and budget for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub abs_tol: f64,
    pub max_terms: usize,
    /// |z| up to which the Mittag-Leffler power series is tried first.
    pub switch_radius: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { abs_tol: 1e-14, max_terms: 2000, switch_radius: 5.0 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.abs_tol > 0.0 && self.max_terms >= 1 {
            Ok(())
        } else {
            crate::error::domain("SeriesControl needs abs_tol > 0 and max_terms >= 1")
        }
    }
}
