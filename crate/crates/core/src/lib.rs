//! Spectral analysis of the spin-boson model with at most two photons.
//!
//! The crate computes the bottom of the essential spectrum `m + E(α)`, the
//! discrete eigenvalues below it, and the coupling-regime classification,
//! and cross-checks the Schur-complement counts against dense truncations
//! of the full operator matrix.

pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod nevanlinna;
pub mod oracle;
pub mod quad;
pub mod schur;

use serde::{Deserialize, Serialize};

pub use error::{Error, ErrorClass, Result};
pub use model::{
    preset, preset_model, validate_model, CaseTag, Coupling, CouplingClass, Dispersion, Integrability, Model,
    ModelSpec, PRESET_NAMES,
};
pub use nevanlinna::{Sigma, SectorRoot};
pub use oracle::{truncate_full, truncate_hhat, TruncatedHamiltonian};
pub use quad::{build_rule, QuadratureRule, RadialDomain};
pub use schur::{DiscretizedOperator, KernelChoice, Sector};

/// Numerical tolerances shared by all operations on a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance of adaptive integrals.
    pub integral_rel: f64,
    /// Absolute tolerance of roots of `Φ`.
    pub root_abs: f64,
    /// Node cap of adaptive integration.
    pub max_nodes: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { integral_rel: 1e-10, root_abs: 1e-10, max_nodes: quad::DEFAULT_MAX_NODES }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.integral_rel) || !ok(self.root_abs) || self.max_nodes == 0 {
            return Err(Error::InvalidArgument(format!("tolerances must be positive: {self:?}")));
        }
        Ok(())
    }
}
