//! The shared tolerance policy.

use serde::{Deserialize, Serialize};

/// Tolerance policy threaded through every numerical decision in the crate.
///
/// The effective tolerance for a given input scales with both its norm and
/// its dimension:
///
/// ```text
/// effective = base_eps * max(1, norm) * dim
/// ```
///
/// where `norm` is the Frobenius (Hilbert-Schmidt) norm of the input. One
/// knob therefore controls every accept/reject decision, which keeps results
/// reproducible across modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    base_eps: f64,
}

impl Tolerance {
    pub const DEFAULT_BASE: f64 = 1e-10;

    /// A tolerance with the given base epsilon. Panics if `base_eps` is not
    /// strictly positive and finite.
    pub fn new(base_eps: f64) -> Self {
        assert!(
            base_eps > 0.0 && base_eps.is_finite(),
            "tolerance base must be positive and finite"
        );
        Tolerance { base_eps }
    }

    pub fn base(&self) -> f64 {
        self.base_eps
    }

    /// Effective tolerance for an input of the given norm and dimension.
    pub fn effective(&self, norm: f64, dim: usize) -> f64 {
        self.base_eps * norm.max(1.0) * (dim.max(1) as f64)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(Self::DEFAULT_BASE)
    }
}
