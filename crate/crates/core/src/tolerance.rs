use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floating-point realization of the exact comparisons used throughout the
/// crate.
///
/// `feas_tol` and `strict_tol` are relative: every comparison multiplies them
/// by the max-norm of the data involved (see [`TolerancePolicy::scaled`]).
/// `rank_tol` is a cutoff relative to the largest singular value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub feas_tol: f64,
    pub strict_tol: f64,
    pub rank_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            strict_tol: 1e-9,
            rank_tol: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn new(feas_tol: f64, strict_tol: f64, rank_tol: f64) -> Result<Self> {
        let tol = Self {
            feas_tol,
            strict_tol,
            rank_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("feas_tol", self.feas_tol),
            ("strict_tol", self.strict_tol),
            ("rank_tol", self.rank_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Feasibility threshold for data of magnitude `scale`. Scales below one
    /// are treated as one so that all-zero data still gets an absolute floor.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.feas_tol * scale.max(1.0)
    }
}
