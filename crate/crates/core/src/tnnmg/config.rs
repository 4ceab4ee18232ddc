use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local solver used for the displacement subproblems of the presmoother.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmootherKind {
    /// Damped semismooth Newton to high accuracy.
    Ex,
    /// One step preconditioned with the `(1+k) ψ₀''` majorant.
    Pre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TnnmgConfig {
    pub smoother: SmootherKind,
    /// Bound on `‖U^{ν+1} − U^ν‖_E / ‖U^ν‖_E`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Damage dofs closer than this to a bound are truncated.
    pub truncation_tol: f64,
    pub backtrack_factor: f64,
    pub max_halvings: usize,
    /// Relative gradient tolerance of the local Newton solver.
    pub local_tol: f64,
    pub local_max_steps: usize,
    pub presmooth_steps: usize,
    pub postsmooth_steps: usize,
    /// Apply one multigrid step to the displacement problem before the
    /// first iteration.
    pub warm_start_displacement: bool,
}

impl Default for TnnmgConfig {
    fn default() -> Self {
        TnnmgConfig {
            smoother: SmootherKind::Ex,
            tolerance: 1e-7,
            max_iterations: 500,
            truncation_tol: 1e-10,
            backtrack_factor: 0.5,
            max_halvings: 30,
            local_tol: 1e-12,
            local_max_steps: 25,
            presmooth_steps: 3,
            postsmooth_steps: 3,
            warm_start_displacement: false,
        }
    }
}

impl TnnmgConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.tolerance > 0.0) || !(self.truncation_tol > 0.0) || !(self.local_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if self.max_iterations == 0 || self.local_max_steps == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}
