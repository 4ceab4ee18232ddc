//! Pointwise energy densities of the phase-field model.

mod crack;
mod degradation;
mod split;
mod tensor;

use serde::{Deserialize, Serialize};

pub use crack::{AtVariant, CrackDensity, CrackEval};
pub use degradation::{Degradation, DegradationEval};
pub use split::{psi0, psi0_hessian, split_energy_unchecked, split_parts, Split, SplitEval};
pub use tensor::{eig_sym, packed_len, SymEigen, SymOp, SymTensor};

use crate::error::{Error, Result};

/// Material parameters of the damaged elastic energy and the crack density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    /// Lamé's first parameter, kN/mm².
    pub lambda: f64,
    /// Shear modulus, kN/mm².
    pub mu: f64,
    /// Residual stiffness.
    pub k: f64,
    /// Critical energy release rate, kN/mm.
    pub g_c: f64,
    /// Length scale, mm.
    pub l: f64,
    pub degradation: Degradation,
    pub split: Split,
    pub crack: CrackDensity,
}

/// Everything the assembly needs about `ψ(ε, d)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEval {
    pub value: f64,
    /// `∂ψ/∂ε`
    pub stress: SymTensor,
    /// `∂ψ/∂d`
    pub d_deriv: f64,
    /// `∂²ψ/∂d²`
    pub d_second: f64,
    /// Generalized Hessian `∂²ψ/∂ε²`.
    pub eps_hessian: SymOp,
    /// `∂²ψ/∂ε∂d`
    pub mixed: SymTensor,
    /// Undegraded tensile part `ψ₀⁺`.
    pub psi_plus: f64,
}

impl MaterialModel {
    /// Parameters of the notched tension test (`λ = 121`, `μ = 80`,
    /// `g_c = 2.7e-3`, `l = 0.03125`, `k = 1e-5`).
    pub fn notched_tension(crack: CrackDensity, split: Split) -> Self {
        MaterialModel {
            lambda: 121.0,
            mu: 80.0,
            k: 1e-5,
            g_c: 2.7e-3,
            l: 0.03125,
            degradation: Degradation::Ga,
            split,
            crack,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if !(self.mu > 0.0) {
            return cfg(format!("mu = {} must be positive", self.mu));
        }
        if !(self.lambda > -2.0 / 3.0 * self.mu) {
            return cfg(format!("lambda = {} must exceed -2/3 mu", self.lambda));
        }
        if self.split == Split::Spectral && self.lambda < 0.0 {
            return cfg(format!(
                "spectral split needs lambda >= 0 for convexity, got {}",
                self.lambda
            ));
        }
        if !(self.k > 0.0) {
            return cfg(format!("residual stiffness k = {} must be positive", self.k));
        }
        if !(self.g_c > 0.0) || !(self.l > 0.0) {
            return cfg(format!("g_c = {} and l = {} must be positive", self.g_c, self.l));
        }
        self.degradation.validate()?;
        self.crack.validate()
    }

    /// Uniform strong convexity modulus `2μ·min{k, 1}` of `ψ(·, d)` (valid for `λ ≥ 0`).
    pub fn convexity_modulus(&self) -> f64 {
        2.0 * self.mu * self.k.min(1.0)
    }

    /// Split of the undamaged energy density.
    pub fn split_energy(&self, eps: &SymTensor) -> Result<SplitEval> {
        if self.split == Split::Spectral && self.lambda < 0.0 {
            return Err(Error::Config(format!(
                "spectral split with lambda = {} < 0 is not convex",
                self.lambda
            )));
        }
        Ok(split_energy_unchecked(self.split, self.lambda, self.mu, eps))
    }

    pub fn degradation(&self, d: f64) -> Result<DegradationEval> {
        self.degradation.eval(d)
    }

    pub fn crack_density(&self, d: f64, grad_d: &[f64]) -> Result<CrackEval> {
        self.crack.eval(self.l, d, grad_d)
    }

    /// `ψ(ε, d) = (g(d) + k) ψ₀⁺(ε) + ψ₀⁻(ε)` with derivatives.
    pub fn psi_eval(&self, eps: &SymTensor, d: f64) -> Result<DensityEval> {
        let s = self.split_energy(eps)?;
        let g = self.degradation(d)?;
        Ok(combine(self.k, &s, &g))
    }

    /// [`psi_eval`](Self::psi_eval) without parameter or domain checks; callers
    /// validate the model once and keep `d` inside `[0, 1]`.
    #[inline]
    pub fn psi_eval_unchecked(&self, eps: &SymTensor, d: f64) -> DensityEval {
        let s = split_energy_unchecked(self.split, self.lambda, self.mu, eps);
        let g = self.degradation.eval_unchecked(d);
        combine(self.k, &s, &g)
    }
}

fn combine(k: f64, s: &SplitEval, g: &DegradationEval) -> DensityEval {
    let w = g.g + k;
    let mut eps_hessian = s.hess_minus;
    eps_hessian.add_scaled(w, &s.hess_plus);
    DensityEval {
        value: w * s.psi_plus + s.psi_minus,
        stress: w * s.stress_plus + s.stress_minus,
        d_deriv: g.dg * s.psi_plus,
        d_second: g.ddg * s.psi_plus,
        eps_hessian,
        mixed: g.dg * s.stress_plus,
        psi_plus: s.psi_plus,
    }
}
