use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambrosio–Tortorelli type of the crack surface density; fixes `c_l` and `c_γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtVariant {
    At1,
    At2,
}

/// Crack surface density `γ(d, ∇d) = c_γ (w(d) + w(1)/c_l · l² |∇d|²)` with the
/// local fracture energy `w(d) = (1 + β(1−d)) d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrackDensity {
    pub variant: AtVariant,
    /// `β ∈ [−1, 0]`; `0` for AT-1 and `−1` for AT-2.
    pub beta: f64,
}

/// Value and derivatives of `γ` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackEval {
    pub gamma: f64,
    pub d_deriv: f64,
    pub d_second: f64,
    pub grad_deriv: [f64; 3],
}

impl CrackDensity {
    pub const AT1: CrackDensity = CrackDensity { variant: AtVariant::At1, beta: 0.0 };
    pub const AT2: CrackDensity = CrackDensity { variant: AtVariant::At2, beta: -1.0 };

    pub fn new(variant: AtVariant) -> Self {
        match variant {
            AtVariant::At1 => Self::AT1,
            AtVariant::At2 => Self::AT2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=0.0).contains(&self.beta) {
            return Err(Error::Config(format!("crack density beta = {} outside [-1, 0]", self.beta)));
        }
        Ok(())
    }

    pub fn c_l(&self) -> f64 {
        match self.variant {
            AtVariant::At1 => 0.5,
            AtVariant::At2 => 1.0,
        }
    }

    pub fn c_gamma(&self, l: f64) -> f64 {
        match self.variant {
            AtVariant::At1 => 3.0 / (4.0 * std::f64::consts::SQRT_2 * l),
            AtVariant::At2 => 1.0 / (2.0 * l),
        }
    }

    /// `(w, w', w'')` at `d`.
    #[inline]
    pub fn w(&self, d: f64) -> (f64, f64, f64) {
        let b = self.beta;
        ((1.0 + b * (1.0 - d)) * d, 1.0 + b - 2.0 * b * d, -2.0 * b)
    }

    /// Coefficient of `|∇d|²` in `γ`, i.e. `c_γ w(1) l² / c_l`.
    #[inline]
    pub fn gradient_coefficient(&self, l: f64) -> f64 {
        self.c_gamma(l) * l * l / self.c_l()
    }

    pub fn eval(&self, l: f64, d: f64, grad_d: &[f64]) -> Result<CrackEval> {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Domain { value: d, domain: "[0, 1]" });
        }
        self.validate()?;
        Ok(self.eval_unchecked(l, d, grad_d))
    }

    #[inline]
    pub fn eval_unchecked(&self, l: f64, d: f64, grad_d: &[f64]) -> CrackEval {
        let cg = self.c_gamma(l);
        let a = self.gradient_coefficient(l);
        let (w, dw, ddw) = self.w(d);
        let g2: f64 = grad_d.iter().map(|x| x * x).sum();
        let mut grad_deriv = [0.0; 3];
        for (o, x) in grad_deriv.iter_mut().zip(grad_d) {
            *o = 2.0 * a * x;
        }
        CrackEval {
            gamma: cg * w + a * g2,
            d_deriv: cg * dw,
            d_second: cg * ddw,
            grad_deriv,
        }
    }
}
