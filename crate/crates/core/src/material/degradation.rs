use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degradation function `g : [0,1] → [0,1]` with `g(0) = 1`, `g(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Degradation {
    /// `(1−d)²`
    Ga,
    /// `(1−d)²(2d+1)`, not convex.
    Gb,
    /// `(1−d)³(3d+1)`, not convex.
    Gc,
    /// `(exp(bd) − (b(d−1)+1) exp(b)) / ((b−1) exp(b) + 1)`, `b > 0`.
    Gd { b: f64 },
}

/// Value and first two derivatives of a degradation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationEval {
    pub g: f64,
    pub dg: f64,
    pub ddg: f64,
}

impl Degradation {
    /// Convex choices are the ones covered by the solver convergence theory.
    pub fn is_convex(&self) -> bool {
        matches!(self, Degradation::Ga | Degradation::Gd { .. })
    }

    /// `g` is a polynomial of degree at most two in `d`.
    pub fn is_quadratic(&self) -> bool {
        matches!(self, Degradation::Ga)
    }

    pub fn validate(&self) -> Result<()> {
        if let Degradation::Gd { b } = *self {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Config(format!("degradation parameter b = {b} must be positive")));
            }
        }
        Ok(())
    }

    /// Checked evaluation; `d` must lie in `[0, 1]`.
    pub fn eval(&self, d: f64) -> Result<DegradationEval> {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Domain { value: d, domain: "[0, 1]" });
        }
        self.validate()?;
        Ok(self.eval_unchecked(d))
    }

    /// Evaluation of the defining formula without domain checks.
    #[inline]
    pub fn eval_unchecked(&self, d: f64) -> DegradationEval {
        match *self {
            Degradation::Ga => {
                let e = 1.0 - d;
                DegradationEval { g: e * e, dg: -2.0 * e, ddg: 2.0 }
            }
            Degradation::Gb => DegradationEval {
                g: 1.0 - 3.0 * d * d + 2.0 * d * d * d,
                dg: -6.0 * d + 6.0 * d * d,
                ddg: -6.0 + 12.0 * d,
            },
            Degradation::Gc => {
                let e = 1.0 - d;
                DegradationEval {
                    g: e * e * e * (3.0 * d + 1.0),
                    dg: -12.0 * d * e * e,
                    ddg: -12.0 + 48.0 * d - 36.0 * d * d,
                }
            }
            Degradation::Gd { b } => {
                let eb = b.exp();
                let ebd = (b * d).exp();
                let den = (b - 1.0) * eb + 1.0;
                DegradationEval {
                    g: (ebd - (b * (d - 1.0) + 1.0) * eb) / den,
                    dg: b * (ebd - eb) / den,
                    ddg: b * b * ebd / den,
                }
            }
        }
    }
}
