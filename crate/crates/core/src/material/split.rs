//! Tension/compression splittings `ψ₀ = ψ₀⁺ + ψ₀⁻` of the undamaged
//! St. Venant–Kirchhoff energy density.
//!
//! Second derivatives at kinks follow a fixed selection: `⟨x⟩₊²` has second
//! derivative `2` on `x ≥ 0` and `0` on `x < 0`, `⟨x⟩₋²` the complementary
//! branch, so the two parts of every generalized Hessian add up to `ψ₀''`.

use serde::{Deserialize, Serialize};

use super::tensor::{eig_sym, packed_len, SymOp, SymTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Everything degrades: `ψ₀⁺ = ψ₀`.
    Isotropic,
    /// Deviatoric part degrades, volumetric part does not.
    VolDev,
    /// Tensile volumetric and deviatoric parts degrade.
    VolPm,
    /// Eigenvalue based tension/compression split.
    Spectral,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Isotropic, Split::VolDev, Split::VolPm, Split::Spectral];

    /// `ψ(·, d)` is quadratic for these splits.
    pub fn is_quadratic(&self) -> bool {
        matches!(self, Split::Isotropic | Split::VolDev)
    }
}

/// Both parts of a split energy with their gradients and generalized Hessians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEval {
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub stress_plus: SymTensor,
    pub stress_minus: SymTensor,
    pub hess_plus: SymOp,
    pub hess_minus: SymOp,
}

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
fn neg(x: f64) -> f64 {
    x.min(0.0)
}

#[inline]
fn heaviside_plus(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `ψ₀(ε) = λ/2 (tr ε)² + μ tr(ε²)`.
pub fn psi0(lambda: f64, mu: f64, eps: &SymTensor) -> f64 {
    let t = eps.trace();
    0.5 * lambda * t * t + mu * eps.inner(eps)
}

/// `a I⊗I + b 𝕀`.
fn iso_op(dim: usize, a: f64, b: f64) -> SymOp {
    let im = SymTensor::identity(dim).to_mandel();
    let n = packed_len(dim);
    let mut op = SymOp::zeros(dim);
    let m = op.mandel_mut();
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a * im[i] * im[j];
        }
        m[i][i] += b;
    }
    op
}

/// `ψ₀'' = λ I⊗I + 2μ 𝕀`.
pub fn psi0_hessian(lambda: f64, mu: f64, dim: usize) -> SymOp {
    iso_op(dim, lambda, 2.0 * mu)
}

/// Values `(ψ₀⁺, ψ₀⁻)` only.
pub fn split_parts(split: Split, lambda: f64, mu: f64, eps: &SymTensor) -> (f64, f64) {
    let dim = eps.dim();
    let tr = eps.trace();
    let kappa = mu / dim as f64 + 0.5 * lambda;
    match split {
        Split::Isotropic => (psi0(lambda, mu, eps), 0.0),
        Split::VolDev => {
            let dev = eps.dev();
            (mu * dev.inner(&dev), kappa * tr * tr)
        }
        Split::VolPm => {
            let dev = eps.dev();
            let (tp, tn) = (pos(tr), neg(tr));
            (kappa * tp * tp, kappa * tn * tn + mu * dev.inner(&dev))
        }
        Split::Spectral => {
            let eig = eig_sym(eps);
            let (mut sp, mut sn) = (0.0, 0.0);
            for &l in &eig.values[..dim] {
                sp += pos(l) * pos(l);
                sn += neg(l) * neg(l);
            }
            let (tp, tn) = (pos(tr), neg(tr));
            (0.5 * lambda * tp * tp + mu * sp, 0.5 * lambda * tn * tn + mu * sn)
        }
    }
}

/// Split energy without parameter checks (the spectral split needs `λ ≥ 0`
/// for convexity; see [`crate::MaterialModel::split_energy`]).
pub fn split_energy_unchecked(split: Split, lambda: f64, mu: f64, eps: &SymTensor) -> SplitEval {
    let dim = eps.dim();
    let m = dim as f64;
    let id = SymTensor::identity(dim);
    let tr = eps.trace();
    let kappa = mu / m + 0.5 * lambda;
    match split {
        Split::Isotropic => SplitEval {
            psi_plus: psi0(lambda, mu, eps),
            psi_minus: 0.0,
            stress_plus: lambda * tr * id + (2.0 * mu) * *eps,
            stress_minus: SymTensor::zeros(dim),
            hess_plus: psi0_hessian(lambda, mu, dim),
            hess_minus: SymOp::zeros(dim),
        },
        Split::VolDev => {
            let dev = eps.dev();
            SplitEval {
                psi_plus: mu * dev.inner(&dev),
                psi_minus: kappa * tr * tr,
                stress_plus: (2.0 * mu) * dev,
                stress_minus: (2.0 * kappa * tr) * id,
                hess_plus: iso_op(dim, -2.0 * mu / m, 2.0 * mu),
                hess_minus: iso_op(dim, 2.0 * kappa, 0.0),
            }
        }
        Split::VolPm => {
            let dev = eps.dev();
            let (tp, tn) = (pos(tr), neg(tr));
            let hp = heaviside_plus(tr);
            let hess_minus = iso_op(dim, 2.0 * kappa * (1.0 - hp) - 2.0 * mu / m, 2.0 * mu);
            SplitEval {
                psi_plus: kappa * tp * tp,
                psi_minus: kappa * tn * tn + mu * dev.inner(&dev),
                stress_plus: (2.0 * kappa * tp) * id,
                stress_minus: (2.0 * kappa * tn) * id + (2.0 * mu) * dev,
                hess_plus: iso_op(dim, 2.0 * kappa * hp, 0.0),
                hess_minus,
            }
        }
        Split::Spectral => spectral(lambda, mu, eps),
    }
}

fn spectral(lambda: f64, mu: f64, eps: &SymTensor) -> SplitEval {
    let dim = eps.dim();
    let id = SymTensor::identity(dim);
    let tr = eps.trace();
    let eig = eig_sym(eps);
    let lam = &eig.values;

    let mut vp = [0.0; 3];
    let mut vn = [0.0; 3];
    let (mut sp, mut sn) = (0.0, 0.0);
    for i in 0..dim {
        vp[i] = pos(lam[i]);
        vn[i] = neg(lam[i]);
        sp += vp[i] * vp[i];
        sn += vn[i] * vn[i];
    }
    let (tp, tn) = (pos(tr), neg(tr));
    let hp = heaviside_plus(tr);

    let stress_plus = (lambda * tp) * id + (2.0 * mu) * SymTensor::from_spectral(dim, &vp, &eig.vectors);
    let stress_minus = (lambda * tn) * id + (2.0 * mu) * SymTensor::from_spectral(dim, &vn, &eig.vectors);

    // Loewner divided differences of f = 2⟨·⟩± on the eigenvalues
    let lam_scale = 1.0 + lam[..dim].iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut gamma_p = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            let diff = lam[i] - lam[j];
            gamma_p[i][j] = if i != j && diff.abs() > 1e-12 * lam_scale {
                (2.0 * vp[i] - 2.0 * vp[j]) / diff
            } else {
                2.0 * heaviside_plus(lam[i])
            };
        }
    }
    let mut loewner_p = SymOp::zeros(dim);
    let mut loewner_n = SymOp::zeros(dim);
    let n = packed_len(dim);
    let q = &eig.vectors;
    for b in 0..n {
        let mut basis = [0.0; 6];
        basis[b] = 1.0;
        let e = SymTensor::from_mandel(dim, &basis).to_matrix();
        // E in the eigenbasis: Qᵀ E Q
        let mut et = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for r in 0..dim {
                    for c in 0..dim {
                        s += q[r][i] * e[r][c] * q[c][j];
                    }
                }
                et[i][j] = s;
            }
        }
        let mut dp = [[0.0; 3]; 3];
        let mut dn = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                dp[i][j] = gamma_p[i][j] * et[i][j];
                dn[i][j] = (2.0 - gamma_p[i][j]) * et[i][j];
            }
        }
        let back = |d: &[[f64; 3]; 3]| {
            let mut out = [[0.0; 3]; 3];
            for r in 0..dim {
                for c in 0..dim {
                    let mut s = 0.0;
                    for i in 0..dim {
                        for j in 0..dim {
                            s += q[r][i] * d[i][j] * q[c][j];
                        }
                    }
                    out[r][c] = s;
                }
            }
            SymTensor::from_matrix(dim, &out).to_mandel()
        };
        let (cp, cn) = (back(&dp), back(&dn));
        for a in 0..n {
            loewner_p.mandel_mut()[a][b] = cp[a];
            loewner_n.mandel_mut()[a][b] = cn[a];
        }
    }
    // symmetrize away rounding
    for op in [&mut loewner_p, &mut loewner_n] {
        let m = op.mandel_mut();
        for a in 0..n {
            for b in a + 1..n {
                let s = 0.5 * (m[a][b] + m[b][a]);
                m[a][b] = s;
                m[b][a] = s;
            }
        }
    }
    let mut hess_plus = iso_op(dim, lambda * hp, 0.0);
    hess_plus.add_scaled(mu, &loewner_p);
    let mut hess_minus = iso_op(dim, lambda * (1.0 - hp), 0.0);
    hess_minus.add_scaled(mu, &loewner_n);

    SplitEval {
        psi_plus: 0.5 * lambda * tp * tp + mu * sp,
        psi_minus: 0.5 * lambda * tn * tn + mu * sn,
        stress_plus,
        stress_minus,
        hess_plus,
        hess_minus,
    }
}
