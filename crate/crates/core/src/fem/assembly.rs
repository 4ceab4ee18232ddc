//! Cell kernels and global assembly of the smooth part of the increment
//! functional. Damage values are clamped to `[0, 1]` at quadrature points
//! before any density evaluation.

use super::element::{gather, Q1Element, QpValues, NQP};
use super::grid::StructuredGrid;
use crate::material::{psi0_hessian, split_parts, MaterialModel};
use crate::sparse::{Block, BlockSparseMatrix};

pub type CellVector = [f64; 12];
pub type CellMatrix = [[f64; 12]; 12];

#[inline]
fn dot3(a: &[f64], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `ψ + g_c γ` at one point.
#[inline]
pub fn qp_energy_density(mat: &MaterialModel, v: &QpValues) -> f64 {
    let d = v.d.clamp(0.0, 1.0);
    let (pp, pm) = split_parts(mat.split, mat.lambda, mat.mu, &v.eps);
    let g = mat.degradation.eval_unchecked(d).g;
    let c = mat.crack.eval_unchecked(mat.l, d, &v.grad_d);
    (g + mat.k) * pp + pm + mat.g_c * c.gamma
}

/// Quadrature of `ψ + g_c γ` over one cell.
pub fn cell_energy(mat: &MaterialModel, el: &Q1Element, vals: &CellVector) -> f64 {
    let mut e = 0.0;
    for q in 0..NQP {
        e += el.weight * qp_energy_density(mat, &el.eval(vals, q));
    }
    e
}

/// Cell gradient, ordered `3a + comp`.
pub fn cell_gradient(mat: &MaterialModel, el: &Q1Element, vals: &CellVector) -> CellVector {
    let mut out = [0.0; 12];
    for q in 0..NQP {
        let v = el.eval(vals, q);
        let d = v.d.clamp(0.0, 1.0);
        let de = mat.psi_eval_unchecked(&v.eps, d);
        let c = mat.crack.eval_unchecked(mat.l, d, &v.grad_d);
        let sig = de.stress.to_mandel();
        let w = el.weight;
        let dd = de.d_deriv + mat.g_c * c.d_deriv;
        for a in 0..4 {
            let bas = el.strain_basis(q, a);
            let [gx, gy] = el.grad[q][a];
            out[3 * a] += w * dot3(&sig, &bas[0]);
            out[3 * a + 1] += w * dot3(&sig, &bas[1]);
            out[3 * a + 2] += w * (dd * el.n[q][a] + mat.g_c * (c.grad_deriv[0] * gx + c.grad_deriv[1] * gy));
        }
    }
    out
}

/// Generalized cell Hessian.
pub fn cell_hessian(mat: &MaterialModel, el: &Q1Element, vals: &CellVector) -> CellMatrix {
    let mut k = [[0.0; 12]; 12];
    let a_grad = 2.0 * mat.g_c * mat.crack.gradient_coefficient(mat.l);
    for q in 0..NQP {
        let v = el.eval(vals, q);
        let d = v.d.clamp(0.0, 1.0);
        let de = mat.psi_eval_unchecked(&v.eps, d);
        let c = mat.crack.eval_unchecked(mat.l, d, &v.grad_d);
        let cm = de.eps_hessian.mandel();
        let mixed = de.mixed.to_mandel();
        let w = el.weight;
        let ddd = de.d_second + mat.g_c * c.d_second;
        let bases: [[[f64; 3]; 2]; 4] = std::array::from_fn(|a| el.strain_basis(q, a));
        // C·B for every (node, comp)
        let mut cb = [[[0.0; 3]; 2]; 4];
        for a in 0..4 {
            for i in 0..2 {
                for r in 0..3 {
                    cb[a][i][r] = cm[r][0] * bases[a][i][0] + cm[r][1] * bases[a][i][1] + cm[r][2] * bases[a][i][2];
                }
            }
        }
        for a in 0..4 {
            let [gxa, gya] = el.grad[q][a];
            let na = el.n[q][a];
            for b in 0..4 {
                let [gxb, gyb] = el.grad[q][b];
                let nb = el.n[q][b];
                for i in 0..2 {
                    for j in 0..2 {
                        k[3 * a + i][3 * b + j] += w * dot3(&bases[a][i], &cb[b][j]);
                    }
                    let m = w * dot3(&mixed, &bases[a][i]) * nb;
                    k[3 * a + i][3 * b + 2] += m;
                    k[3 * b + 2][3 * a + i] += m;
                }
                k[3 * a + 2][3 * b + 2] += w * (ddd * na * nb + a_grad * (gxa * gxb + gya * gyb));
            }
        }
    }
    k
}

/// Gradient and Hessian of the cell energy with respect to the displacement
/// of local node `a`.
pub fn node_displacement_derivatives(
    mat: &MaterialModel,
    el: &Q1Element,
    vals: &CellVector,
    a: usize,
) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut g = [0.0; 2];
    let mut h = [[0.0; 2]; 2];
    for q in 0..NQP {
        let v = el.eval(vals, q);
        let de = mat.psi_eval_unchecked(&v.eps, v.d.clamp(0.0, 1.0));
        let sig = de.stress.to_mandel();
        let cm = de.eps_hessian.mandel();
        let bas = el.strain_basis(q, a);
        for i in 0..2 {
            g[i] += el.weight * dot3(&sig, &bas[i]);
            let mut cb = [0.0; 3];
            for r in 0..3 {
                cb[r] = cm[r][0] * bas[i][0] + cm[r][1] * bas[i][1] + cm[r][2] * bas[i][2];
            }
            for j in 0..2 {
                h[j][i] += el.weight * dot3(&bas[j], &cb);
            }
        }
    }
    (g, h)
}

/// First and second derivative of the cell energy with respect to the damage
/// of local node `a`.
pub fn node_damage_derivatives(mat: &MaterialModel, el: &Q1Element, vals: &CellVector, a: usize) -> (f64, f64) {
    let a_grad = 2.0 * mat.g_c * mat.crack.gradient_coefficient(mat.l);
    let (mut g1, mut g2) = (0.0, 0.0);
    for q in 0..NQP {
        let v = el.eval(vals, q);
        let d = v.d.clamp(0.0, 1.0);
        let (pp, _) = split_parts(mat.split, mat.lambda, mat.mu, &v.eps);
        let deg = mat.degradation.eval_unchecked(d);
        let c = mat.crack.eval_unchecked(mat.l, d, &v.grad_d);
        let na = el.n[q][a];
        let [gx, gy] = el.grad[q][a];
        g1 += el.weight
            * ((deg.dg * pp + mat.g_c * c.d_deriv) * na + mat.g_c * (c.grad_deriv[0] * gx + c.grad_deriv[1] * gy));
        g2 += el.weight * ((deg.ddg * pp + mat.g_c * c.d_second) * na * na + a_grad * (gx * gx + gy * gy));
    }
    (g1, g2)
}

/// Displacement block at local node `a` of `∫ (1+k) ψ₀''`, which bounds the
/// generalized Hessian of `ψ(·, d)` from above.
pub fn node_majorant_block(mat: &MaterialModel, el: &Q1Element, a: usize) -> [[f64; 2]; 2] {
    let c0 = psi0_hessian(mat.lambda, mat.mu, 2).scaled(1.0 + mat.k);
    let cm = c0.mandel();
    let mut h = [[0.0; 2]; 2];
    for q in 0..NQP {
        let bas = el.strain_basis(q, a);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for r in 0..3 {
                    for c in 0..3 {
                        s += bas[i][r] * cm[r][c] * bas[j][c];
                    }
                }
                h[i][j] += el.weight * s;
            }
        }
    }
    h
}

/// Scatter a cell matrix into the global block matrix.
pub fn scatter_cell(m: &mut BlockSparseMatrix, verts: &[usize; 4], k: &CellMatrix) {
    for a in 0..4 {
        for b in 0..4 {
            let mut blk: Block = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    blk[r][c] = k[3 * a + r][3 * b + c];
                }
            }
            m.add_block(verts[a], verts[b], &blk);
        }
    }
}

/// Gradient of the smooth internal energy (no external load term).
pub fn assemble_internal_gradient(grid: &StructuredGrid, el: &Q1Element, mat: &MaterialModel, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for c in 0..grid.num_cells() {
        let g = cell_gradient(mat, el, &gather(grid, values, c));
        for (a, &v) in grid.cell_vertices(c).iter().enumerate() {
            for k in 0..3 {
                out[3 * v + k] += g[3 * a + k];
            }
        }
    }
    out
}

/// Generalized Hessian of the smooth energy.
pub fn assemble_hessian(grid: &StructuredGrid, el: &Q1Element, mat: &MaterialModel, values: &[f64]) -> BlockSparseMatrix {
    let mut m = BlockSparseMatrix::for_grid(grid);
    for c in 0..grid.num_cells() {
        let k = cell_hessian(mat, el, &gather(grid, values, c));
        scatter_cell(&mut m, &grid.cell_vertices(c), &k);
    }
    m
}

/// Undegraded elasticity in the displacement components combined with
/// `g_c c_γ (w(1) l²/c_l · Laplacian + mass)` in the damage component.
pub fn assemble_energy_norm_matrix(grid: &StructuredGrid, el: &Q1Element, mat: &MaterialModel) -> BlockSparseMatrix {
    let c0 = psi0_hessian(mat.lambda, mat.mu, 2);
    let cm = c0.mandel();
    let s = mat.g_c * mat.crack.c_gamma(mat.l);
    let lap = s * mat.l * mat.l * mat.crack.w(1.0).0 / mat.crack.c_l();
    let mut k = [[0.0; 12]; 12];
    for q in 0..NQP {
        let w = el.weight;
        for a in 0..4 {
            let ba = el.strain_basis(q, a);
            let [gxa, gya] = el.grad[q][a];
            for b in 0..4 {
                let bb = el.strain_basis(q, b);
                let [gxb, gyb] = el.grad[q][b];
                for i in 0..2 {
                    for j in 0..2 {
                        let mut t = 0.0;
                        for r in 0..3 {
                            for c in 0..3 {
                                t += ba[i][r] * cm[r][c] * bb[j][c];
                            }
                        }
                        k[3 * a + i][3 * b + j] += w * t;
                    }
                }
                k[3 * a + 2][3 * b + 2] += w * (lap * (gxa * gxb + gya * gyb) + s * el.n[q][a] * el.n[q][b]);
            }
        }
    }
    let mut m = BlockSparseMatrix::for_grid(grid);
    for c in 0..grid.num_cells() {
        scatter_cell(&mut m, &grid.cell_vertices(c), &k);
    }
    m
}

/// Undegraded linear elasticity `∫ ε(v) : ψ₀'' : ε(w)` in the displacement
/// components; the damage rows are zero.
pub fn assemble_elasticity(grid: &StructuredGrid, el: &Q1Element, mat: &MaterialModel) -> BlockSparseMatrix {
    let mut m = assemble_energy_norm_matrix(grid, el, mat);
    for b in m.blocks_mut() {
        for r in 0..3 {
            b[r][2] = 0.0;
            b[2][r] = 0.0;
        }
    }
    m
}
