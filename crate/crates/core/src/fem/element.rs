use crate::material::SymTensor;

use super::grid::StructuredGrid;

/// Scalar dofs per vertex: `u_x`, `u_y`, `d`.
pub const DOFS_PER_VERTEX: usize = 3;
/// Index of the damage component inside a vertex block.
pub const D: usize = 2;
/// Quadrature points per cell (2×2 Gauss).
pub const NQP: usize = 4;

/// Q1 shape data at the 2×2 Gauss points of one (axis-aligned) cell. All
/// cells of a structured grid share it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q1Element {
    /// Reference coordinates of the quadrature points in `[0,1]²`.
    pub qp_ref: [[f64; 2]; NQP],
    /// Physical weight of each point, mm².
    pub weight: f64,
    /// `n[q][a]`: shape function `a` at point `q`.
    pub n: [[f64; 4]; NQP],
    /// `grad[q][a]`: physical gradient of shape function `a` at point `q`, 1/mm.
    pub grad: [[[f64; 2]; 4]; NQP],
}

/// Values of the discrete fields at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpValues {
    pub eps: SymTensor,
    pub d: f64,
    pub grad_d: [f64; 2],
}

impl Q1Element {
    pub fn new(grid: &StructuredGrid) -> Self {
        let g = 0.5 / 3f64.sqrt();
        let pts = [0.5 - g, 0.5 + g];
        let [hx, hy] = grid.h;
        let mut qp_ref = [[0.0; 2]; NQP];
        let mut n = [[0.0; 4]; NQP];
        let mut grad = [[[0.0; 2]; 4]; NQP];
        for q in 0..NQP {
            let (xi, eta) = (pts[q % 2], pts[q / 2]);
            qp_ref[q] = [xi, eta];
            let (sx, sy) = ([1.0 - xi, xi], [1.0 - eta, eta]);
            let (dsx, dsy) = ([-1.0 / hx, 1.0 / hx], [-1.0 / hy, 1.0 / hy]);
            for a in 0..4 {
                let (ax, ay) = (a % 2, a / 2);
                n[q][a] = sx[ax] * sy[ay];
                grad[q][a] = [dsx[ax] * sy[ay], sx[ax] * dsy[ay]];
            }
        }
        Q1Element { qp_ref, weight: 0.25 * hx * hy, n, grad }
    }

    /// Fields at point `q` from the 12 local coefficients `vals[3a + comp]`.
    #[inline]
    pub fn eval(&self, vals: &[f64; 12], q: usize) -> QpValues {
        let (mut exx, mut eyy, mut exy) = (0.0, 0.0, 0.0);
        let (mut d, mut gd) = (0.0, [0.0; 2]);
        for a in 0..4 {
            let [gx, gy] = self.grad[q][a];
            let (ux, uy, da) = (vals[3 * a], vals[3 * a + 1], vals[3 * a + 2]);
            exx += gx * ux;
            eyy += gy * uy;
            exy += 0.5 * (gy * ux + gx * uy);
            d += self.n[q][a] * da;
            gd[0] += gx * da;
            gd[1] += gy * da;
        }
        QpValues {
            eps: SymTensor::from_packed(2, &[exx, exy, eyy]),
            d,
            grad_d: gd,
        }
    }

    /// Mandel vectors of the strain produced by a unit `u_x` and a unit `u_y`
    /// at local node `a`.
    #[inline]
    pub fn strain_basis(&self, q: usize, a: usize) -> [[f64; 3]; 2] {
        let [gx, gy] = self.grad[q][a];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [[gx, r * gy, 0.0], [0.0, r * gx, gy]]
    }
}

/// Local coefficients of cell `c` in the order `3a + comp`.
#[inline]
pub fn gather(grid: &StructuredGrid, values: &[f64], c: usize) -> [f64; 12] {
    let mut out = [0.0; 12];
    for (a, &v) in grid.cell_vertices(c).iter().enumerate() {
        out[3 * a..3 * a + 3].copy_from_slice(&values[3 * v..3 * v + 3]);
    }
    out
}

/// Strain, damage and damage gradient of a vertex-blocked state at quadrature
/// point `q` of cell `c`.
pub fn strain_at_qp(grid: &StructuredGrid, element: &Q1Element, values: &[f64], c: usize, q: usize) -> QpValues {
    element.eval(&gather(grid, values, c), q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_weights() {
        let g = StructuredGrid::new(4, 2, 2.0, 0.5);
        let e = Q1Element::new(&g);
        assert!((4.0 * e.weight - 0.125).abs() < 1e-15);
        for q in 0..NQP {
            let s: f64 = e.n[q].iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            let gx: f64 = e.grad[q].iter().map(|g| g[0]).sum();
            assert!(gx.abs() < 1e-12);
        }
    }

    #[test]
    fn affine_fields_are_reproduced() {
        let g = StructuredGrid::new(3, 2, 1.5, 1.0);
        let e = Q1Element::new(&g);
        let a = [[0.3, -0.1], [0.2, 0.05]];
        let mut vals = vec![0.0; 3 * g.num_vertices()];
        for v in 0..g.num_vertices() {
            let p = g.vertex_coords(v);
            vals[3 * v] = a[0][0] * p[0] + a[0][1] * p[1];
            vals[3 * v + 1] = a[1][0] * p[0] + a[1][1] * p[1];
            vals[3 * v + 2] = 0.25 + 0.5 * p[0];
        }
        for c in 0..g.num_cells() {
            for q in 0..NQP {
                let r = strain_at_qp(&g, &e, &vals, c, q);
                assert!((r.eps.get(0, 0) - 0.3).abs() < 1e-14);
                assert!((r.eps.get(0, 1) - 0.05).abs() < 1e-14);
                assert!((r.eps.get(1, 1) - 0.05).abs() < 1e-14);
                assert!((r.grad_d[0] - 0.5).abs() < 1e-13 && r.grad_d[1].abs() < 1e-13);
            }
        }
    }
}
