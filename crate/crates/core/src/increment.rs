//! The algebraic minimization problem of one load step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_hessian, assemble_internal_gradient, cell_energy};
use crate::fem::{gather, BoundaryConditions, Q1Element, StructuredGrid, D, DOFS_PER_VERTEX};
use crate::material::MaterialModel;
use crate::sparse::BlockSparseMatrix;
use crate::sum::ExactSum;

/// Vertex-blocked coefficients `(u_x, u_y, d)` per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub values: Vec<f64>,
}

impl State {
    pub fn zeros(num_vertices: usize) -> Self {
        State { values: vec![0.0; DOFS_PER_VERTEX * num_vertices] }
    }

    pub fn from_parts(u: &[[f64; 2]], d: &[f64]) -> Result<Self> {
        if u.len() != d.len() {
            return Err(Error::Dimension { expected: u.len(), got: d.len() });
        }
        let values = u.iter().zip(d).flat_map(|(u, &d)| [u[0], u[1], d]).collect();
        Ok(State { values })
    }

    pub fn num_vertices(&self) -> usize {
        self.values.len() / DOFS_PER_VERTEX
    }

    #[inline]
    pub fn u(&self, v: usize) -> [f64; 2] {
        [self.values[3 * v], self.values[3 * v + 1]]
    }

    #[inline]
    pub fn d(&self, v: usize) -> f64 {
        self.values[3 * v + D]
    }

    pub fn damage(&self) -> Vec<f64> {
        self.values.iter().skip(D).step_by(DOFS_PER_VERTEX).copied().collect()
    }

    pub fn displacement(&self) -> Vec<[f64; 2]> {
        (0..self.num_vertices()).map(|v| self.u(v)).collect()
    }
}

/// `J = J₀ + φ` for one load step: smooth energy on a grid plus the
/// indicator of `d_n ≤ d ≤ 1` and the Dirichlet data.
#[derive(Debug, Clone)]
pub struct IncrementProblem {
    pub grid: StructuredGrid,
    pub element: Q1Element,
    pub material: MaterialModel,
    /// Dirichlet flag per scalar dof.
    pub fixed: Vec<bool>,
    /// Prescribed values (entries of free dofs unused).
    pub prescribed: Vec<f64>,
    /// Lower obstacle `d_n` per vertex.
    pub obstacle: Vec<f64>,
    /// Nodal external forces on the displacement dofs; `P_ext(u) = −f·u`.
    pub forces: Vec<f64>,
    pub reaction_dofs: Vec<usize>,
}

impl IncrementProblem {
    pub fn new(
        grid: StructuredGrid,
        material: MaterialModel,
        bcs: &BoundaryConditions,
        load: f64,
        obstacle: Vec<f64>,
    ) -> Result<Self> {
        material.validate()?;
        let nv = grid.num_vertices();
        if bcs.num_vertices() != nv {
            return Err(Error::Dimension { expected: nv, got: bcs.num_vertices() });
        }
        if obstacle.len() != nv {
            return Err(Error::Dimension { expected: nv, got: obstacle.len() });
        }
        if let Some(&bad) = obstacle.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain { value: bad, domain: "[0, 1]" });
        }
        let prescribed = bcs.values_at(load);
        for v in 0..nv {
            if bcs.fixed[3 * v + D] {
                let p = prescribed[3 * v + D];
                if !(obstacle[v] <= p && p <= 1.0) {
                    return Err(Error::Config(format!("prescribed damage {p} at vertex {v} is infeasible")));
                }
            }
        }
        Ok(IncrementProblem {
            grid,
            element: Q1Element::new(&grid),
            material,
            fixed: bcs.fixed.clone(),
            prescribed,
            obstacle,
            forces: vec![0.0; DOFS_PER_VERTEX * nv],
            reaction_dofs: bcs.reaction_dofs.clone(),
        })
    }

    /// Set nodal external forces; entries on damage dofs must be zero.
    pub fn with_forces(mut self, forces: Vec<f64>) -> Result<Self> {
        if forces.len() != self.num_dofs() {
            return Err(Error::Dimension { expected: self.num_dofs(), got: forces.len() });
        }
        if forces.iter().skip(D).step_by(DOFS_PER_VERTEX).any(|f| *f != 0.0) {
            return Err(Error::Config("external forces act on displacements only".into()));
        }
        self.forces = forces;
        Ok(self)
    }

    pub fn num_vertices(&self) -> usize {
        self.grid.num_vertices()
    }

    pub fn num_dofs(&self) -> usize {
        DOFS_PER_VERTEX * self.num_vertices()
    }

    /// Overwrite the Dirichlet dofs with their prescribed values.
    pub fn apply_dirichlet(&self, s: &mut State) {
        for (i, &f) in self.fixed.iter().enumerate() {
            if f {
                s.values[i] = self.prescribed[i];
            }
        }
    }

    /// Starting point: `prev` (or zero) with the Dirichlet data of this step,
    /// projected onto the box.
    pub fn initial_state(&self, prev: Option<&State>) -> State {
        let mut s = prev.cloned().unwrap_or_else(|| State::zeros(self.num_vertices()));
        self.apply_dirichlet(&mut s);
        self.project_feasible(&s)
    }

    pub fn is_feasible(&self, s: &State) -> bool {
        if s.values.len() != self.num_dofs() {
            return false;
        }
        let dirichlet_ok = self
            .fixed
            .iter()
            .zip(&s.values)
            .zip(&self.prescribed)
            .all(|((&f, &x), &p)| !f || x == p);
        let box_ok = (0..self.num_vertices()).all(|v| {
            let d = s.d(v);
            self.obstacle[v] <= d && d <= 1.0
        });
        dirichlet_ok && box_ok && s.values.iter().all(|x| x.is_finite())
    }

    /// Energy of one cell; the global smooth energy is the exact sum of these
    /// plus the external terms.
    #[inline]
    pub fn cell_energy(&self, values: &[f64], c: usize) -> f64 {
        cell_energy(&self.material, &self.element, &gather(&self.grid, values, c))
    }

    /// `−f·u` contributions of vertex `v`.
    #[inline]
    pub fn external_terms(&self, values: &[f64], v: usize) -> [f64; 2] {
        [
            -(self.forces[3 * v] * values[3 * v]),
            -(self.forces[3 * v + 1] * values[3 * v + 1]),
        ]
    }

    /// `J₀` without feasibility check, summed exactly.
    pub fn smooth_energy(&self, s: &State) -> f64 {
        let mut acc = ExactSum::new();
        for c in 0..self.grid.num_cells() {
            acc.add(self.cell_energy(&s.values, c));
        }
        for v in 0..self.num_vertices() {
            let [a, b] = self.external_terms(&s.values, v);
            acc.add(a);
            acc.add(b);
        }
        acc.value()
    }

    /// `J(s)`; `+∞` if `s` is infeasible.
    pub fn energy(&self, s: &State) -> f64 {
        if !self.is_feasible(s) {
            return f64::INFINITY;
        }
        self.smooth_energy(s)
    }

    /// Gradient of `J₀`.
    pub fn gradient(&self, s: &State) -> Vec<f64> {
        let mut g = assemble_internal_gradient(&self.grid, &self.element, &self.material, &s.values);
        for (gi, f) in g.iter_mut().zip(&self.forces) {
            *gi -= f;
        }
        g
    }

    /// Generalized Hessian of `J₀`.
    pub fn hessian(&self, s: &State) -> BlockSparseMatrix {
        assemble_hessian(&self.grid, &self.element, &self.material, &s.values)
    }

    /// Clamp every damage value into `[d_n, 1]`.
    pub fn project_feasible(&self, s: &State) -> State {
        let mut out = s.clone();
        for v in 0..self.num_vertices() {
            if !self.fixed[3 * v + D] {
                let d = &mut out.values[3 * v + D];
                *d = d.clamp(self.obstacle[v], 1.0);
            }
        }
        out
    }

    /// Euclidean norm of the box-projected gradient over the free dofs.
    pub fn stationarity_measure(&self, s: &State) -> f64 {
        let g = self.gradient(s);
        self.projected_gradient(s, &g).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Gradient with Dirichlet entries removed and the sign conditions of the
    /// damage bounds applied.
    pub fn projected_gradient(&self, s: &State, g: &[f64]) -> Vec<f64> {
        let mut out = g.to_vec();
        for (i, o) in out.iter_mut().enumerate() {
            if self.fixed[i] {
                *o = 0.0;
            } else if i % DOFS_PER_VERTEX == D {
                let v = i / DOFS_PER_VERTEX;
                let d = s.values[i];
                if d <= self.obstacle[v] {
                    *o = o.min(0.0);
                }
                if d >= 1.0 {
                    *o = o.max(0.0);
                }
            }
        }
        out
    }

    /// Sum of the internal forces on the reaction dofs, kN.
    pub fn reaction_force(&self, s: &State) -> f64 {
        let g = assemble_internal_gradient(&self.grid, &self.element, &self.material, &s.values);
        self.reaction_dofs.iter().map(|&i| g[i]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_single_notch_mesh;
    use crate::material::{CrackDensity, Split};

    fn problem(load: f64) -> IncrementProblem {
        let (h, bc) = build_single_notch_mesh(1.0, 0).unwrap();
        let g = *h.finest();
        let mat = MaterialModel::notched_tension(CrackDensity::AT2, Split::Isotropic);
        IncrementProblem::new(g, mat, &bc, load, vec![0.0; g.num_vertices()]).unwrap()
    }

    #[test]
    fn zero_state_energy_and_gradient() {
        let p = problem(0.0);
        let s = p.initial_state(None);
        assert_eq!(p.energy(&s), 0.0);
        assert!(p.gradient(&s).iter().all(|x| *x == 0.0));
        assert_eq!(p.reaction_force(&s), 0.0);
    }

    #[test]
    fn infeasibility_is_infinite() {
        let mut p = problem(0.0);
        p.obstacle[5] = 0.2;
        let mut s = State::zeros(p.num_vertices());
        s.values[3 * 5 + D] = 0.1;
        assert_eq!(p.energy(&s), f64::INFINITY);
        let q = p.project_feasible(&s);
        assert_eq!(q.d(5), 0.2);
        assert!(p.energy(&q).is_finite());
        s.values[3 * 7 + D] = 1.3;
        assert_eq!(p.project_feasible(&s).d(7), 1.0);
        assert_eq!(p.project_feasible(&q), q);
    }

    #[test]
    fn dirichlet_mismatch_is_infeasible() {
        let p = problem(1e-3);
        let s = State::zeros(p.num_vertices());
        assert_eq!(p.energy(&s), f64::INFINITY);
        assert!(p.energy(&p.initial_state(Some(&s))).is_finite());
    }

    #[test]
    fn projected_gradient_sign_rules() {
        let p = problem(0.0);
        let mut s = p.initial_state(None);
        let mut g = vec![0.0; p.num_dofs()];
        g[3 * 4 + D] = 2.0;
        g[3 * 5 + D] = -2.0;
        s.values[3 * 6 + D] = 1.0;
        g[3 * 6 + D] = -3.0;
        let pg = p.projected_gradient(&s, &g);
        assert_eq!(pg[3 * 4 + D], 0.0);
        assert_eq!(pg[3 * 5 + D], -2.0);
        assert_eq!(pg[3 * 6 + D], 0.0);
    }
}
