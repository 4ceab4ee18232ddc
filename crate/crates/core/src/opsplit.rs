//! Operator-splitting baseline with a history field: alternating displacement
//! and damage solves where the maximal tensile energy `H` drives the damage
//! instead of an irreversibility constraint.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_energy_norm_matrix, scatter_cell, CellMatrix};
use crate::fem::{gather, GridHierarchy, D, DOFS_PER_VERTEX, NQP};
use crate::increment::{IncrementProblem, State};
use crate::material::split_parts;
use crate::sparse::{pcg, truncate_in_place, BlockSparseMatrix, Multigrid, TruncationMask};

/// Maximal `ψ₀⁺` seen so far at every quadrature point, index `NQP·cell + q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryField {
    pub values: Vec<f64>,
}

impl HistoryField {
    pub fn zeros(num_cells: usize) -> Self {
        HistoryField { values: vec![0.0; NQP * num_cells] }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// `H' = max(H, ψ₀⁺(ε(u)))` pointwise.
pub fn update_history(problem: &IncrementProblem, h: &HistoryField, s: &State) -> HistoryField {
    let mut out = h.clone();
    let m = &problem.material;
    for c in 0..problem.grid.num_cells() {
        let vals = gather(&problem.grid, &s.values, c);
        for q in 0..NQP {
            let e = problem.element.eval(&vals, q);
            let (pp, _) = split_parts(m.split, m.lambda, m.mu, &e.eps);
            let slot = &mut out.values[NQP * c + q];
            *slot = slot.max(pp);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpSplitMode {
    /// One damage solve with the old history field, then one displacement solve.
    SemiImplicit,
    /// Alternate displacement solve, history update and damage solve until
    /// the iterates settle.
    FullyImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpSplitConfig {
    /// Bound on the relative energy-norm change between outer iterations.
    pub tolerance: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub newton_max: usize,
}

impl Default for OpSplitConfig {
    fn default() -> Self {
        OpSplitConfig { tolerance: 1e-7, max_outer: 500, cg_tol: 1e-10, cg_max_iter: 1000, newton_max: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpSplitStatus {
    Converged,
    MaxIterations,
    /// A displacement Newton solve or a linear solve did not converge.
    InnerFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpSplitReport {
    pub outer_iterations: usize,
    pub relative_change: f64,
    pub walltime_s: f64,
    pub status: OpSplitStatus,
    /// Damage values outside `[0, 1]` in the final state.
    pub damage_out_of_range: usize,
}

/// Outcome of an inner solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOutcome {
    pub newton_steps: usize,
    pub converged: bool,
}

pub struct OpSplitSolver<'h> {
    hierarchy: &'h GridHierarchy,
    config: OpSplitConfig,
    energy_norm: BlockSparseMatrix,
}

fn mask_for(problem: &IncrementProblem, comps: &[usize]) -> TruncationMask {
    let active = (0..problem.num_dofs())
        .map(|i| !problem.fixed[i] && comps.contains(&(i % DOFS_PER_VERTEX)))
        .collect();
    TruncationMask { active }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Gradient and Hessian of `∫ g(d) H + g_c γ(d, ∇d)` in the damage dofs,
/// evaluated at the unclamped damage of `s`.
pub fn damage_system(problem: &IncrementProblem, h: &HistoryField, s: &State) -> (Vec<f64>, BlockSparseMatrix) {
    let m = &problem.material;
    let el = &problem.element;
    let a_grad = 2.0 * m.g_c * m.crack.gradient_coefficient(m.l);
    let mut grad = vec![0.0; problem.num_dofs()];
    let mut mat = BlockSparseMatrix::for_grid(&problem.grid);
    for c in 0..problem.grid.num_cells() {
        let vals = gather(&problem.grid, &s.values, c);
        let verts = problem.grid.cell_vertices(c);
        let mut k: CellMatrix = [[0.0; 12]; 12];
        for q in 0..NQP {
            let e = el.eval(&vals, q);
            let hq = h.values[NQP * c + q];
            let deg = m.degradation.eval_unchecked(e.d);
            let cr = m.crack.eval_unchecked(m.l, e.d, &e.grad_d);
            let w = el.weight;
            let g1 = deg.dg * hq + m.g_c * cr.d_deriv;
            let g2 = deg.ddg * hq + m.g_c * cr.d_second;
            for a in 0..4 {
                let [gxa, gya] = el.grad[q][a];
                grad[DOFS_PER_VERTEX * verts[a] + D] +=
                    w * (g1 * el.n[q][a] + m.g_c * (cr.grad_deriv[0] * gxa + cr.grad_deriv[1] * gya));
                for b in 0..4 {
                    let [gxb, gyb] = el.grad[q][b];
                    k[3 * a + D][3 * b + D] += w * (g2 * el.n[q][a] * el.n[q][b] + a_grad * (gxa * gxb + gya * gyb));
                }
            }
        }
        scatter_cell(&mut mat, &verts, &k);
    }
    (grad, mat)
}

impl<'h> OpSplitSolver<'h> {
    pub fn new(hierarchy: &'h GridHierarchy, problem: &IncrementProblem, config: OpSplitConfig) -> Result<Self> {
        if hierarchy.finest() != &problem.grid {
            return Err(Error::Config("problem grid differs from the finest hierarchy level".into()));
        }
        let energy_norm = assemble_energy_norm_matrix(&problem.grid, &problem.element, &problem.material);
        Ok(OpSplitSolver { hierarchy, config, energy_norm })
    }

    /// Solve `A x = b` on the active dofs with multigrid-preconditioned CG.
    fn linear_solve(&self, mut a: BlockSparseMatrix, mut b: Vec<f64>, mask: TruncationMask) -> Result<Vec<f64>> {
        truncate_in_place(&mut a, &mut b, &mask);
        let mut x = vec![0.0; b.len()];
        if b.iter().all(|v| *v == 0.0) {
            return Ok(x);
        }
        let mg = Multigrid::new(self.hierarchy, a, mask);
        let out = pcg(mg.fine_matrix(), &b, &mut x, |r| mg.v_cycle(r, 3, 3), self.config.cg_tol, self.config.cg_max_iter);
        if !out.converged {
            return Err(Error::Singular(format!(
                "conjugate gradients stalled at relative residual {:.3e} after {} iterations",
                out.relative_residual, out.iterations
            )));
        }
        Ok(x)
    }

    /// Minimize the elastic energy over the free displacements for the
    /// damage stored in `s` (clamped into `[0, 1]` pointwise).
    pub fn solve_displacement(&self, problem: &IncrementProblem, s: &mut State) -> Result<InnerOutcome> {
        problem.apply_dirichlet(s);
        let mask = mask_for(problem, &[0, 1]);
        let quadratic = problem.material.split.is_quadratic();
        let mut g0 = None;
        for step in 0..self.config.newton_max {
            let mut g = problem.gradient(s);
            // Reaction forces keep the scale meaningful near equilibrium.
            let scale = norm(&g);
            mask.apply(&mut g);
            let gn = norm(&g);
            let g0v = g0.get_or_insert(gn).max(scale);
            if gn == 0.0 || (step > 0 && gn <= 1e-10 * g0v) {
                return Ok(InnerOutcome { newton_steps: step, converged: true });
            }
            let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            let dir = self.linear_solve(problem.hessian(s), rhs, mask.clone())?;
            if quadratic {
                for (x, d) in s.values.iter_mut().zip(&dir) {
                    *x += d;
                }
                return Ok(InnerOutcome { newton_steps: step + 1, converged: true });
            }
            // backtracking on the energy with frozen damage
            let e0 = problem.smooth_energy(s);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = State { values: s.values.iter().zip(&dir).map(|(x, d)| x + t * d).collect() };
                if problem.smooth_energy(&trial) <= e0 {
                    *s = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                let tiny = norm(&g) <= 1e-8 * g0v.max(f64::MIN_POSITIVE);
                return Ok(InnerOutcome { newton_steps: step + 1, converged: tiny });
            }
        }
        Ok(InnerOutcome { newton_steps: self.config.newton_max, converged: false })
    }

    /// Solve `g'(d) H + g_c δγ(d) = 0` for the damage without bounds.
    pub fn solve_damage(&self, problem: &IncrementProblem, h: &HistoryField, s: &mut State) -> Result<InnerOutcome> {
        problem.apply_dirichlet(s);
        let mask = mask_for(problem, &[D]);
        let quadratic = problem.material.degradation.is_quadratic();
        let mut g0 = None;
        for step in 0..self.config.newton_max {
            let (mut g, a) = damage_system(problem, h, s);
            mask.apply(&mut g);
            let gn = norm(&g);
            let g0v = *g0.get_or_insert(gn);
            if gn == 0.0 || (step > 0 && gn <= 1e-10 * g0v) {
                return Ok(InnerOutcome { newton_steps: step, converged: true });
            }
            if (0..a.n()).any(|v| mask.active[DOFS_PER_VERTEX * v + D] && !(a.diag_block(v)[D][D] > 0.0)) {
                return Err(Error::Singular("damage system is not positive definite".into()));
            }
            if constant_in_kernel(&a, &mask) {
                return Err(Error::Singular("damage system annihilates constants".into()));
            }
            let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            let dir = self.linear_solve(a, rhs, mask.clone())?;
            for (x, d) in s.values.iter_mut().zip(&dir) {
                *x += d;
            }
            if quadratic {
                return Ok(InnerOutcome { newton_steps: step + 1, converged: true });
            }
        }
        Ok(InnerOutcome { newton_steps: self.config.newton_max, converged: false })
    }

    pub fn energy_norm(&self, x: &[f64]) -> f64 {
        self.energy_norm.quad(x).max(0.0).sqrt()
    }

    /// One load step. `history` holds `H` of the previous step on entry and
    /// the updated field on return.
    pub fn solve_increment(
        &self,
        problem: &IncrementProblem,
        initial: &State,
        history: &mut HistoryField,
        mode: OpSplitMode,
    ) -> Result<(State, OpSplitReport)> {
        let start = Instant::now();
        let mut s = initial.clone();
        problem.apply_dirichlet(&mut s);
        let mut status = OpSplitStatus::Converged;
        let mut outer = 0;
        let mut rel = 0.0;
        match mode {
            OpSplitMode::SemiImplicit => {
                let a = self.solve_damage(problem, history, &mut s)?;
                let b = self.solve_displacement(problem, &mut s)?;
                *history = update_history(problem, history, &s);
                outer = 1;
                if !(a.converged && b.converged) {
                    status = OpSplitStatus::InnerFailure;
                }
            }
            OpSplitMode::FullyImplicit => {
                status = OpSplitStatus::MaxIterations;
                while outer < self.config.max_outer {
                    outer += 1;
                    let prev = s.clone();
                    let a = self.solve_displacement(problem, &mut s)?;
                    *history = update_history(problem, history, &s);
                    let b = self.solve_damage(problem, history, &mut s)?;
                    if !(a.converged && b.converged) {
                        status = OpSplitStatus::InnerFailure;
                        break;
                    }
                    let diff: Vec<f64> = s.values.iter().zip(&prev.values).map(|(a, b)| a - b).collect();
                    let dn = self.energy_norm(&diff);
                    let pn = self.energy_norm(&prev.values);
                    rel = if dn == 0.0 { 0.0 } else if pn == 0.0 { f64::INFINITY } else { dn / pn };
                    if rel < self.config.tolerance {
                        status = OpSplitStatus::Converged;
                        break;
                    }
                }
            }
        }
        let damage_out_of_range = s.damage().iter().filter(|d| !(0.0..=1.0).contains(*d)).count();
        if damage_out_of_range > 0 {
            log::debug!("{damage_out_of_range} damage values outside [0, 1]");
        }
        let report = OpSplitReport {
            outer_iterations: outer,
            relative_change: rel,
            walltime_s: start.elapsed().as_secs_f64(),
            status,
            damage_out_of_range,
        };
        Ok((s, report))
    }

    /// Norms of the residuals of the displacement and the damage equation.
    pub fn euler_residuals(&self, problem: &IncrementProblem, h: &HistoryField, s: &State) -> (f64, f64) {
        let mut gu = problem.gradient(s);
        mask_for(problem, &[0, 1]).apply(&mut gu);
        let (mut gd, _) = damage_system(problem, h, s);
        mask_for(problem, &[D]).apply(&mut gd);
        (norm(&gu), norm(&gd))
    }
}

/// With no damage dof fixed, a vanishing zeroth-order term leaves the
/// constants in the kernel of the damage matrix.
fn constant_in_kernel(a: &BlockSparseMatrix, mask: &TruncationMask) -> bool {
    let n = a.n();
    if (0..n).any(|v| !mask.active[DOFS_PER_VERTEX * v + D]) {
        return false;
    }
    let mut ones = vec![0.0; DOFS_PER_VERTEX * n];
    let mut trace = 0.0;
    for v in 0..n {
        ones[DOFS_PER_VERTEX * v + D] = 1.0;
        trace += a.diag_block(v)[D][D];
    }
    a.quad(&ones) <= 1e-12 * trace
}
