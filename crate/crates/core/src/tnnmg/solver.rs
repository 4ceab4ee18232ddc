use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::assemble_energy_norm_matrix;
use crate::fem::{GridHierarchy, D, DOFS_PER_VERTEX};
use crate::increment::{IncrementProblem, State};
use crate::sparse::{truncate_in_place, BlockSparseMatrix, Multigrid, TruncationMask};

use super::config::{SmootherKind, TnnmgConfig};
use super::local::{presmooth, Majorant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// One outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// `J(U^ν)`
    pub energy_start: f64,
    /// `J(U^{ν+½})` after presmoothing.
    pub energy_smoothed: f64,
    /// `J(U^{ν+1})`
    pub energy: f64,
    /// Projected gradient norm at `U^{ν+½}`.
    pub stationarity: f64,
    pub rho: f64,
    /// Free damage dofs removed from the correction space.
    pub truncated_dofs: usize,
    /// `‖U^{ν+1} − U^ν‖_E / ‖U^ν‖_E`
    pub relative_correction: f64,
    /// Box constraints and Dirichlet data hold at `U^{ν+½}` and `U^{ν+1}`.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: Vec<IterationRecord>,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub final_stationarity: f64,
    pub walltime_s: f64,
    pub status: Termination,
}

impl SolverReport {
    pub fn num_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn converged(&self) -> bool {
        self.status == Termination::Converged
    }

    /// `J(U^{ν+1}) ≤ J(U^{ν+½}) ≤ J(U^ν)` for every record, without tolerance.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_energy;
        self.iterations.iter().all(|r| {
            let ok = r.energy_start <= prev && r.energy_smoothed <= r.energy_start && r.energy <= r.energy_smoothed;
            prev = r.energy;
            ok
        })
    }

    pub fn last_truncated(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.truncated_dofs)
    }
}

/// Truncated Nonsmooth Newton Multigrid for the increment problems on the
/// finest level of a grid hierarchy.
pub struct TnnmgSolver<'h> {
    hierarchy: &'h GridHierarchy,
    config: TnnmgConfig,
    energy_norm: BlockSparseMatrix,
}

impl<'h> TnnmgSolver<'h> {
    pub fn new(hierarchy: &'h GridHierarchy, problem: &IncrementProblem, config: TnnmgConfig) -> Result<Self> {
        config.validate()?;
        check_grid(hierarchy, problem)?;
        if !problem.material.degradation.is_convex() {
            log::warn!(
                "degradation {:?} is not convex; convergence of the solver is not guaranteed",
                problem.material.degradation
            );
        }
        let energy_norm = assemble_energy_norm_matrix(&problem.grid, &problem.element, &problem.material);
        Ok(TnnmgSolver { hierarchy, config, energy_norm })
    }

    pub fn config(&self) -> &TnnmgConfig {
        &self.config
    }

    pub fn energy_norm(&self, x: &[f64]) -> f64 {
        self.energy_norm.quad(x).max(0.0).sqrt()
    }

    /// Mask of the correction space at `s`: Dirichlet dofs and damage dofs
    /// within the truncation tolerance of a bound are inactive.
    pub fn truncation_mask(&self, problem: &IncrementProblem, s: &State) -> (TruncationMask, usize) {
        let tol = self.config.truncation_tol;
        let mut active: Vec<bool> = problem.fixed.iter().map(|f| !f).collect();
        let mut truncated = 0;
        for v in 0..problem.num_vertices() {
            let i = DOFS_PER_VERTEX * v + D;
            if active[i] {
                let d = s.values[i];
                if d - problem.obstacle[v] <= tol || 1.0 - d <= tol {
                    active[i] = false;
                    truncated += 1;
                }
            }
        }
        (TruncationMask { active }, truncated)
    }

    /// One V-cycle on the truncated generalized Hessian. Returns the
    /// correction, the number of truncated damage dofs and the projected
    /// gradient norm at `s`.
    pub fn linear_correction(&self, problem: &IncrementProblem, s: &State) -> (Vec<f64>, usize, f64) {
        let (mask, truncated) = self.truncation_mask(problem, s);
        let g = problem.gradient(s);
        let stationarity = norm(&problem.projected_gradient(s, &g));
        let c = self.correction_on(problem, s, &g, mask);
        (c, truncated, stationarity)
    }

    fn correction_on(&self, problem: &IncrementProblem, s: &State, g: &[f64], mask: TruncationMask) -> Vec<f64> {
        let mut a = problem.hessian(s);
        let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
        truncate_in_place(&mut a, &mut r, &mask);
        if r.iter().all(|x| *x == 0.0) {
            return vec![0.0; r.len()];
        }
        let mg = Multigrid::new(self.hierarchy, a, mask);
        mg.v_cycle(&r, self.config.presmooth_steps, self.config.postsmooth_steps)
    }

    /// Projection onto the box and backtracking line search. Returns the new
    /// state, the accepted `ρ` and its energy.
    pub fn damped_update(&self, problem: &IncrementProblem, s: &State, correction: &[f64], energy: f64) -> (State, f64, f64) {
        let full = State { values: s.values.iter().zip(correction).map(|(a, b)| a + b).collect() };
        let proj = problem.project_feasible(&full);
        let dir: Vec<f64> = proj.values.iter().zip(&s.values).map(|(a, b)| a - b).collect();
        let mut rho = 1.0;
        for k in 0..=self.config.max_halvings {
            let trial = if k == 0 {
                proj.clone()
            } else {
                problem.project_feasible(&State {
                    values: s.values.iter().zip(&dir).map(|(a, b)| a + rho * b).collect(),
                })
            };
            let e = problem.energy(&trial);
            if e <= energy {
                return (trial, rho, e);
            }
            rho *= self.config.backtrack_factor;
        }
        (s.clone(), 0.0, energy)
    }

    fn warm_start(&self, problem: &IncrementProblem, s: &State, energy: f64) -> (State, f64) {
        let mut active: Vec<bool> = problem.fixed.iter().map(|f| !f).collect();
        for v in 0..problem.num_vertices() {
            active[DOFS_PER_VERTEX * v + D] = false;
        }
        let g = problem.gradient(s);
        let c = self.correction_on(problem, s, &g, TruncationMask { active });
        let (next, _, e) = self.damped_update(problem, s, &c, energy);
        (next, e)
    }

    pub fn solve_increment(&self, problem: &IncrementProblem, initial: &State) -> Result<(State, SolverReport)> {
        check_grid(self.hierarchy, problem)?;
        if initial.values.len() != problem.num_dofs() {
            return Err(Error::Dimension { expected: problem.num_dofs(), got: initial.values.len() });
        }
        let start = Instant::now();
        let cfg = &self.config;
        let majorant = (cfg.smoother == SmootherKind::Pre).then(|| Majorant::new(problem));
        let mut s = problem.initial_state(Some(initial));
        let mut energy = problem.energy(&s);
        let initial_energy = energy;
        if cfg.warm_start_displacement {
            (s, energy) = self.warm_start(problem, &s, energy);
        }
        let mut records = Vec::new();
        let mut status = Termination::MaxIterations;
        for _ in 0..cfg.max_iterations {
            let energy_start = energy;
            let mut half = s.clone();
            presmooth(problem, &mut half.values, cfg.smoother, majorant.as_ref(), cfg);
            let energy_smoothed = problem.energy(&half);
            let (c, truncated, stationarity) = self.linear_correction(problem, &half);
            let (next, rho, e) = self.damped_update(problem, &half, &c, energy_smoothed);
            let diff: Vec<f64> = next.values.iter().zip(&s.values).map(|(a, b)| a - b).collect();
            let dn = self.energy_norm(&diff);
            let sn = self.energy_norm(&s.values);
            let rel = if dn == 0.0 { 0.0 } else if sn == 0.0 { f64::INFINITY } else { dn / sn };
            records.push(IterationRecord {
                energy_start,
                energy_smoothed,
                energy: e,
                stationarity,
                rho,
                truncated_dofs: truncated,
                relative_correction: rel,
                feasible: problem.is_feasible(&half) && problem.is_feasible(&next),
            });
            s = next;
            energy = e;
            if rel < cfg.tolerance {
                status = Termination::Converged;
                break;
            }
        }
        let final_stationarity = problem.stationarity_measure(&s);
        let report = SolverReport {
            iterations: records,
            initial_energy,
            final_energy: energy,
            final_stationarity,
            walltime_s: start.elapsed().as_secs_f64(),
            status,
        };
        Ok((s, report))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_grid(hierarchy: &GridHierarchy, problem: &IncrementProblem) -> Result<()> {
    if hierarchy.finest() != &problem.grid {
        return Err(Error::Config("problem grid differs from the finest hierarchy level".into()));
    }
    Ok(())
}
