//! Local subproblems of the nonlinear Gauss–Seidel presmoother. Every update
//! is accepted only if the exactly summed change of the patch energy is not
//! positive, so the computed global energy never increases.

use crate::fem::assembly::{node_damage_derivatives, node_displacement_derivatives, node_majorant_block};
use crate::fem::{gather, D};
use crate::increment::IncrementProblem;
use crate::sum::ExactSum;

use super::config::{SmootherKind, TnnmgConfig};

/// Cells around a vertex with the vertex's local index; at most four.
#[derive(Debug, Clone, Copy)]
pub struct Patch {
    cells: [(usize, usize); 4],
    len: usize,
}

impl Patch {
    pub fn of(problem: &IncrementProblem, v: usize) -> Self {
        let mut cells = [(0, 0); 4];
        let mut len = 0;
        for ca in problem.grid.vertex_cells(v) {
            cells[len] = ca;
            len += 1;
        }
        Patch { cells, len }
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells[..self.len]
    }

    fn energies(&self, problem: &IncrementProblem, values: &[f64]) -> [f64; 4] {
        let mut e = [0.0; 4];
        for (k, &(c, _)) in self.cells().iter().enumerate() {
            e[k] = problem.cell_energy(values, c);
        }
        e
    }

    fn cached(&self, cache: &[f64]) -> [f64; 4] {
        let mut e = [0.0; 4];
        for (k, &(c, _)) in self.cells().iter().enumerate() {
            e[k] = cache[c];
        }
        e
    }

    fn store(&self, cache: &mut [f64], e: &[f64; 4]) {
        for (k, &(c, _)) in self.cells().iter().enumerate() {
            cache[c] = e[k];
        }
    }
}

/// Decreases below this are lost in the rounding of the patch energy.
fn resolution(old: &[f64]) -> f64 {
    16.0 * f64::EPSILON * old.iter().map(|x| x.abs()).sum::<f64>()
}

/// Exact sign of `Σ new − Σ old`.
fn change(old: &[f64], new: &[f64]) -> f64 {
    let mut s = ExactSum::new();
    for (&o, &n) in old.iter().zip(new) {
        s.add(n);
        s.add(-o);
    }
    s.value()
}

/// Precomputed `(1+k) ψ₀''` blocks for each local vertex index.
#[derive(Debug, Clone, Copy)]
pub struct Majorant {
    blocks: [[[f64; 2]; 2]; 4],
}

impl Majorant {
    pub fn new(problem: &IncrementProblem) -> Self {
        Majorant {
            blocks: std::array::from_fn(|a| node_majorant_block(&problem.material, &problem.element, a)),
        }
    }

    /// `C_i` of vertex `v`.
    pub fn at(&self, patch: &Patch) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for &(_, a) in patch.cells() {
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += self.blocks[a][i][j];
                }
            }
        }
        h
    }
}

/// Local gradient and generalized Hessian of `J₀` in the displacement of `v`.
pub fn displacement_derivatives(problem: &IncrementProblem, values: &[f64], patch: &Patch, v: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut g = [-problem.forces[3 * v], -problem.forces[3 * v + 1]];
    let mut h = [[0.0; 2]; 2];
    for &(c, a) in patch.cells() {
        let (gc, hc) = node_displacement_derivatives(&problem.material, &problem.element, &gather(&problem.grid, values, c), a);
        for i in 0..2 {
            g[i] += gc[i];
            for j in 0..2 {
                h[i][j] += hc[i][j];
            }
        }
    }
    (g, h)
}

/// First and second derivative of `J₀` in the damage of `v`.
pub fn damage_derivatives(problem: &IncrementProblem, values: &[f64], patch: &Patch) -> (f64, f64) {
    let (mut g1, mut g2) = (0.0, 0.0);
    for &(c, a) in patch.cells() {
        let (a1, a2) = node_damage_derivatives(&problem.material, &problem.element, &gather(&problem.grid, values, c), a);
        g1 += a1;
        g2 += a2;
    }
    (g1, g2)
}

/// Solve `H_FF δ = −g_F` on the free components.
fn newton_direction(free: &[usize], g: &[f64; 2], h: &[[f64; 2]; 2]) -> Option<[f64; 2]> {
    let mut d = [0.0; 2];
    match free {
        [i] => {
            if !(h[*i][*i] > 0.0) {
                return None;
            }
            d[*i] = -g[*i] / h[*i][*i];
        }
        [_, _] => {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if !(det > 0.0 && h[0][0] > 0.0) {
                return None;
            }
            d[0] = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
            d[1] = -(h[0][0] * g[1] - h[1][0] * g[0]) / det;
        }
        _ => return None,
    }
    Some(d)
}

fn try_displacement(
    problem: &IncrementProblem,
    values: &mut [f64],
    patch: &Patch,
    v: usize,
    base: [f64; 2],
    dir: [f64; 2],
    model: (f64, f64),
    old_e: &mut [f64; 4],
    old_ext: &mut [f64; 2],
    cfg: &TnnmgConfig,
) -> Option<f64> {
    let n = patch.cells().len();
    let mut old = [0.0; 6];
    old[..n].copy_from_slice(&old_e[..n]);
    old[n..n + 2].copy_from_slice(old_ext);
    let noise = resolution(&old[..n + 2]);
    let mut t = 1.0;
    for _ in 0..=cfg.max_halvings {
        let trial = [base[0] + t * dir[0], base[1] + t * dir[1]];
        // Shortened steps whose predicted decrease cannot be resolved are
        // not tried.
        if trial == base || (t < 1.0 && -(t * model.0 + 0.5 * t * t * model.1) <= noise) {
            break;
        }
        values[3 * v] = trial[0];
        values[3 * v + 1] = trial[1];
        let new_e = patch.energies(problem, values);
        let new_ext = problem.external_terms(values, v);
        let mut new = [0.0; 6];
        new[..n].copy_from_slice(&new_e[..n]);
        new[n..n + 2].copy_from_slice(&new_ext);
        if change(&old[..n + 2], &new[..n + 2]) <= 0.0 {
            *old_e = new_e;
            *old_ext = new_ext;
            return Some(t);
        }
        t *= cfg.backtrack_factor;
    }
    values[3 * v] = base[0];
    values[3 * v + 1] = base[1];
    None
}

/// Minimize `J` over the displacement of vertex `v`, in place.
pub fn smooth_vertex_displacement(
    problem: &IncrementProblem,
    values: &mut [f64],
    v: usize,
    kind: SmootherKind,
    majorant: Option<&Majorant>,
    cfg: &TnnmgConfig,
) {
    let patch = Patch::of(problem, v);
    let mut old_e = patch.energies(problem, values);
    displacement_update(problem, values, v, &patch, &mut old_e, kind, majorant, cfg);
}

#[allow(clippy::too_many_arguments)]
fn displacement_update(
    problem: &IncrementProblem,
    values: &mut [f64],
    v: usize,
    patch: &Patch,
    old_e: &mut [f64; 4],
    kind: SmootherKind,
    majorant: Option<&Majorant>,
    cfg: &TnnmgConfig,
) {
    let free: Vec<usize> = (0..2).filter(|&c| !problem.fixed[3 * v + c]).collect();
    if free.is_empty() {
        return;
    }
    // With a quadratic split the patch energy is quadratic in u_v and a full
    // Newton step lands on the minimizer.
    let exact_newton = kind == SmootherKind::Ex && problem.material.split.is_quadratic();
    let mut old_ext = problem.external_terms(values, v);
    let mut g0 = None;
    let steps = match kind {
        SmootherKind::Ex => cfg.local_max_steps,
        SmootherKind::Pre => 1,
    };
    for _ in 0..steps {
        let (g, h) = match kind {
            SmootherKind::Ex => displacement_derivatives(problem, values, patch, v),
            SmootherKind::Pre => {
                let (g, _) = displacement_derivatives(problem, values, patch, v);
                let m = majorant.expect("PRE smoother needs the majorant");
                (g, m.at(patch))
            }
        };
        let gn = free.iter().map(|&i| g[i] * g[i]).sum::<f64>().sqrt();
        let g0v = *g0.get_or_insert(gn);
        if gn == 0.0 || gn <= cfg.local_tol * (1.0 + g0v) {
            break;
        }
        let dir = match newton_direction(&free, &g, &h) {
            Some(d) => d,
            None => {
                assert!(kind == SmootherKind::Ex, "majorant block is singular at vertex {v}");
                break;
            }
        };
        let base = [values[3 * v], values[3 * v + 1]];
        let slope = g[0] * dir[0] + g[1] * dir[1];
        let curv = (0..2).map(|i| (0..2).map(|j| dir[i] * h[i][j] * dir[j]).sum::<f64>()).sum::<f64>();
        match try_displacement(problem, values, patch, v, base, dir, (slope, curv), old_e, &mut old_ext, cfg) {
            Some(t) if !(exact_newton && t == 1.0) => {}
            _ => break,
        }
    }
}

/// Minimize `J` over the damage of vertex `v` on `[d_n, 1]`, in place.
pub fn smooth_vertex_damage(problem: &IncrementProblem, values: &mut [f64], v: usize, cfg: &TnnmgConfig) {
    let patch = Patch::of(problem, v);
    let mut old_e = patch.energies(problem, values);
    damage_update(problem, values, v, &patch, &mut old_e, cfg);
}

fn damage_update(problem: &IncrementProblem, values: &mut [f64], v: usize, patch: &Patch, old_e: &mut [f64; 4], cfg: &TnnmgConfig) {
    let i = 3 * v + D;
    if problem.fixed[i] {
        return;
    }
    let (lo, hi) = (problem.obstacle[v], 1.0);
    let n = patch.cells().len();
    let quadratic = problem.material.degradation.is_quadratic();
    let steps = if quadratic { 1 } else { cfg.local_max_steps };
    for _ in 0..steps {
        let (g1, g2) = damage_derivatives(problem, values, patch);
        let d = values[i];
        let target = if g2 > 0.0 {
            d - g1 / g2
        } else {
            assert!(
                !problem.material.degradation.is_convex(),
                "local damage problem at vertex {v} is not strictly convex"
            );
            if g1 < 0.0 {
                hi
            } else {
                lo
            }
        };
        let target = target.clamp(lo, hi);
        if target == d {
            break;
        }
        let noise = resolution(&old_e[..n]);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            let trial = (d + t * (target - d)).clamp(lo, hi);
            let step = trial - d;
            if trial == d || (t < 1.0 && -(g1 * step + 0.5 * g2.max(0.0) * step * step) <= noise) {
                break;
            }
            values[i] = trial;
            let new_e = patch.energies(problem, values);
            if change(&old_e[..n], &new_e[..n]) <= 0.0 {
                *old_e = new_e;
                accepted = true;
                break;
            }
            t *= cfg.backtrack_factor;
        }
        if !accepted {
            values[i] = d;
            break;
        }
        if quadratic || (g1.abs() <= cfg.local_tol) {
            break;
        }
    }
}

/// One lexicographic sweep, displacement before damage at each vertex.
pub fn presmooth(problem: &IncrementProblem, values: &mut [f64], kind: SmootherKind, majorant: Option<&Majorant>, cfg: &TnnmgConfig) {
    let mut cache: Vec<f64> = (0..problem.grid.num_cells()).map(|c| problem.cell_energy(values, c)).collect();
    for v in 0..problem.num_vertices() {
        let patch = Patch::of(problem, v);
        let mut e = patch.cached(&cache);
        displacement_update(problem, values, v, &patch, &mut e, kind, majorant, cfg);
        damage_update(problem, values, v, &patch, &mut e, cfg);
        patch.store(&mut cache, &e);
    }
}
