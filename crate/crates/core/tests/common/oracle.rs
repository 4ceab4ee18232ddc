//! Spectral projected gradient minimizer used as an independent reference
//! for small increment problems.

use phasefield::{IncrementProblem, State};

pub struct OracleResult {
    pub state: State,
    pub energy: f64,
    pub stationarity: f64,
    pub iterations: usize,
}

fn free_gradient(p: &IncrementProblem, s: &State) -> Vec<f64> {
    let mut g = p.gradient(s);
    for (gi, &f) in g.iter_mut().zip(&p.fixed) {
        if f {
            *gi = 0.0;
        }
    }
    g
}

fn project(p: &IncrementProblem, x: &[f64]) -> State {
    p.project_feasible(&State { values: x.to_vec() })
}

/// `‖P(x − g) − x‖₂`.
pub fn pg_residual(p: &IncrementProblem, s: &State) -> f64 {
    let g = free_gradient(p, s);
    let t: Vec<f64> = s.values.iter().zip(&g).map(|(x, g)| x - g).collect();
    let q = project(p, &t);
    q.values.iter().zip(&s.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Nonmonotone spectral projected gradient in the metric of the Hessian
/// diagonal at `start`, run until the projected gradient residual drops
/// below `tol` (or progress stalls). A diagonal metric keeps the projection
/// a componentwise clamp.
pub fn minimize(p: &IncrementProblem, start: &State, tol: f64, max_iter: usize) -> OracleResult {
    const MEMORY: usize = 10;
    const GAMMA: f64 = 1e-4;
    let mut x = p.initial_state(Some(start));
    let hess = p.hessian(&x);
    let diag: Vec<f64> = (0..x.values.len()).map(|i| hess.diag_block(i / 3)[i % 3][i % 3].max(1e-30)).collect();
    let mut f = p.energy(&x);
    let mut g = free_gradient(p, &x);
    let mut history = vec![f];
    let mut alpha = 1.0;
    let mut it = 0;
    while it < max_iter {
        if pg_residual(p, &x) <= tol {
            break;
        }
        it += 1;
        let trial: Vec<f64> = x.values.iter().zip(&g).zip(&diag).map(|((a, b), m)| a - alpha * b / m).collect();
        let y = project(p, &trial);
        let d: Vec<f64> = y.values.iter().zip(&x.values).map(|(a, b)| a - b).collect();
        let gd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let fmax = history.iter().rev().take(MEMORY).cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = State { values: x.values.iter().zip(&d).map(|(a, b)| a + lam * b).collect() };
            let fnew = p.energy(&xn);
            if fnew <= fmax + GAMMA * lam * gd {
                accepted = Some((xn, fnew));
                break;
            }
            lam *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = free_gradient(p, &xn);
        let s: Vec<f64> = xn.values.iter().zip(&x.values).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().zip(&diag).map(|(a, m)| m * a * a).sum();
        alpha = if sy > 0.0 { (ss / sy).clamp(1e-30, 1e30) } else { 1e5 };
        x = xn;
        f = fnew;
        g = gn;
        history.push(f);
    }
    let stationarity = pg_residual(p, &x);
    OracleResult { energy: p.energy(&x), state: x, stationarity, iterations: it }
}
