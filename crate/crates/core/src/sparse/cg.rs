use super::block::BlockSparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for `A x = b`, starting from `x`.
/// Stops when `‖b − A x‖ ≤ rtol ‖b‖`.
pub fn pcg<P>(a: &BlockSparseMatrix, b: &[f64], x: &mut [f64], precond: P, rtol: f64, max_iter: usize) -> CgOutcome
where
    P: Fn(&[f64]) -> Vec<f64>,
{
    let bnorm = dot(b, b).sqrt();
    let ax = a.matvec(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let target = rtol * bnorm;
    let mut rnorm = dot(&r, &r).sqrt();
    if rnorm <= target || bnorm == 0.0 && rnorm == 0.0 {
        return CgOutcome { iterations: 0, relative_residual: rel(rnorm, bnorm), converged: true };
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; b.len()];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome { iterations: it, relative_residual: rel(rnorm, bnorm), converged: false };
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            return CgOutcome { iterations: it, relative_residual: rel(rnorm, bnorm), converged: true };
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome { iterations: max_iter, relative_residual: rel(rnorm, bnorm), converged: false }
}

fn rel(r: f64, b: f64) -> f64 {
    if b > 0.0 {
        r / b
    } else {
        r
    }
}
