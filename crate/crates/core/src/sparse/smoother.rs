use super::block::{Block, BlockSparseMatrix, B};

/// Relative pivot size below which a block solve is skipped.
const PIVOT_TOL: f64 = 1e-14;

/// Solve `D δ = res` restricted to the dofs with nonzero diagonal. Returns
/// `None` when the restricted block is (numerically) singular.
fn solve_active(d: &Block, res: &[f64; B]) -> Option<[f64; B]> {
    let idx: Vec<usize> = (0..B).filter(|&k| d[k][k] != 0.0).collect();
    let k = idx.len();
    let mut out = [0.0; B];
    if k == 0 {
        return Some(out);
    }
    let scale = idx.iter().map(|&i| d[i][i].abs()).fold(0.0, f64::max);
    let mut m = [[0.0; B + 1]; B];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            m[r][c] = d[i][j];
        }
        m[r][k] = res[i];
    }
    for col in 0..k {
        let p = (col..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[p][col].abs() < PIVOT_TOL * scale {
            return None;
        }
        m.swap(col, p);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..=k {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut sol = [0.0; B];
    for r in (0..k).rev() {
        let mut s = m[r][k];
        for c in r + 1..k {
            s -= m[r][c] * sol[c];
        }
        sol[r] = s / m[r][r];
    }
    for (r, &i) in idx.iter().enumerate() {
        out[i] = sol[r];
    }
    Some(out)
}

#[inline]
fn relax(a: &BlockSparseMatrix, r: &[f64], x: &mut [f64], i: usize) {
    let mut res = [r[B * i], r[B * i + 1], r[B * i + 2]];
    let (cols, blocks) = a.row(i);
    for (&j, b) in cols.iter().zip(blocks) {
        let xj = [x[B * j], x[B * j + 1], x[B * j + 2]];
        for rr in 0..B {
            res[rr] -= b[rr][0] * xj[0] + b[rr][1] * xj[1] + b[rr][2] * xj[2];
        }
    }
    if let Some(delta) = solve_active(a.diag_block(i), &res) {
        for k in 0..B {
            x[B * i + k] += delta[k];
        }
    }
}

/// Forward block Gauss–Seidel sweeps for `A x = r`. Dofs with zero diagonal
/// are left untouched; blocks with a singular active part are skipped.
pub fn block_gauss_seidel(a: &BlockSparseMatrix, r: &[f64], x: &mut [f64], sweeps: usize) {
    for _ in 0..sweeps {
        for i in 0..a.n() {
            relax(a, r, x, i);
        }
    }
}

/// Same as [`block_gauss_seidel`] with the vertex order reversed.
pub fn block_gauss_seidel_backward(a: &BlockSparseMatrix, r: &[f64], x: &mut [f64], sweeps: usize) {
    for _ in 0..sweeps {
        for i in (0..a.n()).rev() {
            relax(a, r, x, i);
        }
    }
}
