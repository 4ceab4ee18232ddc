use super::block::{BlockSparseMatrix, B};

/// Banded `LDLᵀ` factorization of a symmetric positive semidefinite block
/// matrix under a vertex permutation. Pivots below `1e-14` of the largest
/// diagonal entry are treated as zero and the corresponding unknowns are set
/// to zero in solves.
#[derive(Debug, Clone)]
pub struct BandedLdlt {
    n: usize,
    bw: usize,
    /// Scalar position of vertex block `v` is `B · pos[v]`.
    pos: Vec<usize>,
    /// Row `i` holds `L(i, i − bw .. i)` in `l[i·bw .. (i+1)·bw]`.
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandedLdlt {
    /// Factor with the natural vertex order.
    pub fn factor(a: &BlockSparseMatrix) -> Self {
        let order: Vec<usize> = (0..a.n()).collect();
        Self::factor_ordered(a, &order)
    }

    /// Factor with vertex `order[k]` eliminated `k`-th.
    pub fn factor_ordered(a: &BlockSparseMatrix, order: &[usize]) -> Self {
        assert_eq!(order.len(), a.n());
        let mut pos = vec![0; a.n()];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let n = a.dim();
        let mut vb = 0;
        for i in 0..a.n() {
            for &j in a.row(i).0 {
                vb = vb.max(pos[i].abs_diff(pos[j]));
            }
        }
        let bw = (B * vb + B - 1).min(n.saturating_sub(1)).max(1);
        let mut l = vec![0.0; n * bw];
        let mut d = vec![0.0; n];
        for i in 0..a.n() {
            let (cols, blocks) = a.row(i);
            for (&j, b) in cols.iter().zip(blocks) {
                for r in 0..B {
                    for c in 0..B {
                        let (gi, gj) = (B * pos[i] + r, B * pos[j] + c);
                        if gi == gj {
                            d[gi] = b[r][c];
                        } else if gj < gi {
                            l[gi * bw + (gj + bw - gi)] = b[r][c];
                        }
                    }
                }
            }
        }
        let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = 1e-14 * scale;
        // Row-wise elimination; `u` holds L(i, k) d(k) of the current row.
        let mut u = vec![0.0; bw];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let off = bw - (i - lo); // first used slot of row i
            for j in lo..i {
                let s = j - lo + off; // slot of column j in row i
                let jlo = j.saturating_sub(bw).max(lo);
                // Σ_{k = jlo}^{j−1} L(i,k) d(k) L(j,k)
                let len = j - jlo;
                let ri = &u[s - len..s];
                let rj = &l[j * bw + bw - len..j * bw + bw];
                let dot: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
                let t = l[i * bw + s] - dot;
                u[s] = t;
                l[i * bw + s] = if d[j] == 0.0 { 0.0 } else { t / d[j] };
                if d[j] == 0.0 {
                    u[s] = 0.0;
                }
            }
            let row = &l[i * bw + off..i * bw + bw];
            let dot: f64 = row.iter().zip(&u[off..bw]).map(|(x, y)| x * y).sum();
            let di = d[i] - dot;
            d[i] = if di.abs() <= tol { 0.0 } else { di };
            if d[i] == 0.0 {
                // a skipped pivot decouples its unknown
                for x in &mut l[i * bw..(i + 1) * bw] {
                    *x = 0.0;
                }
            }
        }
        BandedLdlt { n, bw, pos, l, d }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let (n, bw) = (self.n, self.bw);
        let mut y = vec![0.0; n];
        for (v, &p) in self.pos.iter().enumerate() {
            y[B * p..B * p + B].copy_from_slice(&b[B * v..B * v + B]);
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.l[i * bw + bw - (i - lo)..(i + 1) * bw];
            let dot: f64 = row.iter().zip(&y[lo..i]).map(|(x, y)| x * y).sum();
            y[i] -= dot;
        }
        for i in 0..n {
            y[i] = if self.d[i] == 0.0 { 0.0 } else { y[i] / self.d[i] };
        }
        for i in (0..n).rev() {
            let lo = i.saturating_sub(bw);
            let yi = y[i];
            if yi != 0.0 {
                let row = &self.l[i * bw + bw - (i - lo)..(i + 1) * bw];
                for (yk, lk) in y[lo..i].iter_mut().zip(row) {
                    *yk -= lk * yi;
                }
            }
        }
        let mut x = vec![0.0; n];
        for (v, &p) in self.pos.iter().enumerate() {
            x[B * v..B * v + B].copy_from_slice(&y[B * p..B * p + B]);
        }
        x
    }

    /// Number of skipped pivots.
    pub fn num_zero_pivots(&self) -> usize {
        self.d.iter().filter(|x| **x == 0.0).count()
    }
}
