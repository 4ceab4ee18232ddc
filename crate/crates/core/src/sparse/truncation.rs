use super::block::{BlockSparseMatrix, B};

/// Per scalar dof: does it take part in the linear correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationMask {
    pub active: Vec<bool>,
}

impl TruncationMask {
    pub fn all_active(n: usize) -> Self {
        TruncationMask { active: vec![true; n] }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn num_inactive(&self) -> usize {
        self.active.iter().filter(|a| !**a).count()
    }

    /// Zero the inactive entries of `x`.
    pub fn apply(&self, x: &mut [f64]) {
        for (v, &a) in x.iter_mut().zip(&self.active) {
            if !a {
                *v = 0.0;
            }
        }
    }
}

/// Zero every matrix entry with an inactive row or column index and the
/// residual entries of inactive dofs, in place.
pub fn truncate_in_place(a: &mut BlockSparseMatrix, r: &mut [f64], mask: &TruncationMask) {
    assert_eq!(mask.len(), a.dim());
    assert_eq!(r.len(), a.dim());
    let act = &mask.active;
    for i in 0..a.n() {
        let (cols, blocks) = a.row_mut(i);
        for (&j, b) in cols.iter().zip(blocks.iter_mut()) {
            for rr in 0..B {
                for cc in 0..B {
                    if !act[B * i + rr] || !act[B * j + cc] {
                        b[rr][cc] = 0.0;
                    }
                }
            }
        }
    }
    mask.apply(r);
}

/// Truncated copies `(A_t, r_t)`.
pub fn apply_truncation(a: &BlockSparseMatrix, r: &[f64], mask: &TruncationMask) -> (BlockSparseMatrix, Vec<f64>) {
    let mut at = a.clone();
    let mut rt = r.to_vec();
    truncate_in_place(&mut at, &mut rt, mask);
    (at, rt)
}
