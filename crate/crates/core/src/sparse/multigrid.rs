use super::block::{Block, BlockSparseMatrix, B};
use super::coarse::BandedLdlt;
use super::smoother::{block_gauss_seidel, block_gauss_seidel_backward};
use super::truncation::{truncate_in_place, TruncationMask};
use crate::fem::{GridHierarchy, Prolongation, StructuredGrid};

/// Galerkin product `Pᵀ A P` on the 9-point pattern of the coarse grid.
pub fn galerkin(a: &BlockSparseMatrix, p: &Prolongation, coarse: &StructuredGrid) -> BlockSparseMatrix {
    let mut ac = BlockSparseMatrix::for_grid(coarse);
    let rows_p: Vec<Vec<(usize, f64)>> = (0..p.fine_vertices).map(|v| p.row(v).collect()).collect();
    for i in 0..a.n() {
        let (cols, blocks) = a.row(i);
        for &(ci, wi) in &rows_p[i] {
            for (&j, b) in cols.iter().zip(blocks) {
                for &(cj, wj) in &rows_p[j] {
                    let w = wi * wj;
                    let mut s: Block = [[0.0; B]; B];
                    for r in 0..B {
                        for c in 0..B {
                            s[r][c] = w * b[r][c];
                        }
                    }
                    ac.add_block(ci, cj, &s);
                }
            }
        }
    }
    ac
}

/// Coarse mask by injection at coinciding vertices.
pub fn restrict_mask(mask: &TruncationMask, hierarchy: &GridHierarchy, fine_level: usize) -> TruncationMask {
    let coarse = &hierarchy.levels[fine_level - 1];
    let fine = &hierarchy.levels[fine_level];
    let mut active = vec![false; B * coarse.num_vertices()];
    for c in 0..coarse.num_vertices() {
        let f = Prolongation::coincident_fine_vertex(coarse, fine, c);
        for k in 0..B {
            active[B * c + k] = mask.active[B * f + k];
        }
    }
    TruncationMask { active }
}

struct Level {
    a: BlockSparseMatrix,
    mask: TruncationMask,
}

/// Operators and masks of a truncated geometric multigrid hierarchy.
pub struct Multigrid<'h> {
    hierarchy: &'h GridHierarchy,
    /// Coarsest first, like `hierarchy.levels`.
    levels: Vec<Level>,
    coarse: BandedLdlt,
}

impl<'h> Multigrid<'h> {
    /// `fine` must already be truncated with `mask`.
    pub fn new(hierarchy: &'h GridHierarchy, fine: BlockSparseMatrix, mask: TruncationMask) -> Self {
        let nl = hierarchy.num_levels();
        assert_eq!(fine.n(), hierarchy.finest().num_vertices());
        let mut levels = Vec::with_capacity(nl);
        levels.push(Level { a: fine, mask });
        for l in (1..nl).rev() {
            let f = levels.last().unwrap();
            let mut ac = galerkin(&f.a, &hierarchy.transfers[l - 1], &hierarchy.levels[l - 1]);
            let mc = restrict_mask(&f.mask, hierarchy, l);
            let mut dummy = vec![0.0; ac.dim()];
            truncate_in_place(&mut ac, &mut dummy, &mc);
            levels.push(Level { a: ac, mask: mc });
        }
        levels.reverse();
        let coarse = BandedLdlt::factor_ordered(&levels[0].a, &band_order(&hierarchy.levels[0]));
        Multigrid { hierarchy, levels, coarse }
    }

    pub fn fine_matrix(&self) -> &BlockSparseMatrix {
        &self.levels.last().unwrap().a
    }

    pub fn matrix(&self, level: usize) -> &BlockSparseMatrix {
        &self.levels[level].a
    }

    /// One V-cycle for `A c = r` starting from zero, with `pre` forward and
    /// `post` backward Gauss–Seidel sweeps. The result vanishes on
    /// inactive dofs.
    pub fn v_cycle(&self, r: &[f64], pre: usize, post: usize) -> Vec<f64> {
        let top = self.levels.len() - 1;
        let mut rt = r.to_vec();
        self.levels[top].mask.apply(&mut rt);
        self.cycle(top, &rt, pre, post)
    }

    fn cycle(&self, l: usize, r: &[f64], pre: usize, post: usize) -> Vec<f64> {
        if l == 0 {
            let mut x = self.coarse.solve(r);
            self.levels[0].mask.apply(&mut x);
            return x;
        }
        let lv = &self.levels[l];
        let p = &self.hierarchy.transfers[l - 1];
        let mut x = vec![0.0; r.len()];
        block_gauss_seidel(&lv.a, r, &mut x, pre);
        let ax = lv.a.matvec(&x);
        let res: Vec<f64> = r.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let mut rc = p.restrict(&res, B);
        self.levels[l - 1].mask.apply(&mut rc);
        let ec = self.cycle(l - 1, &rc, pre, post);
        let mut ef = p.prolongate(&ec, B);
        lv.mask.apply(&mut ef);
        for (xi, e) in x.iter_mut().zip(&ef) {
            *xi += e;
        }
        block_gauss_seidel_backward(&lv.a, r, &mut x, post);
        x
    }
}

/// Vertex order with the shorter grid direction running fastest.
fn band_order(g: &StructuredGrid) -> Vec<usize> {
    if g.ny <= g.nx {
        (0..=g.nx).flat_map(|i| (0..=g.ny).map(move |j| g.vertex_index(i, j))).collect()
    } else {
        (0..g.num_vertices()).collect()
    }
}
