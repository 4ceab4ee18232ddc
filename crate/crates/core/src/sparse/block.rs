use crate::fem::{StructuredGrid, DOFS_PER_VERTEX};

pub const B: usize = DOFS_PER_VERTEX;
pub type Block = [[f64; B]; B];

/// Block CSR matrix over vertices with dense `3×3` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    blocks: Vec<Block>,
    diag: Vec<usize>,
}

impl BlockSparseMatrix {
    /// Zero matrix with the given (sorted) column pattern per block row; every
    /// row must contain its diagonal.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut diag = Vec::with_capacity(n);
        for (i, r) in rows.iter().enumerate() {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            let p = r.binary_search(&i).expect("pattern must contain the diagonal");
            diag.push(cols.len() + p);
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let blocks = vec![[[0.0; B]; B]; cols.len()];
        BlockSparseMatrix { n, row_ptr, cols, blocks, diag }
    }

    /// Zero matrix with the Q1 vertex-adjacency (9-point) pattern of `grid`.
    pub fn for_grid(grid: &StructuredGrid) -> Self {
        let rows: Vec<Vec<usize>> = (0..grid.num_vertices()).map(|v| grid.vertex_neighbors(v)).collect();
        Self::from_pattern(&rows)
    }

    /// Number of block rows (vertices).
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of scalar rows.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n * B
    }

    pub fn nnz_blocks(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[Block]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.blocks[r])
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> (&[usize], &mut [Block]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &mut self.blocks[r])
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].binary_search(&j).ok().map(|p| r.start + p)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Block> {
        self.position(i, j).map(|p| &self.blocks[p])
    }

    #[inline]
    pub fn diag_block(&self, i: usize) -> &Block {
        &self.blocks[self.diag[i]]
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    /// Add `blk` to block `(i, j)`, which must be in the pattern.
    #[inline]
    pub fn add_block(&mut self, i: usize, j: usize, blk: &Block) {
        let p = self.position(i, j).expect("block outside sparsity pattern");
        let t = &mut self.blocks[p];
        for r in 0..B {
            for c in 0..B {
                t[r][c] += blk[r][c];
            }
        }
    }

    /// Scalar entry; zero outside the pattern.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.block(r / B, c / B).map_or(0.0, |b| b[r % B][c % B])
    }

    pub fn fill_zero(&mut self) {
        self.blocks.iter_mut().for_each(|b| *b = [[0.0; B]; B]);
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for i in 0..self.n {
            let mut acc = [0.0; B];
            let (cols, blocks) = self.row(i);
            for (&j, b) in cols.iter().zip(blocks) {
                let xj = &x[B * j..B * j + B];
                for r in 0..B {
                    acc[r] += b[r][0] * xj[0] + b[r][1] * xj[1] + b[r][2] * xj[2];
                }
            }
            y[B * i..B * i + B].copy_from_slice(&acc);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A x`
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Largest absolute diagonal entry.
    pub fn diag_scale(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| {
                let b = self.diag_block(i);
                (0..B).map(move |k| b[k][k].abs())
            })
            .fold(0.0, f64::max)
    }

    /// Maximal `|i − j|` over stored scalar entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
            * B
            + (B - 1)
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim()]; self.dim()];
        for i in 0..self.n {
            let (cols, blocks) = self.row(i);
            for (&j, b) in cols.iter().zip(blocks) {
                for r in 0..B {
                    for c in 0..B {
                        out[B * i + r][B * j + c] = b[r][c];
                    }
                }
            }
        }
        out
    }

    /// Largest `|A_ij − A_ji|` over the pattern.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            let (cols, blocks) = self.row(i);
            for (&j, b) in cols.iter().zip(blocks) {
                let bt = self.block(j, i).copied().unwrap_or([[0.0; B]; B]);
                for r in 0..B {
                    for c in 0..B {
                        m = m.max((b[r][c] - bt[c][r]).abs());
                    }
                }
            }
        }
        m
    }
}
