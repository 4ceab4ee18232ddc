use serde::{Deserialize, Serialize};

/// Axis-aligned structured grid of `nx × ny` rectangular cells.
///
/// Vertices are numbered lexicographically, `i + j (nx + 1)`; cells likewise,
/// `i + j nx`. The local vertices of a cell are ordered
/// `(i, j), (i+1, j), (i, j+1), (i+1, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuredGrid {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    /// Cell size in x and y.
    pub h: [f64; 2],
}

impl StructuredGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        assert!(nx > 0 && ny > 0, "grid needs at least one cell");
        StructuredGrid {
            nx,
            ny,
            origin: [0.0, 0.0],
            h: [lx / nx as f64, ly / ny as f64],
        }
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        i + j * (self.nx + 1)
    }

    #[inline]
    pub fn vertex_ij(&self, v: usize) -> (usize, usize) {
        (v % (self.nx + 1), v / (self.nx + 1))
    }

    pub fn vertex_coords(&self, v: usize) -> [f64; 2] {
        let (i, j) = self.vertex_ij(v);
        [
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
        ]
    }

    #[inline]
    pub fn cell_vertices(&self, c: usize) -> [usize; 4] {
        let (i, j) = (c % self.nx, c / self.nx);
        let v = self.vertex_index(i, j);
        let s = self.nx + 1;
        [v, v + 1, v + s, v + s + 1]
    }

    /// Cells containing vertex `v`, with the local index of `v` in each.
    pub fn vertex_cells(&self, v: usize) -> impl Iterator<Item = (usize, usize)> {
        let (i, j) = self.vertex_ij(v);
        let (nx, ny) = (self.nx, self.ny);
        // (cell offset, local index of v in that cell)
        [(0isize, 0isize, 3usize), (1, 0, 2), (0, 1, 1), (1, 1, 0)]
            .into_iter()
            .filter_map(move |(di, dj, a)| {
                let ci = i as isize + di - 1;
                let cj = j as isize + dj - 1;
                (ci >= 0 && cj >= 0 && (ci as usize) < nx && (cj as usize) < ny)
                    .then(|| (ci as usize + cj as usize * nx, a))
            })
    }

    /// Vertices sharing a cell with `v` (including `v`), ascending.
    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        let (i, j) = self.vertex_ij(v);
        let mut out = Vec::with_capacity(9);
        for jj in j.saturating_sub(1)..=(j + 1).min(self.ny) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.nx) {
                out.push(self.vertex_index(ii, jj));
            }
        }
        out
    }

    /// Uniform refinement: every cell is quadrisected.
    pub fn refined(&self) -> StructuredGrid {
        StructuredGrid {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
            origin: self.origin,
            h: [0.5 * self.h[0], 0.5 * self.h[1]],
        }
    }

    /// Nearest vertex to a point.
    pub fn nearest_vertex(&self, p: [f64; 2]) -> usize {
        let fi = ((p[0] - self.origin[0]) / self.h[0]).round().clamp(0.0, self.nx as f64);
        let fj = ((p[1] - self.origin[1]) / self.h[1]).round().clamp(0.0, self.ny as f64);
        self.vertex_index(fi as usize, fj as usize)
    }
}

/// Bilinear interpolation from a grid to its uniform refinement, stored row-wise
/// over fine vertices with at most four coarse contributions per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Prolongation {
    pub coarse_vertices: usize,
    pub fine_vertices: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl Prolongation {
    pub fn between(coarse: &StructuredGrid, fine: &StructuredGrid) -> Self {
        assert_eq!(fine.nx, 2 * coarse.nx);
        assert_eq!(fine.ny, 2 * coarse.ny);
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        for v in 0..fine.num_vertices() {
            let (fi, fj) = fine.vertex_ij(v);
            let xs: &[(usize, f64)] = &if fi % 2 == 0 {
                vec![(fi / 2, 1.0)]
            } else {
                vec![(fi / 2, 0.5), (fi / 2 + 1, 0.5)]
            };
            let ys: &[(usize, f64)] = &if fj % 2 == 0 {
                vec![(fj / 2, 1.0)]
            } else {
                vec![(fj / 2, 0.5), (fj / 2 + 1, 0.5)]
            };
            for &(cj, wy) in ys {
                for &(ci, wx) in xs {
                    cols.push(coarse.vertex_index(ci, cj));
                    weights.push(wx * wy);
                }
            }
            row_ptr.push(cols.len());
        }
        Prolongation {
            coarse_vertices: coarse.num_vertices(),
            fine_vertices: fine.num_vertices(),
            row_ptr,
            cols,
            weights,
        }
    }

    /// `(coarse vertex, weight)` pairs of fine vertex `v`.
    #[inline]
    pub fn row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[v]..self.row_ptr[v + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// Interpolate a vertex-blocked vector with `block` components per vertex.
    pub fn prolongate(&self, coarse: &[f64], block: usize) -> Vec<f64> {
        assert_eq!(coarse.len(), self.coarse_vertices * block);
        let mut fine = vec![0.0; self.fine_vertices * block];
        for v in 0..self.fine_vertices {
            for (c, w) in self.row(v) {
                for k in 0..block {
                    fine[v * block + k] += w * coarse[c * block + k];
                }
            }
        }
        fine
    }

    /// Transpose application `Pᵀ r`.
    pub fn restrict(&self, fine: &[f64], block: usize) -> Vec<f64> {
        assert_eq!(fine.len(), self.fine_vertices * block);
        let mut coarse = vec![0.0; self.coarse_vertices * block];
        for v in 0..self.fine_vertices {
            for (c, w) in self.row(v) {
                for k in 0..block {
                    coarse[c * block + k] += w * fine[v * block + k];
                }
            }
        }
        coarse
    }

    /// Fine vertex coinciding with each coarse vertex.
    pub fn coincident_fine_vertex(coarse: &StructuredGrid, fine: &StructuredGrid, c: usize) -> usize {
        let (i, j) = coarse.vertex_ij(c);
        fine.vertex_index(2 * i, 2 * j)
    }
}

/// Sequence of uniformly refined grids, coarsest first.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHierarchy {
    pub levels: Vec<StructuredGrid>,
    /// `transfers[l]` interpolates from `levels[l]` to `levels[l + 1]`.
    pub transfers: Vec<Prolongation>,
}

impl GridHierarchy {
    pub fn new(coarse: StructuredGrid, refine_steps: usize) -> Self {
        let mut levels = vec![coarse];
        for _ in 0..refine_steps {
            let next = levels.last().unwrap().refined();
            levels.push(next);
        }
        let transfers = levels
            .windows(2)
            .map(|w| Prolongation::between(&w[0], &w[1]))
            .collect();
        GridHierarchy { levels, transfers }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &StructuredGrid {
        self.levels.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinatorics() {
        let g = StructuredGrid::new(32, 16, 1.0, 0.5);
        assert_eq!(g.num_vertices(), 561);
        assert_eq!(g.num_cells(), 512);
        assert_eq!(g.vertex_cells(0).count(), 1);
        assert_eq!(g.vertex_cells(g.vertex_index(5, 5)).count(), 4);
        assert_eq!(g.vertex_neighbors(g.vertex_index(5, 5)).len(), 9);
        assert_eq!(g.vertex_neighbors(g.vertex_index(32, 16)).len(), 4);
        for (c, a) in g.vertex_cells(g.vertex_index(3, 2)) {
            assert_eq!(g.cell_vertices(c)[a], g.vertex_index(3, 2));
        }
    }

    #[test]
    fn prolongation_reproduces_bilinear_fields() {
        let h = GridHierarchy::new(StructuredGrid::new(3, 2, 1.5, 1.0), 1);
        let (c, f) = (&h.levels[0], &h.levels[1]);
        let field = |p: [f64; 2]| 1.0 + 2.0 * p[0] - 0.5 * p[1] + 0.75 * p[0] * p[1];
        let coarse: Vec<f64> = (0..c.num_vertices()).map(|v| field(c.vertex_coords(v))).collect();
        let fine = h.transfers[0].prolongate(&coarse, 1);
        for v in 0..f.num_vertices() {
            assert!((fine[v] - field(f.vertex_coords(v))).abs() < 1e-14);
        }
        for v in 0..c.num_vertices() {
            let fv = Prolongation::coincident_fine_vertex(c, f, v);
            assert_eq!(fine[fv], coarse[v]);
        }
    }

    #[test]
    fn restriction_is_transpose() {
        let h = GridHierarchy::new(StructuredGrid::new(2, 2, 1.0, 1.0), 1);
        let p = &h.transfers[0];
        let x: Vec<f64> = (0..p.coarse_vertices * 3).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..p.fine_vertices * 3).map(|i| (i as f64 * 0.7).cos()).collect();
        let px = p.prolongate(&x, 3);
        let pty = p.restrict(&y, 3);
        let lhs: f64 = px.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&pty).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
