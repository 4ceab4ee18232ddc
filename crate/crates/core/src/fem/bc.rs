use super::element::DOFS_PER_VERTEX;
use super::grid::{GridHierarchy, StructuredGrid};
use crate::error::{Error, Result};

/// Per-dof Dirichlet flags with prescribed values proportional to a scalar
/// load parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditions {
    /// `fixed[3v + comp]`
    pub fixed: Vec<bool>,
    /// Prescribed value of each fixed dof at unit load.
    pub reference: Vec<f64>,
    /// Fixed dofs whose internal forces make up the reaction force.
    pub reaction_dofs: Vec<usize>,
}

impl BoundaryConditions {
    pub fn free(num_vertices: usize) -> Self {
        let n = DOFS_PER_VERTEX * num_vertices;
        BoundaryConditions {
            fixed: vec![false; n],
            reference: vec![0.0; n],
            reaction_dofs: Vec::new(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.fixed.len() / DOFS_PER_VERTEX
    }

    /// Prescribe `reference · load` on component `comp` of vertex `v`.
    pub fn fix(&mut self, v: usize, comp: usize, reference: f64) {
        let i = DOFS_PER_VERTEX * v + comp;
        self.fixed[i] = true;
        self.reference[i] = reference;
    }

    /// Prescribed values at the given load; entries of free dofs are zero.
    pub fn values_at(&self, load: f64) -> Vec<f64> {
        self.reference
            .iter()
            .zip(&self.fixed)
            .map(|(&r, &f)| if f { r * load } else { 0.0 })
            .collect()
    }

    pub fn num_fixed(&self) -> usize {
        self.fixed.iter().filter(|&&f| f).count()
    }
}

/// Upper limit on the number of scalar unknowns a mesh builder accepts.
pub const MAX_DOFS: usize = 10_000_000;

/// Half of the single-edge notched square `[0,L]²` cut along the crack line:
/// the domain `[0,L]×[0,L/2]` on a `32×16` coarse grid, refined `refine_steps`
/// times. The pre-crack `{y = 0, x < L/2}` is a free boundary.
///
/// Top edge: `u_y = load`, `u_x` free. Bottom edge right of the notch tip:
/// `u_y = 0`. The vertex at `(L/2, 0)` is fixed in both directions. The
/// reaction dofs are the top `u_y` dofs.
pub fn build_single_notch_mesh(length: f64, refine_steps: usize) -> Result<(GridHierarchy, BoundaryConditions)> {
    if !(length > 0.0) {
        return Err(Error::Config(format!("domain length {length} must be positive")));
    }
    let (nx0, ny0) = (32usize, 16usize);
    let factor = 1usize.checked_shl(refine_steps as u32).filter(|_| refine_steps < 40);
    let dofs = factor
        .and_then(|f| (nx0 * f + 1).checked_mul(ny0 * f + 1))
        .and_then(|v| v.checked_mul(DOFS_PER_VERTEX));
    match dofs {
        Some(n) if n <= MAX_DOFS => {}
        _ => {
            return Err(Error::Resource {
                dofs: dofs.unwrap_or(usize::MAX),
                limit: MAX_DOFS,
            })
        }
    }
    let hierarchy = GridHierarchy::new(StructuredGrid::new(nx0, ny0, length, 0.5 * length), refine_steps);
    let bcs = notch_conditions(hierarchy.finest());
    Ok((hierarchy, bcs))
}

/// Boundary conditions of the notched half specimen on `grid`, which must
/// cover `[0,L]×[0,L/2]` with an even number of cells in x.
pub fn notch_conditions(grid: &StructuredGrid) -> BoundaryConditions {
    let mut bc = BoundaryConditions::free(grid.num_vertices());
    for i in 0..=grid.nx {
        let top = grid.vertex_index(i, grid.ny);
        bc.fix(top, 1, 1.0);
        bc.reaction_dofs.push(DOFS_PER_VERTEX * top + 1);
        if 2 * i > grid.nx {
            bc.fix(grid.vertex_index(i, 0), 1, 0.0);
        }
    }
    let lx = grid.h[0] * grid.nx as f64;
    let tip = grid.nearest_vertex([grid.origin[0] + 0.5 * lx, grid.origin[1]]);
    bc.fix(tip, 0, 0.0);
    bc.fix(tip, 1, 0.0);
    bc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notch_mesh_levels() {
        let (h, bc) = build_single_notch_mesh(1.0, 0).unwrap();
        assert_eq!(h.num_levels(), 1);
        assert_eq!(h.finest().num_vertices(), 561);
        assert_eq!(bc.reaction_dofs.len(), 33);
        let (h, _) = build_single_notch_mesh(1.0, 3).unwrap();
        assert_eq!(h.num_levels(), 4);
        assert_eq!((h.finest().nx, h.finest().ny), (256, 128));
    }

    #[test]
    fn notch_conditions_layout() {
        let (h, bc) = build_single_notch_mesh(1.0, 0).unwrap();
        let g = h.finest();
        let tip = g.vertex_index(16, 0);
        assert!(bc.fixed[3 * tip] && bc.fixed[3 * tip + 1]);
        assert!(!bc.fixed[3 * g.vertex_index(10, 0) + 1]);
        assert!(bc.fixed[3 * g.vertex_index(20, 0) + 1]);
        assert!(!bc.fixed[3 * g.vertex_index(20, 0)]);
        assert!(!bc.fixed[3 * g.vertex_index(3, 16)]);
        assert!((0..g.num_vertices()).all(|v| !bc.fixed[3 * v + 2]));
        let vals = bc.values_at(2e-5);
        assert_eq!(vals[3 * g.vertex_index(3, 16) + 1], 2e-5);
        assert_eq!(vals[3 * g.vertex_index(20, 0) + 1], 0.0);
    }

    #[test]
    fn too_fine_is_a_resource_error() {
        // 4096×2048 cells already exceed the limit
        assert!(matches!(build_single_notch_mesh(1.0, 7), Err(Error::Resource { .. })));
        assert!(matches!(build_single_notch_mesh(1.0, 70), Err(Error::Resource { .. })));
    }
}
