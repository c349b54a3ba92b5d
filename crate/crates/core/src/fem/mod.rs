//! Dof maps, global assembly with Dirichlet elimination, manufactured loads
//! and the nested coarse-space prolongation.

pub mod elem;
pub mod mms;

pub use mms::Manufactured;

use crate::error::Error;
use crate::mesh::{BoxGrid, CoefficientField, StructuredGrid};
use crate::sparse::{SparseRect, SparseSpd};
use std::collections::HashMap;

/// Element family of the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementFamily {
    /// Vector trilinear nodal elements (3 dofs per node), u = 0 on the boundary.
    ElasticityNodal,
    /// Lowest-order Nédélec hex edge elements (one moment per fine edge),
    /// tangential trace zero on the boundary.
    MaxwellEdge,
}

/// A dof of the discretization, identified by its mesh entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Node { p: [usize; 3], comp: usize },
    /// Edge from `origin` along `axis`, oriented along the positive axis.
    Edge { axis: usize, origin: [usize; 3] },
}

/// Global numbering of dofs with the boundary mask and the free-dof
/// compression.
///
/// Ordering: elasticity dofs are node-major (`3·node + comp`) with nodes
/// lexicographic, x fastest; edge dofs come in per-axis blocks (all x-edges,
/// then y, then z), lexicographic within each block. All edges carry the
/// positive-axis orientation, so every element-local sign is +1 on these
/// structured grids.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub family: ElementFamily,
    pub grid: BoxGrid,
    pub total_dofs: usize,
    pub free_dofs: usize,
    full_to_free: Vec<i64>,
    free_to_full: Vec<usize>,
    /// x/y/z edge block offsets (Maxwell only).
    edge_offsets: [usize; 3],
}

impl DofMap {
    pub fn new(family: ElementFamily, grid: BoxGrid) -> Self {
        let nn = grid.nn();
        let nc = grid.nc;
        let (total, edge_offsets) = match family {
            ElementFamily::ElasticityNodal => (3 * grid.num_nodes(), [0; 3]),
            ElementFamily::MaxwellEdge => {
                let nx = nc[0] * nn[1] * nn[2];
                let ny = nn[0] * nc[1] * nn[2];
                let nz = nn[0] * nn[1] * nc[2];
                (nx + ny + nz, [0, nx, nx + ny])
            }
        };
        let mut map = DofMap {
            family,
            grid,
            total_dofs: total,
            free_dofs: 0,
            full_to_free: vec![-1; total],
            free_to_full: Vec::new(),
            edge_offsets,
        };
        for full in 0..total {
            if !map.is_dirichlet(full) {
                map.full_to_free[full] = map.free_to_full.len() as i64;
                map.free_to_full.push(full);
            }
        }
        map.free_dofs = map.free_to_full.len();
        map
    }

    /// All dofs of a dof's entity vanish on the domain boundary?
    fn is_dirichlet(&self, full: usize) -> bool {
        match self.entity(full) {
            Entity::Node { p, .. } => self.grid.node_on_boundary(p),
            Entity::Edge { axis, origin } => {
                // an edge is constrained iff it lies inside a boundary face
                let (t1, t2) = elem::transverse_axes(axis);
                origin[t1] == 0
                    || origin[t1] == self.grid.nc[t1]
                    || origin[t2] == 0
                    || origin[t2] == self.grid.nc[t2]
            }
        }
    }

    /// Entity of a full dof index.
    pub fn entity(&self, full: usize) -> Entity {
        match self.family {
            ElementFamily::ElasticityNodal => {
                let node = full / 3;
                Entity::Node { p: self.grid.node_coords(node), comp: full % 3 }
            }
            ElementFamily::MaxwellEdge => {
                let axis = if full >= self.edge_offsets[2] {
                    2
                } else if full >= self.edge_offsets[1] {
                    1
                } else {
                    0
                };
                let rel = full - self.edge_offsets[axis];
                let nn = self.grid.nn();
                let mut dims = nn;
                dims[axis] = self.grid.nc[axis];
                let x = rel % dims[0];
                let r = rel / dims[0];
                Entity::Edge { axis, origin: [x, r % dims[1], r / dims[1]] }
            }
        }
    }

    /// Full dof index of a node component.
    #[inline]
    pub fn node_dof(&self, p: [usize; 3], comp: usize) -> usize {
        debug_assert_eq!(self.family, ElementFamily::ElasticityNodal);
        3 * self.grid.node_index(p) + comp
    }

    /// Full dof index of an edge.
    #[inline]
    pub fn edge_dof(&self, axis: usize, origin: [usize; 3]) -> usize {
        debug_assert_eq!(self.family, ElementFamily::MaxwellEdge);
        let nn = self.grid.nn();
        let mut dims = nn;
        dims[axis] = self.grid.nc[axis];
        self.edge_offsets[axis] + origin[0] + dims[0] * (origin[1] + dims[1] * origin[2])
    }

    /// Orientation sign carried by an edge dof: +1 everywhere on these grids
    /// (all edges point along the positive axis).
    #[inline]
    pub fn orientation(&self, _full: usize) -> f64 {
        1.0
    }

    #[inline]
    pub fn free_index(&self, full: usize) -> Option<usize> {
        let v = self.full_to_free[full];
        (v >= 0).then_some(v as usize)
    }

    #[inline]
    pub fn full_index(&self, free: usize) -> usize {
        self.free_to_full[free]
    }

    /// Full dof indices of a cell, in element-local order.
    pub fn cell_dofs(&self, c: [usize; 3]) -> Vec<usize> {
        match self.family {
            ElementFamily::ElasticityNodal => {
                let mut out = Vec::with_capacity(24);
                for l in 0..8 {
                    let p = [c[0] + (l & 1), c[1] + ((l >> 1) & 1), c[2] + ((l >> 2) & 1)];
                    for comp in 0..3 {
                        out.push(self.node_dof(p, comp));
                    }
                }
                out
            }
            ElementFamily::MaxwellEdge => {
                let mut out = Vec::with_capacity(12);
                for e in 0..12 {
                    let (axis, a, b) = elem::edge_decompose(e);
                    let (t1, t2) = elem::transverse_axes(axis);
                    let mut origin = c;
                    origin[t1] += a;
                    origin[t2] += b;
                    out.push(self.edge_dof(axis, origin));
                }
                out
            }
        }
    }

    /// Cells whose closure contains the dof's entity.
    pub fn dof_cells(&self, full: usize) -> Vec<[usize; 3]> {
        let nc = self.grid.nc;
        let range = |coord: usize, axis: usize, on_lattice: bool| -> (usize, usize) {
            if on_lattice {
                let lo = coord.saturating_sub(1);
                let hi = (coord + 1).min(nc[axis]);
                (lo, hi)
            } else {
                (coord, coord + 1)
            }
        };
        let (rx, ry, rz) = match self.entity(full) {
            Entity::Node { p, .. } => (range(p[0], 0, true), range(p[1], 1, true), range(p[2], 2, true)),
            Entity::Edge { axis, origin } => {
                let r = |a: usize| range(origin[a], a, a != axis);
                (r(0), r(1), r(2))
            }
        };
        let mut cells = Vec::with_capacity(8);
        for z in rz.0..rz.1 {
            for y in ry.0..ry.1 {
                for x in rx.0..rx.1 {
                    cells.push([x, y, z]);
                }
            }
        }
        cells
    }

    /// Midpoint of the dof's entity in physical coordinates.
    pub fn dof_position(&self, full: usize) -> [f64; 3] {
        let h = self.grid.h;
        match self.entity(full) {
            Entity::Node { p, .. } => [p[0] as f64 * h, p[1] as f64 * h, p[2] as f64 * h],
            Entity::Edge { axis, origin } => {
                let mut x = [origin[0] as f64 * h, origin[1] as f64 * h, origin[2] as f64 * h];
                x[axis] += 0.5 * h;
                x
            }
        }
    }
}

fn element_cache_key(family: ElementFamily, c1: f64, c2: f64) -> (ElementFamily, u64, u64) {
    (family, c1.to_bits(), c2.to_bits())
}

enum ElementMatrix {
    Elasticity(Box<[[f64; 24]; 24]>),
    Maxwell(Box<[[f64; 12]; 12]>),
}

impl ElementMatrix {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            ElementMatrix::Elasticity(k) => k[i][j],
            ElementMatrix::Maxwell(k) => k[i][j],
        }
    }
    fn size(&self) -> usize {
        match self {
            ElementMatrix::Elasticity(_) => 24,
            ElementMatrix::Maxwell(_) => 12,
        }
    }
}

fn build_element(family: ElementFamily, c1: f64, c2: f64, h: f64) -> Result<ElementMatrix, Error> {
    Ok(match family {
        ElementFamily::ElasticityNodal => {
            ElementMatrix::Elasticity(Box::new(elem::elasticity_element_matrix(c1, c2, h)?))
        }
        ElementFamily::MaxwellEdge => {
            ElementMatrix::Maxwell(Box::new(elem::maxwell_element_matrix(c1, c2, h)?))
        }
    })
}

fn check_coeffs(dofmap: &DofMap, coeffs: &CoefficientField) -> Result<(), Error> {
    if coeffs.len() != dofmap.grid.num_cells() {
        return Err(Error::Dimension(format!(
            "coefficient field has {} cells, grid has {}",
            coeffs.len(),
            dofmap.grid.num_cells()
        )));
    }
    Ok(())
}

/// Assembles the global matrix on free dofs (Dirichlet rows and columns
/// eliminated). The result is SPD for positive coefficient fields.
pub fn assemble(dofmap: &DofMap, coeffs: &CoefficientField) -> Result<SparseSpd, Error> {
    assemble_impl(dofmap, coeffs, true)
}

/// Assembles the full matrix on all dofs, without boundary elimination
/// (singular; used by kernel and patch checks).
pub fn assemble_unconstrained(dofmap: &DofMap, coeffs: &CoefficientField) -> Result<SparseSpd, Error> {
    assemble_impl(dofmap, coeffs, false)
}

fn assemble_impl(dofmap: &DofMap, coeffs: &CoefficientField, eliminate: bool) -> Result<SparseSpd, Error> {
    check_coeffs(dofmap, coeffs)?;
    let grid = &dofmap.grid;
    let dim = if eliminate { dofmap.free_dofs } else { dofmap.total_dofs };
    let to_row = |full: usize| -> Option<usize> {
        if eliminate {
            dofmap.free_index(full)
        } else {
            Some(full)
        }
    };

    // Exact sparsity pattern from entity adjacency.
    use rayon::prelude::*;
    let rows: Vec<Vec<u32>> = (0..dim)
        .into_par_iter()
        .map(|row| {
            let full = if eliminate { dofmap.full_index(row) } else { row };
            let mut cols: Vec<u32> = Vec::with_capacity(96);
            for cell in dofmap.dof_cells(full) {
                for d in dofmap.cell_dofs(cell) {
                    if let Some(j) = to_row(d) {
                        cols.push(j as u32);
                    }
                }
            }
            cols.sort_unstable();
            cols.dedup();
            cols
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0usize);
    for r in &rows {
        row_ptr.push(row_ptr.last().unwrap() + r.len());
    }
    let mut col_ind = Vec::with_capacity(*row_ptr.last().unwrap());
    for r in rows {
        col_ind.extend_from_slice(&r);
    }
    let mut a = SparseSpd::with_pattern(dim, row_ptr, col_ind);

    // Numeric accumulation, sequential for bitwise determinism.
    let mut cache: HashMap<(ElementFamily, u64, u64), ElementMatrix> = HashMap::new();
    let nc = grid.nc;
    for cz in 0..nc[2] {
        for cy in 0..nc[1] {
            for cx in 0..nc[0] {
                let cell = [cx, cy, cz];
                let idx = grid.cell_index(cell);
                let key = element_cache_key(dofmap.family, coeffs.c1[idx], coeffs.c2[idx]);
                if !cache.contains_key(&key) {
                    let k = build_element(dofmap.family, coeffs.c1[idx], coeffs.c2[idx], grid.h)?;
                    cache.insert(key, k);
                }
                let ke = &cache[&key];
                let dofs = dofmap.cell_dofs(cell);
                let nloc = ke.size();
                for (li, &di) in dofs.iter().enumerate().take(nloc) {
                    let Some(ri) = to_row(di) else { continue };
                    for (lj, &dj) in dofs.iter().enumerate().take(nloc) {
                        if let Some(rj) = to_row(dj) {
                            a.add_at(ri, rj, ke.get(li, lj));
                        }
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Assembles the load vector on free dofs for a manufactured problem,
/// integrating the closed-form forcing against the basis with 3×3×3 Gauss
/// quadrature.
pub fn assemble_rhs(dofmap: &DofMap, which: Manufactured) -> Vec<f64> {
    let grid = &dofmap.grid;
    let h = grid.h;
    let vol = h * h * h;
    let mut b = vec![0.0; dofmap.free_dofs];
    if which == Manufactured::Zero {
        return b;
    }
    let nc = grid.nc;
    for cz in 0..nc[2] {
        for cy in 0..nc[1] {
            for cx in 0..nc[0] {
                let cell = [cx, cy, cz];
                let corner = [cx as f64 * h, cy as f64 * h, cz as f64 * h];
                let dofs = dofmap.cell_dofs(cell);
                let nloc = dofs.len();
                let mut local = vec![0.0f64; nloc];
                for &(gx, wx) in elem::GAUSS3.iter() {
                    for &(gy, wy) in elem::GAUSS3.iter() {
                        for &(gz, wz) in elem::GAUSS3.iter() {
                            let w = wx * wy * wz * vol;
                            let t = [gx, gy, gz];
                            let x = [corner[0] + gx * h, corner[1] + gy * h, corner[2] + gz * h];
                            let f = mms::forcing(which, x);
                            match dofmap.family {
                                ElementFamily::ElasticityNodal => {
                                    for l in 0..8 {
                                        let nsh = elem::hex_shape(l, t);
                                        for comp in 0..3 {
                                            local[3 * l + comp] += w * nsh * f[comp];
                                        }
                                    }
                                }
                                ElementFamily::MaxwellEdge => {
                                    for (e, le) in local.iter_mut().enumerate() {
                                        let phi = elem::nedelec_shape(e, t, h);
                                        *le += w * (phi[0] * f[0] + phi[1] * f[1] + phi[2] * f[2]);
                                    }
                                }
                            }
                        }
                    }
                }
                for (l, &d) in dofs.iter().enumerate() {
                    if let Some(r) = dofmap.free_index(d) {
                        b[r] += local[l];
                    }
                }
            }
        }
    }
    b
}

/// Builds the prolongation from the coarse space on the `n³` subdomain grid
/// into the fine space (rows = fine free dofs, columns = coarse free dofs),
/// together with the coarse dof map.
///
/// Columns are the fine-dof representations of the coarse basis functions:
/// trilinear interpolation for nodal dofs, fine-edge moments of the coarse
/// Nédélec functions for edge dofs. The coarse operator is the Galerkin
/// triple product `Pᵀ A P`.
pub fn coarse_prolongation(grid: &StructuredGrid, dofmap: &DofMap) -> (SparseRect, DofMap) {
    let coarse_map = DofMap::new(dofmap.family, grid.coarse());
    let m = grid.m;
    let n = grid.n;
    let inv_m = 1.0 / m as f64;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(dofmap.free_dofs);
    for free in 0..dofmap.free_dofs {
        let full = dofmap.full_index(free);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(8);
        match dofmap.entity(full) {
            Entity::Node { p, comp } => {
                let cell = [
                    (p[0] / m).min(n - 1),
                    (p[1] / m).min(n - 1),
                    (p[2] / m).min(n - 1),
                ];
                let t = [
                    (p[0] - cell[0] * m) as f64 * inv_m,
                    (p[1] - cell[1] * m) as f64 * inv_m,
                    (p[2] - cell[2] * m) as f64 * inv_m,
                ];
                for l in 0..8 {
                    let corner =
                        [cell[0] + (l & 1), cell[1] + ((l >> 1) & 1), cell[2] + ((l >> 2) & 1)];
                    let w = elem::hex_shape(l, t);
                    if w != 0.0 {
                        if let Some(cfree) = coarse_map.free_index(coarse_map.node_dof(corner, comp))
                        {
                            row.push((cfree, w));
                        }
                    }
                }
            }
            Entity::Edge { axis, origin } => {
                let (t1, t2) = elem::transverse_axes(axis);
                let mut cell = [0usize; 3];
                cell[axis] = origin[axis] / m;
                cell[t1] = (origin[t1] / m).min(n - 1);
                cell[t2] = (origin[t2] / m).min(n - 1);
                let f1 = (origin[t1] - cell[t1] * m) as f64 * inv_m;
                let f2 = (origin[t2] - cell[t2] * m) as f64 * inv_m;
                for a in 0..2 {
                    for bb in 0..2 {
                        let w1 = if a == 0 { 1.0 - f1 } else { f1 };
                        let w2 = if bb == 0 { 1.0 - f2 } else { f2 };
                        let w = w1 * w2 * inv_m;
                        if w != 0.0 {
                            let mut co = cell;
                            co[t1] += a;
                            co[t2] += bb;
                            if let Some(cfree) =
                                coarse_map.free_index(coarse_map.edge_dof(axis, co))
                            {
                                row.push((cfree, w));
                            }
                        }
                    }
                }
            }
        }
        rows.push(row);
    }
    (SparseRect::from_rows(dofmap.free_dofs, coarse_map.free_dofs, rows), coarse_map)
}

/// Evaluates the finite element interpolant of the free-dof vector `x` plus
/// homogeneous boundary values, at the dof entities of the map (used for
/// nodal error norms in convergence checks).
pub fn dof_values_to_full(dofmap: &DofMap, x: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; dofmap.total_dofs];
    for (free, &v) in x.iter().enumerate() {
        full[dofmap.full_index(free)] = v;
    }
    full
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;

    #[test]
    fn dof_counts() {
        let g = build_grid(2, 2).unwrap();
        let ela = DofMap::new(ElementFamily::ElasticityNodal, g.fine());
        assert_eq!(ela.total_dofs, 3 * 125);
        assert_eq!(ela.free_dofs, 3 * 27);
        let mw = DofMap::new(ElementFamily::MaxwellEdge, g.fine());
        assert_eq!(mw.total_dofs, 3 * 4 * 25);
        // free x-edges: 4 * 3 * 3 per axis
        assert_eq!(mw.free_dofs, 3 * 4 * 9);
    }

    #[test]
    fn entity_roundtrip() {
        let g = build_grid(2, 4).unwrap();
        for family in [ElementFamily::ElasticityNodal, ElementFamily::MaxwellEdge] {
            let map = DofMap::new(family, g.fine());
            for full in (0..map.total_dofs).step_by(7) {
                match map.entity(full) {
                    Entity::Node { p, comp } => assert_eq!(map.node_dof(p, comp), full),
                    Entity::Edge { axis, origin } => assert_eq!(map.edge_dof(axis, origin), full),
                }
            }
            assert_eq!(map.orientation(0), 1.0);
        }
    }

    #[test]
    fn one_cell_all_dirichlet() {
        let grid = BoxGrid::new([1, 1, 1], 1.0).unwrap();
        for family in [ElementFamily::ElasticityNodal, ElementFamily::MaxwellEdge] {
            let map = DofMap::new(family, grid);
            assert_eq!(map.free_dofs, 0);
            let coeffs = CoefficientField::constant(&grid, 1.0, 1.0).unwrap();
            let a = assemble(&map, &coeffs).unwrap();
            assert_eq!(a.dim, 0);
        }
    }

    #[test]
    fn coefficient_mismatch_rejected() {
        let g = build_grid(2, 2).unwrap();
        let map = DofMap::new(ElementFamily::ElasticityNodal, g.fine());
        let small = BoxGrid::new([2, 2, 2], 0.25).unwrap();
        let coeffs = CoefficientField::constant(&small, 1.0, 1.0).unwrap();
        assert!(assemble(&map, &coeffs).is_err());
    }

    #[test]
    fn zero_forcing_zero_load() {
        let g = build_grid(2, 2).unwrap();
        let map = DofMap::new(ElementFamily::MaxwellEdge, g.fine());
        let b = assemble_rhs(&map, Manufactured::Zero);
        assert!(b.iter().all(|&v| v == 0.0));
    }
}
