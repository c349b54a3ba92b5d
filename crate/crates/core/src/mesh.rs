//! Structured hexahedral grids, the coarse subdomain partition and jump regions.

use crate::error::Error;

/// Hard cap on fine cells per axis so that node/edge counts stay well inside
/// `u32` column indices (and `usize` everywhere else).
pub const MAX_CELLS_PER_AXIS: usize = 1024;

/// An axis-aligned box of `nc[0] × nc[1] × nc[2]` cubic cells of side `h`,
/// with the lower corner at the origin.
///
/// This is the low-level lattice used by dof maps and assembly. The unit-cube
/// problem uses [`StructuredGrid`], which fixes `nc = [n·m; 3]`; the
/// two-subdomain coarsening experiment uses a `[2m, m, m]` box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    /// Cells per axis.
    pub nc: [usize; 3],
    /// Fine mesh size.
    pub h: f64,
}

impl BoxGrid {
    pub fn new(nc: [usize; 3], h: f64) -> Result<Self, Error> {
        if nc.iter().any(|&c| c == 0) {
            return Err(Error::Grid("box grid needs at least one cell per axis".into()));
        }
        if nc.iter().any(|&c| c > MAX_CELLS_PER_AXIS) {
            return Err(Error::Grid(format!(
                "grid with {nc:?} cells per axis exceeds the supported maximum {MAX_CELLS_PER_AXIS}"
            )));
        }
        if !(h > 0.0) {
            return Err(Error::Grid("mesh size must be positive".into()));
        }
        Ok(BoxGrid { nc, h })
    }

    /// Nodes per axis (`nc + 1`).
    #[inline]
    pub fn nn(&self) -> [usize; 3] {
        [self.nc[0] + 1, self.nc[1] + 1, self.nc[2] + 1]
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.nc[0] * self.nc[1] * self.nc[2]
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        let nn = self.nn();
        nn[0] * nn[1] * nn[2]
    }

    /// Linear cell index, x fastest.
    #[inline]
    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.nc[0] * (c[1] + self.nc[1] * c[2])
    }

    #[inline]
    pub fn cell_coords(&self, idx: usize) -> [usize; 3] {
        let x = idx % self.nc[0];
        let r = idx / self.nc[0];
        [x, r % self.nc[1], r / self.nc[1]]
    }

    /// Linear node index, x fastest.
    #[inline]
    pub fn node_index(&self, p: [usize; 3]) -> usize {
        let nn = self.nn();
        p[0] + nn[0] * (p[1] + nn[1] * p[2])
    }

    #[inline]
    pub fn node_coords(&self, idx: usize) -> [usize; 3] {
        let nn = self.nn();
        let x = idx % nn[0];
        let r = idx / nn[0];
        [x, r % nn[1], r / nn[1]]
    }

    /// True if the node lies on the outer boundary of the box.
    #[inline]
    pub fn node_on_boundary(&self, p: [usize; 3]) -> bool {
        (0..3).any(|a| p[a] == 0 || p[a] == self.nc[a])
    }
}

/// The fine/coarse partition pair of the unit cube: `n³` cubic subdomains of
/// side `d = 1/n`, each split into `m³` fine cells of side `h = 1/(n·m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuredGrid {
    /// Subdomains per axis.
    pub n: usize,
    /// Fine cells per subdomain per axis.
    pub m: usize,
}

/// Builds the unit-cube grid.
///
/// `m` must be even so the vertex-centered auxiliary cubes of side `d` are
/// cell-aligned.
pub fn build_grid(n: usize, m: usize) -> Result<StructuredGrid, Error> {
    if n < 2 {
        return Err(Error::Grid(format!("need at least 2 subdomains per axis, got n={n}")));
    }
    if m < 2 {
        return Err(Error::Grid(format!("need at least 2 cells per subdomain per axis, got m={m}")));
    }
    if m % 2 != 0 {
        return Err(Error::Grid(format!(
            "m must be even so vertex cubes of side d are cell-aligned, got m={m}"
        )));
    }
    if n * m > MAX_CELLS_PER_AXIS {
        return Err(Error::Grid(format!(
            "n*m = {} exceeds the supported maximum {MAX_CELLS_PER_AXIS} cells per axis",
            n * m
        )));
    }
    Ok(StructuredGrid { n, m })
}

impl StructuredGrid {
    /// Coarse mesh size `d = 1/n`.
    #[inline]
    pub fn d(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Fine mesh size `h = 1/(n·m)`.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / (self.n * self.m) as f64
    }

    /// Fine cells per axis.
    #[inline]
    pub fn nm(&self) -> usize {
        self.n * self.m
    }

    /// Number of subdomains `N = n³`.
    #[inline]
    pub fn num_subdomains(&self) -> usize {
        self.n * self.n * self.n
    }

    /// The underlying fine lattice.
    pub fn fine(&self) -> BoxGrid {
        BoxGrid { nc: [self.nm(); 3], h: self.h() }
    }

    /// The coarse lattice (one cell per subdomain).
    pub fn coarse(&self) -> BoxGrid {
        BoxGrid { nc: [self.n; 3], h: self.d() }
    }

    /// Subdomain index (x fastest) of a fine cell.
    #[inline]
    pub fn cell_subdomain(&self, c: [usize; 3]) -> usize {
        let s = [c[0] / self.m, c[1] / self.m, c[2] / self.m];
        s[0] + self.n * (s[1] + self.n * s[2])
    }

    #[inline]
    pub fn subdomain_coords(&self, k: usize) -> [usize; 3] {
        [k % self.n, (k / self.n) % self.n, k / (self.n * self.n)]
    }

    /// Coarse vertices per axis (`n + 1`).
    #[inline]
    pub fn num_coarse_vertices_per_axis(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn num_coarse_vertices(&self) -> usize {
        let v = self.n + 1;
        v * v * v
    }

    #[inline]
    pub fn coarse_vertex_coords(&self, v: usize) -> [usize; 3] {
        let nv = self.n + 1;
        [v % nv, (v / nv) % nv, v / (nv * nv)]
    }

    #[inline]
    pub fn coarse_vertex_index(&self, c: [usize; 3]) -> usize {
        let nv = self.n + 1;
        c[0] + nv * (c[1] + nv * c[2])
    }

    /// Fine-node coordinates of a coarse vertex.
    #[inline]
    pub fn coarse_vertex_node(&self, c: [usize; 3]) -> [usize; 3] {
        [c[0] * self.m, c[1] * self.m, c[2] * self.m]
    }

    /// Subdomains that contain the coarse vertex `c` as one of their vertices
    /// (the set Λ of the vertex), 1–8 entries.
    pub fn vertex_subdomains(&self, c: [usize; 3]) -> Vec<usize> {
        let mut out = Vec::with_capacity(8);
        let range = |a: usize| -> Vec<usize> {
            let mut r = Vec::with_capacity(2);
            if c[a] > 0 {
                r.push(c[a] - 1);
            }
            if c[a] < self.n {
                r.push(c[a]);
            }
            r
        };
        for sz in range(2) {
            for sy in range(1) {
                for sx in range(0) {
                    out.push(sx + self.n * (sy + self.n * sz));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Cell-index range `[lo, hi)` per axis of the auxiliary cube of side `d`
    /// centered at the coarse vertex, clipped to the domain.
    pub fn vertex_cube_cell_range(&self, c: [usize; 3]) -> [(usize, usize); 3] {
        let half = self.m / 2;
        let nm = self.nm();
        let mut r = [(0usize, 0usize); 3];
        for a in 0..3 {
            let center = c[a] * self.m;
            let lo = center.saturating_sub(half);
            let hi = (center + half).min(nm);
            r[a] = (lo, hi);
        }
        r
    }
}

/// Cells of the vertex-centered auxiliary cube: the axis-aligned cube of side
/// `d` around the coarse vertex, clipped to the domain and expressed as whole
/// fine cells. Returned sorted by linear cell index.
pub fn vertex_half_subdomain(grid: &StructuredGrid, vertex: [usize; 3]) -> Result<Vec<usize>, Error> {
    for a in 0..3 {
        if vertex[a] > grid.n {
            return Err(Error::Grid(format!(
                "coarse vertex coordinate {} out of range 0..={}",
                vertex[a], grid.n
            )));
        }
    }
    let fine = grid.fine();
    let r = grid.vertex_cube_cell_range(vertex);
    let mut cells = Vec::new();
    for z in r[2].0..r[2].1 {
        for y in r[1].0..r[1].1 {
            for x in r[0].0..r[0].1 {
                cells.push(fine.cell_index([x, y, z]));
            }
        }
    }
    cells.sort_unstable();
    Ok(cells)
}

/// Jump-region selection for the discontinuous-coefficient experiments.
///
/// The region must be a union of whole subdomains; `Choice1` is the cube
/// `[1/4,1/2]³`, `Choice2` additionally includes `[1/2,3/4]³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpRegion {
    None,
    Choice1,
    Choice2,
}

impl JumpRegion {
    /// True if the fine cell lies inside the region.
    pub fn contains_cell(&self, grid: &StructuredGrid, c: [usize; 3]) -> bool {
        let nm = grid.nm();
        let in_cube = |lo_num: usize, hi_num: usize| -> bool {
            // cube [lo/4, hi/4]^3 in cell units: cells [lo*nm/4, hi*nm/4)
            let lo = lo_num * nm / 4;
            let hi = hi_num * nm / 4;
            (0..3).all(|a| c[a] >= lo && c[a] < hi)
        };
        match self {
            JumpRegion::None => false,
            JumpRegion::Choice1 => in_cube(1, 2),
            JumpRegion::Choice2 => in_cube(1, 2) || in_cube(2, 3),
        }
    }

    /// Subdomains fully inside the region.
    pub fn subdomains(&self, grid: &StructuredGrid) -> Vec<usize> {
        let mut out = Vec::new();
        for k in 0..grid.num_subdomains() {
            let s = grid.subdomain_coords(k);
            let first_cell = [s[0] * grid.m, s[1] * grid.m, s[2] * grid.m];
            if self.contains_cell(grid, first_cell) {
                out.push(k);
            }
        }
        out
    }

    /// Checks that the region boundary is aligned with subdomain boundaries.
    pub fn check_alignment(&self, grid: &StructuredGrid) -> Result<(), Error> {
        match self {
            JumpRegion::None => Ok(()),
            _ => {
                if grid.n % 4 != 0 {
                    Err(Error::Coefficient(format!(
                        "jump region with quarter-cube boundaries is not a union of \
                         subdomains of side 1/{}",
                        grid.n
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Piecewise-constant per-cell coefficient pair: `(λ, μ)` for elasticity or
/// `(α, β)` for the curl-curl system.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

impl CoefficientField {
    pub fn constant(grid: &BoxGrid, c1: f64, c2: f64) -> Result<Self, Error> {
        if !(c1 > 0.0) || !(c2 > 0.0) {
            return Err(Error::Coefficient(format!(
                "coefficients must be strictly positive, got ({c1}, {c2})"
            )));
        }
        let nc = grid.num_cells();
        Ok(CoefficientField { c1: vec![c1; nc], c2: vec![c2; nc] })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.c1.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }
}

/// Builds the piecewise-constant coefficient field with `inside_value` on the
/// jump region and `outside_value` elsewhere (both applied to both members of
/// the coefficient pair).
pub fn jump_coefficient(
    grid: &StructuredGrid,
    region: JumpRegion,
    inside_value: f64,
    outside_value: f64,
) -> Result<CoefficientField, Error> {
    if !(inside_value > 0.0) || !(outside_value > 0.0) {
        return Err(Error::Coefficient(format!(
            "coefficients must be strictly positive, got inside={inside_value}, outside={outside_value}"
        )));
    }
    region.check_alignment(grid)?;
    let fine = grid.fine();
    let nc = fine.num_cells();
    let mut c1 = vec![outside_value; nc];
    for idx in 0..nc {
        if region.contains_cell(grid, fine.cell_coords(idx)) {
            c1[idx] = inside_value;
        }
    }
    let c2 = c1.clone();
    Ok(CoefficientField { c1, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_grid_examples() {
        let g = build_grid(4, 4).unwrap();
        assert_eq!(g.fine().num_cells(), 4096);
        assert_eq!(g.h(), 1.0 / 16.0);

        let g = build_grid(4, 8).unwrap();
        assert_eq!(g.fine().num_cells(), 32 * 32 * 32);
        assert_eq!(g.h(), 1.0 / 32.0);

        assert!(build_grid(4, 3).is_err());
        assert!(build_grid(1, 4).is_err());
        assert!(build_grid(4, 1).is_err());
        assert!(build_grid(200, 6).is_err()); // 1200 cells per axis
    }

    #[test]
    fn vertex_cube_sizes() {
        let g = build_grid(4, 4).unwrap();
        // interior vertex: full cube of side d = m cells per axis
        assert_eq!(vertex_half_subdomain(&g, [2, 2, 2]).unwrap().len(), 64);
        // vertex interior to a boundary face: clipped half-cube
        assert_eq!(vertex_half_subdomain(&g, [2, 2, 0]).unwrap().len(), 32);
        // corner of the domain: one octant
        assert_eq!(vertex_half_subdomain(&g, [0, 0, 0]).unwrap().len(), 8);
        assert!(vertex_half_subdomain(&g, [5, 0, 0]).is_err());
    }

    #[test]
    fn subdomain_cell_partition() {
        let g = build_grid(2, 4).unwrap();
        let fine = g.fine();
        let mut counts = vec![0usize; g.num_subdomains()];
        for idx in 0..fine.num_cells() {
            counts[g.cell_subdomain(fine.cell_coords(idx))] += 1;
        }
        assert!(counts.iter().all(|&c| c == g.m * g.m * g.m));
        assert_eq!(counts.iter().sum::<usize>(), fine.num_cells());
    }

    #[test]
    fn jump_region_geometry() {
        let g = build_grid(4, 4).unwrap();
        assert_eq!(JumpRegion::Choice1.subdomains(&g).len(), 1);
        assert_eq!(JumpRegion::Choice2.subdomains(&g).len(), 2);

        let g6 = build_grid(6, 4).unwrap();
        assert!(jump_coefficient(&g6, JumpRegion::Choice1, 1e5, 1.0).is_err());

        let f = jump_coefficient(&g, JumpRegion::Choice1, 1e5, 1.0).unwrap();
        let inside: usize = f.c1.iter().filter(|&&v| v == 1e5).count();
        assert_eq!(inside, g.m * g.m * g.m); // exactly one subdomain
        assert!(jump_coefficient(&g, JumpRegion::Choice1, -1.0, 1.0).is_err());
    }

    #[test]
    fn vertex_subdomain_counts() {
        let g = build_grid(2, 2).unwrap();
        assert_eq!(g.vertex_subdomains([1, 1, 1]).len(), 8);
        assert_eq!(g.vertex_subdomains([0, 1, 1]).len(), 4);
        assert_eq!(g.vertex_subdomains([0, 0, 1]).len(), 2);
        assert_eq!(g.vertex_subdomains([0, 0, 0]).len(), 1);
    }
}
