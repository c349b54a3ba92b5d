//! Index sets for the interface, subdomain interiors, vertex patches, coarse
//! faces and wire bands.
//!
//! All sets hold sorted free-dof indices of the assembled system. A free dof
//! either lies on the interface Γ (some coordinate of its entity on an
//! interior subdomain-boundary plane) or strictly inside exactly one
//! subdomain, so the interiors plus Γ partition the free dofs.

use crate::error::Error;
use crate::fem::{elem::transverse_axes, DofMap, Entity};
use crate::mesh::StructuredGrid;
use std::io::Write;

/// An interior coarse face between two subdomains.
#[derive(Debug, Clone)]
pub struct CoarseFace {
    /// Normal axis of the face.
    pub axis: usize,
    /// Fine-plane position (multiple of m, strictly inside).
    pub plane: usize,
    /// Coarse coordinates of the two transverse axes.
    pub base: [usize; 2],
    /// Subdomains on the lower / upper side of the plane.
    pub sides: [usize; 2],
    /// Free dofs interior to the face (not carried by its boundary edges).
    pub dofs: Vec<usize>,
}

/// Per-vertex and per-face dof sets of the decomposition.
#[derive(Debug, Clone)]
pub struct DecompositionSets {
    /// Free dofs strictly inside each subdomain.
    pub subdomain_interior: Vec<Vec<usize>>,
    /// Free interface dofs.
    pub gamma: Vec<usize>,
    /// Per coarse vertex: adjacent subdomains Λ.
    pub lambda_v: Vec<Vec<usize>>,
    /// Per coarse vertex: cells of the side-d auxiliary cube.
    pub omega_v_half_cells: Vec<Vec<usize>>,
    /// Per coarse vertex: all free dofs of the vertex patch (the closed
    /// side-d cube around the vertex); the local solver of the first
    /// preconditioner acts on exactly these.
    pub vertex_patch: Vec<Vec<usize>>,
    /// Per coarse vertex: interface dofs of the patch (Γ ∩ patch).
    pub gamma_v_half: Vec<Vec<usize>>,
    /// Per coarse vertex, aligned with `lambda_v[v]`: patch dofs strictly
    /// inside that subdomain.
    pub omega_v_half_interior: Vec<Vec<Vec<usize>>>,
    /// Per coarse vertex: the wire-band part of `gamma_v_half` (dofs carried
    /// by interface faces within one fine layer of a coarse edge through v).
    pub w_v_half: Vec<Vec<usize>>,
    /// Per coarse vertex: the face-interior remainder `gamma_v_half \ w_v_half`.
    pub f_in_v: Vec<Vec<usize>>,
    /// Interior coarse faces with their interior dof sets.
    pub faces: Vec<CoarseFace>,
}

/// Position tests for free-dof entities on the unit-cube grid.
struct Classify<'a> {
    grid: &'a StructuredGrid,
}

impl<'a> Classify<'a> {
    /// Interface membership: the entity lies in an interior coarse plane.
    fn on_gamma(&self, ent: &Entity) -> bool {
        let m = self.grid.m;
        match *ent {
            Entity::Node { p, .. } => (0..3).any(|a| p[a] % m == 0),
            Entity::Edge { axis, origin } => {
                let (t1, t2) = transverse_axes(axis);
                origin[t1] % m == 0 || origin[t2] % m == 0
            }
        }
    }

    /// Subdomain that strictly contains a non-interface entity.
    fn subdomain(&self, ent: &Entity) -> usize {
        let m = self.grid.m;
        let n = self.grid.n;
        let coords = match *ent {
            Entity::Node { p, .. } => p,
            Entity::Edge { origin, .. } => origin,
        };
        let s = [coords[0] / m, coords[1] / m, coords[2] / m];
        s[0] + n * (s[1] + n * s[2])
    }

    /// Vertex-patch membership: the dofs of the local space attached to the
    /// auxiliary cube, i.e. the free dofs whose basis functions are supported
    /// inside the cube extended by one fine layer. Nodal dofs are the nodes of
    /// the closed side-d cube; edge dofs additionally include the edges
    /// protruding one layer along their own axis, which gives neighboring
    /// patches a genuine small overlap (an open cover).
    fn in_vertex_cube(&self, ent: &Entity, vn: [usize; 3]) -> bool {
        let half = (self.grid.m / 2) as i64;
        let within = |c: usize, center: usize| (c as i64 - center as i64).abs() <= half;
        match *ent {
            Entity::Node { p, .. } => (0..3).all(|a| within(p[a], vn[a])),
            Entity::Edge { axis, origin } => (0..3).all(|a| {
                if a == axis {
                    let lo = origin[a] as i64;
                    lo >= vn[a] as i64 - half - 1 && lo + 1 <= vn[a] as i64 + half + 1
                } else {
                    within(origin[a], vn[a])
                }
            }),
        }
    }

    /// Wire-band membership: the entity is carried by an interface fine face
    /// within one fine layer of a coarse edge through the vertex. The entity
    /// is assumed to lie in `gamma_v_half` already.
    fn in_wire_band(&self, ent: &Entity, vn: [usize; 3]) -> bool {
        match *ent {
            Entity::Node { p, .. } => {
                for d in 0..3 {
                    if p[d] != vn[d] {
                        continue;
                    }
                    for o in 0..3 {
                        if o != d && (p[o] as i64 - vn[o] as i64).abs() <= 1 {
                            return true;
                        }
                    }
                }
                false
            }
            Entity::Edge { axis, origin } => {
                for d in 0..3 {
                    if d == axis || origin[d] != vn[d] {
                        continue;
                    }
                    let (x, y) = transverse_axes(d);
                    let o = if axis == x { y } else { x };
                    // parallel to the coarse-edge line along `axis`
                    if (origin[o] as i64 - vn[o] as i64).abs() <= 1 {
                        return true;
                    }
                    // across the line along `o`: the edge span must touch it
                    if origin[axis] == vn[axis] || origin[axis] + 1 == vn[axis] {
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// Builds every decomposition set for the grid/dof-map pair.
///
/// Fails with [`Error::UncoveredDof`] if some interface dof is not contained
/// in any vertex patch, which would indicate a set-construction bug.
pub fn build_decomposition_sets(
    grid: &StructuredGrid,
    dofmap: &DofMap,
) -> Result<DecompositionSets, Error> {
    let cls = Classify { grid };
    let nfree = dofmap.free_dofs;
    let nsub = grid.num_subdomains();

    let mut gamma = Vec::new();
    let mut subdomain_interior = vec![Vec::new(); nsub];
    let mut entities = Vec::with_capacity(nfree);
    for free in 0..nfree {
        let ent = dofmap.entity(dofmap.full_index(free));
        if cls.on_gamma(&ent) {
            gamma.push(free);
        } else {
            subdomain_interior[cls.subdomain(&ent)].push(free);
        }
        entities.push(ent);
    }

    let nv = grid.num_coarse_vertices();
    let mut lambda_v = Vec::with_capacity(nv);
    let mut omega_v_half_cells = Vec::with_capacity(nv);
    let mut vertex_patch = vec![Vec::new(); nv];
    let mut gamma_v_half = vec![Vec::new(); nv];
    let mut w_v_half = vec![Vec::new(); nv];
    let mut f_in_v = vec![Vec::new(); nv];
    let mut omega_v_half_interior = Vec::with_capacity(nv);

    for v in 0..nv {
        let vc = grid.coarse_vertex_coords(v);
        lambda_v.push(grid.vertex_subdomains(vc));
        omega_v_half_cells.push(crate::mesh::vertex_half_subdomain(grid, vc)?);
    }

    // patch membership: locate the few candidate vertices per dof
    let m = grid.m;
    let half = m / 2;
    let n = grid.n;
    for free in 0..nfree {
        let ent = &entities[free];
        let coords = match *ent {
            Entity::Node { p, .. } => p,
            Entity::Edge { origin, .. } => origin,
        };
        let mut cand: [[usize; 2]; 3] = [[0; 2]; 3];
        for a in 0..3 {
            let lo = coords[a].saturating_sub(half + 1);
            cand[a] = [lo.div_ceil(m), ((coords[a] + half + 1) / m).min(n)];
        }
        for cz in cand[2][0]..=cand[2][1] {
            for cy in cand[1][0]..=cand[1][1] {
                for cx in cand[0][0]..=cand[0][1] {
                    let vc = [cx, cy, cz];
                    let vn = grid.coarse_vertex_node(vc);
                    if cls.in_vertex_cube(ent, vn) {
                        vertex_patch[grid.coarse_vertex_index(vc)].push(free);
                    }
                }
            }
        }
    }

    // split patches into interface and interior parts; record coverage
    let mut covered = vec![false; nfree];
    let gamma_mark = {
        let mut mark = vec![false; nfree];
        for &g in &gamma {
            mark[g] = true;
        }
        mark
    };
    for v in 0..nv {
        let vn = grid.coarse_vertex_node(grid.coarse_vertex_coords(v));
        let mut interiors = vec![Vec::new(); lambda_v[v].len()];
        for &free in &vertex_patch[v] {
            let ent = &entities[free];
            if gamma_mark[free] {
                gamma_v_half[v].push(free);
                covered[free] = true;
                if cls.in_wire_band(ent, vn) {
                    w_v_half[v].push(free);
                } else {
                    f_in_v[v].push(free);
                }
            } else {
                let k = cls.subdomain(ent);
                let pos = lambda_v[v].binary_search(&k).expect("patch dof outside Λ_v");
                interiors[pos].push(free);
            }
        }
        omega_v_half_interior.push(interiors);
    }
    for &g in &gamma {
        if !covered[g] {
            return Err(Error::UncoveredDof(g));
        }
    }

    // interior coarse faces
    let mut faces = Vec::new();
    for axis in 0..3 {
        let (t1, t2) = transverse_axes(axis);
        for pc in 1..n {
            let plane = pc * m;
            for b2 in 0..n {
                for b1 in 0..n {
                    let mut lo_s = [0usize; 3];
                    lo_s[axis] = pc - 1;
                    lo_s[t1] = b1;
                    lo_s[t2] = b2;
                    let mut hi_s = lo_s;
                    hi_s[axis] = pc;
                    faces.push(CoarseFace {
                        axis,
                        plane,
                        base: [b1, b2],
                        sides: [
                            lo_s[0] + n * (lo_s[1] + n * lo_s[2]),
                            hi_s[0] + n * (hi_s[1] + n * hi_s[2]),
                        ],
                        dofs: Vec::new(),
                    });
                }
            }
        }
    }
    for &free in &gamma {
        match entities[free] {
            Entity::Node { p, .. } => {
                let planes: Vec<usize> = (0..3).filter(|&a| p[a] % m == 0).collect();
                if planes.len() != 1 {
                    continue; // on a coarse edge or coarse vertex line
                }
                let d = planes[0];
                let (t1, t2) = transverse_axes(d);
                push_face_dof(&mut faces, grid, d, p[d], [p[t1] / m, p[t2] / m], free);
            }
            Entity::Edge { axis, origin } => {
                let (e1, e2) = transverse_axes(axis);
                let planes: Vec<usize> =
                    [e1, e2].into_iter().filter(|&a| origin[a] % m == 0).collect();
                if planes.len() != 1 {
                    continue; // lies in a coarse edge line
                }
                let d = planes[0];
                let (t1, t2) = transverse_axes(d);
                let across = if t1 == axis { t2 } else { t1 };
                if origin[across] % m == 0 {
                    continue; // lies in a boundary line of the face
                }
                let mut bc = [0usize; 2];
                bc[0] = origin[t1] / m;
                bc[1] = origin[t2] / m;
                push_face_dof(&mut faces, grid, d, origin[d], bc, free);
            }
        }
    }

    Ok(DecompositionSets {
        subdomain_interior,
        gamma,
        lambda_v,
        omega_v_half_cells,
        vertex_patch,
        gamma_v_half,
        omega_v_half_interior,
        w_v_half,
        f_in_v,
        faces,
    })
}

fn push_face_dof(
    faces: &mut [CoarseFace],
    grid: &StructuredGrid,
    axis: usize,
    plane: usize,
    base: [usize; 2],
    free: usize,
) {
    let n = grid.n;
    let pc = plane / grid.m;
    let per_axis = (n - 1) * n * n;
    let idx = axis * per_axis + (pc - 1) * n * n + base[1] * n + base[0];
    debug_assert_eq!(faces[idx].axis, axis);
    debug_assert_eq!(faces[idx].plane, plane);
    debug_assert_eq!(faces[idx].base, base);
    faces[idx].dofs.push(free);
}

impl DecompositionSets {
    /// Writes a diagnostic text dump: one sorted index list per named set.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let list = |w: &mut W, name: &str, v: &[usize]| -> std::io::Result<()> {
            write!(w, "{name}:")?;
            for x in v {
                write!(w, " {x}")?;
            }
            writeln!(w)
        };
        list(w, "gamma", &self.gamma)?;
        for (k, s) in self.subdomain_interior.iter().enumerate() {
            list(w, &format!("subdomain_interior[{k}]"), s)?;
        }
        for v in 0..self.vertex_patch.len() {
            list(w, &format!("vertex_patch[{v}]"), &self.vertex_patch[v])?;
            list(w, &format!("gamma_v_half[{v}]"), &self.gamma_v_half[v])?;
            list(w, &format!("w_v_half[{v}]"), &self.w_v_half[v])?;
            list(w, &format!("f_in_v[{v}]"), &self.f_in_v[v])?;
        }
        for (i, f) in self.faces.iter().enumerate() {
            list(
                w,
                &format!("face[{i}]@axis{}plane{}base{},{}", f.axis, f.plane, f.base[0], f.base[1]),
                &f.dofs,
            )?;
        }
        Ok(())
    }
}
