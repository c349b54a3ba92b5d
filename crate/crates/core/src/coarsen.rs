//! Graded interface-solver systems: auxiliary dof subsets that keep all
//! interface dofs and geometrically thin the interior dofs away from the
//! interface, with prolongations whose triple products yield the coarsened
//! local systems.
//!
//! Face regions (two subdomains sharing a coarse face) keep the fine planes at
//! powers-of-two distance from the face with matching tangential thinning;
//! vertex regions (the subdomains around a coarse vertex, with the wire band
//! as interface) keep a per-subdomain tensor lattice of powers-of-two
//! coordinates measured from the vertex. Interface dofs always map to
//! themselves and interior columns place nothing on interface rows, so the
//! triple product reproduces the interface block of the original matrix
//! exactly.

use crate::fem::{elem::transverse_axes, DofMap, ElementFamily, Entity};
use crate::mesh::StructuredGrid;
use crate::sets::DecompositionSets;
use crate::sparse::SparseRect;
use std::collections::HashMap;

/// Interface-solver grading mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    /// Powers-of-two thinning away from the interface.
    Geometric,
    /// Keep every region dof (the coarsened system equals the full one).
    Identity,
}

/// Regions with fewer cells across than this fall back to identity
/// coarsening: too few layers to grade.
pub const MIN_GRADED_M: usize = 8;

/// A graded dof selection for one local interface region, with the
/// prolongation from the kept unknowns to all region dofs.
#[derive(Debug, Clone)]
pub struct RegionProlongation {
    /// Sorted global free dofs of the region (rows of `p`).
    pub region_dofs: Vec<usize>,
    /// Prolongation: rows aligned with `region_dofs`, columns = kept unknowns.
    pub p: SparseRect,
    /// Kept-system column of each interface dof, aligned with
    /// `interface_dofs`.
    pub interface_cols: Vec<usize>,
    /// Sorted global free interface dofs.
    pub interface_dofs: Vec<usize>,
    /// Number of kept unknowns (`p.cols`).
    pub kept: usize,
    /// Number of region dofs (`p.rows`).
    pub full: usize,
    /// True when geometric grading degenerated to keep-all.
    pub identity_fallback: bool,
}

/// Geometric description of a face region: the coarse face plus the two
/// size-m subdomains on either side.
#[derive(Debug, Clone)]
pub struct FaceRegionSpec {
    /// Face normal axis.
    pub axis: usize,
    /// Fine coordinate of the face plane.
    pub plane: usize,
    /// Fine coordinates of the face corner in the two transverse axes
    /// (ordered by [`transverse_axes`]).
    pub t_lo: [usize; 2],
    /// Cells per subdomain per axis.
    pub m: usize,
    /// Sorted free dofs of the whole region (both side interiors plus the
    /// face dofs).
    pub region_dofs: Vec<usize>,
    /// Sorted free dofs interior to the face.
    pub interface_dofs: Vec<usize>,
}

/// Geometric description of a vertex region: the subdomains around a coarse
/// vertex with the wire band as interface.
#[derive(Debug, Clone)]
pub struct VertexRegionSpec {
    /// Fine node coordinates of the coarse vertex.
    pub vn: [usize; 3],
    /// Lower fine corner of each participating subdomain.
    pub part_lo: Vec<[usize; 3]>,
    pub m: usize,
    pub region_dofs: Vec<usize>,
    /// Sorted wire-band dofs.
    pub interface_dofs: Vec<usize>,
}

/// Merges sorted disjoint index lists.
pub fn merge_sorted(lists: &[&[usize]]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(lists.iter().map(|l| l.len()).sum());
    for l in lists {
        out.extend_from_slice(l);
    }
    out.sort_unstable();
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "region lists overlap");
    out
}

/// Builds the face-region spec for an interior coarse face of the unit-cube
/// decomposition.
pub fn face_region_spec(
    grid: &StructuredGrid,
    sets: &DecompositionSets,
    face_index: usize,
) -> FaceRegionSpec {
    let f = &sets.faces[face_index];
    let region_dofs = merge_sorted(&[
        &sets.subdomain_interior[f.sides[0]],
        &sets.subdomain_interior[f.sides[1]],
        &f.dofs,
    ]);
    FaceRegionSpec {
        axis: f.axis,
        plane: f.plane,
        t_lo: [f.base[0] * grid.m, f.base[1] * grid.m],
        m: grid.m,
        region_dofs,
        interface_dofs: f.dofs.clone(),
    }
}

/// Builds the vertex-region spec for a coarse vertex of the unit-cube
/// decomposition.
pub fn vertex_region_spec(
    grid: &StructuredGrid,
    sets: &DecompositionSets,
    v: usize,
) -> VertexRegionSpec {
    let vn = grid.coarse_vertex_node(grid.coarse_vertex_coords(v));
    let mut lists: Vec<&[usize]> = vec![&sets.w_v_half[v]];
    let mut part_lo = Vec::new();
    for &k in &sets.lambda_v[v] {
        lists.push(&sets.subdomain_interior[k]);
        let s = grid.subdomain_coords(k);
        part_lo.push([s[0] * grid.m, s[1] * grid.m, s[2] * grid.m]);
    }
    VertexRegionSpec {
        vn,
        part_lo,
        m: grid.m,
        region_dofs: merge_sorted(&lists),
        interface_dofs: sets.w_v_half[v].clone(),
    }
}

/// Kept fine planes: powers of two below m.
fn kept_planes(m: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut p = 1;
    while p < m {
        v.push(p);
        p *= 2;
    }
    v
}

/// Tangential stride of a kept plane at distance `nu` in a region of depth
/// `m`: the largest power of two at or below `nu²/m`. Thinning sets in slower
/// for deeper regions, matching the exponential decay of interface harmonics
/// into the interior.
fn plane_stride(nu: usize, m: usize) -> usize {
    let target = ((nu * nu) / m).max(1);
    let mut s = 1;
    while s * 2 <= target {
        s *= 2;
    }
    s
}

/// Per-axis kept coordinates of the vertex tensor lattice: the doubling bands
/// thinned at the same depth-dependent stride.
fn vertex_lattice(m: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut band = 1usize;
    while band < m {
        let hi = (band * 2).min(m);
        let s = plane_stride(band, m);
        let mut x = band;
        while x < hi && x < m {
            v.push(x);
            x += s;
        }
        band *= 2;
    }
    v
}

/// Slab decomposition of one side: (lo, hi, tangential stride). The final
/// slab reaches the Dirichlet wall at `m` and keeps the stride of its inner
/// plane.
fn slabs(m: usize) -> Vec<(usize, usize, usize)> {
    let planes = kept_planes(m);
    let mut out = Vec::new();
    let mut prev = 0usize;
    for &p in &planes {
        out.push((prev, p, plane_stride(p, m)));
        prev = p;
    }
    out.push((prev, m, plane_stride(prev.max(1), m)));
    out
}

/// The slab containing normal positions `[lo, hi]` (`hi == lo` for nodes
/// strictly between planes).
fn slab_of(nu_lo: usize, nu_hi: usize, m: usize) -> (usize, usize, usize) {
    for &(a, b, s) in slabs(m).iter() {
        if a <= nu_lo && nu_hi <= b && (nu_hi > nu_lo || nu_lo > a) {
            return (a, b, s);
        }
    }
    unreachable!("normal position {nu_lo}..{nu_hi} outside 0..{m}")
}

/// 1D bracket of `t` in the stride-`s` lattice with Dirichlet walls at 0 and
/// `m`: a single entry when `t` is on the lattice, otherwise up to two
/// weighted lattice coords (wall-side weights are dropped).
fn bracket_stride(t: usize, s: usize, m: usize) -> Vec<(usize, f64)> {
    debug_assert!(t >= 1 && t < m);
    let lo = (t / s) * s;
    if lo == t {
        return vec![(t, 1.0)];
    }
    let hi = (lo + s).min(m);
    let w_hi = (t - lo) as f64 / (hi - lo) as f64;
    let mut out = Vec::with_capacity(2);
    if lo > 0 {
        out.push((lo, 1.0 - w_hi));
    }
    if hi < m {
        out.push((hi, w_hi));
    }
    out
}

/// 1D bracket of `t` in an explicit sorted lattice (first entry ≥ 1) with a
/// Dirichlet wall at `m`.
fn bracket_lattice(t: usize, lat: &[usize], m: usize) -> Vec<(usize, f64)> {
    debug_assert!(t >= lat[0] && t < m);
    if lat.binary_search(&t).is_ok() {
        return vec![(t, 1.0)];
    }
    let idx = lat.partition_point(|&x| x < t);
    let lo = lat[idx - 1];
    let hi = if idx < lat.len() { lat[idx] } else { m };
    let w_hi = (t - lo) as f64 / (hi - lo) as f64;
    let mut out = vec![(lo, 1.0 - w_hi)];
    if hi < m {
        out.push((hi, w_hi));
    }
    out
}

/// Sorted segment boundaries `{0} ∪ lattice ∪ {m}` for path columns.
fn segment_boundaries(lat: &[usize], m: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(lat.len() + 2);
    v.push(0);
    v.extend_from_slice(lat);
    if *v.last().unwrap() != m {
        v.push(m);
    }
    v
}

/// Tangential path boundaries on a kept plane of stride `s`: multiples of `s`
/// plus the wall.
fn stride_boundaries(s: usize, m: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..m).step_by(s).collect();
    v.push(m);
    v
}

/// The segment `[a, b]` of `bounds` containing `[lo, hi]`.
fn containing_segment(bounds: &[usize], lo: usize, hi: usize) -> (usize, usize) {
    let idx = bounds.partition_point(|&x| x <= lo);
    let a = bounds[idx - 1];
    let b = bounds[idx.min(bounds.len() - 1)];
    debug_assert!(a <= lo && hi <= b, "span {lo}..{hi} not inside segment {a}..{b}");
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct PathKey {
    axis: usize,
    origin: [usize; 3],
    len: usize,
}

/// Column bookkeeping: identity columns for kept fine dofs plus path columns
/// for edge bundles.
struct ColumnBook {
    fine: HashMap<usize, usize>,
    path: HashMap<PathKey, usize>,
    count: usize,
}

impl ColumnBook {
    fn new() -> Self {
        ColumnBook { fine: HashMap::new(), path: HashMap::new(), count: 0 }
    }
    fn add_fine(&mut self, dof: usize) -> usize {
        let id = self.count;
        let prev = self.fine.insert(dof, id);
        debug_assert!(prev.is_none());
        self.count += 1;
        id
    }
    fn add_path(&mut self, key: PathKey) {
        let prev = self.path.insert(key, self.count);
        debug_assert!(prev.is_none(), "duplicate path column {key:?}");
        self.count += 1;
    }
    fn fine_col(&self, dof: usize) -> usize {
        *self.fine.get(&dof).expect("referenced kept dof has no column")
    }
    fn path_col(&self, key: &PathKey) -> usize {
        *self.path.get(key).unwrap_or_else(|| panic!("missing path column {key:?}"))
    }
}

fn identity_prolongation(
    region_dofs: Vec<usize>,
    interface_dofs: Vec<usize>,
    fallback: bool,
) -> RegionProlongation {
    let nfull = region_dofs.len();
    let interface_cols = interface_dofs
        .iter()
        .map(|d| region_dofs.binary_search(d).expect("interface dof outside region"))
        .collect();
    RegionProlongation {
        p: SparseRect::identity(nfull),
        interface_cols,
        interface_dofs,
        kept: nfull,
        full: nfull,
        region_dofs,
        identity_fallback: fallback,
    }
}

/// Graded kept-dof selection and prolongation for a face region.
pub fn graded_face_prolongation(
    dofmap: &DofMap,
    spec: &FaceRegionSpec,
    grading: Grading,
) -> RegionProlongation {
    if grading == Grading::Identity || spec.m < MIN_GRADED_M {
        return identity_prolongation(
            spec.region_dofs.clone(),
            spec.interface_dofs.clone(),
            grading == Grading::Geometric,
        );
    }
    let m = spec.m;
    let d = spec.axis;
    let (t1, t2) = transverse_axes(d);
    let planes = kept_planes(m);
    let is_interface = |dof: usize| spec.interface_dofs.binary_search(&dof).is_ok();

    // side (0 below the plane, 1 above) and grading distance of a coordinate
    let side_nu = |c: usize| -> (usize, usize) {
        if c < spec.plane {
            (0, spec.plane - c)
        } else {
            (1, c - spec.plane)
        }
    };
    let glob_nu = |side: usize, nu: usize| -> usize {
        if side == 0 {
            spec.plane - nu
        } else {
            spec.plane + nu
        }
    };
    let tau = |coords: [usize; 3]| -> [usize; 2] {
        [coords[t1] - spec.t_lo[0], coords[t2] - spec.t_lo[1]]
    };

    let mut book = ColumnBook::new();
    let mut interface_cols = Vec::with_capacity(spec.interface_dofs.len());
    for &g in &spec.interface_dofs {
        interface_cols.push(book.add_fine(g));
    }

    match dofmap.family {
        ElementFamily::ElasticityNodal => {
            for &g in &spec.region_dofs {
                if is_interface(g) {
                    continue;
                }
                let Entity::Node { p, .. } = dofmap.entity(dofmap.full_index(g)) else {
                    unreachable!()
                };
                let (_, nu) = side_nu(p[d]);
                let t = tau(p);
                if planes.binary_search(&nu).is_ok() {
                    let s = plane_stride(nu, m);
                    if t[0] % s == 0 && t[1] % s == 0 {
                        book.add_fine(g);
                    }
                }
            }
        }
        ElementFamily::MaxwellEdge => {
            for side in 0..2 {
                // in-plane paths of each kept plane
                for &nu in &planes {
                    let c_d = glob_nu(side, nu);
                    let s = plane_stride(nu, m);
                    let bounds = stride_boundaries(s, m);
                    for (eps, o) in [(t1, t2), (t2, t1)] {
                        let (tl_e, tl_o) = if eps == t1 {
                            (spec.t_lo[0], spec.t_lo[1])
                        } else {
                            (spec.t_lo[1], spec.t_lo[0])
                        };
                        let mut tr = s;
                        while tr < m {
                            for w in bounds.windows(2) {
                                let mut origin = [0usize; 3];
                                origin[d] = c_d;
                                origin[eps] = tl_e + w[0];
                                origin[o] = tl_o + tr;
                                book.add_path(PathKey { axis: eps, origin, len: w[1] - w[0] });
                            }
                            tr += s;
                        }
                    }
                }
                // normal paths of each slab
                for (lo, hi, stau) in slabs(m) {
                    let len = hi - lo;
                    let c_lo = glob_nu(side, lo).min(glob_nu(side, hi));
                    let mut u1 = stau;
                    while u1 < m {
                        let mut u2 = stau;
                        while u2 < m {
                            let mut origin = [0usize; 3];
                            origin[d] = c_lo;
                            origin[t1] = spec.t_lo[0] + u1;
                            origin[t2] = spec.t_lo[1] + u2;
                            book.add_path(PathKey { axis: d, origin, len });
                            u2 += stau;
                        }
                        u1 += stau;
                    }
                }
            }
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(spec.region_dofs.len());
    for &g in &spec.region_dofs {
        if is_interface(g) {
            rows.push(vec![(book.fine_col(g), 1.0)]);
            continue;
        }
        match dofmap.entity(dofmap.full_index(g)) {
            Entity::Node { p, comp } => {
                let (side, nu) = side_nu(p[d]);
                let t = tau(p);
                if planes.binary_search(&nu).is_ok() {
                    let s = plane_stride(nu, m);
                    if t[0] % s == 0 && t[1] % s == 0 {
                        rows.push(vec![(book.fine_col(g), 1.0)]);
                        continue;
                    }
                    let mut row = Vec::new();
                    for (b1, w1) in bracket_stride(t[0], s, m) {
                        for &(b2, w2) in bracket_stride(t[1], s, m).iter() {
                            let mut q = [0usize; 3];
                            q[d] = p[d];
                            q[t1] = spec.t_lo[0] + b1;
                            q[t2] = spec.t_lo[1] + b2;
                            let kept = dofmap
                                .free_index(dofmap.node_dof(q, comp))
                                .expect("kept corner must be free");
                            row.push((book.fine_col(kept), w1 * w2));
                        }
                    }
                    rows.push(row);
                } else {
                    let (lo, hi, stau) = slab_of(nu, nu, m);
                    let w_hi = (nu - lo) as f64 / (hi - lo) as f64;
                    let mut normal = vec![(lo, 1.0 - w_hi)];
                    if hi < m {
                        normal.push((hi, w_hi));
                    }
                    let mut row = Vec::new();
                    for &(nb, wn) in &normal {
                        if nb == 0 {
                            continue;
                        }
                        for (b1, w1) in bracket_stride(t[0], stau, m) {
                            for &(b2, w2) in bracket_stride(t[1], stau, m).iter() {
                                let mut q = [0usize; 3];
                                q[d] = glob_nu(side, nb);
                                q[t1] = spec.t_lo[0] + b1;
                                q[t2] = spec.t_lo[1] + b2;
                                let kept = dofmap
                                    .free_index(dofmap.node_dof(q, comp))
                                    .expect("kept corner must be free");
                                row.push((book.fine_col(kept), wn * w1 * w2));
                            }
                        }
                    }
                    rows.push(row);
                }
            }
            Entity::Edge { axis, origin } => {
                if axis == d {
                    // normal edge: both endpoints on one side of the plane
                    let (side, nu_lo, nu_hi) = if origin[d] < spec.plane {
                        (0, spec.plane - origin[d] - 1, spec.plane - origin[d])
                    } else {
                        (1, origin[d] - spec.plane, origin[d] - spec.plane + 1)
                    };
                    let (lo, hi, stau) = slab_of(nu_lo, nu_hi, m);
                    let t = tau(origin);
                    let c_lo = glob_nu(side, lo).min(glob_nu(side, hi));
                    let mut row = Vec::new();
                    for (b1, w1) in bracket_stride(t[0], stau, m) {
                        for &(b2, w2) in bracket_stride(t[1], stau, m).iter() {
                            let mut q = [0usize; 3];
                            q[d] = c_lo;
                            q[t1] = spec.t_lo[0] + b1;
                            q[t2] = spec.t_lo[1] + b2;
                            let key = PathKey { axis: d, origin: q, len: hi - lo };
                            row.push((book.path_col(&key), w1 * w2 / (hi - lo) as f64));
                        }
                    }
                    rows.push(row);
                } else {
                    // in-plane edge on one side
                    let (side, nu) = side_nu(origin[d]);
                    let eps = axis;
                    let o = if eps == t1 { t2 } else { t1 };
                    let t = tau(origin);
                    let (pos_e, tr_o) = if eps == t1 { (t[0], t[1]) } else { (t[1], t[0]) };
                    let mut row = Vec::new();
                    if planes.binary_search(&nu).is_ok() {
                        // on a kept plane: 2D interpolation at the plane stride
                        let s = plane_stride(nu, m);
                        let bounds = stride_boundaries(s, m);
                        let (a, b) = containing_segment(&bounds, pos_e, pos_e + 1);
                        for (tb, wt) in bracket_stride(tr_o, s, m) {
                            let mut q = [0usize; 3];
                            q[d] = origin[d];
                            q[eps] = origin[eps] + a - pos_e;
                            q[o] = origin[o] + tb - tr_o;
                            let key = PathKey { axis: eps, origin: q, len: b - a };
                            row.push((book.path_col(&key), wt / (b - a) as f64));
                        }
                    } else {
                        // inside a slab: box interpolation; composite plane
                        // edges decompose into the plane's own paths
                        let (lo, hi, stau) = slab_of(nu, nu, m);
                        let w_hi = (nu - lo) as f64 / (hi - lo) as f64;
                        let mut normal = vec![(lo, 1.0 - w_hi)];
                        if hi < m {
                            normal.push((hi, w_hi));
                        }
                        let coarse_bounds = stride_boundaries(stau, m);
                        let (aa, bb) = containing_segment(&coarse_bounds, pos_e, pos_e + 1);
                        for &(nb, wn) in &normal {
                            if nb == 0 {
                                continue;
                            }
                            let plane_bounds = stride_boundaries(plane_stride(nb, m), m);
                            for (tb, wt) in bracket_stride(tr_o, stau, m) {
                                let i0 = plane_bounds.partition_point(|&x| x < aa);
                                let i1 = plane_bounds.partition_point(|&x| x < bb);
                                debug_assert_eq!(plane_bounds[i0], aa);
                                for w in plane_bounds[i0..=i1].windows(2) {
                                    let mut q = [0usize; 3];
                                    q[d] = glob_nu(side, nb);
                                    q[eps] = origin[eps] + w[0] - pos_e;
                                    q[o] = origin[o] + tb - tr_o;
                                    let key =
                                        PathKey { axis: eps, origin: q, len: w[1] - w[0] };
                                    row.push((book.path_col(&key), wn * wt / (bb - aa) as f64));
                                }
                            }
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }

    let nfull = spec.region_dofs.len();
    RegionProlongation {
        region_dofs: spec.region_dofs.clone(),
        p: SparseRect::from_rows(nfull, book.count, rows),
        interface_cols,
        interface_dofs: spec.interface_dofs.clone(),
        kept: book.count,
        full: nfull,
        identity_fallback: false,
    }
}

/// Graded kept-dof selection and prolongation for a vertex region: a tensor
/// lattice of powers-of-two coordinates per participating subdomain.
pub fn graded_vertex_prolongation(
    dofmap: &DofMap,
    spec: &VertexRegionSpec,
    grading: Grading,
) -> RegionProlongation {
    if grading == Grading::Identity || spec.m < MIN_GRADED_M {
        return identity_prolongation(
            spec.region_dofs.clone(),
            spec.interface_dofs.clone(),
            grading == Grading::Geometric,
        );
    }
    let m = spec.m;
    let lat = vertex_lattice(m);
    let is_interface = |dof: usize| spec.interface_dofs.binary_search(&dof).is_ok();

    let part_of = |coords: [usize; 3]| -> usize {
        for (i, lo) in spec.part_lo.iter().enumerate() {
            if (0..3).all(|a| coords[a] >= lo[a] && coords[a] < lo[a] + m) {
                return i;
            }
        }
        unreachable!("region dof outside all parts")
    };
    let dir = |part: usize, a: usize| -> i64 {
        if spec.vn[a] == spec.part_lo[part][a] {
            1
        } else {
            -1
        }
    };
    let to_xi = |a: usize, c: usize| -> usize { (c as i64 - spec.vn[a] as i64).unsigned_abs() as usize };
    let to_glob = |part: usize, a: usize, xi: usize| -> usize {
        (spec.vn[a] as i64 + dir(part, a) * xi as i64) as usize
    };

    let mut book = ColumnBook::new();
    let mut interface_cols = Vec::with_capacity(spec.interface_dofs.len());
    for &g in &spec.interface_dofs {
        interface_cols.push(book.add_fine(g));
    }

    match dofmap.family {
        ElementFamily::ElasticityNodal => {
            for &g in &spec.region_dofs {
                if is_interface(g) {
                    continue;
                }
                let Entity::Node { p, .. } = dofmap.entity(dofmap.full_index(g)) else {
                    unreachable!()
                };
                if (0..3).all(|a| lat.binary_search(&to_xi(a, p[a])).is_ok()) {
                    book.add_fine(g);
                }
            }
        }
        ElementFamily::MaxwellEdge => {
            let bounds = segment_boundaries(&lat, m);
            for part in 0..spec.part_lo.len() {
                for axis in 0..3 {
                    let (o1, o2) = transverse_axes(axis);
                    for w in bounds.windows(2) {
                        let g_lo = to_glob(part, axis, w[0]).min(to_glob(part, axis, w[1]));
                        for &k1 in &lat {
                            for &k2 in &lat {
                                let mut origin = [0usize; 3];
                                origin[axis] = g_lo;
                                origin[o1] = to_glob(part, o1, k1);
                                origin[o2] = to_glob(part, o2, k2);
                                book.add_path(PathKey { axis, origin, len: w[1] - w[0] });
                            }
                        }
                    }
                }
            }
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(spec.region_dofs.len());
    for &g in &spec.region_dofs {
        if is_interface(g) {
            rows.push(vec![(book.fine_col(g), 1.0)]);
            continue;
        }
        match dofmap.entity(dofmap.full_index(g)) {
            Entity::Node { p, comp } => {
                let part = part_of(p);
                let br: Vec<Vec<(usize, f64)>> =
                    (0..3).map(|a| bracket_lattice(to_xi(a, p[a]), &lat, m)).collect();
                let mut row = Vec::new();
                for &(x0, w0) in &br[0] {
                    for &(x1, w1) in &br[1] {
                        for &(x2, w2) in &br[2] {
                            let q = [
                                to_glob(part, 0, x0),
                                to_glob(part, 1, x1),
                                to_glob(part, 2, x2),
                            ];
                            let kept = dofmap
                                .free_index(dofmap.node_dof(q, comp))
                                .expect("kept lattice node must be free");
                            row.push((book.fine_col(kept), w0 * w1 * w2));
                        }
                    }
                }
                rows.push(row);
            }
            Entity::Edge { axis, origin } => {
                let part = part_of(origin);
                let (o1, o2) = transverse_axes(axis);
                let xi_a = to_xi(axis, origin[axis]);
                let xi_b = to_xi(axis, origin[axis] + 1);
                let (xlo, xhi) = (xi_a.min(xi_b), xi_a.max(xi_b));
                let bounds = segment_boundaries(&lat, m);
                let (a, b) = containing_segment(&bounds, xlo, xhi);
                let len = b - a;
                let g_lo = to_glob(part, axis, a).min(to_glob(part, axis, b));
                let br1 = bracket_lattice(to_xi(o1, origin[o1]), &lat, m);
                let br2 = bracket_lattice(to_xi(o2, origin[o2]), &lat, m);
                let mut row = Vec::new();
                for &(k1, w1) in &br1 {
                    for &(k2, w2) in &br2 {
                        let mut q = [0usize; 3];
                        q[axis] = g_lo;
                        q[o1] = to_glob(part, o1, k1);
                        q[o2] = to_glob(part, o2, k2);
                        let key = PathKey { axis, origin: q, len };
                        row.push((book.path_col(&key), w1 * w2 / len as f64));
                    }
                }
                rows.push(row);
            }
        }
    }

    let nfull = spec.region_dofs.len();
    RegionProlongation {
        region_dofs: spec.region_dofs.clone(),
        p: SparseRect::from_rows(nfull, book.count, rows),
        interface_cols,
        interface_dofs: spec.interface_dofs.clone(),
        kept: book.count,
        full: nfull,
        identity_fallback: false,
    }
}

/// One line of the dof-reduction report.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningEntry {
    pub solver: String,
    pub m: usize,
    pub kept: usize,
    pub full: usize,
    pub ratio: f64,
    pub identity_fallback: bool,
}

/// Kept/full dof counts for one representative face region and one interior
/// vertex region at ratio `d/h = m`. The counts depend on m only, so the
/// smallest host grid (n = 2) is used.
pub fn coarsening_report(
    family: ElementFamily,
    m: usize,
) -> Result<Vec<CoarseningEntry>, crate::error::Error> {
    let grid = crate::mesh::build_grid(2, m)?;
    let dofmap = DofMap::new(family, grid.fine());
    let sets = crate::sets::build_decomposition_sets(&grid, &dofmap)?;
    let fp = graded_face_prolongation(&dofmap, &face_region_spec(&grid, &sets, 0), Grading::Geometric);
    let center = grid.coarse_vertex_index([1, 1, 1]);
    let vp = graded_vertex_prolongation(
        &dofmap,
        &vertex_region_spec(&grid, &sets, center),
        Grading::Geometric,
    );
    let entry = |solver: &str, kept: usize, full: usize, fb: bool| CoarseningEntry {
        solver: solver.into(),
        m,
        kept,
        full,
        ratio: kept as f64 / full as f64,
        identity_fallback: fb,
    };
    Ok(vec![
        entry("face", fp.kept, fp.full, fp.identity_fallback),
        entry("vertex", vp.kept, vp.full, vp.identity_fallback),
    ])
}
