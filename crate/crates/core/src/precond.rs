//! The two substructuring preconditioners: vertex-patch interface solvers
//! with discrete harmonic gluing, and the cheaper variant with coarsened
//! face / wire-band interface solvers.

use crate::coarsen::{
    face_region_spec, graded_face_prolongation, graded_vertex_prolongation, vertex_region_spec,
    Grading, RegionProlongation,
};
use crate::error::Error;
use crate::fem::{coarse_prolongation, DofMap};
use crate::mesh::StructuredGrid;
use crate::sets::DecompositionSets;
use crate::sparse::{
    extract_principal_submatrix, triple_product, Factorization, SparseRect, SparseSpd,
};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

/// Applicable symmetric operator `g → B⁻¹ g`.
pub trait Preconditioner: Sync {
    fn apply(&self, g: &[f64]) -> Vec<f64>;
    fn dim(&self) -> usize;
}

/// Identity (no preconditioning).
pub struct IdentityPreconditioner(pub usize);

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        g.to_vec()
    }
    fn dim(&self) -> usize {
        self.0
    }
}

/// Exact inverse through a sparse factorization (testing aid).
pub struct ExactInverse(pub Factorization);

impl Preconditioner for ExactInverse {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.0.solve(g)
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Interface values supported on Γ.
#[derive(Debug, Clone)]
pub struct TraceVector {
    values: Vec<f64>,
}

impl TraceVector {
    /// Restricts a free-dof vector to Γ (zeroing everything else).
    pub fn from_full(sets: &DecompositionSets, x: &[f64]) -> Self {
        let mut values = vec![0.0; x.len()];
        for &g in &sets.gamma {
            values[g] = x[g];
        }
        TraceVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Content-addressed factorization cache: local blocks that assemble to the
/// same matrix (interior subdomains, translated vertex patches) share one
/// factorization.
#[derive(Default)]
pub struct SolverCache {
    map: HashMap<MatrixKey, Arc<Factorization>>,
}

#[derive(PartialEq, Eq, Hash)]
struct MatrixKey {
    dim: usize,
    row_ptr: Vec<usize>,
    col_ind: Vec<u32>,
    bits: Vec<u64>,
}

fn matrix_key(a: &SparseSpd) -> MatrixKey {
    MatrixKey {
        dim: a.dim,
        row_ptr: a.row_ptr.clone(),
        col_ind: a.col_ind.clone(),
        bits: a.values.iter().map(|v| v.to_bits()).collect(),
    }
}

impl SolverCache {
    /// Factorizes all distinct matrices (in parallel) and returns the shared
    /// handles in input order.
    pub fn factorize_all(
        &mut self,
        mats: Vec<SparseSpd>,
    ) -> Result<Vec<Arc<Factorization>>, Error> {
        let keys: Vec<MatrixKey> = mats.iter().map(matrix_key).collect();
        let mut fresh: Vec<(usize, &SparseSpd)> = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            if !self.map.contains_key(k) && !fresh.iter().any(|&(j, _)| keys[j] == *k) {
                fresh.push((i, &mats[i]));
            }
        }
        let done: Vec<(usize, Result<Factorization, Error>)> = fresh
            .par_iter()
            .map(|&(i, m)| (i, Factorization::new(m)))
            .collect();
        for (i, r) in done {
            let f = Arc::new(r?);
            self.map.insert(matrix_key(&mats[i]), f);
        }
        Ok(keys.iter().map(|k| Arc::clone(&self.map[k])).collect())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// One subdomain interior solve.
pub struct SubdomainSolver {
    pub subdomain: usize,
    /// Sorted free dofs strictly inside the subdomain.
    pub dofs: Vec<usize>,
    pub fact: Arc<Factorization>,
}

/// One vertex-patch solve of the first preconditioner.
pub struct VertexSolver {
    pub vertex: usize,
    /// Sorted free dofs of the patch.
    pub dofs: Vec<usize>,
    pub fact: Arc<Factorization>,
    /// (position in `dofs`, global free dof) of the patch's interface dofs.
    pub trace: Vec<(usize, usize)>,
}

/// Coarse-space solve shared by both preconditioners.
pub struct CoarseSolver {
    pub p: SparseRect,
    pub fact: Factorization,
}

impl CoarseSolver {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let gc = self.p.mul_transpose_vec(g);
        let xc = self.fact.solve(&gc);
        self.p.mul_vec(&xc)
    }
}

/// The vertex-patch preconditioner: coarse solve + subdomain interior solves
/// + one local solve per coarse vertex on the patch of all free dofs within
/// the closed side-d cube, glued by discrete harmonic extension of the summed
/// interface trace.
pub struct PreconditionerB1 {
    a: Arc<SparseSpd>,
    pub coarse: CoarseSolver,
    pub subdomains: Vec<SubdomainSolver>,
    pub vertices: Vec<VertexSolver>,
}

/// Builds the first preconditioner. Every local block is factorized once;
/// translated copies share factorizations through the content cache.
pub fn setup_b1(
    a: Arc<SparseSpd>,
    grid: &StructuredGrid,
    dofmap: &DofMap,
    sets: &DecompositionSets,
) -> Result<PreconditionerB1, Error> {
    let mut cache = SolverCache::default();
    let coarse = setup_coarse(&a, grid, dofmap)?;
    let subdomains = setup_subdomains(&a, sets, &mut cache)?;

    let mut gamma_mark = vec![false; a.dim];
    for &g in &sets.gamma {
        gamma_mark[g] = true;
    }
    let mut vertex_ids = Vec::new();
    let mut mats = Vec::new();
    for v in 0..sets.vertex_patch.len() {
        if sets.gamma_v_half[v].is_empty() {
            continue;
        }
        vertex_ids.push(v);
        mats.push(extract_principal_submatrix(&a, &sets.vertex_patch[v])?);
    }
    let facts = cache.factorize_all(mats)?;
    let vertices = vertex_ids
        .into_iter()
        .zip(facts)
        .map(|(v, fact)| {
            let dofs = sets.vertex_patch[v].clone();
            let trace = dofs
                .iter()
                .enumerate()
                .filter(|(_, &g)| gamma_mark[g])
                .map(|(i, &g)| (i, g))
                .collect();
            VertexSolver { vertex: v, dofs, fact, trace }
        })
        .collect();

    Ok(PreconditionerB1 { a, coarse, subdomains, vertices })
}

fn setup_coarse(
    a: &SparseSpd,
    grid: &StructuredGrid,
    dofmap: &DofMap,
) -> Result<CoarseSolver, Error> {
    let (p, _coarse_map) = coarse_prolongation(grid, dofmap);
    let ad = triple_product(&p, a)?;
    Ok(CoarseSolver { p, fact: Factorization::new(&ad)? })
}

fn setup_subdomains(
    a: &SparseSpd,
    sets: &DecompositionSets,
    cache: &mut SolverCache,
) -> Result<Vec<SubdomainSolver>, Error> {
    let mut ids = Vec::new();
    let mut mats = Vec::new();
    for (k, dofs) in sets.subdomain_interior.iter().enumerate() {
        if dofs.is_empty() {
            continue;
        }
        ids.push(k);
        mats.push(extract_principal_submatrix(a, dofs)?);
    }
    let facts = cache.factorize_all(mats)?;
    Ok(ids
        .into_iter()
        .zip(facts)
        .map(|(k, fact)| SubdomainSolver {
            subdomain: k,
            dofs: sets.subdomain_interior[k].clone(),
            fact,
        })
        .collect())
}

fn gather(x: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| x[i]).collect()
}

/// Interior solves `u_k = A_kk⁻¹ g|_k`, scattered into a full-length vector.
fn subdomain_solves(subs: &[SubdomainSolver], g: &[f64], dim: usize) -> Vec<f64> {
    let sols: Vec<Vec<f64>> = subs
        .par_iter()
        .map(|s| s.fact.solve(&gather(g, &s.dofs)))
        .collect();
    let mut u = vec![0.0; dim];
    for (s, sol) in subs.iter().zip(sols) {
        for (&d, v) in s.dofs.iter().zip(sol) {
            u[d] = v;
        }
    }
    u
}

/// Discrete A-harmonic extension of interface values into one subdomain:
/// `x_int = -A_kk⁻¹ (A t)|_k` for the trace vector `t`.
pub fn harmonic_extension(
    a: &SparseSpd,
    sub: &SubdomainSolver,
    trace: &TraceVector,
) -> Vec<f64> {
    let s = a.mul_vec_alloc(trace.values());
    let mut rhs = gather(&s, &sub.dofs);
    for v in rhs.iter_mut() {
        *v = -*v;
    }
    sub.fact.solve(&rhs)
}

/// Harmonic extension of a trace into all subdomain interiors at once;
/// returns the full vector equal to the trace on Γ.
fn harmonic_extension_all(
    a: &SparseSpd,
    subs: &[SubdomainSolver],
    trace: &[f64],
) -> Vec<f64> {
    let s = a.mul_vec_alloc(trace);
    let sols: Vec<Vec<f64>> = subs
        .par_iter()
        .map(|sub| {
            let mut rhs = gather(&s, &sub.dofs);
            for v in rhs.iter_mut() {
                *v = -*v;
            }
            sub.fact.solve(&rhs)
        })
        .collect();
    let mut u = trace.to_vec();
    for (sub, sol) in subs.iter().zip(sols) {
        for (&d, v) in sub.dofs.iter().zip(sol) {
            u[d] = v;
        }
    }
    u
}

impl PreconditionerB1 {
    /// Applies the preconditioner with selected parts; the subdomain solves
    /// and the harmonic gluing always run. Diagnostic surface used by the
    /// consistency tests.
    pub fn apply_with_parts(&self, g: &[f64], use_coarse: bool, use_vertices: bool) -> Vec<f64> {
        let dim = self.a.dim;
        assert_eq!(g.len(), dim);

        let u_loc = subdomain_solves(&self.subdomains, g, dim);

        let mut u = if use_coarse { self.coarse.apply(g) } else { vec![0.0; dim] };

        // residual after the interior solves
        let au = self.a.mul_vec_alloc(&u_loc);
        let r: Vec<f64> = g.iter().zip(&au).map(|(gi, ai)| gi - ai).collect();

        // vertex-patch solves; only the interface traces are kept
        let mut t = vec![0.0; dim];
        if use_vertices {
            let traces: Vec<Vec<(usize, f64)>> = self
                .vertices
                .par_iter()
                .map(|vs| {
                    let y = vs.fact.solve(&gather(&r, &vs.dofs));
                    vs.trace.iter().map(|&(loc, glob)| (glob, y[loc])).collect()
                })
                .collect();
            for contrib in traces {
                for (glob, val) in contrib {
                    t[glob] += val;
                }
            }
        }

        let u_perp = harmonic_extension_all(&self.a, &self.subdomains, &t);
        for i in 0..dim {
            u[i] += u_loc[i] + u_perp[i];
        }
        u
    }

    pub fn matrix(&self) -> &SparseSpd {
        &self.a
    }
}

impl Preconditioner for PreconditionerB1 {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.apply_with_parts(g, true, true)
    }
    fn dim(&self) -> usize {
        self.a.dim
    }
}

/// How the local interface systems of the second preconditioner are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceMode {
    /// Graded coarsening of the region interiors.
    Graded,
    /// Keep-all coarsening (prolongation is the identity).
    IdentityCoarsening,
    /// Exact local interface solves on the full region (reference path).
    Exact,
}

/// A coarsened (or exact) local interface solve: the block system over kept
/// region unknowns whose interface block equals the corresponding principal
/// submatrix of A. Right sides are supported on the interface; only the
/// interface part of the solution is returned.
pub struct InterfaceSolver {
    /// Sorted global free interface dofs (face dofs or wire-band dofs).
    pub interface_dofs: Vec<usize>,
    /// Position of each interface dof inside the kept system.
    pub interface_local: Vec<usize>,
    pub fact: Arc<Factorization>,
    pub kept: usize,
    pub full: usize,
    pub identity_fallback: bool,
}

impl InterfaceSolver {
    /// Solves the coarsened block system for a right side on the interface
    /// dofs and returns the interface portion of the solution.
    pub fn solve_interface(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.interface_dofs.len());
        let mut rhs = vec![0.0; self.fact.dim()];
        for (i, &loc) in self.interface_local.iter().enumerate() {
            rhs[loc] = b[i];
        }
        let y = self.fact.solve(&rhs);
        self.interface_local.iter().map(|&loc| y[loc]).collect()
    }
}

/// The coarsened-interface preconditioner: coarse + subdomain solves as in
/// the first preconditioner, then one coarsened face system per interior
/// coarse face and one coarsened wire-band system per coarse vertex, glued by
/// harmonic extension (reusing the interior factorizations).
pub struct PreconditionerB2 {
    a: Arc<SparseSpd>,
    pub coarse: CoarseSolver,
    pub subdomains: Vec<SubdomainSolver>,
    pub faces: Vec<InterfaceSolver>,
    pub vertices: Vec<InterfaceSolver>,
}

/// Builds the second preconditioner.
pub fn setup_b2(
    a: Arc<SparseSpd>,
    grid: &StructuredGrid,
    dofmap: &DofMap,
    sets: &DecompositionSets,
    mode: InterfaceMode,
) -> Result<PreconditionerB2, Error> {
    let mut cache = SolverCache::default();
    let coarse = setup_coarse(&a, grid, dofmap)?;
    let subdomains = setup_subdomains(&a, sets, &mut cache)?;

    let grading = match mode {
        InterfaceMode::Graded => Grading::Geometric,
        _ => Grading::Identity,
    };

    let mut face_meta = Vec::new();
    let mut face_mats = Vec::new();
    for fi in 0..sets.faces.len() {
        if sets.faces[fi].dofs.is_empty() {
            continue;
        }
        let (mat, meta) = match mode {
            InterfaceMode::Exact => {
                let spec = face_region_spec(grid, sets, fi);
                exact_interface_system(&a, spec.region_dofs, spec.interface_dofs)?
            }
            _ => {
                let spec = face_region_spec(grid, sets, fi);
                let rp = graded_face_prolongation(dofmap, &spec, grading);
                coarsened_interface_system(&a, rp)?
            }
        };
        face_mats.push(mat);
        face_meta.push(meta);
    }
    let face_facts = cache.factorize_all(face_mats)?;
    let faces = face_meta
        .into_iter()
        .zip(face_facts)
        .map(|(meta, fact)| meta.into_solver(fact))
        .collect();

    let mut vert_meta = Vec::new();
    let mut vert_mats = Vec::new();
    for v in 0..sets.w_v_half.len() {
        if sets.w_v_half[v].is_empty() {
            continue;
        }
        let (mat, meta) = match mode {
            InterfaceMode::Exact => {
                let spec = vertex_region_spec(grid, sets, v);
                exact_interface_system(&a, spec.region_dofs, spec.interface_dofs)?
            }
            _ => {
                let spec = vertex_region_spec(grid, sets, v);
                let rp = graded_vertex_prolongation(dofmap, &spec, grading);
                coarsened_interface_system(&a, rp)?
            }
        };
        vert_mats.push(mat);
        vert_meta.push(meta);
    }
    let vert_facts = cache.factorize_all(vert_mats)?;
    let vertices = vert_meta
        .into_iter()
        .zip(vert_facts)
        .map(|(meta, fact)| meta.into_solver(fact))
        .collect();

    Ok(PreconditionerB2 { a, coarse, subdomains, faces, vertices })
}

struct SolverMeta {
    interface_dofs: Vec<usize>,
    interface_local: Vec<usize>,
    kept: usize,
    full: usize,
    identity_fallback: bool,
}

impl SolverMeta {
    fn into_solver(self, fact: Arc<Factorization>) -> InterfaceSolver {
        InterfaceSolver {
            interface_dofs: self.interface_dofs,
            interface_local: self.interface_local,
            fact,
            kept: self.kept,
            full: self.full,
            identity_fallback: self.identity_fallback,
        }
    }
}

/// Exact local interface system: the principal submatrix of A on the region.
fn exact_interface_system(
    a: &SparseSpd,
    region_dofs: Vec<usize>,
    interface_dofs: Vec<usize>,
) -> Result<(SparseSpd, SolverMeta), Error> {
    let mat = extract_principal_submatrix(a, &region_dofs)?;
    let interface_local = interface_dofs
        .iter()
        .map(|d| region_dofs.binary_search(d).expect("interface dof outside region"))
        .collect();
    let n = region_dofs.len();
    Ok((
        mat,
        SolverMeta {
            interface_dofs,
            interface_local,
            kept: n,
            full: n,
            identity_fallback: false,
        },
    ))
}

/// Coarsened local interface system `Pᵀ S P` from a region prolongation.
fn coarsened_interface_system(
    a: &SparseSpd,
    rp: RegionProlongation,
) -> Result<(SparseSpd, SolverMeta), Error> {
    let local = extract_principal_submatrix(a, &rp.region_dofs)?;
    let mat = triple_product(&rp.p, &local)?;
    Ok((
        mat,
        SolverMeta {
            interface_dofs: rp.interface_dofs,
            interface_local: rp.interface_cols,
            kept: rp.kept,
            full: rp.full,
            identity_fallback: rp.identity_fallback,
        },
    ))
}

impl PreconditionerB2 {
    pub fn matrix(&self) -> &SparseSpd {
        &self.a
    }

    /// Kept/full interface-system sizes (faces then vertices), for reports.
    pub fn coarsening_sizes(&self) -> Vec<(String, usize, usize)> {
        let mut out = Vec::new();
        for f in &self.faces {
            out.push(("face".to_string(), f.kept, f.full));
        }
        for v in &self.vertices {
            out.push(("vertex".to_string(), v.kept, v.full));
        }
        out
    }
}

impl Preconditioner for PreconditionerB2 {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let dim = self.a.dim;
        assert_eq!(g.len(), dim);

        let u_loc = subdomain_solves(&self.subdomains, g, dim);
        let mut u = self.coarse.apply(g);

        let au = self.a.mul_vec_alloc(&u_loc);
        let r: Vec<f64> = g.iter().zip(&au).map(|(gi, ai)| gi - ai).collect();

        // face and wire-band interface solves on the residual
        let mut t = vec![0.0; dim];
        let face_sols: Vec<Vec<f64>> = self
            .faces
            .par_iter()
            .map(|fs| fs.solve_interface(&gather(&r, &fs.interface_dofs)))
            .collect();
        for (fs, sol) in self.faces.iter().zip(face_sols) {
            for (&d, v) in fs.interface_dofs.iter().zip(sol) {
                t[d] += v;
            }
        }
        let vert_sols: Vec<Vec<f64>> = self
            .vertices
            .par_iter()
            .map(|vs| vs.solve_interface(&gather(&r, &vs.interface_dofs)))
            .collect();
        for (vs, sol) in self.vertices.iter().zip(vert_sols) {
            for (&d, v) in vs.interface_dofs.iter().zip(sol) {
                t[d] += v;
            }
        }

        let u_perp = harmonic_extension_all(&self.a, &self.subdomains, &t);
        for i in 0..dim {
            u[i] += u_loc[i] + u_perp[i];
        }
        u
    }
    fn dim(&self) -> usize {
        self.a.dim
    }
}
