//! Substructuring preconditioners for elliptic systems on structured hexahedral meshes.
//!
//! The crate builds two domain-decomposition preconditioners for PCG applied to
//! 3D linear elasticity (trilinear vector nodal elements) and positive-definite
//! Maxwell curl-curl systems (lowest-order Nédélec hex edge elements) on the unit
//! cube, partitioned into `n³` cubic subdomains of `m³` fine cells each:
//!
//! * a vertex-patch preconditioner combining the coarse-grid solve, subdomain
//!   interior solves and local interface solves on vertex-centered auxiliary
//!   cubes, glued by discrete harmonic extension, and
//! * a cheaper variant that splits each local interface problem into coarse-face
//!   and wire-band problems and solves them on algebraically graded dof subsets
//!   (fine near the interface, geometrically thinned away from it).
//!
//! Module layout:
//!
//! * [`mesh`] — structured grids, subdomain partition, jump regions
//! * [`sets`] — interface/vertex/face index-set machinery
//! * [`fem`] — element matrices, dof maps, assembly, manufactured loads,
//!   coarse-space prolongation
//! * [`sparse`] — symmetric CSR storage, envelope Cholesky, PCG, Matrix Market IO
//! * [`precond`] — the two preconditioners
//! * [`coarsen`] — graded dof selection and interface solvers
//! * [`experiments`] — batch runner reproducing the iteration-count,
//!   coarsening-accuracy and dof-reduction tables

pub mod coarsen;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod harness;
pub mod mesh;
pub mod precond;
pub mod sets;
pub mod sparse;

pub use error::Error;
