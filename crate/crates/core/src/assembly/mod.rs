//! Global numbering, sparse storage, operator assembly and constraint
//! elimination.

pub mod constraints;
pub mod dofmap;
pub mod forms;
pub mod sparse;

pub use constraints::{apply_constraints, FreeIndex, ReducedSystem};
pub use dofmap::{build_dofmap, BoundaryMode, DofMap, DofOrdering};
pub use forms::{
    assemble_biharmonic, assemble_laplace, assemble_load, assemble_transport, trilinear_jacobian,
    trilinear_residual, Assembler, ElementTables,
};
pub use sparse::SparseMatrix;
