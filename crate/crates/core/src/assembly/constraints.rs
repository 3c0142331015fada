//! Elimination of constrained degrees of freedom.

use super::dofmap::DofMap;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Map between full and free-only vectors, with the prescribed values of
/// the constrained entries.
#[derive(Debug, Clone)]
pub struct FreeIndex {
    free: Vec<usize>,
    index: Vec<Option<usize>>,
    prescribed: Vec<f64>,
}

impl FreeIndex {
    pub fn new(dofmap: &DofMap) -> Self {
        let free = dofmap.free_dofs();
        let mut index = vec![None; dofmap.n_dofs()];
        for (k, &d) in free.iter().enumerate() {
            index[d] = Some(k);
        }
        let prescribed = (0..dofmap.n_dofs())
            .map(|d| {
                if dofmap.is_constrained(d) {
                    dofmap.prescribed()[d]
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            free,
            index,
            prescribed,
        }
    }

    pub fn n_full(&self) -> usize {
        self.index.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Global indices of the free degrees of freedom, ascending.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Position of a global degree of freedom among the free ones.
    pub fn position(&self, dof: usize) -> Option<usize> {
        self.index[dof]
    }

    /// Full vector with prescribed values on constrained entries.
    pub fn prescribed(&self) -> &[f64] {
        &self.prescribed
    }

    /// Free entries of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    /// Full vector from free values plus the prescribed constrained values.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = self.prescribed.clone();
        for (&d, v) in self.free.iter().zip(reduced) {
            out[d] = *v;
        }
        out
    }

    /// Free-by-free block of a full matrix.
    pub fn reduce_matrix(&self, a: &SparseMatrix) -> SparseMatrix {
        let rows = self
            .free
            .iter()
            .map(|&r| {
                let (cols, _) = a.row(r);
                cols.iter().filter_map(|&c| self.index[c]).collect()
            })
            .collect();
        let mut out = SparseMatrix::from_pattern(self.n_free(), self.n_free(), rows);
        for (k, &r) in self.free.iter().enumerate() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(j) = self.index[c] {
                    out.add(k, j, v);
                }
            }
        }
        out.symmetric = a.symmetric;
        out
    }
}

/// A system restricted to the free degrees of freedom.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub index: FreeIndex,
}

impl ReducedSystem {
    /// Full solution vector from a reduced solution.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.index.expand(reduced)
    }
}

/// Deletes constrained rows and columns of `A x = b`, moving the columns
/// multiplied by prescribed values to the right-hand side.
pub fn apply_constraints(
    matrix: &SparseMatrix,
    rhs: &[f64],
    dofmap: &DofMap,
) -> Result<ReducedSystem> {
    let n = dofmap.n_dofs();
    for got in [matrix.nrows(), matrix.ncols(), rhs.len()] {
        if got != n {
            return Err(Error::DimensionMismatch { expected: n, got });
        }
    }
    let index = FreeIndex::new(dofmap);
    let lifted = matrix.matvec(index.prescribed());
    let rhs = index.free.iter().map(|&d| rhs[d] - lifted[d]).collect();
    Ok(ReducedSystem {
        matrix: index.reduce_matrix(matrix),
        rhs,
        index,
    })
}
