//! Sparse direct solves and the Newton iteration for the quasi-geostrophic
//! system.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use faer::prelude::*;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;

use crate::assembly::{Assembler, FreeIndex, SparseMatrix};
use crate::error::{Error, Result};
use crate::format::sci;

/// Accepted relative residual `||Ax - b|| / ||b||` of a linear solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 3;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `||Ax - b|| / ||b||`, or `||Ax||` when `b = 0`.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm(b);
    if nb > 0.0 {
        norm(&r) / nb
    } else {
        norm(&r)
    }
}

/// Sparse LU factorization of a symmetrically equilibrated matrix.
struct Factorization {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    scale: Vec<f64>,
}

impl Factorization {
    fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let mut row_max = vec![0.0f64; n];
        let mut col_max = vec![0.0f64; n];
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (&c, v) in cols.iter().zip(vals) {
                row_max[r] = row_max[r].max(v.abs());
                col_max[c] = col_max[c].max(v.abs());
            }
        }
        if let Some(pivot) = (0..n).find(|&i| row_max[i] == 0.0 || col_max[i] == 0.0) {
            return Err(Error::SingularMatrix { pivot });
        }
        let scale: Vec<f64> = row_max.iter().map(|m| 1.0 / m.sqrt()).collect();
        let mut triplets = Vec::with_capacity(a.nnz());
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push(Triplet::new(r, c, scale[r] * v * scale[c]));
            }
        }
        let m =
            SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets).map_err(|e| {
                Error::InvalidParameter(format!("sparse matrix construction failed: {e:?}"))
            })?;
        let lu = m.sp_lu().map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
            LuError::Generic(g) => Error::InvalidParameter(format!("sparse LU failed: {g:?}")),
        })?;
        Ok(Self { lu, scale })
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| self.scale[i] * b[i]);
        let y = self.lu.solve(&rhs);
        let x: Vec<f64> = (0..b.len()).map(|i| self.scale[i] * y[(i, 0)]).collect();
        if let Some(pivot) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot });
        }
        Ok(x)
    }
}

/// Solves `A x = b` by sparse LU with partial pivoting, followed by up to
/// three steps of iterative refinement.
///
/// Fails with [`Error::SingularMatrix`] when a row or column is empty or the
/// factorization breaks down, and with [`Error::InaccurateSolve`] when the
/// relative residual stays above [`RESIDUAL_TOLERANCE`].
pub fn solve_linear(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let f = Factorization::new(a)?;
    let mut x = f.solve(b)?;
    let mut res = relative_residual(a, &x, b);
    for _ in 0..REFINEMENT_STEPS {
        if res <= 1e-3 * RESIDUAL_TOLERANCE {
            break;
        }
        let r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(p, q)| p - q).collect();
        let dx = f.solve(&r)?;
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
        let cres = relative_residual(a, &candidate, b);
        if cres >= res {
            break;
        }
        x = candidate;
        res = cres;
    }
    if res.is_nan() || res > RESIDUAL_TOLERANCE {
        return Err(Error::InaccurateSolve {
            residual: res,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(x)
}

/// Whether a symmetric matrix is positive definite, by dense Cholesky.
pub fn is_positive_definite(a: &SparseMatrix) -> bool {
    dense(a).cholesky().is_some()
}

/// Smallest eigenvalue of the symmetric part of `a` (dense).
pub fn smallest_eigenvalue(a: &SparseMatrix) -> f64 {
    let d = dense(a);
    let sym = (&d + d.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for r in 0..a.nrows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            d[(r, c)] = v;
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol_res: f64,
    pub tol_inc: f64,
    pub max_it: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol_res: 1e-8,
            tol_inc: 1e-8,
            max_it: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Residual,
    Increment,
    MaxIterations,
    /// The residual grew three iterations in a row.
    Diverged,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Residual => "residual",
            StopReason::Increment => "increment",
            StopReason::MaxIterations => "max-iterations",
            StopReason::Diverged => "diverged",
        })
    }
}

/// Per-iteration history of a Newton solve; norms are Euclidean over the
/// free degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub residuals: Vec<f64>,
    pub increments: Vec<f64>,
    pub converged: bool,
    pub reason: StopReason,
}

impl NewtonReport {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    /// CSV with header `iteration,residual,increment`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "iteration,residual,increment")?;
        for (k, (r, i)) in self.residuals.iter().zip(&self.increments).enumerate() {
            writeln!(w, "{},{},{}", k + 1, sci(*r), sci(*i))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Discrete stationary quasi-geostrophic problem
/// `Re^{-1} A0 psi + N(psi) - Ro^{-1} B psi = l` on the free degrees of
/// freedom.
pub struct QgeSystem<'a> {
    assembler: &'a Assembler<'a>,
    linear: SparseMatrix,
    load: Vec<f64>,
    index: FreeIndex,
}

impl<'a> QgeSystem<'a> {
    /// `load` is the full load vector of the forcing already scaled by
    /// `Ro^{-1}`.
    pub fn new(assembler: &'a Assembler<'a>, re: f64, ro: f64, load: Vec<f64>) -> Result<Self> {
        if !(re > 0.0 && ro > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Re = {re} and Ro = {ro} must be positive"
            )));
        }
        let a0 = assembler.biharmonic();
        let b = assembler.transport();
        let linear = SparseMatrix::linear_combination(&[(1.0 / re, &a0), (-1.0 / ro, &b)])?;
        let index = FreeIndex::new(assembler.space().dofmap());
        if load.len() != index.n_full() {
            return Err(Error::DimensionMismatch {
                expected: index.n_full(),
                got: load.len(),
            });
        }
        Ok(Self {
            assembler,
            linear,
            load,
            index,
        })
    }

    pub fn index(&self) -> &FreeIndex {
        &self.index
    }

    /// `Re^{-1} A0 - Ro^{-1} B` over all degrees of freedom.
    pub fn linear_operator(&self) -> &SparseMatrix {
        &self.linear
    }

    /// Free part of `R(psi) = Re^{-1} A0 psi + N(psi) - Ro^{-1} B psi - l`.
    pub fn residual(&self, psi: &[f64]) -> Vec<f64> {
        let lin = self.linear.matvec(psi);
        let nl = self.assembler.trilinear_residual(psi);
        self.index
            .free()
            .iter()
            .map(|&d| lin[d] + nl[d] - self.load[d])
            .collect()
    }

    /// Free block of `Re^{-1} A0 + K(psi) - Ro^{-1} B`.
    pub fn jacobian(&self, psi: &[f64]) -> Result<SparseMatrix> {
        let k = self.assembler.trilinear_jacobian(psi);
        let full = SparseMatrix::linear_combination(&[(1.0, &self.linear), (1.0, &k)])?;
        Ok(self.index.reduce_matrix(&full))
    }

    /// Solution of the problem without the nonlinear term.
    pub fn initial_guess(&self) -> Result<Vec<f64>> {
        let a = self.index.reduce_matrix(&self.linear);
        let lifted = self.linear.matvec(self.index.prescribed());
        let rhs: Vec<f64> = self
            .index
            .free()
            .iter()
            .map(|&d| self.load[d] - lifted[d])
            .collect();
        Ok(self.index.expand(&solve_linear(&a, &rhs)?))
    }
}

/// Newton's method from `psi0` (a full vector satisfying the constraints).
///
/// Each iteration solves `J(psi_k) delta = -R(psi_k)`, updates, and records
/// the residual at the new iterate and the increment norm. It stops when
/// either falls to its tolerance, after `max_it` iterations, or after three
/// consecutive residual increases.
pub fn newton_solve(
    system: &QgeSystem,
    psi0: Vec<f64>,
    options: &NewtonOptions,
) -> Result<(Vec<f64>, NewtonReport)> {
    if psi0.len() != system.index.n_full() {
        return Err(Error::DimensionMismatch {
            expected: system.index.n_full(),
            got: psi0.len(),
        });
    }
    let mut psi = psi0;
    let mut residual = system.residual(&psi);
    let mut report = NewtonReport {
        residuals: Vec::new(),
        increments: Vec::new(),
        converged: false,
        reason: StopReason::MaxIterations,
    };
    let mut previous = norm(&residual);
    let mut growth = 0;
    for _ in 0..options.max_it {
        let jac = system.jacobian(&psi)?;
        let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        let delta = solve_linear(&jac, &rhs)?;
        for (&d, v) in system.index.free().iter().zip(&delta) {
            psi[d] += v;
        }
        residual = system.residual(&psi);
        let (rn, dn) = (norm(&residual), norm(&delta));
        if !rn.is_finite() {
            return Err(Error::Newton(format!(
                "non-finite residual after {} iterations",
                report.iterations() + 1
            )));
        }
        report.residuals.push(rn);
        report.increments.push(dn);
        if rn <= options.tol_res {
            report.converged = true;
            report.reason = StopReason::Residual;
            break;
        }
        if dn <= options.tol_inc {
            report.converged = true;
            report.reason = StopReason::Increment;
            break;
        }
        growth = if rn > previous { growth + 1 } else { 0 };
        previous = rn;
        if growth >= 3 {
            report.reason = StopReason::Diverged;
            break;
        }
    }
    Ok((psi, report))
}
