//! Error norms, convergence tables and sparsity statistics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::argyris::{combine, FemField, SmoothFunction, Space, N_DOFS};
use crate::assembly::{Assembler, SparseMatrix};
use crate::error::{Error, Result};
use crate::format::sci;
use crate::problems::{velocity, ProblemSpec};
use crate::quadrature::QuadratureRule;
use crate::solver::NewtonReport;

/// `(e0, e1, e2)`: the L2, H1 and H2 norms of `u - u_h`, the last two
/// summing all derivatives up to order 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
}

/// Errors of the coefficient vector `coeffs` over `space` against `exact`.
pub fn error_norms<F: SmoothFunction>(
    space: &Space,
    coeffs: &[f64],
    exact: &F,
    rule: &QuadratureRule,
) -> Result<ErrorNorms> {
    if coeffs.len() != space.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: space.n_dofs(),
            got: coeffs.len(),
        });
    }
    let asm = Assembler::new(space, rule.clone());
    let mut sums = [0.0f64; 3];
    for t in 0..space.mesh().n_triangles() {
        let tab = asm.tables(t);
        let mut local = [0.0; N_DOFS];
        for (l, &d) in local.iter_mut().zip(space.element_dofs(t)) {
            *l = coeffs[d];
        }
        for ((basis, w), p) in tab.basis.iter().zip(&tab.weights).zip(asm.points(t)) {
            let uh = combine(&local, basis);
            let u = exact.derivs(p[0], p[1]);
            let e: [f64; 6] = std::array::from_fn(|k| u[k] - uh[k]);
            sums[0] += w * e[0] * e[0];
            sums[1] += w * (e[1] * e[1] + e[2] * e[2]);
            sums[2] += w * (e[3] * e[3] + e[4] * e[4] + e[5] * e[5]);
        }
    }
    Ok(ErrorNorms {
        e0: sums[0].sqrt(),
        e1: (sums[0] + sums[1]).sqrt(),
        e2: (sums[0] + sums[1] + sums[2]).sqrt(),
    })
}

/// Same as [`error_norms`] for a [`FemField`].
pub fn field_error_norms<F: SmoothFunction>(
    field: &FemField,
    exact: &F,
    rule: &QuadratureRule,
) -> Result<ErrorNorms> {
    error_norms(field.space(), field.coefficients(), exact, rule)
}

/// `log(E_prev / E_cur) / log(h_prev / h_cur)`, or `None` when an input is
/// not positive or `h` did not decrease.
pub fn convergence_rate(e_prev: f64, e_cur: f64, h_prev: f64, h_cur: f64) -> Option<f64> {
    if e_prev > 0.0 && e_cur > 0.0 && h_cur > 0.0 && h_prev > h_cur {
        Some((e_prev / e_cur).ln() / (h_prev / h_cur).ln())
    } else {
        None
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub h: f64,
    pub dofs: usize,
    pub errors: ErrorNorms,
    /// Rates against the previous successful row with larger `h`.
    pub rates: Option<[Option<f64>; 3]>,
    pub newton: Option<NewtonReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyRow {
    Solved(ErrorRecord),
    Failed {
        h: f64,
        dofs: usize,
        message: String,
    },
}

impl StudyRow {
    pub fn h(&self) -> f64 {
        match self {
            StudyRow::Solved(r) => r.h,
            StudyRow::Failed { h, .. } => *h,
        }
    }

    pub fn record(&self) -> Option<&ErrorRecord> {
        match self {
            StudyRow::Solved(r) => Some(r),
            StudyRow::Failed { .. } => None,
        }
    }
}

/// A convergence study over a mesh sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub model: String,
    pub solution: String,
    pub rows: Vec<StudyRow>,
}

impl ErrorTable {
    pub fn all_solved(&self) -> bool {
        self.rows.iter().all(|r| matches!(r, StudyRow::Solved(_)))
    }

    pub fn last(&self) -> Option<&ErrorRecord> {
        self.rows.last().and_then(StudyRow::record)
    }

    pub fn record_at(&self, h: f64) -> Option<&ErrorRecord> {
        self.rows
            .iter()
            .filter_map(StudyRow::record)
            .find(|r| (r.h - h).abs() <= 1e-12 * h)
    }

    /// CSV with header `h,dofs,e0,rate0,e1,rate1,e2,rate2`. Rates of the first
    /// row are empty; failed rows carry `failed` in the `e0` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,dofs,e0,rate0,e1,rate1,e2,rate2\n");
        let cell = |r: Option<f64>| r.map(sci).unwrap_or_default();
        for row in &self.rows {
            match row {
                StudyRow::Solved(r) => {
                    let rates = r.rates.unwrap_or([None; 3]);
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        sci(r.h),
                        r.dofs,
                        sci(r.errors.e0),
                        cell(rates[0]),
                        sci(r.errors.e1),
                        cell(rates[1]),
                        sci(r.errors.e2),
                        cell(rates[2]),
                    ));
                }
                StudyRow::Failed { h, dofs, .. } => {
                    out.push_str(&format!("{},{},failed,,,,,\n", sci(*h), dofs));
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Solves `problem` on each `h` (which must decrease) and tabulates errors.
/// A failing row is recorded and the study continues.
pub fn run_study(problem: &ProblemSpec, hs: &[f64]) -> Result<ErrorTable> {
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "mesh sizes must be strictly decreasing".into(),
        ));
    }
    let rule = crate::quadrature::triangle_rule(problem.quad_degree)?;
    let (lx, ly) = problem.solution.domain();
    let mut rows = Vec::with_capacity(hs.len());
    let mut previous: Option<ErrorRecord> = None;
    for &h in hs {
        let mesh = crate::mesh::build_structured_mesh(lx, ly, h)?;
        let dofs = 6 * mesh.n_vertices() + mesh.n_edges();
        let outcome = problem.solve(h).and_then(|sol| {
            if let Some(report) = &sol.newton {
                if !report.converged {
                    return Err(Error::Newton(format!(
                        "stopped ({}) after {} iterations with residual {:e}",
                        report.reason,
                        report.iterations(),
                        report.final_residual().unwrap_or(f64::NAN)
                    )));
                }
            }
            let errors = error_norms(&sol.space, &sol.coefficients, &problem.solution, &rule)?;
            Ok((errors, sol.newton))
        });
        match outcome {
            Ok((errors, newton)) => {
                let rates = previous.as_ref().map(|p| {
                    [
                        convergence_rate(p.errors.e0, errors.e0, p.h, h),
                        convergence_rate(p.errors.e1, errors.e1, p.h, h),
                        convergence_rate(p.errors.e2, errors.e2, p.h, h),
                    ]
                });
                let record = ErrorRecord {
                    h,
                    dofs,
                    errors,
                    rates,
                    newton,
                };
                previous = Some(record.clone());
                rows.push(StudyRow::Solved(record));
            }
            Err(e) => {
                previous = None;
                rows.push(StudyRow::Failed {
                    h,
                    dofs,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(ErrorTable {
        model: problem.model.kind().to_string(),
        solution: problem.solution.id().to_string(),
        rows,
    })
}

/// Structural statistics of a sparse matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityReport {
    pub dimension: usize,
    pub nnz: usize,
    pub half_bandwidth: usize,
    /// `sum_i (i - first column of row i)` over rows with a stored entry
    /// left of the diagonal.
    pub profile: usize,
}

pub fn sparsity_report(matrix: &SparseMatrix) -> SparsityReport {
    let profile = (0..matrix.nrows())
        .map(|r| matrix.row(r).0.first().map_or(0, |&c| r.saturating_sub(c)))
        .sum();
    SparsityReport {
        dimension: matrix.nrows(),
        nnz: matrix.nnz(),
        half_bandwidth: matrix.half_bandwidth(),
        profile,
    }
}

/// `(x, y, psi, u, v)` on an `n x n` uniform grid covering the domain,
/// `x` varying fastest.
pub fn sample_grid(field: &FemField, n: usize) -> Result<Vec<[f64; 5]>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample grid needs at least one point per side".into(),
        ));
    }
    let mesh = field.space().mesh();
    let coord = |k: usize, len: f64| {
        if n == 1 {
            0.5 * len
        } else {
            len * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (coord(i, mesh.lx()), coord(j, mesh.ly()));
            let psi = field.eval(x, y)?[0];
            let (u, v) = velocity(field, x, y)?;
            out.push([x, y, psi, u, v]);
        }
    }
    Ok(out)
}

/// Writes [`sample_grid`] output as CSV with header `x,y,psi,u,v`.
pub fn write_samples(samples: &[[f64; 5]], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y,psi,u,v")?;
    for s in samples {
        let cells: Vec<String> = s.iter().map(|v| sci(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argyris::{interpolate, Derivs};
    use crate::assembly::{BoundaryMode, DofOrdering};
    use crate::mesh::build_structured_mesh;
    use crate::problems::manufactured;
    use crate::quadrature::{triangle_rule, DEFAULT_DEGREE};
    use proptest::prelude::*;

    fn space(h: f64) -> Space {
        Space::new(
            build_structured_mesh(1.0, 1.0, h).unwrap(),
            BoundaryMode::Free,
            DofOrdering::Strip,
        )
        .unwrap()
    }

    #[test]
    fn rate_examples() {
        // tabulated rates come from unrounded errors; four printed digits
        // leave about 1e-3 of slack
        assert!(
            (convergence_rate(6.377e-5, 1.085e-6, 0.125, 0.0625).unwrap() - 5.878).abs() < 2e-3
        );
        assert!((convergence_rate(0.01018, 0.0004461, 0.5, 0.25).unwrap() - 4.512).abs() < 2e-3);
        assert!((convergence_rate(2.0, 1.0, 0.5, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(convergence_rate(0.0, 1.0, 0.5, 0.25), None);
    }

    proptest! {
        #[test]
        fn rate_is_scale_invariant(a in 1e-12f64..1.0, b in 1e-12f64..1.0, c in 1e-6f64..1e6) {
            let r1 = convergence_rate(a, b, 0.5, 0.25).unwrap();
            let r2 = convergence_rate(c * a, c * b, 0.5, 0.25).unwrap();
            prop_assert!((r1 - r2).abs() <= 1e-9 * r1.abs().max(1.0));
        }
    }

    #[test]
    fn quintic_interpolant_has_no_error() {
        let s = space(0.25);
        let f = |x: f64, y: f64| -> Derivs {
            [
                x.powi(5) - 2.0 * x.powi(3) * y * y,
                5.0 * x.powi(4) - 6.0 * x * x * y * y,
                -4.0 * x.powi(3) * y,
                20.0 * x.powi(3) - 12.0 * x * y * y,
                -12.0 * x * x * y,
                -4.0 * x.powi(3),
            ]
        };
        let u = interpolate(&s, &f);
        let e = field_error_norms(&u, &f, &triangle_rule(DEFAULT_DEGREE).unwrap()).unwrap();
        assert!(e.e2 <= 1e-9, "{e:?}");
    }

    #[test]
    fn zero_field_against_bubble() {
        let s = space(0.25);
        let exact = manufactured("biharmonic-square", None).unwrap();
        let e = field_error_norms(
            &s.zero_field(),
            &exact,
            &triangle_rule(DEFAULT_DEGREE).unwrap(),
        )
        .unwrap();
        assert!((e.e0 - 1.0 / 630.0).abs() < 1e-12, "{}", e.e0);
        assert!(e.e0 <= e.e1 && e.e1 <= e.e2);
    }

    #[test]
    fn quadrature_sufficiency() {
        let s = space(0.125);
        let exact = manufactured("biharmonic-square", None).unwrap();
        let u = interpolate(&s, &|x: f64, y: f64| {
            let d = exact.derivs(x, y);
            [0.9 * d[0], d[1], d[2], d[3], d[4], d[5]]
        });
        let a = field_error_norms(&u, &exact, &triangle_rule(12).unwrap()).unwrap();
        let b = field_error_norms(&u, &exact, &triangle_rule(14).unwrap()).unwrap();
        for (x, y) in [(a.e0, b.e0), (a.e1, b.e1), (a.e2, b.e2)] {
            assert!((x - y).abs() <= 1e-8 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn sparsity_of_small_matrices() {
        let r = sparsity_report(&SparseMatrix::identity(5));
        assert_eq!((r.nnz, r.half_bandwidth, r.profile), (5, 0, 0));
        let mut t = Vec::new();
        for i in 0..4 {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let r = sparsity_report(&SparseMatrix::from_triplets(4, 4, &t));
        assert_eq!((r.nnz, r.half_bandwidth, r.profile), (10, 1, 3));
    }

    #[test]
    fn sampling_zero_field() {
        let s = space(0.5);
        let rows = sample_grid(&s.zero_field(), 2).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r[2] == 0.0));
        assert_eq!(rows[3][0], 1.0);
    }

    #[test]
    fn csv_layout() {
        let rec = |h: f64, e: f64, rates| {
            StudyRow::Solved(ErrorRecord {
                h,
                dofs: 70,
                errors: ErrorNorms {
                    e0: e,
                    e1: e,
                    e2: e,
                },
                rates,
                newton: None,
            })
        };
        let t = ErrorTable {
            model: "biharmonic".into(),
            solution: "biharmonic-square".into(),
            rows: vec![
                rec(0.5, 1e-3, None),
                rec(0.25, 5e-4, Some([Some(1.0), Some(1.0), Some(1.0)])),
                StudyRow::Failed {
                    h: 0.125,
                    dofs: 694,
                    message: "x".into(),
                },
            ],
        };
        let csv = t.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "h,dofs,e0,rate0,e1,rate1,e2,rate2");
        assert_eq!(
            lines[1],
            "5.000000e-01,70,1.000000e-03,,1.000000e-03,,1.000000e-03,"
        );
        assert_eq!(
            lines[2],
            "2.500000e-01,70,5.000000e-04,1.000000e+00,5.000000e-04,1.000000e+00,5.000000e-04,1.000000e+00"
        );
        assert_eq!(lines[3], "1.250000e-01,694,failed,,,,,");
        assert!(!t.all_solved());
    }
}
